//! Grids, fields, multipliers and norms on a small periodic domain.

use bsq_lab::{FourierMultiplier, Grid, Norm, RealField};
use std::f64::consts::PI;

fn main() -> bsq_lab::Result<()> {
    let grid = Grid::new(64, PI)?;
    let u = RealField::from_fn(&grid, |x| x.cos());

    println!(
        "L2      = {:.15} (sqrt(pi)   = {:.15})",
        u.norm(Norm::L2),
        PI.sqrt()
    );
    println!(
        "H1      = {:.15} (sqrt(2 pi) = {:.15})",
        u.norm(Norm::Sobolev(1.0)),
        (2.0 * PI).sqrt()
    );
    println!("sup     = {:.15}", u.norm(Norm::Linf));

    // ∂x cos = -sin and, with H = ∂x/|∂x|, H cos = -sin as well.
    let du = u.apply(&FourierMultiplier::derivative(&grid, 1))?;
    let hu = u.apply(&FourierMultiplier::hilbert(&grid))?;
    let sin = RealField::from_fn(&grid, |x| x.sin());
    println!("|du + sin| = {:.2e}", du.add(&sin).norm(Norm::Linf));
    println!("|Hu + sin| = {:.2e}", hu.add(&sin).norm(Norm::Linf));

    // Products are exact on the band; the two-thirds rule removes the rest.
    let uh = u.spectrum();
    let sq = uh.product(&uh).real_part();
    let expect = RealField::from_fn(&grid, |x| x.cos().powi(2));
    println!("|u*u - cos^2| = {:.2e}", sq.sub(&expect).norm(Norm::Linf));
    Ok(())
}
