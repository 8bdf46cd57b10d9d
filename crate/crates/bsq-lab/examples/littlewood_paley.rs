//! Dyadic cutoffs and the para-product split of a product.

use bsq_lab::ensemble::{self, Band};
use bsq_lab::littlewood_paley::{paraproduct, phi_base, phi_hash, remainder, shell_range};
use bsq_lab::{Grid, Norm};
use std::f64::consts::PI;

fn main() -> bsq_lab::Result<()> {
    for x in [0.0, 1.0, 1.25, 1.3, 1.375, 1.45, 1.5] {
        println!("phi({x:5}) = {:.6}", phi_base(x));
    }
    println!("phi hash: {}", phi_hash());

    let grid = Grid::new(1024, 16.0 * PI)?;
    println!("shells on this grid: {:?}", shell_range(&grid));

    let mut rng = ensemble::rng(1);
    let f = ensemble::random_real(&grid, &mut rng, Band::full(&grid), 1.0).spectrum();
    let g = ensemble::random_real(&grid, &mut rng, Band::full(&grid), 1.0).spectrum();

    let tfg = paraproduct(&f, &g)?;
    let tgf = paraproduct(&g, &f)?;
    let r = remainder(&f, &g)?;
    let fg = f.product(&g);
    for (name, part) in [("T_f g", &tfg), ("T_g f", &tgf), ("R(f,g)", &r)] {
        println!("{name:7} |.|_L2 = {:.4e}", part.norm(Norm::L2));
    }
    let sum = &(&tfg + &tgf) + &r;
    println!(
        "relative defect of T_f g + T_g f + R(f,g) = fg: {:.2e}",
        (&sum - &fg).norm(Norm::L2) / fg.norm(Norm::L2)
    );
    Ok(())
}
