//! Good unknowns, their inversion, symbols and the grouped right-hand side.

use bsq_lab::ensemble;
use bsq_lab::good_unknowns::{
    decomposition_residual, good_forward, good_inverse, measured_c_b, rhs_terms, symbol_eval,
    Grouping, StateZV, SymbolFamily, SymbolSpec,
};
use bsq_lab::phases::Sign;
use bsq_lab::{Grid, Model, Norm};
use std::f64::consts::PI;

fn main() -> bsq_lab::Result<()> {
    let s = SymbolSpec::new(
        SymbolFamily::S,
        Sign::Plus,
        Sign::Plus,
        4,
        Model::Unit,
        None,
    )?;
    println!("s_(+,+)(1.001, 1) = {:?}", symbol_eval(&s, 1.001, 1.0));

    let model = Model::Unit;
    let c_b = measured_c_b(model);
    println!("measured C_B = {c_b:.4}");

    // Three-band data so that every para-product regime is populated.
    let grid = Grid::new(512, 2.0 * PI)?;
    let mut rng = ensemble::rng(3);
    let amp = 0.3 / c_b;
    let state = StateZV::new(
        ensemble::multiscale_real(&grid, &mut rng, amp),
        ensemble::multiscale_real(&grid, &mut rng, amp),
        model,
    )?;

    let good = good_forward(&state);
    let v_back = good_inverse(&good.zeta, &good.u, model)?;
    println!(
        "|B| = {:.3e}, inversion error = {:.2e}",
        good.b_field.norm(Norm::L2),
        v_back.sub(state.v()).norm(Norm::L2) / state.v().norm(Norm::L2)
    );

    for t in rhs_terms(&state, Grouping::SevenTerm)? {
        println!("  {:2} |.|_L2 = {:.4e}", t.name, t.field.norm(Norm::L2));
    }
    for g in [Grouping::Raw, Grouping::SevenTerm, Grouping::FourTerm] {
        println!(
            "residual {:10} = {:.2e}",
            g.label(),
            decomposition_residual(&state, g)?
        );
    }
    Ok(())
}
