//! Energy identity of the good unknown along a unit-model trajectory.

use bsq_lab::evolution::{initial_data, simulate, DataSpec, IntegratorSpec, SystemKind};
use bsq_lab::experiments::{energy_budget, write_budget_csv};
use bsq_lab::Grid;
use std::f64::consts::PI;

fn main() -> bsq_lab::Result<()> {
    let grid = Grid::new(512, 2.0 * PI)?;
    let kind = SystemKind::BsqUnit;
    let data = DataSpec::GaussianDerivative {
        alpha: 0.3,
        beta: 0.3,
        sigma: 0.5,
        x0: 1.0,
    };
    let s0 = initial_data(&grid, &data, kind.model())?;
    let spec = IntegratorSpec::default_for(&grid, kind);

    let tr = simulate(&s0, kind, &spec, 0.2, 0.05, true)?;
    let rows = energy_budget(&tr, 4)?;
    write_budget_csv(&rows, &mut std::io::stdout())?;
    let worst = rows.iter().map(|r| r.mismatch).fold(0.0, f64::max);
    println!("max relative mismatch {worst:.2e}");
    Ok(())
}
