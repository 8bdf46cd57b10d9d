//! One trajectory of the ε-system with conservation diagnostics.
//!
//! Writes `trajectory.csv` to `$OUTPUT_DIR` (default: the system temp dir).

use bsq_lab::evolution::{initial_data, simulate, DataSpec, IntegratorSpec, SystemKind};
use bsq_lab::Grid;
use std::f64::consts::PI;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(1024, 32.0 * PI)?;
    let kind = SystemKind::BsqEps(0.1);
    let data = DataSpec::GaussianDerivative {
        alpha: 0.1,
        beta: 0.1,
        sigma: 4.0,
        x0: 10.0,
    };
    let s0 = initial_data(&grid, &data, kind.model())?;
    let spec = IntegratorSpec::default_for(&grid, kind);

    let tr = simulate(&s0, kind, &spec, 10.0, 1.0, false)?;
    println!("dt = {:.3e}, exit = {}", spec.dt, tr.exit.label());
    println!(
        "Hamiltonian drift {:.2e}, max zero-mode mass {:.2e}",
        tr.hamiltonian_drift(),
        tr.max_mass()
    );
    for (t, e) in tr.times.iter().zip(&tr.energy) {
        println!("t = {t:5.2}  E_N0 = {e:.6e}");
    }

    let dir = std::env::var_os("OUTPUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let path = dir.join("trajectory.csv");
    tr.write_csv(&mut std::fs::File::create(&path)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
