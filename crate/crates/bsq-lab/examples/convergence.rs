use bsq_lab::experiments::{convergence_study, ConvergenceSpec};

fn main() -> bsq_lab::Result<()> {
    let spec = ConvergenceSpec::default();
    let r = convergence_study(&spec)?;
    println!("reference dt = {:.3e}", r.reference_dt);
    r.write_csv(&mut std::io::stdout())?;

    // With the nonlinearity off the integrating factor is exact.
    let linear = ConvergenceSpec {
        nonlinear: false,
        ..spec
    };
    convergence_study(&linear)?.write_csv(&mut std::io::stdout())?;
    Ok(())
}
