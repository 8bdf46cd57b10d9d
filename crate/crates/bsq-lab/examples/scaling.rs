//! A shortened existence-time sweep for the unit model.
//!
//! The full study (horizon 10·ε^{-1.5}) is `bsqlab scaling`; here the horizon is
//! cut down so the example finishes in seconds, which leaves most runs censored.

use bsq_lab::experiments::{fit_power_law, scaling_study, ScalingSpec};

fn main() -> bsq_lab::Result<()> {
    let mut spec = ScalingSpec::unit(vec![0.4, 0.3, 0.2]);
    spec.n = 128;
    spec.horizon_factor = 1.0;
    spec.horizon_exponent = 1.0;

    let r = scaling_study(&spec)?;
    r.write_csv(&mut std::io::stdout())?;

    // The fit itself on synthetic doubling times T = ε^{-4/3}.
    let eps = [0.2, 0.1, 0.05, 0.025];
    let t: Vec<f64> = eps.iter().map(|e: &f64| e.powf(-4.0 / 3.0)).collect();
    let fit = fit_power_law(&eps, &t).expect("four points");
    println!("synthetic exponent = {:.12}", fit.exponent);
    Ok(())
}
