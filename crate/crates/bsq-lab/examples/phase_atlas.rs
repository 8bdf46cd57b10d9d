//! Quadratic phases and the measure of their small-modulation sets.

use bsq_lab::phases::{
    cutoff_d, lambda_dispersion, phase_closed, phase_direct, small_modulation_measure, Modulation,
    PhaseSpec, Region, Sign,
};
use bsq_lab::Model;

fn main() -> bsq_lab::Result<()> {
    println!(
        "Lambda(2) unit = {}, eps=0.1: {}",
        lambda_dispersion(2.0, Model::Unit),
        lambda_dispersion(2.0, Model::Eps(0.1))
    );

    let (xi, eta) = (3.0, 1.0);
    for mu in Sign::BOTH {
        for nu in Sign::BOTH {
            let spec = PhaseSpec::new(mu, nu, Model::Unit);
            println!(
                "Phi_({:?},{:?})({xi},{eta}) direct {:8.3}  closed {:8.3}",
                mu,
                nu,
                phase_direct(spec, xi, eta),
                phase_closed(spec, xi, eta).value
            );
        }
    }

    for eps in [0.1, 0.01] {
        println!(
            "eps = {eps}: D for eps^(-2/3) = {}, for eps^(-5/6) = {}",
            cutoff_d(eps, 2.0 / 3.0)?,
            cutoff_d(eps, 5.0 / 6.0)?
        );
    }

    let region = Region::s_plus();
    let mut prev = None;
    for d in 4..=10 {
        let m = small_modulation_measure(Modulation::PpOpposite, d, &region, 2048);
        let ratio = prev.map(|p: f64| p / m.value);
        println!(
            "D = {d:2}: measure {:.6e} (cells {}, converged {}){}",
            m.value,
            m.resolution,
            m.converged,
            ratio.map_or(String::new(), |r| format!(", ratio {r:.4}"))
        );
        prev = Some(m.value);
    }
    Ok(())
}
