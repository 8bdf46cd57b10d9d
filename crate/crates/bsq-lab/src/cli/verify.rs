//! Invariant suite behind `bsqlab verify`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::{self, Band};
use crate::error::Result;
use crate::evolution::{
    initial_data, linear_propagator, simulate, DataSpec, FieldPair, IntegratorSpec, SystemKind,
};
use crate::experiments::{convergence_study, resonance_atlas, AtlasSpec, ConvergenceSpec};
use crate::good_unknowns::{
    b_bilinear_spectrum, decomposition_residual, measured_c_b, rhs_terms, Grouping, StateZV,
};
use crate::littlewood_paley::{paraproduct, remainder};
use crate::phases::{phase_closed, phase_direct, Modulation, PhaseSpec, Region, Sign};
use crate::{ComplexField, FourierMultiplier, Grid, Model, Norm};

use super::config::Config;

/// One line of the machine-readable report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub check: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `measured ≤ threshold` (NaN fails).
    pub fn at_most(name: &str, measured: f64, threshold: f64) -> Check {
        Check {
            check: name.into(),
            measured,
            threshold,
            pass: measured <= threshold,
        }
    }

    /// Passes when `lo ≤ measured ≤ hi`; `threshold` records the violated side.
    pub fn within(name: &str, measured: f64, lo: f64, hi: f64) -> Check {
        Check {
            check: name.into(),
            measured,
            threshold: if measured < lo { lo } else { hi },
            pass: measured >= lo && measured <= hi,
        }
    }
}

fn phase_oracle(points: usize) -> Check {
    let xs: Vec<f64> = (0..points)
        .map(|i| -10.0 + 20.0 * i as f64 / (points - 1) as f64)
        .collect();
    let mut specs = Vec::new();
    for model in [Model::Unit, Model::Eps(0.25), Model::Eps(0.01)] {
        for mu in Sign::BOTH {
            for nu in Sign::BOTH {
                specs.push(PhaseSpec::new(mu, nu, model));
            }
        }
    }
    let worst = specs
        .par_iter()
        .map(|&spec| {
            let mut w: f64 = 0.0;
            for &x in &xs {
                for &y in &xs {
                    let c = phase_closed(spec, x, y);
                    if c.delegated {
                        continue;
                    }
                    let d = (c.value - phase_direct(spec, x, y)).abs();
                    w = w.max(d / (1.0 + x.abs().powi(3) + y.abs().powi(3)));
                }
            }
            w
        })
        .reduce(|| 0.0, f64::max);
    Check::at_most("phase_oracle", worst, 1e-12)
}

fn random_pairs(grid: &Grid, pairs: usize, seed: u64) -> Vec<(ComplexField, ComplexField)> {
    let mut rng = ensemble::rng(seed);
    (0..pairs)
        .map(|_| {
            let f = ensemble::random_real(grid, &mut rng, Band::full(grid), 1.0);
            let g = ensemble::random_real(grid, &mut rng, Band::full(grid), 1.0);
            (f.spectrum(), g.spectrum())
        })
        .collect()
}

fn bony_and_commutator(pairs: usize, seed: u64) -> Result<Vec<Check>> {
    let grid = Grid::new(1024, 16.0 * PI)?;
    let h = FourierMultiplier::hilbert(&grid);
    let rows: Vec<Result<(f64, f64)>> = random_pairs(&grid, pairs, seed)
        .par_iter()
        .map(|(f, g)| {
            let fg = f.product(g);
            let sum = &(&paraproduct(f, g)? + &paraproduct(g, f)?) + &remainder(f, g)?;
            let bony = (&sum - &fg).norm(Norm::L2) / fg.norm(Norm::L2);
            let comm = &paraproduct(f, g)?.apply(&h)? - &paraproduct(f, &g.apply(&h)?)?;
            let den = f.norm(Norm::Linf) * g.norm(Norm::L2);
            Ok((bony, comm.norm(Norm::L2) / den))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let bony = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let comm = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("bony_identity", bony, 1e-11),
        Check::at_most("hilbert_paraproduct_commutator", comm, 1e-12),
    ])
}

fn b_reality(pairs: usize, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (name, model) in [
        ("b_reality_unit", Model::Unit),
        ("b_reality_eps", Model::Eps(0.1)),
    ] {
        let grid = Grid::new(1024, 4.0 * PI * model.eps().sqrt())?;
        let mut rng = ensemble::rng(seed ^ 0xb);
        let fields: Vec<_> = (0..pairs)
            .map(|_| {
                (
                    ensemble::multiscale_real(&grid, &mut rng, 1.0),
                    ensemble::multiscale_real(&grid, &mut rng, 1.0),
                )
            })
            .collect();
        let defects: Vec<Result<f64>> = fields
            .par_iter()
            .map(|(f, g)| {
                let b = b_bilinear_spectrum(f, g, model)?;
                let m = b.max_abs_coeff();
                Ok(if m == 0.0 {
                    0.0
                } else {
                    b.hermitian_defect() / m
                })
            })
            .collect();
        let worst = defects
            .into_iter()
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        out.push(Check::at_most(name, worst, 1e-13));
    }
    Ok(out)
}

/// Grids on which every term of the decomposition is active.
pub fn residual_grid(model: Model) -> Grid {
    match model {
        Model::Unit => Grid::new(512, 2.0 * PI).expect("valid grid"),
        Model::Eps(e) => Grid::new(1024, 4.0 * PI * e.sqrt()).expect("valid grid"),
    }
}

/// Random admissible states: three-band spectra with `ε‖ζ‖_∞ = 0.3 / C`.
pub fn admissible_states(model: Model, count: usize, seed: u64) -> Result<Vec<StateZV>> {
    let grid = residual_grid(model);
    let amp = 0.3 / (measured_c_b(model) * model.eps());
    let mut rng = ensemble::rng(seed);
    (0..count)
        .map(|_| {
            let z = ensemble::multiscale_real(&grid, &mut rng, amp);
            let v = ensemble::multiscale_real(&grid, &mut rng, amp);
            StateZV::new(z, v, model)
        })
        .collect()
}

fn total(state: &StateZV, g: Grouping) -> Result<ComplexField> {
    let mut acc = ComplexField::zeros(state.grid());
    for t in rhs_terms(state, g)? {
        acc += &t.field;
    }
    Ok(acc)
}

fn decomposition(states: usize, seed: u64) -> Result<Vec<Check>> {
    let unit = admissible_states(Model::Unit, states, seed)?;
    let eps = admissible_states(Model::Eps(0.1), states, seed)?;
    let unit_rows: Vec<Result<(f64, f64, f64)>> = unit
        .par_iter()
        .map(|s| {
            let raw = decomposition_residual(s, Grouping::Raw)?;
            let seven = decomposition_residual(s, Grouping::SevenTerm)?;
            let a = total(s, Grouping::Raw)?;
            let b = total(s, Grouping::SevenTerm)?;
            Ok((raw, seven, (&a - &b).norm(Norm::L2) / a.norm(Norm::L2)))
        })
        .collect();
    let unit_rows = unit_rows.into_iter().collect::<Result<Vec<_>>>()?;
    let eps_rows: Vec<Result<f64>> = eps
        .par_iter()
        .map(|s| decomposition_residual(s, Grouping::FourTerm))
        .collect();
    let eps_worst = eps_rows
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let col = |k: usize| {
        unit_rows
            .iter()
            .map(|r| [r.0, r.1, r.2][k])
            .fold(0.0, f64::max)
    };
    Ok(vec![
        Check::at_most("residual_unit_raw", col(0), 1e-9),
        Check::at_most("residual_unit_seven_term", col(1), 1e-9),
        Check::at_most("grouping_agreement_unit", col(2), 1e-10),
        Check::at_most("residual_eps_four_term", eps_worst, 1e-9),
    ])
}

fn conservation() -> Result<Vec<Check>> {
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
    let tr = simulate(&s0, kind, &spec, 10.0, 0.5, false)?;
    Ok(vec![
        Check::at_most("hamiltonian_drift", tr.hamiltonian_drift(), 1e-8),
        Check::at_most("zero_mode_mass", tr.max_mass(), 1e-12),
    ])
}

fn linear_exactness() -> Result<Check> {
    let grid = Grid::new(256, 8.0 * PI)?;
    let kind = SystemKind::BsqEps(0.1);
    let data = DataSpec::GaussianDerivative {
        alpha: 1.0,
        beta: 0.5,
        sigma: 2.0,
        x0: 3.0,
    };
    let p0 = FieldPair::from_state(&initial_data(&grid, &data, kind.model())?);
    let mut spec = IntegratorSpec::default_for(&grid, kind);
    spec.nonlinear = false;
    let steps = 1000;
    let stepped = crate::evolution::evolve(&p0, kind, &spec, spec.dt, steps);
    let t = spec.dt * steps as f64;
    let prop = linear_propagator(&grid, kind, t);
    let apply = |c: &ComplexField, d: &ComplexField, row: usize| {
        let v = c
            .coeffs()
            .iter()
            .zip(d.coeffs())
            .zip(&prop)
            .map(|((a, b), m)| m[row][0] * a + m[row][1] * b)
            .collect();
        ComplexField::from_coeffs(&grid, v)
    };
    let exact = FieldPair {
        first: apply(&p0.first, &p0.second, 0)?,
        second: apply(&p0.first, &p0.second, 1)?,
    };
    Ok(Check::at_most(
        "linear_exactness",
        stepped.sub(&exact).l2() / exact.l2(),
        1e-12,
    ))
}

fn formulation_equivalence() -> Result<Check> {
    let grid = Grid::new(1024, 32.0 * PI)?;
    let data = DataSpec::GaussianDerivative {
        alpha: 0.1,
        beta: 0.1,
        sigma: 4.0,
        x0: 10.0,
    };
    let s0 = initial_data(&grid, &data, Model::Eps(0.1))?;
    let run = |kind: SystemKind| -> Result<FieldPair> {
        let spec = IntegratorSpec::default_for(&grid, SystemKind::BsqEps(0.1));
        let tr = simulate(&s0, kind, &spec, 5.0, 5.0, true)?;
        Ok(tr.final_state().expect("kept states").clone())
    };
    let a = run(SystemKind::BsqEps(0.1))?;
    let b = run(SystemKind::KdvDiag(0.1))?;
    Ok(Check::at_most(
        "formulation_equivalence",
        a.sub(&b).l2() / a.l2(),
        1e-8,
    ))
}

/// Entry farthest from `target`; NaN for an empty list.
fn farthest_from(values: Vec<f64>, target: f64) -> f64 {
    values
        .into_iter()
        .max_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
        .unwrap_or(f64::NAN)
}

fn convergence_order() -> Result<Check> {
    let r = convergence_study(&ConvergenceSpec::default())?;
    let worst = farthest_from(r.orders(), 4.0);
    Ok(Check::within("convergence_order", worst, 3.7, 4.3))
}

fn resonance_halving() -> Check {
    let spec = AtlasSpec {
        entries: vec![(Modulation::PpOpposite, Region::s_plus())],
        d_min: 4,
        d_max: 10,
        base_resolution: 2048,
    };
    let r = resonance_atlas(&spec);
    let ratios = r.ratios(&Modulation::PpOpposite.label(), &Region::s_plus().label);
    let worst = farthest_from(ratios.iter().map(|x| x.1).collect(), 2.0);
    Check::within("resonance_halving", worst, 1.8, 2.2)
}

/// Runs every check; the report is in a fixed order.
pub fn run_checks(cfg: &Config) -> Result<Vec<Check>> {
    let v = &cfg.verify;
    let mut out = vec![phase_oracle(v.phase_points)];
    out.extend(bony_and_commutator(v.pairs, cfg.seed)?);
    out.extend(b_reality(v.pairs, cfg.seed)?);
    out.extend(decomposition(v.states, cfg.seed)?);
    out.extend(conservation()?);
    out.push(linear_exactness()?);
    out.push(formulation_equivalence()?);
    out.push(convergence_order()?);
    out.push(resonance_halving());
    Ok(out)
}
