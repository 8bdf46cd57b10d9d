use std::f64::consts::PI;

use bsq_lab::cli::verify::admissible_states;
use bsq_lab::evolution::{initial_data, simulate, DataSpec, IntegratorSpec, SystemKind};
use bsq_lab::experiments::{
    convergence_study, cubic_term_ratio, energy_budget, fit_line, fit_power_law, resonance_atlas,
    scaling_data, scaling_study, write_budget_csv, AtlasSpec, ConvergenceSpec, Manifest,
    ScalingSpec,
};
use bsq_lab::good_unknowns::{energy_functional, StateZV};
use bsq_lab::{Error, Grid, Model};

#[test]
fn line_fits() {
    let x = [0.0, 1.0, 2.0, 3.0];
    let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
    let f = fit_line(&x, &y).unwrap();
    assert!((f.exponent + 0.5).abs() < 1e-14);
    assert!((f.intercept - 2.0).abs() < 1e-14);
    assert!(f.residual < 1e-14);
    assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    assert!(fit_line(&[1.0, 2.0], &[0.0]).is_none());
}

#[test]
fn power_law_recovers_exponent() {
    let eps: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
    for p in [1.0, 4.0 / 3.0, 2.0] {
        let t: Vec<f64> = eps.iter().map(|e| 7.0 * e.powf(-p)).collect();
        let f = fit_power_law(&eps, &t).unwrap();
        assert!((f.exponent - p).abs() < 1e-12);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-12);
    }
}

#[test]
fn scaling_spec_validation() {
    let bad = [
        vec![0.2, 0.1],
        vec![0.2, 0.1, 1.5],
        vec![0.1, 0.2, 0.05],
        vec![0.2, 0.2, 0.1],
    ];
    for list in bad {
        assert!(matches!(
            ScalingSpec::unit(list).validate(),
            Err(Error::Config(_))
        ));
    }
    assert!(ScalingSpec::unit(vec![0.2, 0.1, 0.05]).validate().is_ok());
}

#[test]
fn scaling_data_has_size_eps() {
    let spec = ScalingSpec::unit(vec![0.2, 0.1, 0.05]);
    for eps in [0.2, 0.05] {
        let s = scaling_data(&spec, eps).unwrap();
        let e = energy_functional(&s, spec.n0).0;
        assert!((e.sqrt() - eps).abs() < 1e-12 * eps);
    }
}

fn small_scaling(model: Model) -> ScalingSpec {
    let mut s = ScalingSpec::unit(vec![0.2, 0.1, 0.05]);
    s.model = model;
    s.n = 64;
    s.half_length = 8.0 * PI;
    s.horizon_factor = 0.5;
    s.horizon_exponent = 1.0;
    s
}

#[test]
fn censored_scaling_reports_lower_bound() {
    let r = scaling_study(&small_scaling(Model::Unit)).unwrap();
    assert!(r
        .rows
        .iter()
        .all(|row| row.censored && row.t_double == row.horizon));
    assert!(r.fit.is_none());
    assert!((r.lower_bound.unwrap() - 1.0).abs() < 1e-12);
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("eps,t_double,censored,horizon,exit\n"));
    assert!(text.trim_end().ends_with("lower_bound"));
}

#[test]
fn uncensored_scaling_is_fitted() {
    let mut spec = small_scaling(Model::Eps(0.1));
    spec.exit_norm_factor = 1.0001;
    spec.horizon_factor = 20.0;
    let r = scaling_study(&spec).unwrap();
    assert!(r
        .rows
        .iter()
        .all(|row| !row.censored && row.t_double < row.horizon));
    assert!(r.fit.unwrap().exponent.is_finite());
    assert!(r.lower_bound.is_none());
}

fn conv_spec() -> ConvergenceSpec {
    ConvergenceSpec {
        n: 64,
        half_length: 4.0 * PI,
        ..ConvergenceSpec::default()
    }
}

#[test]
fn convergence_is_fourth_order() {
    let r = convergence_study(&conv_spec()).unwrap();
    assert_eq!(r.rows.len(), 3);
    assert!((r.reference_dt - 0.01 / 8.0).abs() < 1e-15);
    for o in r.orders() {
        assert!((3.7..=4.3).contains(&o), "order {o}");
    }
}

#[test]
fn single_step_size_has_no_order() {
    let spec = ConvergenceSpec {
        dts: vec![0.02],
        ..conv_spec()
    };
    let r = convergence_study(&spec).unwrap();
    assert!(r.orders().is_empty());
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf)
        .unwrap()
        .starts_with("dt,error,at_floor\n"));
}

#[test]
fn linear_convergence_sits_at_the_floor() {
    let spec = ConvergenceSpec {
        nonlinear: false,
        ..conv_spec()
    };
    let r = convergence_study(&spec).unwrap();
    assert!(r.rows.iter().all(|row| row.at_floor && row.order.is_none()));
}

#[test]
fn convergence_rejects_bad_steps() {
    for dts in [vec![], vec![0.01, 0.02], vec![0.03]] {
        let spec = ConvergenceSpec { dts, ..conv_spec() };
        assert!(matches!(convergence_study(&spec), Err(Error::Config(_))));
    }
}

#[test]
fn atlas_without_eps_entries() {
    let mut spec = AtlasSpec::standard(&[], 4, 6);
    spec.base_resolution = 512;
    assert_eq!(spec.entries.len(), 3);
    let r = resonance_atlas(&spec);
    assert_eq!(r.rows.len(), 9);
    assert_eq!(r.fits.len(), 3);
    for f in &r.fits {
        assert!((f.slope + 1.0).abs() < 0.1, "{} slope {}", f.kind, f.slope);
    }
    let ratios = r.ratios("pp_opposite", "S_plus");
    assert_eq!(ratios.iter().map(|x| x.0).collect::<Vec<_>>(), vec![4, 5]);
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf)
        .unwrap()
        .starts_with("kind,D,region,measure\n"));
    assert_eq!(AtlasSpec::standard(&[0.1, 0.01], 4, 6).entries.len(), 7);
}

fn budget_run(alpha: f64, nonlinear: bool) -> Vec<bsq_lab::experiments::BudgetRow> {
    let g = Grid::new(256, 8.0 * PI).unwrap();
    let kind = SystemKind::BsqEps(0.1);
    let data = DataSpec::GaussianDerivative {
        alpha,
        beta: alpha,
        sigma: 2.0,
        x0: 3.0,
    };
    let s = initial_data(&g, &data, kind.model()).unwrap();
    let mut spec = IntegratorSpec::default_for(&g, kind);
    spec.nonlinear = nonlinear;
    let tr = simulate(&s, kind, &spec, 0.5, 0.25, true).unwrap();
    energy_budget(&tr, 4).unwrap()
}

#[test]
fn budget_closes() {
    let rows = budget_run(0.1, true);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r.contributions.len(), 4);
        assert!(r.mismatch <= 1e-9, "mismatch {}", r.mismatch);
        let s: f64 = r.contributions.iter().map(|c| c.1).sum();
        assert!((s - r.sum_terms).abs() <= 1e-12 * s.abs().max(1.0));
    }
    let mut buf = Vec::new();
    write_budget_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,dE_dt,sum_terms,mismatch,"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn budget_of_trivial_runs() {
    for r in budget_run(0.0, true) {
        assert_eq!(r.de_dt, 0.0);
        assert_eq!(r.mismatch, 0.0);
    }
    // The linear flow preserves every H^s norm.
    for r in budget_run(0.5, false) {
        assert!(r.contributions.is_empty());
        assert!(r.mismatch < 1e-10, "{}", r.mismatch);
    }
}

#[test]
fn budget_needs_states() {
    let g = Grid::new(64, 4.0 * PI).unwrap();
    let kind = SystemKind::BsqEps(0.1);
    let s = StateZV::zero(&g, kind.model());
    let tr = simulate(
        &s,
        kind,
        &IntegratorSpec::default_for(&g, kind),
        0.1,
        0.1,
        false,
    )
    .unwrap();
    assert!(matches!(energy_budget(&tr, 4), Err(Error::Input(_))));
}

#[test]
fn cubic_ratio_is_bounded() {
    for s in admissible_states(Model::Unit, 2, 3).unwrap() {
        let r = cubic_term_ratio(&s, 4).unwrap();
        assert!(r.is_finite() && r >= 0.0);
    }
}

#[test]
fn manifest_records_provenance() {
    let g = Grid::new(64, PI).unwrap();
    let m = Manifest::new(
        "simulate",
        Some(&g),
        &[0.1, 2.0],
        9,
        serde_json::json!({"a": 1}),
    );
    assert_eq!(m.grid, Some((64, PI)));
    assert_eq!(m.c_b_eps.len(), 1);
    assert!(m.c_b_unit > 0.0);
    let mut buf = Vec::new();
    m.write(&mut buf).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
    for key in [
        "command",
        "crate_version",
        "phi_hash",
        "c_b_unit",
        "seed",
        "config",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
}
