mod common;

use std::f64::consts::PI;

use bsq_lab::evolution::{
    conserved_quantities, diag_change_of_variables, diag_inverse, evolve, from_diag, initial_data,
    linear_propagator, read_dump, simulate, step_by, to_diag, write_dump, DataSpec, Exit,
    FieldPair, IntegratorSpec, SystemKind,
};
use bsq_lab::good_unknowns::StateZV;
use bsq_lab::{ComplexField, Grid, Model, Norm, RealField};
use num_complex::Complex64;

fn bump_data(alpha: f64, beta: f64) -> DataSpec {
    DataSpec::GaussianDerivative {
        alpha,
        beta,
        sigma: 2.0,
        x0: 3.0,
    }
}

fn start(grid: &Grid, kind: SystemKind, alpha: f64) -> FieldPair {
    FieldPair::from_state(
        &initial_data(grid, &bump_data(alpha, 0.5 * alpha), kind.model()).unwrap(),
    )
}

#[test]
fn propagators_are_unitary_groups() {
    let g = Grid::new(64, 4.0 * PI).unwrap();
    for kind in [
        SystemKind::BsqUnit,
        SystemKind::BsqEps(0.1),
        SystemKind::KdvDiag(0.1),
    ] {
        let a = linear_propagator(&g, kind, 0.3);
        let b = linear_propagator(&g, kind, 0.45);
        let ab = linear_propagator(&g, kind, 0.75);
        for k in 0..g.n() {
            let m = a[k];
            for i in 0..2 {
                for j in 0..2 {
                    let mmh: Complex64 = (0..2).map(|l| m[i][l] * m[j][l].conj()).sum();
                    let id = if i == j { 1.0 } else { 0.0 };
                    assert!((mmh - id).norm() < 1e-14);
                    let prod: Complex64 = (0..2).map(|l| a[k][i][l] * b[k][l][j]).sum();
                    assert!((prod - ab[k][i][j]).norm() < 1e-13);
                }
            }
        }
    }
}

#[test]
fn linear_flow_matches_exact_solution() {
    let g = Grid::new(128, 8.0 * PI).unwrap();
    for (kind, eps) in [(SystemKind::BsqEps(0.1), 0.1), (SystemKind::BsqUnit, 1.0)] {
        let p0 = start(&g, kind, 1.0);
        let mut spec = IntegratorSpec::default_for(&g, kind);
        spec.nonlinear = false;
        let p = evolve(&p0, kind, &spec, spec.dt, 100);
        let t = 100.0 * spec.dt;
        let (z, v) = common::exact_linear(&g, p0.first.coeffs(), p0.second.coeffs(), eps, t);
        assert!(common::rel_l2(p.first.coeffs(), &z) < 1e-13);
        assert!(common::rel_l2(p.second.coeffs(), &v) < 1e-13);
    }
}

#[test]
fn diagonal_linear_flow_matches_exact_solution() {
    let g = Grid::new(128, 8.0 * PI).unwrap();
    let kind = SystemKind::KdvDiag(0.1);
    let p0 = start(&g, kind, 1.0);
    let mut spec = IntegratorSpec::default_for(&g, kind);
    spec.nonlinear = false;
    let t = 50.0 * spec.dt;
    let p = from_diag(&evolve(&to_diag(&p0), kind, &spec, spec.dt, 50));
    let (z, v) = common::exact_linear(&g, p0.first.coeffs(), p0.second.coeffs(), 0.1, t);
    assert!(common::rel_l2(p.first.coeffs(), &z) < 1e-13);
    assert!(common::rel_l2(p.second.coeffs(), &v) < 1e-13);
}

#[test]
fn nonlinear_flow_is_time_reversible() {
    let g = Grid::new(256, 16.0 * PI).unwrap();
    let kind = SystemKind::BsqEps(0.1);
    let p0 = start(&g, kind, 0.3);
    let spec = IntegratorSpec::default_for(&g, kind);
    let dt = 0.25 * spec.dt;
    let fwd = evolve(&p0, kind, &spec, dt, 200);
    let back = evolve(&fwd, kind, &spec, -dt, 200);
    assert!(back.sub(&p0).l2() / p0.l2() < 1e-9);
}

#[test]
fn single_step_matches_evolve() {
    let g = Grid::new(64, 4.0 * PI).unwrap();
    let kind = SystemKind::BsqEps(0.2);
    let p0 = start(&g, kind, 0.5);
    let spec = IntegratorSpec::default_for(&g, kind);
    let a = step_by(&p0, kind, &spec, spec.dt);
    let b = evolve(&p0, kind, &spec, spec.dt, 1);
    assert_eq!(a.sub(&b).l2(), 0.0);
}

#[test]
fn zero_data_stays_zero() {
    let g = Grid::new(64, 4.0 * PI).unwrap();
    let s = StateZV::zero(&g, Model::Eps(0.1));
    let kind = SystemKind::BsqEps(0.1);
    let spec = IntegratorSpec::default_for(&g, kind);
    let tr = simulate(&s, kind, &spec, 1.0, 0.25, true).unwrap();
    assert_eq!(tr.exit, Exit::Completed);
    assert_eq!(tr.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    assert!(tr.energy.iter().all(|e| *e == 0.0));
    assert!(tr.final_state().unwrap().l2() == 0.0);
    assert_eq!(tr.hamiltonian_drift(), 0.0);
}

#[test]
fn samples_land_on_requested_times() {
    let g = Grid::new(128, 8.0 * PI).unwrap();
    let kind = SystemKind::BsqEps(0.1);
    let s = initial_data(&g, &bump_data(0.2, 0.1), kind.model()).unwrap();
    let spec = IntegratorSpec::default_for(&g, kind);
    let tr = simulate(&s, kind, &spec, 1.3, 0.5, false).unwrap();
    let expect = [0.0, 0.5, 1.0, 1.3];
    assert_eq!(tr.len(), expect.len());
    for (t, e) in tr.times.iter().zip(expect) {
        assert!((t - e).abs() < 1e-12, "{t} vs {e}");
    }
}

#[test]
fn hamiltonian_of_single_modes() {
    let g = Grid::new(32, PI).unwrap();
    let pair = |u: RealField| FieldPair {
        first: u.spectrum(),
        second: ComplexField::zeros(&g),
    };
    // ½(ε‖ζ_x‖² - ‖ζ‖²) with ∫cos² = π on [-π, π].
    let c = conserved_quantities(&pair(RealField::from_fn(&g, f64::cos)), 1.0);
    assert!(c.hamiltonian.abs() < 1e-13);
    let c = conserved_quantities(&pair(RealField::from_fn(&g, |x| (2.0 * x).cos())), 1.0);
    assert!((c.hamiltonian - 1.5 * PI).abs() < 1e-12);
    assert_eq!(c.mass_v, 0.0);
    assert!(c.mass_zeta.abs() < 1e-14);
}

#[test]
fn cubic_hamiltonian_term() {
    let g = Grid::new(64, PI).unwrap();
    let p = FieldPair {
        first: RealField::from_fn(&g, |x| (2.0 * x).cos()).spectrum(),
        second: RealField::from_fn(&g, f64::cos).spectrum(),
    };
    // ½(4π + π - π - π - ∫cos²x cos2x) with ∫cos²x cos2x = π/2.
    for eps in [1.0, 0.1] {
        let c = conserved_quantities(&p, eps);
        let expect = 0.5 * (eps * 5.0 * PI - 2.0 * PI - eps * 0.5 * PI);
        assert!((c.hamiltonian - expect).abs() < 1e-12);
    }
}

#[test]
fn diagonal_variables_roundtrip() {
    let g = Grid::new(128, 8.0 * PI).unwrap();
    let s = initial_data(&g, &bump_data(0.3, 0.7), Model::Eps(0.1)).unwrap();
    let p = FieldPair::from_state(&s);
    assert!(from_diag(&to_diag(&p)).sub(&p).l2() < 1e-15 * p.l2());
    let (u, w) = diag_change_of_variables(&s);
    let back = diag_inverse(&u, &w, Model::Eps(0.1)).unwrap();
    assert!(back.zeta().sub(s.zeta()).norm(Norm::Linf) < 1e-15);
    assert!(back.v().sub(s.v()).norm(Norm::Linf) < 1e-15);
}

#[test]
fn formulations_agree() {
    let g = Grid::new(256, 16.0 * PI).unwrap();
    let s = initial_data(&g, &bump_data(0.2, 0.1), Model::Eps(0.1)).unwrap();
    let spec = IntegratorSpec::default_for(&g, SystemKind::BsqEps(0.1));
    let a = simulate(&s, SystemKind::BsqEps(0.1), &spec, 1.0, 1.0, true).unwrap();
    let b = simulate(&s, SystemKind::KdvDiag(0.1), &spec, 1.0, 1.0, true).unwrap();
    let (a, b) = (a.final_state().unwrap(), b.final_state().unwrap());
    assert!(a.sub(b).l2() / a.l2() < 1e-10);
}

#[test]
fn energy_growth_triggers_exit() {
    let g = Grid::new(128, 8.0 * PI).unwrap();
    let kind = SystemKind::BsqEps(0.1);
    let s = initial_data(&g, &bump_data(1.0, 1.0), kind.model()).unwrap();
    let mut spec = IntegratorSpec::default_for(&g, kind);
    spec.exit_norm_factor = 1.000001;
    let tr = simulate(&s, kind, &spec, 50.0, 1.0, false).unwrap();
    match tr.exit {
        Exit::NormDoubled(t) => assert!(t > 0.0 && t < 50.0 && *tr.times.last().unwrap() == t),
        other => panic!("expected an early exit, got {other:?}"),
    }
}

#[test]
fn invalid_settings_rejected() {
    let g = Grid::new(64, 4.0 * PI).unwrap();
    let s = StateZV::zero(&g, Model::Eps(0.1));
    let kind = SystemKind::BsqEps(0.1);
    let mut spec = IntegratorSpec::default_for(&g, kind);
    assert!(simulate(&s, kind, &spec, 1.0, 0.0, false).is_err());
    assert!(simulate(&s, kind, &spec, -1.0, 0.5, false).is_err());
    assert!(simulate(&s, SystemKind::BsqEps(1.5), &spec, 1.0, 0.5, false).is_err());
    spec.n0 = 3;
    assert!(simulate(&s, kind, &spec, 1.0, 0.5, false).is_err());
}

#[test]
fn dump_roundtrip() {
    let g = Grid::new(64, 4.0 * PI).unwrap();
    let kind = SystemKind::BsqEps(0.1);
    let s = initial_data(&g, &bump_data(0.2, 0.1), kind.model()).unwrap();
    let spec = IntegratorSpec::default_for(&g, kind);
    let tr = simulate(&s, kind, &spec, 0.5, 0.25, true).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("states.bin");
    write_dump(&tr, &path).unwrap();
    let d = read_dump(&path).unwrap();
    assert_eq!(d.grid, g);
    assert_eq!(d.eps, 0.1);
    assert_eq!(d.n0, spec.n0);
    assert_eq!(d.times, tr.times);
    for ((z, v), p) in d.states.iter().zip(tr.states.as_ref().unwrap()) {
        assert_eq!(z.samples(), p.first.real_part().samples());
        assert_eq!(v.samples(), p.second.real_part().samples());
    }
    std::fs::write(&path, b"garbage!").unwrap();
    assert!(read_dump(&path).is_err());
}

#[test]
fn dump_needs_states() {
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
    let dir = tempfile::tempdir().unwrap();
    assert!(write_dump(&tr, &dir.path().join("x.bin")).is_err());
}

#[test]
fn trajectory_csv_layout() {
    let g = Grid::new(64, 4.0 * PI).unwrap();
    let kind = SystemKind::BsqEps(0.1);
    let s = initial_data(&g, &bump_data(0.2, 0.1), kind.model()).unwrap();
    let tr = simulate(
        &s,
        kind,
        &IntegratorSpec::default_for(&g, kind),
        0.5,
        0.25,
        false,
    )
    .unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,E_N0,linf_zeta,H,mass_zeta,mass_v");
    assert_eq!(lines.len(), 1 + tr.len());
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 6));
}
