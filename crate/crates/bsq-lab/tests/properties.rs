use std::f64::consts::PI;

use approx::{assert_abs_diff_eq, assert_relative_eq};
use bsq_lab::ensemble::{self, Band};
use bsq_lab::evolution::{from_diag, linear_propagator, to_diag, FieldPair, SystemKind};
use bsq_lab::littlewood_paley::{paraproduct, remainder, shell_weight, Shell};
use bsq_lab::phases::{phase_closed, phase_direct, PhaseSpec, Sign};
use bsq_lab::{ComplexField, FourierMultiplier, Grid, Model, Norm, RealField};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn grid_size() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![32usize, 64, 128, 256])
}

fn model() -> impl Strategy<Value = Model> {
    prop_oneof![Just(Model::Unit), (0.01f64..1.0).prop_map(Model::Eps)]
}

fn kind() -> impl Strategy<Value = SystemKind> {
    prop_oneof![
        Just(SystemKind::BsqUnit),
        (0.01f64..1.0).prop_map(SystemKind::BsqEps),
        (0.01f64..1.0).prop_map(SystemKind::KdvDiag),
    ]
}

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

fn pair(n: usize, half_length: f64, seed: u64) -> (Grid, ComplexField, ComplexField) {
    let g = Grid::new(n, half_length).unwrap();
    let mut rng = ensemble::rng(seed);
    let f = ensemble::random_real(&g, &mut rng, Band::full(&g), 1.0).spectrum();
    let h = ensemble::random_real(&g, &mut rng, Band::full(&g), 1.0).spectrum();
    (g, f, h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fft_roundtrip_and_parseval(n in grid_size(), seed in any::<u64>(), l in 0.5f64..20.0) {
        let g = Grid::new(n, l).unwrap();
        let mut rng = ensemble::rng(seed);
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let field = RealField::from_samples(&g, u.clone()).unwrap();
        let back = field.spectrum().real_part();
        for (a, b) in u.iter().zip(back.samples()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
        let direct = (g.dx() * u.iter().map(|x| x * x).sum::<f64>()).sqrt();
        assert_relative_eq!(field.norm(Norm::L2), direct, max_relative = 1e-12);
    }

    #[test]
    fn shells_sum_to_one(x in 1e-3f64..1e3) {
        let s: f64 = (-20..=20).map(|k| shell_weight(Shell::K(k), x)).sum();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn bony_identity(n in grid_size(), seed in any::<u64>()) {
        let (_, f, g) = pair(n, 4.0 * PI, seed);
        let fg = f.product(&g);
        let sum = &(&paraproduct(&f, &g).unwrap() + &paraproduct(&g, &f).unwrap())
            + &remainder(&f, &g).unwrap();
        let err = (&sum - &fg).norm(Norm::L2) / fg.norm(Norm::L2);
        prop_assert!(err <= 1e-11, "relative error {err}");
    }

    #[test]
    fn hilbert_commutes_with_paraproduct(n in grid_size(), seed in any::<u64>()) {
        let (grid, f, g) = pair(n, 4.0 * PI, seed);
        let h = FourierMultiplier::hilbert(&grid);
        let lhs = paraproduct(&f, &g).unwrap().apply(&h).unwrap();
        let rhs = paraproduct(&f, &g.apply(&h).unwrap()).unwrap();
        let den = f.norm(Norm::Linf) * g.norm(Norm::L2);
        prop_assert!((&lhs - &rhs).norm(Norm::L2) <= 1e-12 * den);
    }

    #[test]
    fn closed_phase_matches_direct(
        m in model(), mu in sign(), nu in sign(),
        xi in -10.0f64..10.0, eta in -10.0f64..10.0,
    ) {
        let spec = PhaseSpec::new(mu, nu, m);
        let tol = 1e-12 * (1.0 + xi.abs().powi(3) + eta.abs().powi(3));
        let c = phase_closed(spec, xi, eta);
        prop_assert!((c.value - phase_direct(spec, xi, eta)).abs() <= tol);
    }

    #[test]
    fn phase_symmetries(m in model(), xi in -10.0f64..10.0, eta in -10.0f64..10.0) {
        let s = |mu, nu| PhaseSpec::new(mu, nu, m);
        let (p, q) = (Sign::Plus, Sign::Minus);
        let tol = 1e-12 * (1.0 + xi.abs().powi(3) + eta.abs().powi(3));
        let pp = |a, b| phase_direct(s(p, p), a, b);
        assert_abs_diff_eq!(phase_direct(s(q, p), xi, eta), -pp(eta, xi), epsilon = tol);
        assert_abs_diff_eq!(phase_direct(s(p, q), xi, eta), -pp(eta - xi, eta), epsilon = tol);
        for mu in [p, q] {
            for nu in [p, q] {
                assert_abs_diff_eq!(
                    phase_direct(s(mu, nu), -xi, -eta),
                    phase_direct(s(mu, nu), xi, eta),
                    epsilon = tol
                );
            }
        }
    }

    #[test]
    fn propagator_is_unitary_group(
        k in kind(), a in -5.0f64..5.0, b in -5.0f64..5.0, n in grid_size(),
    ) {
        let g = Grid::new(n, 4.0 * PI).unwrap();
        let pa = linear_propagator(&g, k, a);
        let pb = linear_propagator(&g, k, b);
        let pab = linear_propagator(&g, k, a + b);
        // Phases reach |ξ|³|t|, so the composition error scales with them.
        let tol = 1e-15 * (1.0 + g.xi_max().powi(3) * (a.abs() + b.abs()));
        for ((ma, mb), mab) in pa.iter().zip(&pb).zip(&pab) {
            for i in 0..2 {
                for j in 0..2 {
                    let gram: Complex64 = (0..2).map(|r| ma[r][i].conj() * ma[r][j]).sum();
                    let id = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((gram - id).norm() < 1e-12);
                    let prod: Complex64 = (0..2).map(|r| ma[i][r] * mb[r][j]).sum();
                    prop_assert!((prod - mab[i][j]).norm() < tol);
                }
            }
        }
    }

    #[test]
    fn diagonal_variables_roundtrip(n in grid_size(), seed in any::<u64>()) {
        let (_, f, g) = pair(n, 2.0 * PI, seed);
        let p = FieldPair { first: f, second: g };
        let back = from_diag(&to_diag(&p));
        prop_assert!(back.sub(&p).l2() <= 1e-15 * p.l2());
    }
}
