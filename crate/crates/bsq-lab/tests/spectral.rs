mod common;

use approx::assert_abs_diff_eq;
use bsq_lab::ensemble::{self, Band};
use bsq_lab::spectral::{dealias_and_mean, DealiasRule};
use bsq_lab::{ComplexField, Error, FourierMultiplier, Grid, Norm, RealField};
use num_complex::Complex64;
use std::f64::consts::PI;

#[test]
fn grid_frequencies_and_spacing() {
    let g = Grid::new(16, PI).unwrap();
    assert_abs_diff_eq!(g.dx(), 2.0 * PI / 16.0, epsilon = 1e-15);
    let mut modes = g.mode_frequencies();
    modes.iter_mut().for_each(|x| *x = x.round());
    assert_eq!(modes, (-8..8).map(|j| j as f64).collect::<Vec<_>>());

    let g = Grid::new(32, 16.0 * PI).unwrap();
    assert_abs_diff_eq!(g.dxi(), 1.0 / 16.0, epsilon = 1e-15);
}

#[test]
fn grid_rejects_bad_sizes() {
    assert!(matches!(Grid::new(10, 1.0), Err(Error::Config(_))));
    assert!(matches!(Grid::new(8, 1.0), Err(Error::Config(_))));
    assert!(matches!(Grid::new(64, 0.0), Err(Error::Config(_))));
}

#[test]
fn constant_has_only_zero_mode() {
    let g = Grid::new(32, PI).unwrap();
    let c = RealField::from_fn(&g, |_| 1.0).spectrum();
    assert_abs_diff_eq!(c.coeffs()[0].re, 2.0 * PI, epsilon = 1e-12);
    assert!(c.coeffs()[1..].iter().all(|z| z.norm() < 1e-12));
}

#[test]
fn cosine_has_two_equal_modes() {
    let g = Grid::new(32, PI).unwrap();
    let c = RealField::from_fn(&g, f64::cos).spectrum();
    let (p, m) = (c.coeffs()[g.slot(1)], c.coeffs()[g.slot(-1)]);
    assert_abs_diff_eq!(p.re, PI, epsilon = 1e-12);
    assert_abs_diff_eq!(m.re, PI, epsilon = 1e-12);
    let others: f64 = (0..32)
        .filter(|&k| k != g.slot(1) && k != g.slot(-1))
        .map(|k| c.coeffs()[k].norm())
        .fold(0.0, f64::max);
    assert!(others < 1e-12);
}

#[test]
fn roundtrip_random_field() {
    let g = Grid::new(256, 3.0).unwrap();
    let mut rng = ensemble::rng(9);
    let u = ensemble::random_real(&g, &mut rng, Band::full(&g), 1.0);
    let back = u.spectrum().real_part();
    assert!(back.sub(&u).norm(Norm::Linf) <= 1e-13 * u.norm(Norm::Linf));
}

#[test]
fn dispersion_annihilates_unit_mode() {
    let g = Grid::new(32, PI).unwrap();
    // Exact single-mode spectrum so no roundoff sits on dispersive modes.
    let u = ComplexField::from_spectrum_fn(&g, |x| {
        Complex64::new(if x.abs() == 1.0 { PI } else { 0.0 }, 0.0)
    });
    let lu = u.apply(&FourierMultiplier::dispersion(&g, 1.0)).unwrap();
    assert!(lu.is_zero());
}

#[test]
fn hilbert_squares_to_minus_one() {
    let g = Grid::new(128, 2.0).unwrap();
    let mut rng = ensemble::rng(1);
    let u = ensemble::random_real(&g, &mut rng, Band::full(&g), 1.0);
    let h = FourierMultiplier::hilbert(&g);
    let hh = u.apply(&h).unwrap().apply(&h).unwrap();
    assert!(hh.add(&u).norm(Norm::Linf) < 1e-13);
}

#[test]
fn bracket_squared_on_cosine() {
    let g = Grid::new(32, PI).unwrap();
    let u = RealField::from_fn(&g, f64::cos);
    let b = u.apply(&FourierMultiplier::bracket(&g, 2.0)).unwrap();
    assert!(b.sub(&u.scale(2.0)).norm(Norm::Linf) < 1e-13);
}

#[test]
fn norms_of_cosine_match_quadrature() {
    let g = Grid::new(64, PI).unwrap();
    let u = RealField::from_fn(&g, f64::cos);
    // Trapezoid rule is exact for trigonometric polynomials of low degree.
    let quad: f64 = u.samples().iter().map(|x| x * x).sum::<f64>() * g.dx();
    assert_abs_diff_eq!(u.norm(Norm::L2), quad.sqrt(), epsilon = 1e-13);
    assert_abs_diff_eq!(u.norm(Norm::L2), PI.sqrt(), epsilon = 1e-13);
    assert_abs_diff_eq!(
        u.norm(Norm::Sobolev(1.0)),
        (2.0 * PI).sqrt(),
        epsilon = 1e-13
    );
    assert_abs_diff_eq!(u.spectrum().norm(Norm::WkInf(1)), 2.0, epsilon = 1e-12);
}

#[test]
fn zero_field_norms() {
    let g = Grid::new(32, 1.0).unwrap();
    let z = RealField::zeros(&g);
    for k in [
        Norm::L2,
        Norm::Linf,
        Norm::Sobolev(-2.0),
        Norm::Sobolev(3.0),
        Norm::WkInf(2),
    ] {
        assert_eq!(z.spectrum().norm(k), 0.0);
    }
}

#[test]
fn dealias_rules() {
    let g = Grid::new(64, PI).unwrap();
    let low = RealField::from_fn(&g, |x| (3.0 * x).sin()).spectrum();
    let d = dealias_and_mean(&low, Some(DealiasRule::TwoThirds), false);
    assert!((&d - &low).max_abs_coeff() < 1e-13 * low.max_abs_coeff());

    let mut c = vec![Complex64::new(0.0, 0.0); 64];
    c[g.nyquist_slot()] = Complex64::new(1.0, 0.0);
    let ny = ComplexField::from_coeffs(&g, c).unwrap();
    assert!(dealias_and_mean(&ny, Some(DealiasRule::TwoThirds), false).is_zero());

    let one = RealField::from_fn(&g, |_| 1.0).spectrum();
    assert!(dealias_and_mean(&one, None, true).max_abs_coeff() < 1e-12);
}

#[test]
fn product_matches_convolution_oracle() {
    let g = Grid::new(64, 2.0).unwrap();
    let mut rng = ensemble::rng(4);
    let f = ensemble::random_complex(&g, &mut rng, Band::full(&g));
    let h = ensemble::random_complex(&g, &mut rng, Band::full(&g));
    let fast = f.product(&h);
    let slow = common::direct_product(&f, &h);
    assert!(common::max_abs_diff(fast.coeffs(), &slow) < 1e-13 * common::max_abs(&slow));
}

#[test]
fn grid_mismatch_is_an_error() {
    let a = Grid::new(32, 1.0).unwrap();
    let b = Grid::new(32, 2.0).unwrap();
    let f = RealField::zeros(&a).spectrum();
    let h = RealField::zeros(&b).spectrum();
    assert!(matches!(
        bsq_lab::littlewood_paley::paraproduct(&f, &h),
        Err(Error::GridMismatch)
    ));
}
