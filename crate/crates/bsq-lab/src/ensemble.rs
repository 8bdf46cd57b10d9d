//! Seeded random band-limited fields for property checks and empirical constants.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::{ComplexField, Grid, Norm, RealField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Spectral shape of a random field.
#[derive(Clone, Copy, Debug)]
pub struct Band {
    /// Lowest |ξ| carrying energy.
    pub xi_min: f64,
    /// Highest |ξ| carrying energy; clipped to the dealias cutoff.
    pub xi_max: f64,
    /// Coefficients decay like `⟨ξ⟩^{-decay}`.
    pub decay: f64,
}

impl Band {
    /// Everything below the dealias cutoff, mild decay.
    pub fn full(grid: &Grid) -> Band {
        Band {
            xi_min: 0.0,
            xi_max: grid.dealias_cutoff(),
            decay: 1.0,
        }
    }
}

/// Random real zero-mean field with `‖u‖_∞ = amplitude`.
pub fn random_real(grid: &Grid, rng: &mut impl Rng, band: Band, amplitude: f64) -> RealField {
    let xi_max = band.xi_max.min(grid.dealias_cutoff());
    let n = grid.n();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let dxi = grid.dxi();
    for m in 1..(n / 2) as i64 {
        let xi = m as f64 * dxi;
        if xi > xi_max {
            break;
        }
        if xi < band.xi_min {
            continue;
        }
        let w = (1.0 + xi * xi).powf(-band.decay / 2.0);
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * w;
        c[grid.slot(m)] = z;
        c[grid.slot(-m)] = z.conj();
    }
    let f = ComplexField::from_coeffs(grid, c).expect("grid length");
    let r = f.real_part_checked();
    let s = r.norm(Norm::Linf);
    if s == 0.0 {
        return RealField::zeros(grid);
    }
    r.scale(amplitude / s)
}

/// Random complex field with coefficients below the dealias cutoff, `‖·‖_{L²} = 1`.
pub fn random_complex(grid: &Grid, rng: &mut impl Rng, band: Band) -> ComplexField {
    let xi_max = band.xi_max.min(grid.dealias_cutoff());
    let f = ComplexField::from_spectrum_fn(grid, |_| Complex64::new(0.0, 0.0));
    let mut c = f.into_coeffs();
    for (k, &xi) in grid.frequencies().iter().enumerate() {
        if xi == 0.0 || xi.abs() > xi_max || xi.abs() < band.xi_min {
            continue;
        }
        let w = (1.0 + xi * xi).powf(-band.decay / 2.0);
        c[k] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * w;
    }
    let f = ComplexField::from_coeffs(grid, c).expect("grid length");
    let s = f.norm(Norm::L2);
    if s == 0.0 {
        f
    } else {
        f.scale_re(1.0 / s)
    }
}

/// Sum of independent low, middle and high bands (relative to the dealias cutoff),
/// flat spectra, rescaled to `‖u‖_∞ = amplitude`. Exercises every para-product
/// regime on grids with enough scale separation.
pub fn multiscale_real(grid: &Grid, rng: &mut impl Rng, amplitude: f64) -> RealField {
    let cut = grid.dealias_cutoff();
    let mut u = RealField::zeros(grid);
    for (lo, hi) in [(0.0, cut / 32.0), (cut / 32.0, cut / 2.0), (cut / 2.0, cut)] {
        let band = Band {
            xi_min: lo,
            xi_max: hi,
            decay: 0.0,
        };
        u = u.add(&random_real(grid, rng, band, 1.0));
    }
    let s = u.norm(Norm::Linf);
    if s == 0.0 {
        u
    } else {
        u.scale(amplitude / s)
    }
}
