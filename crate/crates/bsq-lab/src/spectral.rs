//! Periodic grids, spectral fields, Fourier multipliers and norms.
//!
//! Coefficients approximate the continuum transform `û(ξ) = ∫ e^{-ixξ} u(x) dx`
//! on the box `[-L, L)`: the forward DFT carries the weight `dx` and the phase
//! of the left endpoint, so `∂x` acts as `iξ` and the inverse is
//! `u(x) = (1/2L) Σ_j û(ξ_j) e^{ixξ_j}`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::littlewood_paley::ShellTable;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

struct GridData {
    n: usize,
    half_length: f64,
    freqs: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    fwd2: Arc<dyn Fft<f64>>,
    inv2: Arc<dyn Fft<f64>>,
    shells: OnceLock<ShellTable>,
}

/// Uniform periodic grid on `[-L, L)` with `n` points.
///
/// Cheap to clone; FFT plans are shared and immutable.
#[derive(Clone)]
pub struct Grid(Arc<GridData>);

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.0.n)
            .field("half_length", &self.0.half_length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.n == other.0.n && self.0.half_length == other.0.half_length)
    }
}

impl Grid {
    /// `n` must be a power of two, at least 16; `half_length` must be positive.
    pub fn new(n: usize, half_length: f64) -> Result<Grid> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid size n = {n} must be a power of two >= 16"
            )));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::Config(format!(
                "half_length L = {half_length} must be positive"
            )));
        }
        let dxi = PI / half_length;
        let freqs = (0..n).map(|k| mode_number(k, n) as f64 * dxi).collect();
        let mut planner = FftPlanner::new();
        Ok(Grid(Arc::new(GridData {
            n,
            half_length,
            freqs,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            fwd2: planner.plan_fft_forward(2 * n),
            inv2: planner.plan_fft_inverse(2 * n),
            shells: OnceLock::new(),
        })))
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn half_length(&self) -> f64 {
        self.0.half_length
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.0.half_length / self.0.n as f64
    }

    /// Frequency spacing `π/L`.
    pub fn dxi(&self) -> f64 {
        PI / self.0.half_length
    }

    /// Largest resolved |ξ|, attained by the unpaired Nyquist mode.
    pub fn xi_max(&self) -> f64 {
        (self.0.n / 2) as f64 * self.dxi()
    }

    /// Two-thirds rule cutoff: modes with |ξ| above this are removed by dealiasing.
    pub fn dealias_cutoff(&self) -> f64 {
        2.0 / 3.0 * self.xi_max()
    }

    /// Frequencies in FFT storage order.
    pub fn frequencies(&self) -> &[f64] {
        &self.0.freqs
    }

    /// Frequencies `jπ/L` for `j = -n/2 .. n/2-1`, ascending.
    pub fn mode_frequencies(&self) -> Vec<f64> {
        let h = (self.0.n / 2) as i64;
        (-h..h).map(|j| j as f64 * self.dxi()).collect()
    }

    /// Sample points `x_k = -L + k dx`.
    pub fn points(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.0.n)
            .map(|k| -self.0.half_length + k as f64 * dx)
            .collect()
    }

    /// Signed mode number of storage slot `k`.
    pub fn mode_number(&self, k: usize) -> i64 {
        mode_number(k, self.0.n)
    }

    /// Storage slot of signed mode number `m` (taken modulo `n`).
    pub fn slot(&self, m: i64) -> usize {
        m.rem_euclid(self.0.n as i64) as usize
    }

    pub fn nyquist_slot(&self) -> usize {
        self.0.n / 2
    }

    pub(crate) fn shells(&self) -> &ShellTable {
        self.0.shells.get_or_init(|| ShellTable::new(self))
    }

    /// Samples to coefficients.
    pub fn forward(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let mut buf = samples.to_vec();
        self.0.fwd.process(&mut buf);
        let dx = self.dx();
        for (k, c) in buf.iter_mut().enumerate() {
            *c *= if k % 2 == 0 { dx } else { -dx };
        }
        buf
    }

    /// Coefficients to samples.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let w = 0.5 / self.0.half_length;
        let mut buf: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 0 { c * w } else { -c * w })
            .collect();
        self.0.inv.process(&mut buf);
        buf
    }

    /// Samples on the twice-refined grid, for alias-free products.
    pub(crate) fn pad(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let n = self.0.n;
        let w = 0.5 / self.0.half_length;
        let mut buf = vec![ZERO; 2 * n];
        for (k, c) in coeffs.iter().enumerate() {
            if k == n / 2 {
                continue;
            }
            let m = mode_number(k, n);
            let s = if m.rem_euclid(2) == 0 { w } else { -w };
            buf[m.rem_euclid(2 * n as i64) as usize] = c * s;
        }
        self.0.inv2.process(&mut buf);
        buf
    }

    /// Coefficients from refined-grid samples, truncated to the resolvable band with
    /// the Nyquist mode zeroed.
    pub(crate) fn unpad(&self, mut buf: Vec<Complex64>) -> Vec<Complex64> {
        let n = self.0.n;
        self.0.fwd2.process(&mut buf);
        let w = self.0.half_length / n as f64;
        let mut out = vec![ZERO; n];
        for (k, o) in out.iter_mut().enumerate() {
            if k == n / 2 {
                continue;
            }
            let m = mode_number(k, n);
            let s = if m.rem_euclid(2) == 0 { w } else { -w };
            *o = buf[m.rem_euclid(2 * n as i64) as usize] * s;
        }
        out
    }

    pub(crate) fn check(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

fn mode_number(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// `⟨ξ⟩ = (1+ξ²)^{1/2}`.
pub fn japanese(xi: f64) -> f64 {
    (1.0 + xi * xi).sqrt()
}

/// Sign with `sign(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Norm {
    /// `H^s` with `s >= -2`.
    Sobolev(f64),
    L2,
    Linf,
    /// Sum of sup norms of derivatives of order `0..=k`.
    WkInf(u32),
}

/// Real-valued grid function.
#[derive(Clone, Debug)]
pub struct RealField {
    grid: Grid,
    samples: Vec<f64>,
    zero_mean: bool,
}

impl RealField {
    pub fn zeros(grid: &Grid) -> RealField {
        RealField {
            grid: grid.clone(),
            samples: vec![0.0; grid.n()],
            zero_mean: true,
        }
    }

    pub fn from_samples(grid: &Grid, samples: Vec<f64>) -> Result<RealField> {
        if samples.len() != grid.n() {
            return Err(Error::Contract(format!(
                "expected {} samples, got {}",
                grid.n(),
                samples.len()
            )));
        }
        Ok(RealField {
            grid: grid.clone(),
            samples,
            zero_mean: false,
        })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> RealField {
        RealField {
            grid: grid.clone(),
            samples: grid.points().into_iter().map(f).collect(),
            zero_mean: false,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn is_zero_mean(&self) -> bool {
        self.zero_mean
    }

    pub fn spectrum(&self) -> ComplexField {
        let s: Vec<Complex64> = self
            .samples
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        ComplexField {
            grid: self.grid.clone(),
            coeffs: self.grid.forward(&s),
        }
    }

    /// Zero-mode coefficient, i.e. `∫u dx`.
    pub fn mass(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.grid.dx()
    }

    pub fn norm(&self, kind: Norm) -> f64 {
        match kind {
            Norm::Linf => self.samples.iter().fold(0.0, |m, x| m.max(x.abs())),
            _ => self.spectrum().norm(kind),
        }
    }

    pub fn apply(&self, m: &FourierMultiplier) -> Result<RealField> {
        self.spectrum().apply(m).map(|c| c.real_part())
    }

    /// Largest violation of `û(-ξ) = conj û(ξ)`; zero for real samples up to roundoff.
    pub fn hermitian_defect(&self) -> f64 {
        self.spectrum().hermitian_defect()
    }

    pub fn scale(&self, a: f64) -> RealField {
        RealField {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|x| a * x).collect(),
            zero_mean: self.zero_mean,
        }
    }

    pub fn add(&self, other: &RealField) -> RealField {
        RealField {
            grid: self.grid.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + b)
                .collect(),
            zero_mean: self.zero_mean && other.zero_mean,
        }
    }

    pub fn sub(&self, other: &RealField) -> RealField {
        self.add(&other.scale(-1.0))
    }

    /// Removes the zero mode and marks the field zero-mean.
    pub fn with_zero_mean(&self) -> RealField {
        dealias_and_mean(&self.spectrum(), None, true).real_part()
    }
}

/// Complex-valued grid function stored by its spectrum.
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: &Grid) -> ComplexField {
        ComplexField {
            grid: grid.clone(),
            coeffs: vec![ZERO; grid.n()],
        }
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<ComplexField> {
        if coeffs.len() != grid.n() {
            return Err(Error::Contract(format!(
                "expected {} coefficients, got {}",
                grid.n(),
                coeffs.len()
            )));
        }
        Ok(ComplexField {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn from_physical(grid: &Grid, samples: &[Complex64]) -> ComplexField {
        ComplexField {
            grid: grid.clone(),
            coeffs: grid.forward(samples),
        }
    }

    /// Field with coefficients `symbol(ξ_j)` at every mode.
    pub fn from_spectrum_fn(grid: &Grid, f: impl Fn(f64) -> Complex64) -> ComplexField {
        ComplexField {
            grid: grid.clone(),
            coeffs: grid.frequencies().iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn to_physical(&self) -> Vec<Complex64> {
        self.grid.inverse(&self.coeffs)
    }

    /// Real part of the represented function.
    pub fn real_part(&self) -> RealField {
        let s = self.to_physical();
        let zero_mean = self.coeffs[0].norm() == 0.0;
        RealField {
            grid: self.grid.clone(),
            samples: s.iter().map(|c| c.re).collect(),
            zero_mean,
        }
    }

    /// Spectrum of the complex-conjugate function: `c(ξ) -> conj c(-ξ)`.
    pub fn conj(&self) -> ComplexField {
        let n = self.grid.n();
        let mut out = vec![ZERO; n];
        for (k, o) in out.iter_mut().enumerate() {
            let m = self.grid.mode_number(k);
            if k == n / 2 {
                continue;
            }
            *o = self.coeffs[self.grid.slot(-m)].conj();
        }
        ComplexField {
            grid: self.grid.clone(),
            coeffs: out,
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        (1..n)
            .filter(|&k| k != n / 2)
            .map(|k| {
                let m = self.grid.mode_number(k);
                (self.coeffs[k] - self.coeffs[self.grid.slot(-m)].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, m: &FourierMultiplier) -> Result<ComplexField> {
        if m.values.len() != self.coeffs.len() {
            return Err(Error::GridMismatch);
        }
        Ok(ComplexField {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&m.values)
                .map(|(c, s)| c * s)
                .collect(),
        })
    }

    /// Multiplies coefficient `j` by `symbol(ξ_j)`.
    pub fn map_symbol(&self, symbol: impl Fn(f64) -> Complex64) -> ComplexField {
        ComplexField {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(self.grid.frequencies())
                .map(|(c, &x)| c * symbol(x))
                .collect(),
        }
    }

    /// Multiplies coefficient `j` by the real weight `w(ξ_j)`.
    pub fn map_weight(&self, w: impl Fn(f64) -> f64) -> ComplexField {
        self.map_symbol(|x| Complex64::new(w(x), 0.0))
    }

    /// Exact product: linear convolution of spectra, truncated to the grid band
    /// with the Nyquist mode zeroed. No periodic wraparound.
    pub fn product(&self, other: &ComplexField) -> ComplexField {
        let mut acc = ProductSum::new(&self.grid);
        acc.add(&self.coeffs, &other.coeffs);
        acc.finish()
    }

    /// Sesquilinear `H^s` pairing `(1/2L) Σ ⟨ξ⟩^{2s} a(ξ) conj b(ξ)`.
    pub fn inner(&self, other: &ComplexField, s: f64) -> Complex64 {
        let w = 0.5 / self.grid.half_length();
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .zip(self.grid.frequencies())
            .map(|((a, b), &x)| a * b.conj() * sobolev_weight(x, s))
            .sum::<Complex64>()
            * w
    }

    pub fn norm(&self, kind: Norm) -> f64 {
        match kind {
            Norm::Sobolev(s) => self.inner(self, s).re.max(0.0).sqrt(),
            Norm::L2 => self.norm(Norm::Sobolev(0.0)),
            Norm::Linf => self.to_physical().iter().fold(0.0, |m, c| m.max(c.norm())),
            Norm::WkInf(k) => {
                let mut total = 0.0;
                let mut d = self.clone();
                for _ in 0..=k {
                    total += d.norm(Norm::Linf);
                    d = d.map_symbol(|x| Complex64::new(0.0, x));
                }
                total
            }
        }
    }

    pub fn scale(&self, a: Complex64) -> ComplexField {
        ComplexField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub fn scale_re(&self, a: f64) -> ComplexField {
        ComplexField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }
}

fn sobolev_weight(xi: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        (1.0 + xi * xi).powf(s)
    }
}

impl AddAssign<&ComplexField> for ComplexField {
    fn add_assign(&mut self, rhs: &ComplexField) {
        debug_assert!(self.grid == rhs.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexField> for ComplexField {
    fn sub_assign(&mut self, rhs: &ComplexField) {
        debug_assert!(self.grid == rhs.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl Add for ComplexField {
    type Output = ComplexField;
    fn add(mut self, rhs: ComplexField) -> ComplexField {
        self += &rhs;
        self
    }
}

impl Sub for ComplexField {
    type Output = ComplexField;
    fn sub(mut self, rhs: ComplexField) -> ComplexField {
        self -= &rhs;
        self
    }
}

impl Add for &ComplexField {
    type Output = ComplexField;
    fn add(self, rhs: &ComplexField) -> ComplexField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &ComplexField {
    type Output = ComplexField;
    fn sub(self, rhs: &ComplexField) -> ComplexField {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for ComplexField {
    type Output = ComplexField;
    fn neg(self) -> ComplexField {
        self.scale_re(-1.0)
    }
}

impl Mul<ComplexField> for f64 {
    type Output = ComplexField;
    fn mul(self, rhs: ComplexField) -> ComplexField {
        rhs.scale_re(self)
    }
}

impl Mul<ComplexField> for Complex64 {
    type Output = ComplexField;
    fn mul(self, rhs: ComplexField) -> ComplexField {
        rhs.scale(self)
    }
}

/// Accumulates several products on the refined grid and transforms back once.
pub(crate) struct ProductSum {
    grid: Grid,
    buf: Vec<Complex64>,
    used: bool,
}

impl ProductSum {
    pub(crate) fn new(grid: &Grid) -> ProductSum {
        ProductSum {
            grid: grid.clone(),
            buf: vec![ZERO; 2 * grid.n()],
            used: false,
        }
    }

    pub(crate) fn add(&mut self, a: &[Complex64], b: &[Complex64]) {
        if a.iter().all(|c| *c == ZERO) || b.iter().all(|c| *c == ZERO) {
            return;
        }
        let pa = self.grid.pad(a);
        let pb = self.grid.pad(b);
        for ((o, x), y) in self.buf.iter_mut().zip(&pa).zip(&pb) {
            *o += x * y;
        }
        self.used = true;
    }

    pub(crate) fn finish(self) -> ComplexField {
        let coeffs = if self.used {
            self.grid.unpad(self.buf)
        } else {
            vec![ZERO; self.grid.n()]
        };
        ComplexField {
            grid: self.grid,
            coeffs,
        }
    }
}

/// Diagonal operator `m(D)` tabulated on a grid.
#[derive(Clone, Debug)]
pub struct FourierMultiplier {
    values: Vec<Complex64>,
    label: String,
}

impl FourierMultiplier {
    pub fn from_symbol(
        grid: &Grid,
        label: impl Into<String>,
        symbol: impl Fn(f64) -> Complex64,
    ) -> FourierMultiplier {
        FourierMultiplier {
            values: grid.frequencies().iter().map(|&x| symbol(x)).collect(),
            label: label.into(),
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `∂x^k`, symbol `(iξ)^k`.
    pub fn derivative(grid: &Grid, k: u32) -> FourierMultiplier {
        Self::from_symbol(grid, format!("d^{k}/dx^{k}"), |x| {
            Complex64::new(0.0, x).powu(k)
        })
    }

    /// `|∂x|`.
    pub fn abs_derivative(grid: &Grid) -> FourierMultiplier {
        Self::from_symbol(grid, "|dx|", |x| Complex64::new(x.abs(), 0.0))
    }

    /// `∂x/|∂x|`, symbol `i sign ξ` with `sign 0 = 0`.
    pub fn hilbert(grid: &Grid) -> FourierMultiplier {
        Self::from_symbol(grid, "dx/|dx|", |x| Complex64::new(0.0, sign(x)))
    }

    /// `⟨∂x⟩^s`.
    pub fn bracket(grid: &Grid, s: f64) -> FourierMultiplier {
        Self::from_symbol(grid, format!("<dx>^{s}"), |x| {
            Complex64::new(sobolev_weight(x, s / 2.0), 0.0)
        })
    }

    /// Dispersion `Λ_ε(D) = |ξ|(1 - ε ξ²)`; `ε = 1` is the unit model.
    pub fn dispersion(grid: &Grid, eps: f64) -> FourierMultiplier {
        Self::from_symbol(grid, format!("Lambda_{eps}"), |x| {
            Complex64::new(x.abs() * (1.0 - eps * x * x), 0.0)
        })
    }

    /// `(1 + ε∂x²)^{-1} φ_{≥6}(√ε|∂x|)`; the inverse is never exposed without the mask.
    pub fn masked_inverse_helmholtz(grid: &Grid, eps: f64) -> FourierMultiplier {
        let se = eps.sqrt();
        Self::from_symbol(grid, format!("(1+{eps}dx^2)^-1 P>=6"), |x| {
            let m = crate::littlewood_paley::shell_weight(
                crate::littlewood_paley::Shell::Geq(6),
                se * x.abs(),
            );
            if m == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(m / (1.0 - eps * x * x), 0.0)
            }
        })
    }

    pub fn compose(&self, other: &FourierMultiplier) -> FourierMultiplier {
        FourierMultiplier {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
            label: format!("{}*{}", self.label, other.label),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DealiasRule {
    TwoThirds,
}

/// Applies the two-thirds rule (when `rule` is given) and optionally removes the mean.
/// The Nyquist mode is always zeroed.
pub fn dealias_and_mean(
    u: &ComplexField,
    rule: Option<DealiasRule>,
    enforce_zero_mean: bool,
) -> ComplexField {
    let cut = u.grid.dealias_cutoff();
    let ny = u.grid.nyquist_slot();
    let mut out = u.clone();
    for (k, (c, &x)) in out.coeffs.iter_mut().zip(u.grid.frequencies()).enumerate() {
        if k == ny || (rule.is_some() && x.abs() > cut) {
            *c = ZERO;
        }
    }
    if enforce_zero_mean {
        out.coeffs[0] = ZERO;
    }
    out
}

/// Dealiased, mean-free real field; the zero-mean flag is set when requested.
pub fn dealias_real(u: &RealField, enforce_zero_mean: bool) -> RealField {
    let mut r = dealias_and_mean(
        &u.spectrum(),
        Some(DealiasRule::TwoThirds),
        enforce_zero_mean,
    )
    .real_part();
    r.zero_mean = enforce_zero_mean || u.zero_mean;
    r
}

impl ComplexField {
    /// Real part with the zero-mean flag set when the zero mode vanishes to roundoff.
    pub fn real_part_checked(&self) -> RealField {
        let mut r = self.real_part();
        let scale = self.max_abs_coeff();
        r.zero_mean = self.coeffs[0].norm() <= 1e-14 * scale || scale == 0.0;
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_frequencies() {
        let g = Grid::new(16, PI).unwrap();
        let m = g.mode_frequencies();
        assert_eq!(m.len(), 16);
        assert!((m[0] + 8.0).abs() < 1e-14 && (m[15] - 7.0).abs() < 1e-14);
        assert!((g.dx() - 2.0 * PI / 16.0).abs() < 1e-15);
        let g = Grid::new(32, 16.0 * PI).unwrap();
        assert!((g.dxi() - 1.0 / 16.0).abs() < 1e-15);
        assert!(Grid::new(10, 1.0).is_err());
        assert!(Grid::new(8, 1.0).is_err());
        assert!(Grid::new(16, 0.0).is_err());
    }

    #[test]
    fn constant_and_cosine_spectra() {
        let g = Grid::new(16, PI).unwrap();
        let one = RealField::from_fn(&g, |_| 1.0).spectrum();
        assert!((one.coeffs()[0].re - 2.0 * PI).abs() < 1e-13);
        assert!(one.coeffs()[1..].iter().all(|c| c.norm() < 1e-13));
        let c = RealField::from_fn(&g, f64::cos).spectrum();
        let p = c.coeffs()[g.slot(1)];
        let q = c.coeffs()[g.slot(-1)];
        assert!((p - q).norm() < 1e-13 && (p.norm() - PI).abs() < 1e-13);
        for k in 0..16 {
            if k != g.slot(1) && k != g.slot(-1) {
                assert!(c.coeffs()[k].norm() < 1e-13);
            }
        }
    }

    #[test]
    fn cosine_norms() {
        let g = Grid::new(64, PI).unwrap();
        let c = RealField::from_fn(&g, f64::cos);
        assert!((c.norm(Norm::Sobolev(0.0)) - PI.sqrt()).abs() < 1e-13);
        assert!((c.norm(Norm::Sobolev(1.0)) - (2.0 * PI).sqrt()).abs() < 1e-13);
        assert!((c.norm(Norm::WkInf(1)) - 2.0).abs() < 1e-3);
        assert_eq!(RealField::zeros(&g).norm(Norm::Sobolev(2.0)), 0.0);
    }

    #[test]
    fn multiplier_examples() {
        let g = Grid::new(64, PI).unwrap();
        let c = RealField::from_fn(&g, f64::cos);
        let lam = c.apply(&FourierMultiplier::dispersion(&g, 1.0)).unwrap();
        // FFT leakage into high modes is amplified by |Λ| up to ~3e4.
        assert!(lam.norm(Norm::Linf) < 1e-11);
        let b2 = c.apply(&FourierMultiplier::bracket(&g, 2.0)).unwrap();
        let diff = b2.sub(&c.scale(2.0));
        assert!(diff.norm(Norm::Linf) < 1e-12);
        let h = FourierMultiplier::hilbert(&g);
        let s = RealField::from_fn(&g, |x| x.sin() + 0.3 * (3.0 * x).cos());
        let hh = s.apply(&h).unwrap().apply(&h).unwrap();
        assert!(hh.add(&s).norm(Norm::Linf) < 1e-13);
    }

    #[test]
    fn dealias_examples() {
        let g = Grid::new(32, PI).unwrap();
        let ny = RealField::from_fn(&g, |x| (16.0 * x).cos());
        assert!(dealias_real(&ny, false).norm(Norm::Linf) < 1e-13);
        let low = RealField::from_fn(&g, |x| (3.0 * x).sin());
        assert!(dealias_real(&low, false).sub(&low).norm(Norm::Linf) < 1e-14);
        let c = RealField::from_fn(&g, |_| 2.5);
        let z = dealias_real(&c, true);
        assert!(z.norm(Norm::Linf) < 1e-14 && z.is_zero_mean());
    }

    #[test]
    fn product_is_alias_free() {
        let g = Grid::new(32, PI).unwrap();
        let a = RealField::from_fn(&g, |x| (10.0 * x).cos()).spectrum();
        // cos(10x)^2 = 1/2 + cos(20x)/2; mode 20 is outside the band and is dropped.
        let p = a.product(&a).real_part();
        assert!(p.sub(&RealField::from_fn(&g, |_| 0.5)).norm(Norm::Linf) < 1e-13);
    }
}
