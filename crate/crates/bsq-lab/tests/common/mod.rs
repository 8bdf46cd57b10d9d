//! Test-side oracles, written from the defining formulas without going through
//! the library's fast paths.

#![allow(dead_code)]

use bsq_lab::{ComplexField, Grid};
use num_complex::Complex64;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `φ`: 1 on `[0, 5/4]`, 0 beyond `3/2`, `e^{-1/t}` quotient in between.
pub fn phi(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.25 {
        return 1.0;
    }
    if a >= 1.5 {
        return 0.0;
    }
    let t = (1.5 - a) / 0.25;
    let e = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    e(t) / (e(t) + e(1.0 - t))
}

pub fn phi_leq(k: i32, x: f64) -> f64 {
    phi(x / 2f64.powi(k))
}

pub fn phi_k(k: i32, x: f64) -> f64 {
    phi_leq(k, x) - phi_leq(k - 1, x)
}

/// Dealiased-product oracle: truncated linear convolution of the coefficient
/// sequences, `(1/2L) Σ_l f̂(m-l) ĝ(l)`, Nyquist excluded.
pub fn direct_product(f: &ComplexField, g: &ComplexField) -> Vec<Complex64> {
    weighted_convolution(f, g, |_, _| 1.0)
}

/// `(1/2L) Σ_l w(|ξ_m - ξ_l|, |ξ_l|) f̂(m-l) ĝ(l)` over in-band modes.
pub fn weighted_convolution(
    f: &ComplexField,
    g: &ComplexField,
    w: impl Fn(f64, f64) -> f64,
) -> Vec<Complex64> {
    let grid = f.grid();
    let n = grid.n() as i64;
    let h = n / 2;
    let dxi = grid.dxi();
    let slot = |m: i64| m.rem_euclid(n) as usize;
    // w depends only on |m-l| and |l|; tabulate once.
    let table: Vec<Vec<f64>> = (0..h)
        .map(|a| (0..h).map(|b| w(a as f64 * dxi, b as f64 * dxi)).collect())
        .collect();
    let mut out = vec![ZERO; grid.n()];
    for m in (-h + 1)..h {
        let mut acc = ZERO;
        for l in (-h + 1)..h {
            let d = m - l;
            if d <= -h || d >= h {
                continue;
            }
            let wt = table[d.unsigned_abs() as usize][l.unsigned_abs() as usize];
            if wt != 0.0 {
                acc += f.coeffs()[slot(d)] * g.coeffs()[slot(l)] * wt;
            }
        }
        out[slot(m)] = acc * (0.5 / grid.half_length());
    }
    out
}

/// `T_f g` by direct summation of `Σ_j φ_{≤j-7}(|ξ-η|) φ_j(|η|)` over a wide shell range.
pub fn direct_paraproduct(f: &ComplexField, g: &ComplexField) -> Vec<Complex64> {
    weighted_convolution(f, g, |a, b| {
        (-30..=30).map(|j| phi_leq(j - 7, a) * phi_k(j, b)).sum()
    })
}

/// `R(f,g)` by direct summation of `Σ_j φ_j(|ξ-η|) Σ_{|i-j|≤6} φ_i(|η|)`.
pub fn direct_remainder(f: &ComplexField, g: &ComplexField) -> Vec<Complex64> {
    weighted_convolution(f, g, |a, b| {
        (-30..=30)
            .map(|j| phi_k(j, a) * (j - 6..=j + 6).map(|i| phi_k(i, b)).sum::<f64>())
            .sum()
    })
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `Λ_ε(ξ) = |ξ| - ε|ξ|³` from the definition.
pub fn lambda(xi: f64, eps: f64) -> f64 {
    xi.abs() * (1.0 - eps * xi * xi)
}

pub fn phase(mu: f64, nu: f64, eps: f64, xi: f64, eta: f64) -> f64 {
    -lambda(xi, eps) + mu * lambda(xi - eta, eps) + nu * lambda(eta, eps)
}

/// Exact linear flow of `∂tζ = -(1+ε∂x²)∂x v`, `∂tv = -(1+ε∂x²)∂x ζ` per mode:
/// `(ζ̂ ± v̂)(t) = e^{∓iξ(1-εξ²)t} (ζ̂ ± v̂)(0)`.
pub fn exact_linear(
    grid: &Grid,
    zeta: &[Complex64],
    v: &[Complex64],
    eps: f64,
    t: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut z = Vec::with_capacity(zeta.len());
    let mut w = Vec::with_capacity(zeta.len());
    for (k, &xi) in grid.frequencies().iter().enumerate() {
        let om = xi * (1.0 - eps * xi * xi) * t;
        let p = (zeta[k] + v[k]) * Complex64::from_polar(1.0, -om);
        let m = (zeta[k] - v[k]) * Complex64::from_polar(1.0, om);
        z.push((p + m) * 0.5);
        w.push((p - m) * 0.5);
    }
    (z, w)
}

/// Midpoint count of `{|φ| ≤ δ}` over `{η ∈ [η0, η1], lo(η) ≤ ξ ≤ hi(η)}`.
pub fn brute_measure(
    phi: impl Fn(f64, f64) -> f64,
    delta: f64,
    eta: (f64, f64),
    lo: impl Fn(f64) -> f64,
    hi: impl Fn(f64) -> f64,
    n_eta: usize,
    n_xi: usize,
) -> f64 {
    let de = (eta.1 - eta.0) / n_eta as f64;
    let mut total = 0.0;
    for i in 0..n_eta {
        let y = eta.0 + (i as f64 + 0.5) * de;
        let (a, b) = (lo(y), hi(y));
        if b <= a {
            continue;
        }
        let dx = (b - a) / n_xi as f64;
        let hits = (0..n_xi)
            .filter(|&j| phi(a + (j as f64 + 0.5) * dx, y).abs() <= delta)
            .count();
        total += hits as f64 * dx * de;
    }
    total
}

pub fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}
