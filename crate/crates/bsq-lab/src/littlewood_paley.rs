//! Dyadic cutoffs, Littlewood–Paley projections and Bony para-products.
//!
//! `φ` equals 1 on `[-5/4, 5/4]`, vanishes outside `[-3/2, 3/2]` and is glued by the
//! smooth step `ψ(t) = b(t)/(b(t)+b(1-t))`, `b(t) = e^{-1/t}`. Shells are
//! `φ_k(x) = φ(x/2^k) - φ(x/2^{k-1})`.
//!
//! ```
//! use bsq_lab::littlewood_paley::{phi_base, shell_weight, Shell};
//! assert_eq!(phi_base(1.0), 1.0);
//! assert_eq!(shell_weight(Shell::K(0), 1.0), 1.0);
//! let total: f64 = (-20..=20).map(|k| shell_weight(Shell::K(k), 3.7)).sum();
//! assert!((total - 1.0).abs() < 1e-14);
//! ```

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::spectral::{ComplexField, Grid, ProductSum};

pub const PLATEAU: f64 = 1.25;
pub const SUPPORT: f64 = 1.5;

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn smooth_step(t: f64) -> f64 {
    let a = bump(t);
    a / (a + bump(1.0 - t))
}

/// The base cutoff `φ`.
pub fn phi_base(x: f64) -> f64 {
    let a = x.abs();
    if a <= PLATEAU {
        1.0
    } else if a >= SUPPORT {
        0.0
    } else {
        smooth_step((SUPPORT - a) / (SUPPORT - PLATEAU))
    }
}

/// Named cutoff of the dyadic family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shell {
    /// `φ_k`
    K(i32),
    /// `φ_{≤k} = φ(x/2^k)`
    Leq(i32),
    /// `φ_{≥k} = 1 - φ_{≤k-1}`
    Geq(i32),
    /// `φ_I = Σ_{k∈[lo,hi]} φ_k`
    Interval(i32, i32),
}

fn leq(k: i32, x: f64) -> f64 {
    phi_base(x * 2f64.powi(-k))
}

pub fn shell_weight(kind: Shell, x: f64) -> f64 {
    match kind {
        Shell::K(k) => leq(k, x) - leq(k - 1, x),
        Shell::Leq(k) => leq(k, x),
        Shell::Geq(k) => 1.0 - leq(k - 1, x),
        Shell::Interval(lo, hi) => {
            if hi < lo {
                0.0
            } else {
                leq(hi, x) - leq(lo - 1, x)
            }
        }
    }
}

/// Shells that can carry resolvable modes of `grid`.
pub fn shell_range(grid: &Grid) -> (i32, i32) {
    let lo = grid.dxi().log2().floor() as i32 - 1;
    let hi = grid.xi_max().log2().ceil() as i32 + 1;
    (lo, hi)
}

/// `Σ_j φ_{≤j-7}(a) φ_j(b)`: the cutoff of `T_f g` with `a = |ξ-η|`, `b = |η|`.
pub fn paraproduct_weight(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let k0 = b.log2().floor() as i32;
    (k0 - 2..=k0 + 2)
        .map(|j| leq(j - 7, a) * shell_weight(Shell::K(j), b))
        .sum()
}

/// `Σ_j φ_j(a) φ_{[j-6,j+6]}(b)`: the cutoff of `R(f,g)` with `a = |ξ-η|`, `b = |η|`.
pub fn remainder_weight(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let k0 = a.log2().floor() as i32;
    (k0 - 2..=k0 + 2)
        .map(|j| shell_weight(Shell::K(j), a) * shell_weight(Shell::Interval(j - 6, j + 6), b))
        .sum()
}

/// Tabulated `φ(|ξ_m|/2^k)` on a grid.
pub(crate) struct ShellTable {
    lo: i32,
    rows: Vec<Vec<f64>>,
}

impl ShellTable {
    pub(crate) fn new(grid: &Grid) -> ShellTable {
        let (jmin, jmax) = shell_range(grid);
        let lo = jmin - 8;
        let hi = jmax + 8;
        let rows = (lo..=hi)
            .map(|k| grid.frequencies().iter().map(|x| leq(k, x.abs())).collect())
            .collect();
        ShellTable { lo, rows }
    }

    fn leq(&self, k: i32) -> &[f64] {
        let i = (k - self.lo).clamp(0, self.rows.len() as i32 - 1);
        &self.rows[i as usize]
    }

    fn weights(&self, kind: Shell) -> Vec<f64> {
        match kind {
            Shell::K(k) => diff(self.leq(k), self.leq(k - 1)),
            Shell::Leq(k) => self.leq(k).to_vec(),
            Shell::Geq(k) => self.leq(k - 1).iter().map(|p| 1.0 - p).collect(),
            Shell::Interval(lo, hi) => {
                if hi < lo {
                    vec![0.0; self.rows[0].len()]
                } else {
                    diff(self.leq(hi), self.leq(lo - 1))
                }
            }
        }
    }
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn masked(c: &[Complex64], w: &[f64]) -> Vec<Complex64> {
    c.iter().zip(w).map(|(c, w)| c * *w).collect()
}

/// Littlewood–Paley projection with symbol `shell_weight(kind, |ξ|)`.
pub fn lp_project(u: &ComplexField, kind: Shell) -> ComplexField {
    let w: Vec<f64> = u
        .grid()
        .frequencies()
        .iter()
        .map(|x| shell_weight(kind, x.abs()))
        .collect();
    ComplexField::from_coeffs(u.grid(), masked(u.coeffs(), &w)).expect("same grid")
}

/// Para-product `T_f g = Σ_j P_{≤j-7} f · P_j g`.
pub fn paraproduct(f: &ComplexField, g: &ComplexField) -> Result<ComplexField> {
    f.grid().check(g.grid())?;
    let grid = f.grid();
    let table = grid.shells();
    let (jmin, jmax) = shell_range(grid);
    let mut acc = ProductSum::new(grid);
    for j in jmin..=jmax {
        let high = masked(g.coeffs(), &table.weights(Shell::K(j)));
        let low = masked(f.coeffs(), &table.weights(Shell::Leq(j - 7)));
        acc.add(&low, &high);
    }
    Ok(acc.finish())
}

/// Remainder `R(f,g) = Σ_j P_j f · P_{[j-6,j+6]} g`.
pub fn remainder(f: &ComplexField, g: &ComplexField) -> Result<ComplexField> {
    f.grid().check(g.grid())?;
    let grid = f.grid();
    let table = grid.shells();
    let (jmin, jmax) = shell_range(grid);
    let mut acc = ProductSum::new(grid);
    for j in jmin..=jmax {
        let a = masked(f.coeffs(), &table.weights(Shell::K(j)));
        let b = masked(g.coeffs(), &table.weights(Shell::Interval(j - 6, j + 6)));
        acc.add(&a, &b);
    }
    Ok(acc.finish())
}

/// SHA-256 of `φ` sampled on a fixed mesh, recorded in run manifests.
pub fn phi_hash() -> String {
    let mut h = Sha256::new();
    for i in 0..=4096 {
        let x = 2.0 * i as f64 / 4096.0;
        h.update(phi_base(x).to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
