//! Dispersion relations, quadratic phases, modulation functions and
//! small-modulation set measures.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::Model;

/// `Λ_ε(ξ) = |ξ| - ε|ξ|³`.
pub fn lambda_dispersion(xi: f64, model: Model) -> f64 {
    let a = xi.abs();
    a - model.eps() * a * a * a
}

/// Linear eigenvalues `λ± = ±i|ξ| sqrt((1-εaξ²)(1-εcξ²)/((1+εdξ²)(1+εbξ²)))` of the
/// abcd system, principal square root.
pub fn abcd_eigenvalues(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    eps: f64,
    xi: f64,
) -> Result<(Complex64, Complex64)> {
    let x2 = xi * xi;
    let den = (1.0 + eps * d * x2) * (1.0 + eps * b * x2);
    if den == 0.0 {
        return Err(Error::Domain(format!("vanishing denominator at xi = {xi}")));
    }
    let r = (1.0 - eps * a * x2) * (1.0 - eps * c * x2) / den;
    let root = Complex64::new(r, 0.0).sqrt();
    let lp = Complex64::new(0.0, xi.abs()) * root;
    Ok((lp, -lp))
}

/// Linear well-posedness of the abcd system.
pub fn wellposed_predicate(a: f64, b: f64, c: f64, d: f64) -> bool {
    (a <= 0.0 && c <= 0.0 && b >= 0.0 && d >= 0.0) || (a == c && a > 0.0 && b >= 0.0 && d >= 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSpec {
    pub mu: Sign,
    pub nu: Sign,
    pub model: Model,
}

impl PhaseSpec {
    pub fn new(mu: Sign, nu: Sign, model: Model) -> PhaseSpec {
        PhaseSpec { mu, nu, model }
    }
}

/// `Φ_{μ,ν}(ξ,η) = -Λ(ξ) + μΛ(ξ-η) + νΛ(η)`.
pub fn phase_direct(spec: PhaseSpec, xi: f64, eta: f64) -> f64 {
    let l = |x| lambda_dispersion(x, spec.model);
    -l(xi) + spec.mu.value() * l(xi - eta) + spec.nu.value() * l(eta)
}

/// Closed-form phase value; `delegated` is set on the degenerate lines where the
/// direct formula is used instead.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedPhase {
    pub value: f64,
    pub delegated: bool,
}

/// Case-split closed forms of the phases.
pub fn phase_closed(spec: PhaseSpec, xi: f64, eta: f64) -> ClosedPhase {
    if xi == 0.0 || eta == 0.0 || xi == eta {
        return ClosedPhase {
            value: phase_direct(spec, xi, eta),
            delegated: true,
        };
    }
    let e = spec.model.eps();
    let value = match spec.model {
        Model::Unit => match (spec.mu, spec.nu) {
            (Sign::Plus, Sign::Plus) => closed_pp(e, xi, eta),
            (Sign::Minus, Sign::Minus) => closed_mm(e, xi, eta),
            (Sign::Minus, Sign::Plus) => -closed_pp(e, eta, xi),
            (Sign::Plus, Sign::Minus) => -closed_pp(e, eta - xi, eta),
        },
        Model::Eps(_) => match (spec.mu, spec.nu) {
            (Sign::Plus, Sign::Minus) => closed_pm_eps(e, xi, eta),
            (Sign::Minus, Sign::Minus) => closed_mm(e, xi, eta),
            (Sign::Plus, Sign::Plus) => -closed_pm_eps(e, eta - xi, eta),
            (Sign::Minus, Sign::Plus) => closed_pm_eps(e, xi - eta, xi),
        },
    };
    ClosedPhase {
        value,
        delegated: false,
    }
}

fn closed_pp(e: f64, xi: f64, eta: f64) -> f64 {
    let a = (xi - eta).abs();
    let b = eta.abs();
    if (xi - eta) * eta > 0.0 {
        3.0 * e * xi.abs() * a * b
    } else {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        -0.5 * lo * (e * (3.0 * xi * xi + 3.0 * hi * hi + lo * lo) - 4.0)
    }
}

fn closed_mm(e: f64, xi: f64, eta: f64) -> f64 {
    let a = (xi - eta).abs();
    let b = eta.abs();
    if (xi - eta) * eta > 0.0 {
        0.5 * xi.abs() * (e * (xi * xi + 3.0 * a * a + 3.0 * b * b) - 4.0)
    } else {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        0.5 * hi * (e * (3.0 * xi * xi + 3.0 * lo * lo + hi * hi) - 4.0)
    }
}

fn closed_pm_eps(e: f64, xi: f64, eta: f64) -> f64 {
    let a = xi.abs();
    let b = eta.abs();
    if xi * eta < 0.0 {
        -3.0 * e * a * b * (xi - eta).abs()
    } else {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let d = xi - eta;
        0.5 * lo * (3.0 * e * d * d + 3.0 * e * hi * hi + e * lo * lo - 4.0)
    }
}

/// Reduced quadratics extracted from the phases on their branches.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Modulation {
    /// `φ_{+,+} = ξ² + η² - ξη/2 - 1`, with `Φ_{+,+} = -2|ξ-η| φ_{+,+}` on
    /// `{(ξ-η)η < 0, |ξ-η| ≤ |η|}`.
    PpOpposite,
    /// `φ_{+,-} = η² - (3/2)ξη + (3/2)ξ² - 1`, with `Φ_{+,-} = 2|η| φ_{+,-}` on
    /// `{ξη > 0, |ξ| > |η|}`.
    PmAligned,
    /// `φ^ε_{+,+} = ε(ξ² + η² - ξη/2) - 1` on the same set as `PpOpposite`.
    PpOppositeEps(f64),
    /// Piecewise `φ^ε_{+,-}` with `Φ^ε_{+,-} = ½ min(|ξ|,|η|) φ^ε_{+,-}` on `{ξη > 0}`.
    PmAlignedEps(f64),
    /// `3ξ² + 3max(|ξ-η|²,|η|²) + min(|ξ-η|²,|η|²) - 4`, with
    /// `Φ_{+,+} = -½ min(|ξ-η|,|η|) φ` on `{(ξ-η)η < 0}`.
    PpWide,
}

impl Modulation {
    pub fn label(&self) -> String {
        match self {
            Modulation::PpOpposite => "pp_opposite".into(),
            Modulation::PmAligned => "pm_aligned".into(),
            Modulation::PpOppositeEps(e) => format!("pp_opposite_eps({e})"),
            Modulation::PmAlignedEps(e) => format!("pm_aligned_eps({e})"),
            Modulation::PpWide => "pp_wide".into(),
        }
    }

    /// Phase whose reduced form this is.
    pub fn phase(&self) -> PhaseSpec {
        match *self {
            Modulation::PpOpposite | Modulation::PpWide => {
                PhaseSpec::new(Sign::Plus, Sign::Plus, Model::Unit)
            }
            Modulation::PmAligned => PhaseSpec::new(Sign::Plus, Sign::Minus, Model::Unit),
            Modulation::PpOppositeEps(e) => PhaseSpec::new(Sign::Plus, Sign::Plus, Model::Eps(e)),
            Modulation::PmAlignedEps(e) => PhaseSpec::new(Sign::Plus, Sign::Minus, Model::Eps(e)),
        }
    }

    /// Prefactor `p` with `Φ = p · φ` on the kind's region.
    pub fn prefactor(&self, xi: f64, eta: f64) -> f64 {
        match self {
            Modulation::PpOpposite | Modulation::PpOppositeEps(_) => -2.0 * (xi - eta).abs(),
            Modulation::PmAligned => 2.0 * eta.abs(),
            Modulation::PmAlignedEps(_) => 0.5 * xi.abs().min(eta.abs()),
            Modulation::PpWide => -0.5 * (xi - eta).abs().min(eta.abs()),
        }
    }

    /// Whether `(ξ, η)` lies in the set where the factorization holds.
    pub fn in_region(&self, xi: f64, eta: f64) -> bool {
        match self {
            Modulation::PpOpposite | Modulation::PpOppositeEps(_) => {
                (xi - eta) * eta < 0.0 && (xi - eta).abs() <= eta.abs()
            }
            Modulation::PmAligned => xi * eta > 0.0 && xi.abs() > eta.abs(),
            Modulation::PmAlignedEps(_) => xi * eta > 0.0,
            Modulation::PpWide => (xi - eta) * eta < 0.0,
        }
    }
}

pub fn modulation_value(kind: Modulation, xi: f64, eta: f64) -> f64 {
    match kind {
        Modulation::PpOpposite => xi * xi + eta * eta - 0.5 * xi * eta - 1.0,
        Modulation::PmAligned => eta * eta - 1.5 * xi * eta + 1.5 * xi * xi - 1.0,
        Modulation::PpOppositeEps(e) => e * (xi * xi + eta * eta - 0.5 * xi * eta) - 1.0,
        Modulation::PmAlignedEps(e) => {
            if xi.abs() > eta.abs() {
                6.0 * e * xi * xi - 6.0 * e * xi * eta + 4.0 * e * eta * eta - 4.0
            } else {
                6.0 * e * eta * eta - 6.0 * e * xi * eta + 4.0 * e * xi * xi - 4.0
            }
        }
        Modulation::PpWide => {
            let a = (xi - eta) * (xi - eta);
            let b = eta * eta;
            3.0 * xi * xi + 3.0 * a.max(b) + a.min(b) - 4.0
        }
    }
}

/// Jacobian of the coordinate change `Ψ` that straightens the modulation.
///
/// `PpOpposite`: `∂φ/∂ξ = 2ξ - η/2`; `PmAligned`: `∂φ/∂η = 2η - 3ξ/2`;
/// `PmAlignedEps`: `∂φ/∂ξ = ε(12ξ - 6η)`; `PpWide`: `∂φ/∂η`, which is
/// `8η - 2ξ` for `ξη > 0` and `8η - 6ξ` for `ξη < 0`.
pub fn jacobian_psi(kind: Modulation, xi: f64, eta: f64) -> f64 {
    match kind {
        Modulation::PpOpposite => 2.0 * xi - 0.5 * eta,
        Modulation::PpOppositeEps(e) => e * (2.0 * xi - 0.5 * eta),
        Modulation::PmAligned => 2.0 * eta - 1.5 * xi,
        Modulation::PmAlignedEps(e) => {
            if xi.abs() > eta.abs() {
                e * (12.0 * xi - 6.0 * eta)
            } else {
                e * (12.0 * eta - 6.0 * xi)
            }
        }
        Modulation::PpWide => {
            if xi * eta > 0.0 {
                8.0 * eta - 2.0 * xi
            } else {
                8.0 * eta - 6.0 * xi
            }
        }
    }
}

/// Jacobian divided by the scale it is comparable to: `η` for the unit model and
/// `εη` for the ε model.
pub fn jacobian_ratio(kind: Modulation, xi: f64, eta: f64) -> f64 {
    let scale = match kind {
        Modulation::PpOppositeEps(e) | Modulation::PmAlignedEps(e) => e * eta,
        _ => eta,
    };
    jacobian_psi(kind, xi, eta) / scale
}

/// `D = floor(exponent · log₂(1/ε))`.
pub fn cutoff_d(eps: f64, exponent: f64) -> Result<u32> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!(
            "cutoff D needs 0 < eps < 1, got {eps}"
        )));
    }
    Ok((exponent * (1.0 / eps).log2() + 1e-12).floor().max(0.0) as u32)
}

/// Frequency region `{η ∈ [η0, η1], a_lo η + b_lo ≤ ξ ≤ a_hi η + b_hi}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub label: String,
    pub eta: (f64, f64),
    pub xi_lo: (f64, f64),
    pub xi_hi: (f64, f64),
}

impl Region {
    pub fn rectangle(label: &str, xi: (f64, f64), eta: (f64, f64)) -> Region {
        Region {
            label: label.into(),
            eta,
            xi_lo: (0.0, xi.0),
            xi_hi: (0.0, xi.1),
        }
    }

    /// `{η ∈ [1/4, 2⁶], (31/32)η ≤ ξ < η}`.
    pub fn s_plus() -> Region {
        Region {
            label: "S_plus".into(),
            eta: (0.25, 64.0),
            xi_lo: (31.0 / 32.0, 0.0),
            xi_hi: (1.0, 0.0),
        }
    }

    /// `{η ∈ [1/4, 2⁶], η < ξ ≤ (33/32)η}`.
    pub fn s_greater() -> Region {
        Region {
            label: "S_greater".into(),
            eta: (0.25, 64.0),
            xi_lo: (1.0, 0.0),
            xi_hi: (33.0 / 32.0, 0.0),
        }
    }

    /// `{η < ξ ≤ (33/32)η, 1/4 ≤ √ε η ≤ 2⁶}`.
    pub fn s_eps_greater(eps: f64) -> Region {
        let s = eps.sqrt();
        Region {
            label: format!("S_eps_greater({eps})"),
            eta: (0.25 / s, 64.0 / s),
            xi_lo: (1.0, 0.0),
            xi_hi: (33.0 / 32.0, 0.0),
        }
    }

    /// `{0 < ξ < η, |ξ-η| ≥ 2^{-7}η, η ∈ [2^{-10}, 8]}`.
    pub fn s1_prime_plus() -> Region {
        Region {
            label: "S1_prime_plus".into(),
            eta: (2f64.powi(-10), 8.0),
            xi_lo: (0.0, 0.0),
            xi_hi: (1.0 - 2f64.powi(-7), 0.0),
        }
    }

    fn xi_bounds(&self, eta: f64) -> (f64, f64) {
        (
            self.xi_lo.0 * eta + self.xi_lo.1,
            self.xi_hi.0 * eta + self.xi_hi.1,
        )
    }
}

/// Result of a set-measure quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measure {
    pub value: f64,
    /// Number of η cells in the final refinement.
    pub resolution: usize,
    pub converged: bool,
}

const INNER_CELLS: usize = 64;
const MAX_RESOLUTION: usize = 1 << 22;

/// Lebesgue measure of `{|φ| ≤ 2^{-D}}` in `region`.
///
/// Midpoint rule in η, starting at `base_resolution` cells and doubling until two
/// consecutive refinements change the value by less than 1%; in ξ the admissible
/// set is resolved exactly by bracketing the level crossings of `φ = ±2^{-D}`.
pub fn small_modulation_measure(
    kind: Modulation,
    d: i32,
    region: &Region,
    base_resolution: usize,
) -> Measure {
    let delta = 2f64.powi(-d);
    let (e0, e1) = region.eta;
    if e1 <= e0 {
        return Measure {
            value: 0.0,
            resolution: 0,
            converged: true,
        };
    }
    let mut n = base_resolution.max(16);
    let mut prev = eta_midpoint(kind, delta, region, n);
    let mut calm = 0;
    loop {
        let m2 = n * 2;
        let next = eta_midpoint(kind, delta, region, m2);
        let change = if next == 0.0 && prev == 0.0 {
            0.0
        } else {
            (next - prev).abs() / next.abs().max(prev.abs())
        };
        n = m2;
        prev = next;
        calm = if change < 0.01 { calm + 1 } else { 0 };
        if calm >= 2 || n >= MAX_RESOLUTION {
            return Measure {
                value: next,
                resolution: n,
                converged: calm >= 2,
            };
        }
    }
}

fn eta_midpoint(kind: Modulation, delta: f64, region: &Region, n: usize) -> f64 {
    let (e0, e1) = region.eta;
    let h = (e1 - e0) / n as f64;
    let lengths: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let eta = e0 + (i as f64 + 0.5) * h;
            let (lo, hi) = region.xi_bounds(eta);
            level_set_length(|x| modulation_value(kind, x, eta), delta, lo, hi)
        })
        .collect();
    lengths.iter().sum::<f64>() * h
}

/// Length of `{x ∈ [lo, hi] : |f(x)| ≤ delta}` for `f` with well-separated level crossings.
fn level_set_length(f: impl Fn(f64) -> f64, delta: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let step = (hi - lo) / INNER_CELLS as f64;
    let mut breaks = vec![lo, hi];
    let mut a = lo;
    let mut fa = f(a);
    for k in 1..=INNER_CELLS {
        let b = if k == INNER_CELLS {
            hi
        } else {
            lo + k as f64 * step
        };
        let fb = f(b);
        for level in [delta, -delta] {
            if (fa - level) * (fb - level) < 0.0 {
                breaks.push(bisect(&f, level, a, b));
            }
        }
        a = b;
        fa = fb;
    }
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breaks
        .windows(2)
        .filter(|w| f(0.5 * (w[0] + w[1])).abs() <= delta)
        .map(|w| w[1] - w[0])
        .sum()
}

fn bisect(f: &impl Fn(f64) -> f64, level: f64, mut a: f64, mut b: f64) -> f64 {
    let sa = (f(a) - level).signum();
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) - level).signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT_PP: PhaseSpec = PhaseSpec {
        mu: Sign::Plus,
        nu: Sign::Plus,
        model: Model::Unit,
    };

    #[test]
    fn dispersion_values() {
        assert_eq!(lambda_dispersion(1.0, Model::Unit), 0.0);
        assert_eq!(lambda_dispersion(2.0, Model::Unit), -6.0);
        assert_eq!(lambda_dispersion(2.0, Model::Eps(0.25)), 0.0);
    }

    #[test]
    fn eigenvalues_and_predicate() {
        let (p, m) = abcd_eigenvalues(1.0, 0.0, 1.0, 0.0, 1.0, 2.0).unwrap();
        assert!((p - Complex64::new(0.0, 6.0)).norm() < 1e-14);
        assert!((m + p).norm() == 0.0);
        assert!(wellposed_predicate(1.0, 0.0, 1.0, 0.0));
        assert!(!wellposed_predicate(1.0, 0.0, 2.0, 0.0));
        assert!(wellposed_predicate(-1.0, 1.0, -0.5, 2.0));
        assert!(abcd_eigenvalues(0.0, -1.0, 0.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn direct_examples() {
        assert_eq!(phase_direct(UNIT_PP, 3.0, 1.0), 18.0);
        assert_eq!(phase_direct(UNIT_PP, 1.0, 2.0), -6.0);
        let mm = PhaseSpec::new(Sign::Minus, Sign::Minus, Model::Unit);
        assert_eq!(phase_direct(mm, 2.0, 1.0), 6.0);
    }

    #[test]
    fn closed_examples() {
        assert_eq!(phase_closed(UNIT_PP, 3.0, 1.0).value, 18.0);
        assert_eq!(phase_closed(UNIT_PP, 1.0, 2.0).value, -6.0);
        let mp = PhaseSpec::new(Sign::Minus, Sign::Plus, Model::Unit);
        assert_eq!(phase_closed(mp, 1.0, 3.0).value, -18.0);
        let deg = phase_closed(UNIT_PP, 1.0, 1.0);
        assert!(deg.delegated && deg.value == phase_direct(UNIT_PP, 1.0, 1.0));
    }

    #[test]
    fn modulation_examples() {
        let r = (2.0f64 / 3.0).sqrt();
        assert!(modulation_value(Modulation::PpOpposite, r, r).abs() < 1e-15);
        assert_eq!(modulation_value(Modulation::PpOpposite, 1.0, 2.0), 3.0);
        let k = Modulation::PpOpposite;
        assert_eq!(k.prefactor(1.0, 2.0) * modulation_value(k, 1.0, 2.0), -6.0);
        let tiny = Modulation::PmAlignedEps(1e-14);
        assert!((modulation_value(tiny, 3.0, 2.0) + 4.0).abs() < 1e-12);
    }

    #[test]
    fn jacobian_examples() {
        assert_eq!(jacobian_psi(Modulation::PpOpposite, 1.0, 1.0), 1.5);
        assert_eq!(jacobian_psi(Modulation::PmAligned, 1.0, 1.0), 0.5);
        assert_eq!(jacobian_psi(Modulation::PmAlignedEps(0.25), 2.0, 2.0), 3.0);
    }

    #[test]
    fn cutoff_examples() {
        assert_eq!(cutoff_d(0.125, 2.0 / 3.0).unwrap(), 2);
        assert_eq!(cutoff_d(2f64.powi(-6), 5.0 / 6.0).unwrap(), 5);
        assert_eq!(cutoff_d(0.1, 2.0 / 3.0).unwrap(), 2);
        assert!(cutoff_d(1.0, 2.0 / 3.0).is_err());
    }

    #[test]
    fn level_set_length_linear() {
        let l = level_set_length(|x| x, 0.1, -1.0, 1.0);
        assert!((l - 0.2).abs() < 1e-14);
        assert_eq!(level_set_length(|x| x + 5.0, 0.1, -1.0, 1.0), 0.0);
    }

    #[test]
    fn empty_region_measure() {
        let r = Region::rectangle("empty", (0.0, 1.0), (2.0, 2.0));
        assert_eq!(
            small_modulation_measure(Modulation::PpOpposite, 4, &r, 64).value,
            0.0
        );
    }
}
