//! Good unknowns, profiles, quadratic symbols and the symmetrized right-hand side.
//!
//! With `B^ε(f,g) = ½ T_f (1+ε∂x²)^{-1} φ_{≥6}(√ε|∂x|) g` the good unknowns are
//! `u = v + εB^ε(ζ,v)` and `V = ζ + i(∂x/|∂x|)u`. The unit model is `ε = 1`.
//! `V` then satisfies
//!
//! ```text
//! ∂tV - iΛ_ε V = -ε∂x(T_v V) + (iε/2)|∂x|(T_ζ V) + N_ζ + i(∂x/|∂x|) N_u
//! ```
//!
//! which [`decomposition_residual`] checks against the left side computed from the
//! PDE itself.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ensemble::{self, Band};
use crate::error::{Error, Result};
use crate::littlewood_paley::{
    paraproduct, paraproduct_weight, remainder, remainder_weight, shell_weight, Shell,
};
use crate::phases::{lambda_dispersion, phase_direct, PhaseSpec, Sign};
use crate::spectral::{
    dealias_and_mean, japanese, sign, ComplexField, DealiasRule, FourierMultiplier, Grid, Norm,
    RealField,
};
use crate::Model;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default Sobolev index of the energy.
pub const DEFAULT_N0: u32 = 4;

fn mean_free(f: &RealField) -> bool {
    if f.is_zero_mean() {
        return true;
    }
    let s = f.spectrum();
    s.coeffs()[0].norm() <= 1e-12 * s.max_abs_coeff().max(f64::MIN_POSITIVE)
}

/// The pair `(ζ, v)` of the Boussinesq system.
#[derive(Clone, Debug)]
pub struct StateZV {
    zeta: RealField,
    v: RealField,
    model: Model,
}

impl StateZV {
    pub fn new(zeta: RealField, v: RealField, model: Model) -> Result<StateZV> {
        zeta.grid().check(v.grid())?;
        if !mean_free(&zeta) || !mean_free(&v) {
            return Err(Error::Contract(
                "state components must have zero mean".into(),
            ));
        }
        Ok(StateZV { zeta, v, model })
    }

    pub fn zero(grid: &Grid, model: Model) -> StateZV {
        StateZV {
            zeta: RealField::zeros(grid),
            v: RealField::zeros(grid),
            model,
        }
    }

    pub fn zeta(&self) -> &RealField {
        &self.zeta
    }

    pub fn v(&self) -> &RealField {
        &self.v
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn grid(&self) -> &Grid {
        self.zeta.grid()
    }
}

/// Multipliers and bilinear building blocks on one grid for one ε.
struct Ops {
    eps: f64,
    dx: FourierMultiplier,
    abs: FourierMultiplier,
    hil: FourierMultiplier,
    helm: FourierMultiplier,
    inv: FourierMultiplier,
    lo: FourierMultiplier,
    hi: FourierMultiplier,
}

fn ap(f: &ComplexField, m: &FourierMultiplier) -> ComplexField {
    f.apply(m).expect("multiplier built on the same grid")
}

impl Ops {
    fn new(grid: &Grid, eps: f64) -> Ops {
        let se = eps.sqrt();
        Ops {
            eps,
            dx: FourierMultiplier::derivative(grid, 1),
            abs: FourierMultiplier::abs_derivative(grid),
            hil: FourierMultiplier::hilbert(grid),
            helm: FourierMultiplier::from_symbol(grid, "1+eps dx^2", |x| {
                Complex64::new(1.0 - eps * x * x, 0.0)
            }),
            inv: FourierMultiplier::masked_inverse_helmholtz(grid, eps),
            lo: FourierMultiplier::from_symbol(grid, "phi<=5", |x| {
                Complex64::new(shell_weight(Shell::Leq(5), se * x.abs()), 0.0)
            }),
            hi: FourierMultiplier::from_symbol(grid, "phi>=6", |x| {
                Complex64::new(shell_weight(Shell::Geq(6), se * x.abs()), 0.0)
            }),
        }
    }

    fn d(&self, f: &ComplexField) -> ComplexField {
        ap(f, &self.dx)
    }

    fn d2(&self, f: &ComplexField) -> ComplexField {
        self.d(&self.d(f))
    }

    fn abs(&self, f: &ComplexField) -> ComplexField {
        ap(f, &self.abs)
    }

    /// `i ∂x/|∂x|`.
    fn ih(&self, f: &ComplexField) -> ComplexField {
        ap(f, &self.hil).scale(I)
    }

    fn helm(&self, f: &ComplexField) -> ComplexField {
        ap(f, &self.helm)
    }

    fn lo(&self, f: &ComplexField) -> ComplexField {
        ap(f, &self.lo)
    }

    fn hi(&self, f: &ComplexField) -> ComplexField {
        ap(f, &self.hi)
    }

    fn inv(&self, f: &ComplexField) -> ComplexField {
        ap(f, &self.inv)
    }

    fn t(&self, f: &ComplexField, g: &ComplexField) -> ComplexField {
        paraproduct(f, g).expect("common grid")
    }

    fn r(&self, f: &ComplexField, g: &ComplexField) -> ComplexField {
        remainder(f, g).expect("common grid")
    }

    /// `B^ε(f, g)`.
    fn b(&self, f: &ComplexField, g: &ComplexField) -> ComplexField {
        self.t(f, &self.inv(g)).scale_re(0.5)
    }

    /// `[∂x², T_f] w`.
    fn comm(&self, f: &ComplexField, w: &ComplexField) -> ComplexField {
        self.d2(&self.t(f, w)) - self.t(f, &self.d2(w))
    }
}

/// Spectrum of `B(f,g)` (unit) or `B^ε(f,g)`; exposes the reality defect that
/// [`b_bilinear`] hides by taking a real part.
pub fn b_bilinear_spectrum(f: &RealField, g: &RealField, model: Model) -> Result<ComplexField> {
    f.grid().check(g.grid())?;
    if !mean_free(f) || !mean_free(g) {
        return Err(Error::Contract("B needs zero-mean inputs".into()));
    }
    let ops = Ops::new(f.grid(), model.eps());
    Ok(ops.b(&f.spectrum(), &g.spectrum()))
}

/// `B(f,g)` for the unit model, `B^ε(f,g)` for the ε model.
pub fn b_bilinear(f: &RealField, g: &RealField, model: Model) -> Result<RealField> {
    Ok(b_bilinear_spectrum(f, g, model)?.real_part_checked())
}

/// Good unknowns of a state.
#[derive(Clone, Debug)]
pub struct GoodState {
    pub zeta: RealField,
    pub u: RealField,
    /// `V = ζ + i(∂x/|∂x|)u` as a spectrum.
    pub big_v: ComplexField,
    /// `B(ζ,v)` (unit) or `εB^ε(ζ,v)`, so that `u = v + b_field`.
    pub b_field: RealField,
}

/// `ζ, v -> ζ, u, V`.
pub fn good_forward(state: &StateZV) -> GoodState {
    let ops = Ops::new(state.grid(), state.model.eps());
    let zh = state.zeta.spectrum();
    let b = ops.b(&zh, &state.v.spectrum()).scale_re(ops.eps);
    let b_field = b.real_part_checked();
    let u = state.v.add(&b_field);
    let big_v = &zh + &ops.ih(&u.spectrum());
    GoodState {
        zeta: state.zeta.clone(),
        u,
        big_v,
        b_field,
    }
}

/// Recovers `(ζ̂, û)` from `V`: `ζ = ½(V + V̄)`, `u = (i/2)(∂x/|∂x|)(V - V̄)`.
pub fn split_good_variable(big_v: &ComplexField) -> (ComplexField, ComplexField) {
    let bar = big_v.conj();
    let zeta = (big_v + &bar).scale_re(0.5);
    let h = FourierMultiplier::hilbert(big_v.grid());
    let u = ap(&(big_v - &bar), &h).scale(0.5 * I);
    (zeta, u)
}

const INVERSE_TOL: f64 = 1e-13;
const INVERSE_MAX_ITER: usize = 100;

/// Solves `u = v + εB^ε(ζ, v)` for `v` by fixed-point iteration.
pub fn good_inverse(zeta: &RealField, u: &RealField, model: Model) -> Result<RealField> {
    zeta.grid().check(u.grid())?;
    if !mean_free(zeta) || !mean_free(u) {
        return Err(Error::Contract(
            "good_inverse needs zero-mean inputs".into(),
        ));
    }
    let ops = Ops::new(zeta.grid(), model.eps());
    let zh = zeta.spectrum();
    let uh = u.spectrum();
    let scale = uh.norm(Norm::L2).max(f64::MIN_POSITIVE);
    let mut v = uh.clone();
    let mut prev_step = f64::INFINITY;
    let mut factor = 0.0;
    for it in 0..INVERSE_MAX_ITER {
        let next = &uh - &ops.b(&zh, &v).scale_re(ops.eps);
        let step = (&next - &v).norm(Norm::L2);
        v = next;
        if step <= INVERSE_TOL * scale {
            return Ok(v.real_part_checked());
        }
        if prev_step.is_finite() {
            factor = step / prev_step;
            if factor >= 1.0 && it >= 2 {
                return Err(Error::NonContraction {
                    factor,
                    iterations: it + 1,
                });
            }
        }
        prev_step = step;
    }
    Err(Error::NonContraction {
        factor,
        iterations: INVERSE_MAX_ITER,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `f = e^{-itΛ} V`
    ToProfile,
    /// `V = e^{itΛ} f`
    FromProfile,
}

pub fn profile_shift(v: &ComplexField, t: f64, model: Model, direction: Direction) -> ComplexField {
    let s = match direction {
        Direction::ToProfile => -1.0,
        Direction::FromProfile => 1.0,
    };
    v.map_symbol(|x| Complex64::from_polar(1.0, s * t * lambda_dispersion(x, model)))
}

/// Profile `f = e^{-itΛ}V` and its weighted version `g = ⟨∂x⟩^{N0} f`.
#[derive(Clone, Debug)]
pub struct ProfilePair {
    pub f: ComplexField,
    pub g: ComplexField,
    pub t: f64,
    pub n0: u32,
}

impl ProfilePair {
    pub fn new(big_v: &ComplexField, t: f64, model: Model, n0: u32) -> Result<ProfilePair> {
        check_n0(n0)?;
        let f = profile_shift(big_v, t, model, Direction::ToProfile);
        let g = f.map_weight(|x| japanese(x).powi(n0 as i32));
        Ok(ProfilePair { f, g, t, n0 })
    }
}

pub(crate) fn check_n0(n0: u32) -> Result<()> {
    if n0 < 4 {
        Err(Error::Config(format!("N0 ≥ 4 required, got {n0}")))
    } else {
        Ok(())
    }
}

/// Symbol families of the quadratic terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolFamily {
    S,
    Q,
    R,
    M,
    STilde,
    QTilde,
    RTilde,
    MTilde,
    /// `a_{μ,ν} = -q_{μ,ν}/(iΦ_{μ,ν})` on `{|Φ| ≥ max(2^{-D}, 1e-8)}`.
    NormalForm,
}

impl SymbolFamily {
    pub fn label(self) -> &'static str {
        match self {
            SymbolFamily::S => "s",
            SymbolFamily::Q => "q",
            SymbolFamily::R => "r",
            SymbolFamily::M => "m",
            SymbolFamily::STilde => "s~",
            SymbolFamily::QTilde => "q~",
            SymbolFamily::RTilde => "r~",
            SymbolFamily::MTilde => "m~",
            SymbolFamily::NormalForm => "a",
        }
    }
}

/// A fully specified symbol `σ_{μ,ν}`; `s` and `s~` exist only for `ν = +`,
/// `r` and `m` only for the unit model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolSpec {
    pub family: SymbolFamily,
    pub mu: Sign,
    pub nu: Sign,
    pub n0: u32,
    pub model: Model,
    pub d: Option<u32>,
}

/// Value of a symbol, or the marker for points excluded by its mask.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SymbolValue {
    Value(Complex64),
    Masked,
}

impl SymbolValue {
    pub fn value(self) -> Option<Complex64> {
        match self {
            SymbolValue::Value(z) => Some(z),
            SymbolValue::Masked => None,
        }
    }
}

impl SymbolSpec {
    pub fn new(
        family: SymbolFamily,
        mu: Sign,
        nu: Sign,
        n0: u32,
        model: Model,
        d: Option<u32>,
    ) -> Result<SymbolSpec> {
        use SymbolFamily::*;
        if matches!(family, S | STilde) && nu == Sign::Minus {
            return Err(Error::Domain("s is only defined for ν = +".into()));
        }
        if matches!(family, R | M | RTilde | MTilde) && model != Model::Unit {
            return Err(Error::Domain(
                "r and m belong to the unit-model decomposition".into(),
            ));
        }
        if family == NormalForm && d.is_none() {
            return Err(Error::Domain(
                "normal-form symbol needs the cutoff D".into(),
            ));
        }
        Ok(SymbolSpec {
            family,
            mu,
            nu,
            n0,
            model,
            d,
        })
    }

    pub fn eval(&self, xi: f64, eta: f64) -> SymbolValue {
        use SymbolFamily::*;
        let (m, nu, model, n0) = (self.mu, self.nu, self.model, self.n0 as i32);
        let w = |x: f64, p: i32| japanese(x).powi(p);
        let z = match self.family {
            S => sym_s(m, xi, eta, model),
            Q => sym_q(m, nu, xi, eta, model),
            R => sym_r(m, nu, xi, eta),
            M => sym_m(m, nu, xi, eta),
            STilde => {
                (w(xi, 2 * n0) * sym_s(m, xi, eta, model)
                    - w(eta, 2 * n0) * sym_s(m.flip(), eta, xi, model))
                    * (w(xi, -n0) * w(eta, -n0))
            }
            QTilde => sym_q(m, nu, xi, eta, model) * (w(eta, -n0) * w(xi, n0)),
            RTilde => sym_r(m, nu, xi, eta) * (w(xi, n0) * w(eta, -n0)),
            MTilde => sym_m(m, nu, xi, eta) * (w(xi, n0) * w(eta, -n0)),
            NormalForm => {
                let phi = phase_direct(PhaseSpec::new(m, nu, model), xi, eta);
                let thr = 2f64.powi(-(self.d.unwrap_or(0) as i32)).max(1e-8);
                if phi.is_nan() || phi.abs() < thr {
                    return SymbolValue::Masked;
                }
                -sym_q(m, nu, xi, eta, model) / (I * phi)
            }
        };
        SymbolValue::Value(z)
    }
}

/// `symbol_eval(spec, ξ, η)`.
pub fn symbol_eval(spec: &SymbolSpec, xi: f64, eta: f64) -> SymbolValue {
    spec.eval(xi, eta)
}

fn ppw(xi: f64, eta: f64) -> f64 {
    paraproduct_weight((xi - eta).abs(), eta.abs())
}

/// `s_{μ,+} = i(μ½ξ sign(ξ-η) + ¼|ξ|) Σ_j φ_{≤j-7}(ξ-η)φ_j(η)`, times ε for the ε model.
fn sym_s(mu: Sign, xi: f64, eta: f64, model: Model) -> Complex64 {
    let w = ppw(xi, eta);
    if w == 0.0 {
        return ZERO;
    }
    I * (model.eps() * w * (mu.value() * 0.5 * xi * sign(xi - eta) + 0.25 * xi.abs()))
}

/// `q_{μ,ν} = (i/8)(ν|ξ| - |ξ|) φ_{≤5}(√ε|η|) Σ_j φ_{≤j-7}(ξ-η)φ_j(η)`, times ε.
fn sym_q(_mu: Sign, nu: Sign, xi: f64, eta: f64, model: Model) -> Complex64 {
    let e = model.eps();
    let w = ppw(xi, eta) * shell_weight(Shell::Leq(5), e.sqrt() * eta.abs());
    if w == 0.0 {
        return ZERO;
    }
    I * (e * w * (nu.value() * xi.abs() - xi.abs()) / 8.0)
}

fn sym_r(mu: Sign, nu: Sign, xi: f64, eta: f64) -> Complex64 {
    let w = ppw(xi, eta) * shell_weight(Shell::Geq(6), eta.abs());
    if w == 0.0 {
        return ZERO;
    }
    let d = xi - eta;
    let den = 1.0 - eta * eta;
    let val = nu.value() * (xi * xi - eta * eta) / den * xi.abs() - d * sign(xi)
        + mu.value() * nu.value() * (1.0 - d * d) * d.abs() / den;
    I * (w * val / 8.0)
}

fn sym_m(mu: Sign, nu: Sign, xi: f64, eta: f64) -> Complex64 {
    let w = remainder_weight((xi - eta).abs(), eta.abs());
    if w == 0.0 {
        return ZERO;
    }
    let se = sign(eta);
    let val = 2.0 * nu.value() * xi * se + mu.value() * nu.value() * xi.abs() * sign(xi - eta) * se;
    I * (w * val / 8.0)
}

type KernelFn = dyn Fn(f64, f64) -> Complex64 + Send + Sync;
type MaskFn = dyn Fn(f64, f64) -> bool + Send + Sync;

/// A bilinear Fourier symbol `σ(ξ, η)` with an optional support mask.
#[derive(Clone)]
pub struct SymbolKernel {
    label: String,
    eval: Arc<KernelFn>,
    mask: Option<Arc<MaskFn>>,
}

impl std::fmt::Debug for SymbolKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolKernel")
            .field("label", &self.label)
            .field("masked", &self.mask.is_some())
            .finish()
    }
}

impl SymbolKernel {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> SymbolKernel {
        SymbolKernel {
            label: label.into(),
            eval: Arc::new(eval),
            mask: None,
        }
    }

    pub fn with_mask(
        mut self,
        mask: impl Fn(f64, f64) -> bool + Send + Sync + 'static,
    ) -> SymbolKernel {
        self.mask = Some(Arc::new(mask));
        self
    }

    /// Kernel of a symbol family; masked points of the normal form evaluate to zero.
    pub fn from_spec(spec: SymbolSpec) -> SymbolKernel {
        let label = format!(
            "{}_{}{}",
            spec.family.label(),
            sign_char(spec.mu),
            sign_char(spec.nu)
        );
        SymbolKernel::new(label, move |x, e| spec.eval(x, e).value().unwrap_or(ZERO))
            .with_mask(move |x, e| spec.eval(x, e) != SymbolValue::Masked)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `None` where the mask excludes `(ξ, η)`.
    pub fn eval(&self, xi: f64, eta: f64) -> Option<Complex64> {
        match &self.mask {
            Some(m) if !m(xi, eta) => None,
            _ => Some((self.eval)(xi, eta)),
        }
    }
}

fn sign_char(s: Sign) -> char {
    match s {
        Sign::Plus => '+',
        Sign::Minus => '-',
    }
}

/// Pseudo-product `ĥ(ξ) = (1/2L) Σ_η σ(ξ,η) F̂(ξ-η) Ĝ(η)`, O(n²), dealiased.
///
/// Shifted modes `ξ-η` outside the resolvable band count as zero.
pub fn bilinear_apply(
    kernel: &SymbolKernel,
    f: &ComplexField,
    g: &ComplexField,
) -> Result<ComplexField> {
    f.grid().check(g.grid())?;
    let grid = f.grid();
    let n = grid.n() as i64;
    let half = n / 2;
    let freqs = grid.frequencies();
    let fc = f.coeffs();
    let gc = g.coeffs();
    let active: Vec<usize> = (0..grid.n())
        .filter(|&k| gc[k] != ZERO && k != grid.nyquist_slot())
        .collect();
    let norm = 0.5 / grid.half_length();
    let out: Vec<Complex64> = (0..grid.n())
        .into_par_iter()
        .map(|j| {
            let mj = grid.mode_number(j);
            if mj == -half {
                return ZERO;
            }
            let xi = freqs[j];
            let mut acc = ZERO;
            for &k in &active {
                let d = mj - grid.mode_number(k);
                if d <= -half || d >= half {
                    continue;
                }
                let a = fc[grid.slot(d)];
                if a == ZERO {
                    continue;
                }
                if let Some(s) = kernel.eval(xi, freqs[k]) {
                    acc += s * a * gc[k];
                }
            }
            acc * norm
        })
        .collect();
    let h = ComplexField::from_coeffs(grid, out)?;
    Ok(dealias_and_mean(&h, Some(DealiasRule::TwoThirds), false))
}

/// Term groupings of the symmetrized right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grouping {
    /// Transport part plus `N_ζ + i(∂x/|∂x|)N_u`.
    Raw,
    /// `S + Q + R + M + L + C + N` (unit model).
    SevenTerm,
    /// `S^ε + Q^ε + L^ε + N^ε`.
    FourTerm,
}

impl Grouping {
    pub fn label(self) -> &'static str {
        match self {
            Grouping::Raw => "raw",
            Grouping::SevenTerm => "seven_term",
            Grouping::FourTerm => "four_term",
        }
    }
}

/// One named piece of the right-hand side.
#[derive(Clone, Debug)]
pub struct Term {
    pub name: &'static str,
    pub field: ComplexField,
}

/// Spectral ingredients shared by all groupings.
struct Pieces {
    ops: Ops,
    z: ComplexField,
    v: ComplexField,
    b: ComplexField,
    u: ComplexField,
    big_v: ComplexField,
    zt: ComplexField,
    vt: ComplexField,
    v2: ComplexField,
    zv: ComplexField,
}

impl Pieces {
    fn new(state: &StateZV) -> Pieces {
        let ops = Ops::new(state.grid(), state.model.eps());
        let e = ops.eps;
        let z = state.zeta.spectrum();
        let v = state.v.spectrum();
        let b = ops.b(&z, &v);
        let u = &v + &b.scale_re(e);
        let big_v = &z + &ops.ih(&u);
        let zv = z.product(&v);
        let v2 = v.product(&v);
        let zt = -(ops.helm(&ops.d(&v)) + ops.d(&zv).scale_re(e));
        let vt = -(ops.helm(&ops.d(&z)) + ops.d(&v2).scale_re(0.5 * e));
        Pieces {
            ops,
            z,
            v,
            b,
            u,
            big_v,
            zt,
            vt,
            v2,
            zv,
        }
    }

    /// `∂tV - iΛ_εV` from the PDE; the linear symbols cancel identically.
    fn lhs(&self) -> ComplexField {
        let o = &self.ops;
        let e = o.eps;
        let bt = o.b(&self.zt, &self.v) + o.b(&self.z, &self.vt);
        let nl_v = o.d(&self.v2).scale_re(-0.5 * e) + bt.scale_re(e);
        o.d(&self.zv).scale_re(-e) + o.helm(&o.d(&self.b)).scale_re(e) + o.ih(&nl_v)
    }

    fn transport(&self, a: &ComplexField) -> ComplexField {
        let o = &self.ops;
        let e = o.eps;
        o.d(&o.t(a, &self.big_v)).scale_re(-e)
            + o.abs(&o.t(&self.z, &self.big_v)).scale(0.5 * e * I)
    }

    fn n_zeta(&self) -> ComplexField {
        let o = &self.ops;
        let e = o.eps;
        let (z, v, b) = (&self.z, &self.v, &self.b);
        o.d(&o.t(z, &o.lo(&self.u))).scale_re(-0.5 * e)
            + o.d(&o.t(z, &o.hi(b))).scale_re(-0.5 * e * e)
            + o.d(&o.t(z, b)).scale_re(e * e)
            + o.d(&o.comm(z, &o.inv(v))).scale_re(0.5 * e * e)
            + o.d(&o.r(z, v)).scale_re(-e)
    }

    fn n_u(&self) -> ComplexField {
        let o = &self.ops;
        let e = o.eps;
        let (z, v, b) = (&self.z, &self.v, &self.b);
        o.d(&o.t(z, &o.lo(z))).scale_re(0.5 * e)
            + o.t(&o.d(z), &o.hi(z)).scale_re(0.5 * e)
            + o.d(&o.t(v, b)).scale_re(e * e)
            + o.d(&o.r(v, v)).scale_re(-0.5 * e)
            + o.b(&self.zt, v).scale_re(e)
            + o.b(z, &o.d(&self.v2)).scale_re(-0.5 * e * e)
    }

    fn raw(&self) -> Vec<Term> {
        vec![
            Term {
                name: "transport",
                field: self.transport(&self.v),
            },
            Term {
                name: "N_zeta",
                field: self.n_zeta(),
            },
            Term {
                name: "iH N_u",
                field: self.ops.ih(&self.n_u()),
            },
        ]
    }

    fn q(&self) -> ComplexField {
        let o = &self.ops;
        let e = o.eps;
        o.d(&o.t(&self.z, &o.lo(&self.u))).scale_re(-0.5 * e)
            + o.abs(&o.t(&self.z, &o.lo(&self.z))).scale(-0.5 * e * I)
    }

    fn l(&self) -> ComplexField {
        let o = &self.ops;
        o.d(&o.t(&self.b, &self.big_v)).scale_re(o.eps * o.eps)
    }

    fn four_term(&self) -> Vec<Term> {
        let o = &self.ops;
        let e = o.eps;
        let qz = o.d(&o.t(&self.z, &o.lo(&self.u))).scale_re(0.5 * e);
        let qu = o.d(&o.t(&self.z, &o.lo(&self.z))).scale_re(0.5 * e);
        let n = (self.n_zeta() + qz) + o.ih(&(self.n_u() - qu));
        vec![
            Term {
                name: "S",
                field: self.transport(&self.u),
            },
            Term {
                name: "Q",
                field: self.q(),
            },
            Term {
                name: "L",
                field: self.l(),
            },
            Term {
                name: "N",
                field: n,
            },
        ]
    }

    /// Unit-model grouping; every coefficient below has ε = 1.
    fn seven_term(&self) -> Vec<Term> {
        let o = &self.ops;
        let (z, v, b, u) = (&self.z, &self.v, &self.b, &self.u);
        let half_i = 0.5 * I;
        let lv = o.helm(&o.d(v));
        let lb = o.helm(&o.d(b));
        let lu = o.helm(&o.d(u));

        let r = o.d(&o.comm(z, &o.inv(u))).scale_re(0.5)
            + o.ih(&o.t(&o.d(z), &o.hi(z))).scale_re(0.5)
            - o.ih(&o.b(&lu, u));
        let m = -o.d(&o.r(z, u)) + o.abs(&o.r(u, u)).scale(half_i);
        let c = o.d(&o.t(z, b))
            - o.d(&o.t(z, &o.hi(b))).scale_re(0.5)
            - o.d(&o.comm(z, &o.inv(b))).scale_re(0.5)
            - o.abs(&o.t(v, b)).scale(I)
            + o.ih(&o.b(&lv, b))
            + o.ih(&o.b(&lb, v))
            - o.ih(&o.b(&o.d(&self.zv), v))
            + o.d(&o.r(z, b))
            - o.abs(&o.r(v, b)).scale(half_i)
            - o.abs(&o.r(b, v)).scale(half_i)
            - o.ih(&o.b(z, &o.d(&self.v2))).scale_re(0.5);
        let n = o.ih(&o.b(&lb, b)) - o.abs(&o.r(b, b)).scale(half_i);
        vec![
            Term {
                name: "S",
                field: self.transport(u),
            },
            Term {
                name: "Q",
                field: self.q(),
            },
            Term {
                name: "R",
                field: r,
            },
            Term {
                name: "M",
                field: m,
            },
            Term {
                name: "L",
                field: self.l(),
            },
            Term {
                name: "C",
                field: c,
            },
            Term {
                name: "N",
                field: n,
            },
        ]
    }
}

fn sum_terms(grid: &Grid, terms: &[Term]) -> ComplexField {
    let mut acc = ComplexField::zeros(grid);
    for t in terms {
        acc += &t.field;
    }
    acc
}

/// Ansatz `ε‖ζ‖_∞ ≤ 1/(2C)` with the measured constant `C` of the model.
pub fn check_ansatz(state: &StateZV) -> Result<()> {
    let cb = measured_c_b(state.model);
    let lhs = state.model.eps() * state.zeta.norm(Norm::Linf);
    let thr = 0.5 / cb;
    if lhs > thr {
        return Err(Error::Ansatz(format!(
            "eps*|zeta|_inf = {lhs:.4e} exceeds 1/(2 C_B) = {thr:.4e}"
        )));
    }
    Ok(())
}

/// Named pieces of `∂tV - iΛV` in the requested grouping.
pub fn rhs_terms(state: &StateZV, grouping: Grouping) -> Result<Vec<Term>> {
    check_ansatz(state)?;
    let p = Pieces::new(state);
    Ok(match grouping {
        Grouping::Raw => p.raw(),
        Grouping::FourTerm => p.four_term(),
        Grouping::SevenTerm => {
            if state.model != Model::Unit {
                return Err(Error::Domain(
                    "the seven-term grouping belongs to the unit model".into(),
                ));
            }
            p.seven_term()
        }
    })
}

/// `-ε∂x(T_vV) + (iε/2)|∂x|(T_ζV) + N_ζ + i(∂x/|∂x|)N_u`.
pub fn assemble_symmetrized_rhs(state: &StateZV) -> Result<ComplexField> {
    Ok(sum_terms(state.grid(), &rhs_terms(state, Grouping::Raw)?))
}

/// `∂tV - iΛ_εV` computed from the PDE through the chain rule on `B`.
pub fn nonlinear_dv(state: &StateZV) -> ComplexField {
    Pieces::new(state).lhs()
}

/// `‖∂tV - iΛV - RHS‖ / ‖∂tV - iΛV‖` in L², 0 when both vanish.
pub fn decomposition_residual(state: &StateZV, grouping: Grouping) -> Result<f64> {
    let terms = rhs_terms(state, grouping)?;
    let lhs = nonlinear_dv(state);
    let rhs = sum_terms(state.grid(), &terms);
    let den = lhs.norm(Norm::L2);
    let num = (&lhs - &rhs).norm(Norm::L2);
    Ok(if den == 0.0 { num } else { num / den })
}

/// `E = ‖ζ‖²_{H^{N0}} + ‖v‖²_{H^{N0}}` and `‖V‖²_{H^{N0}} / E` (1 when `E = 0`).
pub fn energy_functional(state: &StateZV, n0: u32) -> (f64, f64) {
    let s = n0 as f64;
    let e = state.zeta.norm(Norm::Sobolev(s)).powi(2) + state.v.norm(Norm::Sobolev(s)).powi(2);
    if e == 0.0 {
        return (0.0, 1.0);
    }
    let gv = good_forward(state);
    (e, gv.big_v.norm(Norm::Sobolev(s)).powi(2) / e)
}

/// `‖|∂x|^{-1} ∂t f‖_{H^{N0}}`; the profile derivative has the same modulus as
/// `∂tV - iΛV`.
pub fn profile_time_derivative_bound(state: &StateZV, n0: u32) -> f64 {
    nonlinear_dv(state)
        .map_weight(|x| if x == 0.0 { 0.0 } else { 1.0 / x.abs() })
        .norm(Norm::Sobolev(n0 as f64))
}

/// Empirical sup of `ε^{k/2}‖B(f,g)‖_{H^{s+k}} / (‖f‖_∞ ‖g‖_{H^s})`, `k ≤ 2`,
/// `s ∈ {-2, 0, 2}`, over a seeded ensemble (`ε = 1` for the unit model).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BConstant {
    pub value: f64,
    pub pairs: usize,
    pub seed: u64,
}

/// Reference grid on which `B` (or `B^ε`) is nontrivial and para-products have
/// room for their scale separation: `n = 2048`, `L = 8π√ε`.
pub fn c_b_reference_grid(model: Model) -> Grid {
    Grid::new(2048, 8.0 * std::f64::consts::PI * model.eps().sqrt()).expect("valid grid")
}

/// Sup of the ratio over `pairs` seeded pairs: `f` in the lowest modes, `g`
/// spread over the band where the masked inverse is active.
pub fn sample_c_b(model: Model, pairs: usize, seed: u64) -> BConstant {
    let grid = c_b_reference_grid(model);
    let mut rng = ensemble::rng(seed);
    let cut = grid.dealias_cutoff();
    let eps = model.eps();
    let se = eps.sqrt();
    let ratios: Vec<f64> = (0..pairs)
        .map(|i| {
            let f_band = Band {
                xi_min: 0.0,
                xi_max: 0.4 / se,
                decay: 0.0,
            };
            let g_band = Band {
                xi_min: [0.0, 30.0 / se, 60.0 / se][i % 3],
                xi_max: cut,
                decay: [0.0, 1.0, 2.0][(i / 3) % 3],
            };
            let f = ensemble::random_real(&grid, &mut rng, f_band, 1.0);
            let g = ensemble::random_real(&grid, &mut rng, g_band, 1.0);
            (f, g)
        })
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(f, g)| {
            let b = b_bilinear_spectrum(&f, &g, model).expect("zero-mean ensemble");
            let finf = f.norm(Norm::Linf);
            let mut sup: f64 = 0.0;
            for s in [-2.0, 0.0, 2.0] {
                let den = finf * g.norm(Norm::Sobolev(s));
                if den == 0.0 {
                    continue;
                }
                for k in 0..=2 {
                    let w = eps.powf(k as f64 / 2.0);
                    sup = sup.max(w * b.norm(Norm::Sobolev(s + k as f64)) / den);
                }
            }
            sup
        })
        .collect();
    BConstant {
        value: ratios.iter().copied().fold(0.0, f64::max),
        pairs,
        seed,
    }
}

pub const C_B_SEED: u64 = 0x00c0_ffee;
pub const C_B_PAIRS: usize = 500;

/// Measured `C_B` (unit) or `C_{B^ε}`, cached per ε.
pub fn measured_c_b(model: Model) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let key = model.eps().to_bits();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("cache lock").get(&key) {
        return *v;
    }
    let v = sample_c_b(model, C_B_PAIRS, C_B_SEED).value;
    cache.lock().expect("cache lock").insert(key, v);
    v
}
