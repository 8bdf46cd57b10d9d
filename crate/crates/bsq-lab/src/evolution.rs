//! Time integration in spectral space.
//!
//! The linear part is propagated exactly per mode; the quadratic terms are
//! handled by a Lawson (integrating-factor) RK4 scheme. With
//! `Λ̃(ξ) = ξ(1 - εξ²)` the Boussinesq pair evolves linearly by
//!
//! ```text
//! [ζ̂, v̂](t) = [[cos Λ̃t, -i sin Λ̃t], [-i sin Λ̃t, cos Λ̃t]] [ζ̂, v̂](0)
//! ```
//!
//! and the diagonal variables `u = (ζ+v)/2`, `w = (ζ-v)/2` by `e^{∓iΛ̃t}`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;

use crate::ensemble;
use crate::error::{Error, Result};
use crate::good_unknowns::{check_n0, StateZV, DEFAULT_N0};
use crate::spectral::{dealias_and_mean, ComplexField, DealiasRule, Grid, Norm, RealField};
use crate::Model;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// The integrated system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SystemKind {
    /// Unit-scale Boussinesq system.
    BsqUnit,
    /// ε-Boussinesq system.
    BsqEps(f64),
    /// Diagonal KdV-type system in `u = (ζ+v)/2`, `w = (ζ-v)/2`.
    KdvDiag(f64),
}

impl SystemKind {
    pub fn eps(&self) -> f64 {
        match self {
            SystemKind::BsqUnit => 1.0,
            SystemKind::BsqEps(e) | SystemKind::KdvDiag(e) => *e,
        }
    }

    pub fn model(&self) -> Model {
        match self {
            SystemKind::BsqUnit => Model::Unit,
            SystemKind::BsqEps(e) | SystemKind::KdvDiag(e) => {
                if *e == 1.0 {
                    Model::Unit
                } else {
                    Model::Eps(*e)
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.eps();
        if e > 0.0 && e <= 1.0 {
            Ok(())
        } else {
            Err(Error::Config(format!("epsilon = {e} must lie in (0, 1]")))
        }
    }

    pub fn label(&self) -> String {
        match self {
            SystemKind::BsqUnit => "bsq_unit".into(),
            SystemKind::BsqEps(e) => format!("bsq_eps({e})"),
            SystemKind::KdvDiag(e) => format!("kdv_diag({e})"),
        }
    }

    fn is_diag(&self) -> bool {
        matches!(self, SystemKind::KdvDiag(_))
    }
}

/// `Λ̃(ξ) = ξ(1 - εξ²)`.
pub fn signed_dispersion(xi: f64, eps: f64) -> f64 {
    xi * (1.0 - eps * xi * xi)
}

/// Integrator settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorSpec {
    pub dt: f64,
    /// Two-thirds rule on products; without it products are formed pointwise
    /// on the grid and alias.
    pub dealias: bool,
    /// Exit once `E_{N0}(t) > factor² E_{N0}(0)`.
    pub exit_norm_factor: f64,
    pub n0: u32,
    /// Disabling the quadratic terms leaves the exact linear flow.
    pub nonlinear: bool,
}

impl IntegratorSpec {
    /// `dt = 0.5 / max|Λ̃|` over the dealiased band.
    pub fn default_for(grid: &Grid, kind: SystemKind) -> IntegratorSpec {
        IntegratorSpec {
            dt: default_dt(grid, kind),
            dealias: true,
            exit_norm_factor: 2.0,
            n0: DEFAULT_N0,
            nonlinear: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt = {} must be positive", self.dt)));
        }
        if self.exit_norm_factor.is_nan() || self.exit_norm_factor <= 1.0 {
            return Err(Error::Config(format!(
                "exit_norm_factor = {} must exceed 1",
                self.exit_norm_factor
            )));
        }
        check_n0(self.n0)
    }
}

pub fn default_dt(grid: &Grid, kind: SystemKind) -> f64 {
    let cut = grid.dealias_cutoff();
    let e = kind.eps();
    let max = grid
        .frequencies()
        .iter()
        .filter(|x| x.abs() <= cut)
        .map(|&x| signed_dispersion(x, e).abs())
        .fold(0.0, f64::max);
    if max == 0.0 {
        0.5
    } else {
        0.5 / max
    }
}

/// Spectral state: `(ζ̂, v̂)` for the Boussinesq systems, `(û, ŵ)` for the
/// diagonal one.
#[derive(Clone, Debug)]
pub struct FieldPair {
    pub first: ComplexField,
    pub second: ComplexField,
}

impl FieldPair {
    pub fn zeros(grid: &Grid) -> FieldPair {
        FieldPair {
            first: ComplexField::zeros(grid),
            second: ComplexField::zeros(grid),
        }
    }

    pub fn from_state(state: &StateZV) -> FieldPair {
        FieldPair {
            first: state.zeta().spectrum(),
            second: state.v().spectrum(),
        }
    }

    /// Real state; the zero-mean flag follows the zero modes.
    pub fn to_state(&self, model: Model) -> Result<StateZV> {
        StateZV::new(
            self.first.real_part_checked(),
            self.second.real_part_checked(),
            model,
        )
    }

    pub fn grid(&self) -> &Grid {
        self.first.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.first
            .coeffs()
            .iter()
            .chain(self.second.coeffs())
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `√(‖first‖² + ‖second‖²)` in L².
    pub fn l2(&self) -> f64 {
        (self.first.norm(Norm::L2).powi(2) + self.second.norm(Norm::L2).powi(2)).sqrt()
    }

    pub fn sub(&self, other: &FieldPair) -> FieldPair {
        FieldPair {
            first: &self.first - &other.first,
            second: &self.second - &other.second,
        }
    }

    fn axpy(&self, a: f64, x: &FieldPair) -> FieldPair {
        FieldPair {
            first: &self.first + &x.first.scale_re(a),
            second: &self.second + &x.second.scale_re(a),
        }
    }
}

/// `(ζ, v) -> (u, w) = ((ζ+v)/2, (ζ-v)/2)`.
pub fn to_diag(p: &FieldPair) -> FieldPair {
    FieldPair {
        first: (&p.first + &p.second).scale_re(0.5),
        second: (&p.first - &p.second).scale_re(0.5),
    }
}

/// `(u, w) -> (ζ, v) = (u+w, u-w)`.
pub fn from_diag(p: &FieldPair) -> FieldPair {
    FieldPair {
        first: &p.first + &p.second,
        second: &p.first - &p.second,
    }
}

/// Real-space change of variables `u = (ζ+v)/2`, `w = (ζ-v)/2`.
pub fn diag_change_of_variables(state: &StateZV) -> (RealField, RealField) {
    let u = state.zeta().add(state.v()).scale(0.5);
    let w = state.zeta().sub(state.v()).scale(0.5);
    (u, w)
}

/// Inverse of [`diag_change_of_variables`].
pub fn diag_inverse(u: &RealField, w: &RealField, model: Model) -> Result<StateZV> {
    StateZV::new(u.add(w), u.sub(w), model)
}

/// Per-mode propagator matrices `[[a, b], [c, d]]` over `dt`, in FFT order.
pub fn linear_propagator(grid: &Grid, kind: SystemKind, dt: f64) -> Vec<[[Complex64; 2]; 2]> {
    let e = kind.eps();
    grid.frequencies()
        .iter()
        .map(|&x| {
            let th = signed_dispersion(x, e) * dt;
            if kind.is_diag() {
                [
                    [Complex64::from_polar(1.0, -th), ZERO],
                    [ZERO, Complex64::from_polar(1.0, th)],
                ]
            } else {
                let c = Complex64::new(th.cos(), 0.0);
                let s = Complex64::new(0.0, -th.sin());
                [[c, s], [s, c]]
            }
        })
        .collect()
}

fn apply_prop(m: &[[[Complex64; 2]; 2]], p: &FieldPair) -> FieldPair {
    let a = p.first.coeffs();
    let b = p.second.coeffs();
    let mut x = Vec::with_capacity(a.len());
    let mut y = Vec::with_capacity(a.len());
    for ((m, a), b) in m.iter().zip(a).zip(b) {
        x.push(m[0][0] * a + m[0][1] * b);
        y.push(m[1][0] * a + m[1][1] * b);
    }
    FieldPair {
        first: ComplexField::from_coeffs(p.grid(), x).expect("grid length"),
        second: ComplexField::from_coeffs(p.grid(), y).expect("grid length"),
    }
}

fn quad(a: &ComplexField, b: &ComplexField, dealias: bool) -> ComplexField {
    if dealias {
        dealias_and_mean(&a.product(b), Some(DealiasRule::TwoThirds), false)
    } else {
        let pa = a.to_physical();
        let pb = b.to_physical();
        let prod: Vec<Complex64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
        dealias_and_mean(&ComplexField::from_physical(a.grid(), &prod), None, false)
    }
}

fn dx(f: &ComplexField) -> ComplexField {
    f.map_symbol(|x| I * x)
}

/// Quadratic terms only: `(-ε∂x(ζv), -(ε/2)∂x(v²))`, or the bracket terms of the
/// diagonal system.
pub fn nonlinear_rhs(kind: SystemKind, state: &FieldPair, dealias: bool) -> FieldPair {
    let e = kind.eps();
    let (a, b) = (&state.first, &state.second);
    if kind.is_diag() {
        let uu = quad(a, a, dealias);
        let ww = quad(b, b, dealias);
        let uw = quad(a, b, dealias);
        let fu = &(&uu.scale_re(1.5) - &ww.scale_re(0.5)) - &uw;
        let fw = &(&uu.scale_re(0.5) - &ww.scale_re(1.5)) + &uw;
        FieldPair {
            first: dx(&fu).scale_re(-0.5 * e),
            second: dx(&fw).scale_re(-0.5 * e),
        }
    } else {
        FieldPair {
            first: dx(&quad(a, b, dealias)).scale_re(-e),
            second: dx(&quad(b, b, dealias)).scale_re(-0.5 * e),
        }
    }
}

/// Precomputed propagators for one `(kind, dt)`.
struct Stepper {
    kind: SystemKind,
    dt: f64,
    half: Vec<[[Complex64; 2]; 2]>,
    full: Vec<[[Complex64; 2]; 2]>,
    nonlinear: bool,
    dealias: bool,
}

impl Stepper {
    fn new(grid: &Grid, kind: SystemKind, dt: f64, nonlinear: bool, dealias: bool) -> Stepper {
        Stepper {
            kind,
            dt,
            half: linear_propagator(grid, kind, 0.5 * dt),
            full: linear_propagator(grid, kind, dt),
            nonlinear,
            dealias,
        }
    }

    fn n(&self, p: &FieldPair) -> FieldPair {
        nonlinear_rhs(self.kind, p, self.dealias)
    }

    fn step(&self, u: &FieldPair) -> FieldPair {
        if !self.nonlinear {
            return apply_prop(&self.full, u);
        }
        let h = self.dt;
        let k1 = self.n(u);
        let k2 = self.n(&apply_prop(&self.half, &u.axpy(0.5 * h, &k1)));
        let eu_half = apply_prop(&self.half, u);
        let k3 = self.n(&eu_half.axpy(0.5 * h, &k2));
        let eu = apply_prop(&self.full, u);
        let k4 = self.n(&eu.axpy(h, &apply_prop(&self.half, &k3)));
        let mid = FieldPair {
            first: &k2.first + &k3.first,
            second: &k2.second + &k3.second,
        };
        eu.axpy(h / 6.0, &apply_prop(&self.full, &k1))
            .axpy(h / 3.0, &apply_prop(&self.half, &mid))
            .axpy(h / 6.0, &k4)
    }
}

/// One Lawson-RK4 step of size `spec.dt`.
pub fn step(state: &FieldPair, kind: SystemKind, spec: &IntegratorSpec) -> FieldPair {
    step_by(state, kind, spec, spec.dt)
}

/// One step of arbitrary signed size; a negative `dt` integrates backwards.
pub fn step_by(state: &FieldPair, kind: SystemKind, spec: &IntegratorSpec, dt: f64) -> FieldPair {
    Stepper::new(state.grid(), kind, dt, spec.nonlinear, spec.dealias).step(state)
}

/// `n_steps` steps of signed size `dt` with one set of propagators.
pub fn evolve(
    state: &FieldPair,
    kind: SystemKind,
    spec: &IntegratorSpec,
    dt: f64,
    n_steps: usize,
) -> FieldPair {
    let st = Stepper::new(state.grid(), kind, dt, spec.nonlinear, spec.dealias);
    let mut u = state.clone();
    for _ in 0..n_steps {
        u = st.step(&u);
    }
    u
}

/// `H = ½∫(εζ_x² + εv_x² - ζ² - v² - εv²ζ)`, zero modes of `ζ̂`, `v̂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conserved {
    pub hamiltonian: f64,
    pub mass_zeta: f64,
    pub mass_v: f64,
}

/// Conserved quantities of the Boussinesq variables `(ζ̂, v̂)`.
pub fn conserved_quantities(zv: &FieldPair, eps: f64) -> Conserved {
    let z = &zv.first;
    let v = &zv.second;
    let w = |f: &ComplexField, s: &ComplexField| f.inner(s, 0.0).re;
    let zx = dx(z);
    let vx = dx(v);
    let v2 = v.product(v);
    let h = 0.5 * (eps * w(&zx, &zx) + eps * w(&vx, &vx) - w(z, z) - w(v, v) - eps * w(&v2, z));
    Conserved {
        hamiltonian: h,
        mass_zeta: z.coeffs()[0].re,
        mass_v: v.coeffs()[0].re,
    }
}

/// `E_{N0} = ‖ζ‖²_{H^{N0}} + ‖v‖²_{H^{N0}}`.
pub fn energy(zv: &FieldPair, n0: u32) -> f64 {
    let s = n0 as f64;
    zv.first.norm(Norm::Sobolev(s)).powi(2) + zv.second.norm(Norm::Sobolev(s)).powi(2)
}

/// How a simulation ended.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exit {
    Completed,
    NormDoubled(f64),
    Nonfinite(f64),
}

impl Exit {
    pub fn label(&self) -> String {
        match self {
            Exit::Completed => "completed".into(),
            Exit::NormDoubled(t) => format!("norm_doubled({t})"),
            Exit::Nonfinite(t) => format!("nonfinite({t})"),
        }
    }

    pub fn time(&self) -> Option<f64> {
        match self {
            Exit::Completed => None,
            Exit::NormDoubled(t) | Exit::Nonfinite(t) => Some(*t),
        }
    }
}

/// Sampled diagnostics of a run. States are in `(ζ̂, v̂)` form whatever the system.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub kind: SystemKind,
    pub grid: Grid,
    pub n0: u32,
    pub nonlinear: bool,
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub linf_zeta: Vec<f64>,
    pub hamiltonian: Vec<f64>,
    pub mass_zeta: Vec<f64>,
    pub mass_v: Vec<f64>,
    pub states: Option<Vec<FieldPair>>,
    pub exit: Exit,
}

impl Trajectory {
    fn new(grid: &Grid, kind: SystemKind, spec: &IntegratorSpec, keep: bool) -> Trajectory {
        Trajectory {
            kind,
            grid: grid.clone(),
            n0: spec.n0,
            nonlinear: spec.nonlinear,
            times: Vec::new(),
            energy: Vec::new(),
            linf_zeta: Vec::new(),
            hamiltonian: Vec::new(),
            mass_zeta: Vec::new(),
            mass_v: Vec::new(),
            states: keep.then(Vec::new),
            exit: Exit::Completed,
        }
    }

    fn record(&mut self, t: f64, zv: &FieldPair) {
        let c = conserved_quantities(zv, self.kind.eps());
        self.times.push(t);
        self.energy.push(energy(zv, self.n0));
        self.linf_zeta.push(zv.first.norm(Norm::Linf));
        self.hamiltonian.push(c.hamiltonian);
        self.mass_zeta.push(c.mass_zeta);
        self.mass_v.push(c.mass_v);
        if let Some(s) = &mut self.states {
            s.push(zv.clone());
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|H(t) - H(0)| / |H(0)|` (absolute when `H(0) = 0`).
    pub fn hamiltonian_drift(&self) -> f64 {
        let h0 = self.hamiltonian.first().copied().unwrap_or(0.0);
        let d = self
            .hamiltonian
            .iter()
            .map(|h| (h - h0).abs())
            .fold(0.0, f64::max);
        if h0 == 0.0 {
            d
        } else {
            d / h0.abs()
        }
    }

    pub fn max_mass(&self) -> f64 {
        self.mass_zeta
            .iter()
            .chain(&self.mass_v)
            .map(|m| m.abs())
            .fold(0.0, f64::max)
    }

    pub fn final_state(&self) -> Option<&FieldPair> {
        self.states.as_ref().and_then(|s| s.last())
    }

    /// CSV with header `t,E_N0,linf_zeta,H,mass_zeta,mass_v`.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "t,E_N0,linf_zeta,H,mass_zeta,mass_v")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.times[i],
                self.energy[i],
                self.linf_zeta[i],
                self.hamiltonian[i],
                self.mass_zeta[i],
                self.mass_v[i]
            )?;
        }
        Ok(())
    }
}

/// Integrates from `initial` (Boussinesq variables) to `horizon`, recording
/// diagnostics every `sample_every` time units. The step is shrunk so that a
/// sample interval holds a whole number of steps.
pub fn simulate(
    initial: &StateZV,
    kind: SystemKind,
    spec: &IntegratorSpec,
    horizon: f64,
    sample_every: f64,
    keep_states: bool,
) -> Result<Trajectory> {
    kind.validate()?;
    spec.validate()?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::Config(format!(
            "horizon = {horizon} must be nonnegative"
        )));
    }
    if sample_every.is_nan() || sample_every <= 0.0 {
        return Err(Error::Config(format!(
            "sample_every = {sample_every} must be positive"
        )));
    }
    let grid = initial.grid().clone();
    let zv0 = FieldPair::from_state(initial);
    let scale = zv0.first.max_abs_coeff().max(zv0.second.max_abs_coeff());
    if zv0.first.coeffs()[0].norm() > 1e-12 * scale.max(1.0)
        || zv0.second.coeffs()[0].norm() > 1e-12 * scale.max(1.0)
    {
        return Err(Error::Config("initial data must have zero mean".into()));
    }
    let mut traj = Trajectory::new(&grid, kind, spec, keep_states);
    // Whole steps per sample; a shorter final step lands exactly on the horizon.
    let per_sample = (sample_every.min(horizon.max(spec.dt)) / spec.dt)
        .ceil()
        .max(1.0);
    let dt = sample_every.min(horizon.max(spec.dt)) / per_sample;
    let every = per_sample as usize;
    let n_full = (horizon / dt * (1.0 + 1e-12)).floor() as usize;
    let tail = horizon - n_full as f64 * dt;
    let n_steps = n_full + usize::from(tail > 1e-9 * dt);
    let stepper = Stepper::new(&grid, kind, dt, spec.nonlinear, spec.dealias);
    let to_zv = |p: &FieldPair| {
        if kind.is_diag() {
            from_diag(p)
        } else {
            p.clone()
        }
    };
    let mut u = if kind.is_diag() {
        to_diag(&zv0)
    } else {
        zv0.clone()
    };
    traj.record(0.0, &zv0);
    let e0 = energy(&zv0, spec.n0);
    let limit = spec.exit_norm_factor.powi(2) * e0;
    for k in 1..=n_steps {
        let t = if k > n_full {
            u = Stepper::new(&grid, kind, tail, spec.nonlinear, spec.dealias).step(&u);
            horizon
        } else {
            u = stepper.step(&u);
            k as f64 * dt
        };
        let zv = to_zv(&u);
        if !zv.is_finite() {
            traj.exit = Exit::Nonfinite(t);
            return Ok(traj);
        }
        let e = energy(&zv, spec.n0);
        if e0 > 0.0 && e > limit {
            traj.record(t, &zv);
            traj.exit = Exit::NormDoubled(t);
            return Ok(traj);
        }
        if k % every == 0 || k == n_steps {
            traj.record(t, &zv);
        }
    }
    Ok(traj)
}

/// Initial data families.
#[derive(Clone, Debug, PartialEq)]
pub enum DataSpec {
    /// `ζ₀ = α p(x)`, `v₀ = β p(x - x₀)` with `p(x) = √(2e)(x/σ) e^{-(x/σ)²}`,
    /// a Gaussian derivative normalized to peak value 1.
    GaussianDerivative {
        alpha: f64,
        beta: f64,
        sigma: f64,
        x0: f64,
    },
    /// Sum of `bumps` Gaussian derivatives with seeded centers, widths and
    /// amplitudes, rescaled so that `‖ζ₀‖_∞ = ‖v₀‖_∞ = amplitude`.
    RandomBumps {
        amplitude: f64,
        bumps: usize,
        sigma: f64,
        seed: u64,
    },
}

fn bump(x: f64, c: f64, sigma: f64) -> f64 {
    let y = (x - c) / sigma;
    (2.0 * std::f64::consts::E).sqrt() * y * (-y * y).exp()
}

fn project(u: RealField) -> RealField {
    dealias_and_mean(&u.spectrum(), Some(DealiasRule::TwoThirds), true).real_part_checked()
}

/// Samples the family on `grid`, dealiased with the mean removed.
pub fn initial_data(grid: &Grid, data: &DataSpec, model: Model) -> Result<StateZV> {
    let (z, v) = match *data {
        DataSpec::GaussianDerivative {
            alpha,
            beta,
            sigma,
            x0,
        } => {
            if sigma.is_nan() || sigma <= 0.0 {
                return Err(Error::Config(format!("sigma = {sigma} must be positive")));
            }
            (
                RealField::from_fn(grid, |x| alpha * bump(x, 0.0, sigma)),
                RealField::from_fn(grid, |x| beta * bump(x, x0, sigma)),
            )
        }
        DataSpec::RandomBumps {
            amplitude,
            bumps,
            sigma,
            seed,
        } => {
            if sigma.is_nan() || sigma <= 0.0 || bumps == 0 {
                return Err(Error::Config(
                    "random bumps need sigma > 0 and bumps ≥ 1".into(),
                ));
            }
            let mut rng = ensemble::rng(seed);
            let l = grid.half_length();
            let mut field = || {
                let params: Vec<(f64, f64, f64)> = (0..bumps)
                    .map(|_| {
                        (
                            rng.gen_range(-0.5 * l..0.5 * l),
                            sigma * rng.gen_range(0.5..1.5),
                            rng.gen_range(-1.0..1.0),
                        )
                    })
                    .collect();
                let f = RealField::from_fn(grid, |x| {
                    params.iter().map(|&(c, s, a)| a * bump(x, c, s)).sum()
                });
                let m = f.norm(Norm::Linf);
                if m == 0.0 {
                    f
                } else {
                    f.scale(amplitude / m)
                }
            };
            let z = field();
            let v = field();
            (z, v)
        }
    };
    StateZV::new(project(z), project(v), model)
}

const DUMP_MAGIC: &[u8; 8] = b"BSQDUMP\0";
const DUMP_VERSION: u32 = 1;

/// Binary dump of sampled states.
///
/// Layout, little-endian: magic `BSQDUMP\0`, version `u32`, `n: u64`, `L: f64`,
/// `ε: f64`, `N0: u32`, `count: u64`, then per sample `t: f64`, `ζ[n]: f64`,
/// `v[n]: f64` (physical samples).
pub fn write_dump(traj: &Trajectory, path: &Path) -> Result<()> {
    let states = traj
        .states
        .as_ref()
        .ok_or_else(|| Error::Input("trajectory has no stored states".into()))?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&DUMP_VERSION.to_le_bytes())?;
    w.write_all(&(traj.grid.n() as u64).to_le_bytes())?;
    w.write_all(&traj.grid.half_length().to_le_bytes())?;
    w.write_all(&traj.kind.eps().to_le_bytes())?;
    w.write_all(&traj.n0.to_le_bytes())?;
    w.write_all(&(states.len() as u64).to_le_bytes())?;
    for (t, s) in traj.times.iter().zip(states) {
        w.write_all(&t.to_le_bytes())?;
        for f in [&s.first, &s.second] {
            for x in f.real_part().samples() {
                w.write_all(&x.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Contents of a state dump.
#[derive(Clone, Debug)]
pub struct Dump {
    pub grid: Grid,
    pub eps: f64,
    pub n0: u32,
    pub times: Vec<f64>,
    pub states: Vec<(RealField, RealField)>,
}

fn read_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; 8 * n];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn read_dump(path: &Path) -> Result<Dump> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::Input("not a state dump".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    if u32::from_le_bytes(b4) != DUMP_VERSION {
        return Err(Error::Input("unsupported dump version".into()));
    }
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let l = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let eps = f64::from_le_bytes(b8);
    r.read_exact(&mut b4)?;
    let n0 = u32::from_le_bytes(b4);
    r.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8) as usize;
    let grid = Grid::new(n, l)?;
    let mut times = Vec::with_capacity(count);
    let mut states = Vec::with_capacity(count);
    for _ in 0..count {
        times.push(read_f64s(&mut r, 1)?[0]);
        let z = RealField::from_samples(&grid, read_f64s(&mut r, n)?)?;
        let v = RealField::from_samples(&grid, read_f64s(&mut r, n)?)?;
        states.push((z, v));
    }
    Ok(Dump {
        grid,
        eps,
        n0,
        times,
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn propagator_identity_at_zero_dt() {
        let g = Grid::new(16, PI).unwrap();
        for m in linear_propagator(&g, SystemKind::BsqEps(0.1), 0.0) {
            assert_eq!(m[0][0], Complex64::new(1.0, 0.0));
            assert_eq!(m[0][1].norm(), 0.0);
        }
    }

    #[test]
    fn hamiltonian_of_cosine() {
        let g = Grid::new(32, PI).unwrap();
        let z = RealField::from_fn(&g, f64::cos).spectrum();
        let p = FieldPair {
            first: z,
            second: ComplexField::zeros(&g),
        };
        let c = conserved_quantities(&p, 1.0);
        assert!(c.hamiltonian.abs() < 1e-13);
    }
}
