//! Reproducible studies: existence-time scaling, temporal convergence, the
//! resonance atlas and the energy budget of the symmetrized system.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{
    evolve, initial_data, simulate, DataSpec, Exit, FieldPair, IntegratorSpec, SystemKind,
    Trajectory,
};
use crate::good_unknowns::{
    good_forward, measured_c_b, nonlinear_dv, rhs_terms, Grouping, StateZV,
};
use crate::littlewood_paley::phi_hash;
use crate::phases::{small_modulation_measure, Modulation, Region};
use crate::spectral::{Grid, Norm};
use crate::Model;

/// Least-squares line `log T = intercept + exponent · log(1/ε)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

/// Slope of `y` against `x` by least squares; needs two distinct abscissae.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<Fit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Some(Fit {
        exponent: slope,
        intercept,
        residual: (rss / n as f64).sqrt(),
    })
}

/// Fits `T(ε) ≈ C ε^{-p}` and returns `p`.
pub fn fit_power_law(eps: &[f64], times: &[f64]) -> Option<Fit> {
    let x: Vec<f64> = eps.iter().map(|e| (1.0 / e).ln()).collect();
    let y: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    fit_line(&x, &y)
}

/// Existence-time scaling study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingSpec {
    /// `Unit`: data of size ε in `H^{N0}` for the unit system. `Eps`: O(1) data
    /// for the ε system; the payload is ignored.
    pub model: Model,
    pub eps_list: Vec<f64>,
    pub n: usize,
    pub half_length: f64,
    pub sigma: f64,
    pub x0: f64,
    pub n0: u32,
    /// Horizon `horizon_factor · ε^{-horizon_exponent}`.
    pub horizon_factor: f64,
    pub horizon_exponent: f64,
    pub exit_norm_factor: f64,
    /// Fixed `dt`; `None` uses the stability-based default.
    pub dt: Option<f64>,
}

impl ScalingSpec {
    pub fn unit(eps_list: Vec<f64>) -> ScalingSpec {
        ScalingSpec {
            model: Model::Unit,
            eps_list,
            n: 256,
            half_length: 20.0 * std::f64::consts::PI,
            sigma: 4.0,
            x0: 8.0,
            n0: 4,
            horizon_factor: 10.0,
            horizon_exponent: 1.5,
            exit_norm_factor: 2.0,
            dt: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_list.len() < 3 {
            return Err(Error::Config(
                "scaling needs at least 3 epsilon values".into(),
            ));
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::Config("epsilon values must lie in (0, 1)".into()));
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(
                "epsilon list must be strictly descending".into(),
            ));
        }
        Ok(())
    }

    fn kind(&self, eps: f64) -> SystemKind {
        match self.model {
            Model::Unit => SystemKind::BsqUnit,
            Model::Eps(_) => SystemKind::BsqEps(eps),
        }
    }

    pub fn horizon(&self, eps: f64) -> f64 {
        self.horizon_factor * eps.powf(-self.horizon_exponent)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub eps: f64,
    /// Norm-doubling time, or the horizon when censored.
    pub t_double: f64,
    pub censored: bool,
    pub horizon: f64,
    pub exit: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingResult {
    pub rows: Vec<ScalingRow>,
    /// Fit over uncensored rows (at least two needed).
    pub fit: Option<Fit>,
    /// Exponent implied by the censoring horizons when fewer than two rows doubled;
    /// `T(ε) ≥ horizon(ε)` then holds for every censored ε.
    pub lower_bound: Option<f64>,
}

impl ScalingResult {
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "eps,t_double,censored,horizon,exit")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{:.10e},{},{:.10e},{}",
                r.eps, r.t_double, r.censored, r.horizon, r.exit
            )?;
        }
        match (&self.fit, self.lower_bound) {
            (Some(f), _) => writeln!(
                w,
                "fit,{:.10e},false,{:.10e},exponent",
                f.exponent, f.residual
            )?,
            (None, Some(lb)) => writeln!(w, "fit,{lb:.10e},true,NaN,lower_bound")?,
            (None, None) => writeln!(w, "fit,NaN,true,NaN,unavailable")?,
        }
        Ok(())
    }
}

/// Data of the scaling study at one ε.
pub fn scaling_data(spec: &ScalingSpec, eps: f64) -> Result<StateZV> {
    let kind = spec.kind(eps);
    let grid = Grid::new(spec.n, spec.half_length)?;
    let base = DataSpec::GaussianDerivative {
        alpha: 1.0,
        beta: 1.0,
        sigma: spec.sigma,
        x0: spec.x0,
    };
    let s = initial_data(&grid, &base, kind.model())?;
    match spec.model {
        Model::Eps(_) => Ok(s),
        Model::Unit => {
            let e = crate::good_unknowns::energy_functional(&s, spec.n0).0;
            let k = eps / e.sqrt();
            StateZV::new(s.zeta().scale(k), s.v().scale(k), kind.model())
        }
    }
}

/// Runs one simulation per ε in parallel and fits the doubling times.
pub fn scaling_study(spec: &ScalingSpec) -> Result<ScalingResult> {
    spec.validate()?;
    let rows: Vec<Result<ScalingRow>> = spec
        .eps_list
        .par_iter()
        .map(|&eps| {
            let kind = spec.kind(eps);
            let s0 = scaling_data(spec, eps)?;
            let mut is = IntegratorSpec::default_for(s0.grid(), kind);
            if let Some(dt) = spec.dt {
                is.dt = dt;
            }
            is.n0 = spec.n0;
            is.exit_norm_factor = spec.exit_norm_factor;
            let horizon = spec.horizon(eps);
            let tr = simulate(&s0, kind, &is, horizon, horizon, false)?;
            if let Exit::Nonfinite(t) = tr.exit {
                return Err(Error::Numerical(format!(
                    "nonfinite state at t = {t}, eps = {eps}"
                )));
            }
            let (t, censored) = match tr.exit {
                Exit::NormDoubled(t) => (t, false),
                _ => (horizon, true),
            };
            Ok(ScalingRow {
                eps,
                t_double: t,
                censored,
                horizon,
                exit: tr.exit.label(),
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let (e, t): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| !r.censored)
        .map(|r| (r.eps, r.t_double))
        .unzip();
    let fit = fit_power_law(&e, &t);
    let lower_bound = if fit.is_none() {
        let (e, t): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.censored)
            .map(|r| (r.eps, r.horizon))
            .unzip();
        fit_power_law(&e, &t).map(|f| f.exponent)
    } else {
        None
    };
    Ok(ScalingResult {
        rows,
        fit,
        lower_bound,
    })
}

/// Temporal convergence study against a fine reference.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceSpec {
    pub kind: SystemKind,
    pub n: usize,
    pub half_length: f64,
    pub data: DataSpec,
    pub t_final: f64,
    /// Decreasing step sizes; each must divide `t_final` into whole steps.
    pub dts: Vec<f64>,
    /// Reference step is `min(dts) / ref_divisor`.
    pub ref_divisor: usize,
    pub nonlinear: bool,
}

impl Default for ConvergenceSpec {
    fn default() -> ConvergenceSpec {
        ConvergenceSpec {
            kind: SystemKind::BsqEps(0.1),
            n: 256,
            half_length: 8.0 * std::f64::consts::PI,
            data: DataSpec::GaussianDerivative {
                alpha: 1.0,
                beta: 1.0,
                sigma: 2.0,
                x0: 3.0,
            },
            t_final: 1.0,
            dts: vec![0.04, 0.02, 0.01],
            ref_divisor: 8,
            nonlinear: true,
        }
    }
}

impl Serialize for SystemKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl Serialize for DataSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{self:?}"))
    }
}

/// Errors below this are indistinguishable from roundoff.
pub const ERROR_FLOOR: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub error: f64,
    /// `log(e_{k-1}/e_k) / log(dt_{k-1}/dt_k)`; absent on the first row and when
    /// either error sits at the roundoff floor.
    pub order: Option<f64>,
    pub at_floor: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceResult {
    pub rows: Vec<ConvergenceRow>,
    pub reference_dt: f64,
}

impl ConvergenceResult {
    /// Orders that are not flagged as unreliable.
    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order).collect()
    }

    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        if self.rows.len() < 2 {
            writeln!(w, "dt,error,at_floor")?;
            for r in &self.rows {
                writeln!(w, "{:.10e},{:.10e},{}", r.dt, r.error, r.at_floor)?;
            }
            return Ok(());
        }
        writeln!(w, "dt,error,order,at_floor")?;
        for r in &self.rows {
            let o = r.order.map_or("NaN".to_string(), |o| format!("{o:.6}"));
            writeln!(w, "{:.10e},{:.10e},{},{}", r.dt, r.error, o, r.at_floor)?;
        }
        Ok(())
    }
}

fn steps_for(t: f64, dt: f64) -> Result<usize> {
    let k = (t / dt).round();
    if k < 1.0 || ((k * dt - t).abs() > 1e-9 * t.max(1.0)) {
        return Err(Error::Config(format!(
            "dt = {dt} does not divide t_final = {t}"
        )));
    }
    Ok(k as usize)
}

pub fn convergence_study(spec: &ConvergenceSpec) -> Result<ConvergenceResult> {
    spec.kind.validate()?;
    if spec.dts.is_empty() || spec.ref_divisor == 0 {
        return Err(Error::Config(
            "convergence needs dts and ref_divisor ≥ 1".into(),
        ));
    }
    if spec.dts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("dts must be strictly decreasing".into()));
    }
    let grid = Grid::new(spec.n, spec.half_length)?;
    let s0 = initial_data(&grid, &spec.data, spec.kind.model())?;
    let p0 = FieldPair::from_state(&s0);
    let mut is = IntegratorSpec::default_for(&grid, spec.kind);
    is.nonlinear = spec.nonlinear;
    let dt_ref = spec.dts[spec.dts.len() - 1] / spec.ref_divisor as f64;
    let reference = evolve(
        &p0,
        spec.kind,
        &is,
        dt_ref,
        steps_for(spec.t_final, dt_ref)?,
    );
    let norm = reference.l2().max(f64::MIN_POSITIVE);
    let errors: Vec<f64> = spec
        .dts
        .par_iter()
        .map(|&dt| {
            let k = steps_for(spec.t_final, dt)?;
            Ok(evolve(&p0, spec.kind, &is, dt, k).sub(&reference).l2() / norm)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = spec
        .dts
        .iter()
        .zip(&errors)
        .enumerate()
        .map(|(i, (&dt, &error))| {
            let at_floor = error < ERROR_FLOOR;
            let order = (i > 0 && !at_floor && errors[i - 1] >= ERROR_FLOOR)
                .then(|| (errors[i - 1] / error).ln() / (spec.dts[i - 1] / dt).ln());
            ConvergenceRow {
                dt,
                error,
                order,
                at_floor,
            }
        })
        .collect();
    Ok(ConvergenceResult {
        rows,
        reference_dt: dt_ref,
    })
}

/// Resonance atlas: small-modulation measures across `D`.
#[derive(Clone, Debug, PartialEq)]
pub struct AtlasSpec {
    pub entries: Vec<(Modulation, Region)>,
    pub d_min: i32,
    pub d_max: i32,
    pub base_resolution: usize,
}

impl AtlasSpec {
    /// Unit-model entries plus one ε-model pair per listed ε.
    pub fn standard(eps_list: &[f64], d_min: i32, d_max: i32) -> AtlasSpec {
        let mut entries = vec![
            (Modulation::PpOpposite, Region::s_plus()),
            (Modulation::PmAligned, Region::s_greater()),
            (Modulation::PpWide, Region::s1_prime_plus()),
        ];
        for &e in eps_list {
            let mut r = Region::s_plus();
            let s = e.sqrt();
            r.label = format!("S_eps_plus({e})");
            r.eta = (0.25 / s, 64.0 / s);
            entries.push((Modulation::PpOppositeEps(e), r));
            entries.push((Modulation::PmAlignedEps(e), Region::s_eps_greater(e)));
        }
        AtlasSpec {
            entries,
            d_min,
            d_max,
            base_resolution: 2048,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtlasRow {
    pub kind: String,
    pub d: i32,
    pub region: String,
    pub measure: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtlasFit {
    pub kind: String,
    pub region: String,
    /// Slope of `log₂ measure` against `D`; `-1` means halving per unit of `D`.
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtlasResult {
    pub rows: Vec<AtlasRow>,
    pub fits: Vec<AtlasFit>,
}

impl AtlasResult {
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "kind,D,region,measure")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{:.10e}", r.kind, r.d, r.region, r.measure)?;
        }
        for f in &self.fits {
            writeln!(w, "{},slope,{},{:.6}", f.kind, f.region, f.slope)?;
        }
        Ok(())
    }

    /// `measure(D) / measure(D+1)` for one entry.
    pub fn ratios(&self, kind: &str, region: &str) -> Vec<(i32, f64)> {
        let sel: Vec<&AtlasRow> = self
            .rows
            .iter()
            .filter(|r| r.kind == kind && r.region == region)
            .collect();
        sel.windows(2)
            .map(|w| (w[0].d, w[0].measure / w[1].measure))
            .collect()
    }
}

pub fn resonance_atlas(spec: &AtlasSpec) -> AtlasResult {
    let jobs: Vec<(usize, i32)> = (0..spec.entries.len())
        .flat_map(|i| (spec.d_min..=spec.d_max).map(move |d| (i, d)))
        .collect();
    let rows: Vec<AtlasRow> = jobs
        .par_iter()
        .map(|&(i, d)| {
            let (kind, region) = &spec.entries[i];
            let m = small_modulation_measure(*kind, d, region, spec.base_resolution);
            AtlasRow {
                kind: kind.label(),
                d,
                region: region.label.clone(),
                measure: m.value,
                converged: m.converged,
            }
        })
        .collect();
    let fits = spec
        .entries
        .iter()
        .filter_map(|(kind, region)| {
            let (x, y): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.kind == kind.label() && r.region == region.label && r.measure > 0.0)
                .map(|r| (r.d as f64, r.measure.log2()))
                .unzip();
            fit_line(&x, &y).map(|f| AtlasFit {
                kind: kind.label(),
                region: region.label.clone(),
                slope: f.exponent,
            })
        })
        .collect();
    AtlasResult { rows, fits }
}

/// Energy identity at one sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetRow {
    pub t: f64,
    /// `d/dt ‖V‖²_{H^{N0}}` from the PDE.
    pub de_dt: f64,
    /// `Σ 2 Re⟨term, V⟩_{H^{N0}}` over the grouped right-hand side.
    pub sum_terms: f64,
    /// `|de_dt - sum_terms| / Σ|contribution|` (absolute when the sum vanishes).
    pub mismatch: f64,
    pub contributions: Vec<(String, f64)>,
}

/// Budget of `‖V‖²_{H^{N0}}` along a trajectory with stored states.
pub fn energy_budget(traj: &Trajectory, n0: u32) -> Result<Vec<BudgetRow>> {
    let states = traj
        .states
        .as_ref()
        .ok_or_else(|| Error::Input("energy budget needs stored states".into()))?;
    let model = traj.kind.model();
    let grouping = if model == Model::Unit {
        Grouping::SevenTerm
    } else {
        Grouping::FourTerm
    };
    let s = n0 as f64;
    traj.times
        .par_iter()
        .zip(states.par_iter())
        .map(|(&t, p)| budget_row(t, p, model, grouping, traj.nonlinear, s))
        .collect()
}

fn budget_row(
    t: f64,
    p: &FieldPair,
    model: Model,
    grouping: Grouping,
    nonlinear: bool,
    s: f64,
) -> Result<BudgetRow> {
    let state = p.to_state(model)?;
    let lam = |v: &crate::ComplexField| {
        v.map_symbol(|x| Complex64::new(0.0, crate::phases::lambda_dispersion(x, model)))
    };
    if !nonlinear {
        let h = crate::FourierMultiplier::hilbert(state.grid());
        let big_v = &p.first + &p.second.apply(&h)?.scale(Complex64::new(0.0, 1.0));
        let de = 2.0 * lam(&big_v).inner(&big_v, s).re;
        return Ok(BudgetRow {
            t,
            de_dt: de,
            sum_terms: 0.0,
            mismatch: de.abs(),
            contributions: Vec::new(),
        });
    }
    let big_v = good_forward(&state).big_v;
    let dv = &nonlinear_dv(&state) + &lam(&big_v);
    let de = 2.0 * dv.inner(&big_v, s).re;
    let terms = rhs_terms(&state, grouping)?;
    let contributions: Vec<(String, f64)> = terms
        .iter()
        .map(|tm| (tm.name.to_string(), 2.0 * tm.field.inner(&big_v, s).re))
        .collect();
    let sum: f64 = contributions.iter().map(|c| c.1).sum();
    let scale: f64 = contributions.iter().map(|c| c.1.abs()).sum();
    let diff = (de - sum).abs();
    Ok(BudgetRow {
        t,
        de_dt: de,
        sum_terms: sum,
        mismatch: if scale > 0.0 { diff / scale } else { diff },
        contributions,
    })
}

pub fn write_budget_csv(rows: &[BudgetRow], w: &mut impl Write) -> Result<()> {
    let names: Vec<String> = rows
        .first()
        .map(|r| r.contributions.iter().map(|c| c.0.clone()).collect())
        .unwrap_or_default();
    write!(w, "t,dE_dt,sum_terms,mismatch")?;
    for n in &names {
        write!(w, ",{n}")?;
    }
    writeln!(w)?;
    for r in rows {
        write!(
            w,
            "{:.10e},{:.10e},{:.10e},{:.3e}",
            r.t, r.de_dt, r.sum_terms, r.mismatch
        )?;
        for c in &r.contributions {
            write!(w, ",{:.10e}", c.1)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// `|Re⟨L_V, V⟩_{H^{N0}}| / (‖ζ‖_∞ ‖v‖_{L²} ‖V‖²_{H^{N0}})` for the unit model.
pub fn cubic_term_ratio(state: &StateZV, n0: u32) -> Result<f64> {
    let terms = rhs_terms(state, Grouping::SevenTerm)?;
    let big_v = good_forward(state).big_v;
    let s = n0 as f64;
    let l = terms
        .iter()
        .find(|t| t.name == "L")
        .ok_or_else(|| Error::Numerical("missing L term".into()))?;
    let num = l.field.inner(&big_v, s).re.abs();
    let den = state.zeta().norm(Norm::Linf)
        * state.v().norm(Norm::L2)
        * big_v.norm(Norm::Sobolev(s)).powi(2);
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

/// Provenance record written next to study outputs.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub crate_version: String,
    pub grid: Option<(usize, f64)>,
    pub dt_policy: String,
    pub phi_hash: String,
    pub c_b_unit: f64,
    pub c_b_eps: Vec<(f64, f64)>,
    pub seed: u64,
    pub config: serde_json::Value,
}

impl Manifest {
    pub fn new(
        command: &str,
        grid: Option<&Grid>,
        eps_list: &[f64],
        seed: u64,
        config: serde_json::Value,
    ) -> Manifest {
        Manifest {
            command: command.into(),
            crate_version: env!("CARGO_PKG_VERSION").into(),
            grid: grid.map(|g| (g.n(), g.half_length())),
            dt_policy: "0.5 / max|xi(1 - eps xi^2)| over the dealiased band unless fixed".into(),
            phi_hash: phi_hash(),
            c_b_unit: measured_c_b(Model::Unit),
            c_b_eps: eps_list
                .iter()
                .filter(|e| **e > 0.0 && **e < 1.0)
                .map(|&e| (e, measured_c_b(Model::Eps(e))))
                .collect(),
            seed,
            config,
        }
    }

    pub fn write(&self, w: &mut impl Write) -> Result<()> {
        let s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Numerical(format!("manifest serialization: {e}")))?;
        writeln!(w, "{s}")?;
        Ok(())
    }
}
