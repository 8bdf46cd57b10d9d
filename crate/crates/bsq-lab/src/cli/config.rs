//! Run configuration: TOML sections with documented defaults, `--set` overrides
//! and validation.
//!
//! Every key is optional; an empty file yields [`Config::default`]. Unknown keys
//! are rejected. Lengths are given in units of π (`half_length_pi = 32` means
//! the periodic domain `[-32π, 32π)`). A step size of `0` selects the
//! stability-based default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{DataSpec, IntegratorSpec, SystemKind};
use crate::experiments::{AtlasSpec, ConvergenceSpec, ScalingSpec};
use crate::good_unknowns::check_n0;
use crate::{Grid, Model};

use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Seed for random data and verification ensembles.
    pub seed: u64,
    pub grid: GridConfig,
    pub model: ModelConfig,
    pub data: DataConfig,
    pub run: RunConfig,
    pub scaling: ScalingConfig,
    pub convergence: ConvergenceConfig,
    pub atlas: AtlasConfig,
    pub verify: VerifyConfig,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            seed: 20_240,
            grid: GridConfig::default(),
            model: ModelConfig::default(),
            data: DataConfig::default(),
            run: RunConfig::default(),
            scaling: ScalingConfig::default(),
            convergence: ConvergenceConfig::default(),
            atlas: AtlasConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Number of points, a power of two ≥ 16.
    pub n: usize,
    pub half_length_pi: f64,
}

impl Default for GridConfig {
    fn default() -> GridConfig {
        GridConfig {
            n: 1024,
            half_length_pi: 32.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Eps,
    Unit,
    KdvDiag,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// In (0, 1); ignored by the unit model.
    pub epsilon: f64,
    /// Sobolev index of the energy, at least 4.
    pub n0: u32,
}

impl Default for ModelConfig {
    fn default() -> ModelConfig {
        ModelConfig {
            kind: ModelKind::Eps,
            epsilon: 0.1,
            n0: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFamily {
    /// `ζ₀ = α p(x)`, `v₀ = β p(x - x0)`, `p` a unit-peak Gaussian derivative of width σ.
    GaussianDerivative,
    /// Seeded sum of `bumps` Gaussian derivatives with `‖·‖_∞ = amplitude`.
    RandomBumps,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub family: DataFamily,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub x0: f64,
    pub amplitude: f64,
    pub bumps: usize,
}

impl Default for DataConfig {
    fn default() -> DataConfig {
        DataConfig {
            family: DataFamily::GaussianDerivative,
            alpha: 0.1,
            beta: 0.1,
            sigma: 4.0,
            x0: 10.0,
            amplitude: 0.1,
            bumps: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub t_final: f64,
    pub sample_every: f64,
    /// 0 selects `0.5 / max|ξ(1 - εξ²)|` over the dealiased band.
    pub dt: f64,
    pub dealias: bool,
    pub nonlinear: bool,
    /// Stop once `E_{N0}(t) > factor² E_{N0}(0)`.
    pub exit_norm_factor: f64,
    /// Write sampled states to `states.bin`.
    pub dump: bool,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            t_final: 10.0,
            sample_every: 0.5,
            dt: 0.0,
            dealias: true,
            nonlinear: true,
            exit_norm_factor: 2.0,
            dump: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingModel {
    /// Unit system, data normalized to `E_{N0} = ε²`.
    Unit,
    /// ε system with O(1) data.
    Eps,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub model: ScalingModel,
    /// At least three values in (0, 1), strictly descending.
    pub eps_list: Vec<f64>,
    pub n: usize,
    pub half_length_pi: f64,
    pub sigma: f64,
    pub x0: f64,
    /// Horizon `horizon_factor · ε^{-horizon_exponent}`.
    pub horizon_factor: f64,
    pub horizon_exponent: f64,
    pub exit_norm_factor: f64,
    pub dt: f64,
}

impl Default for ScalingConfig {
    fn default() -> ScalingConfig {
        ScalingConfig {
            model: ScalingModel::Unit,
            eps_list: vec![0.2, 0.1, 0.05, 0.025],
            n: 256,
            half_length_pi: 20.0,
            sigma: 4.0,
            x0: 8.0,
            horizon_factor: 10.0,
            horizon_exponent: 1.5,
            exit_norm_factor: 2.0,
            dt: 0.0,
        }
    }
}

/// Uses the `[model]` section for the system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub n: usize,
    pub half_length_pi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub x0: f64,
    pub t_final: f64,
    /// Strictly decreasing, each a whole fraction of `t_final`.
    pub dts: Vec<f64>,
    /// Reference step is `min(dts) / ref_divisor`.
    pub ref_divisor: usize,
    pub nonlinear: bool,
}

impl Default for ConvergenceConfig {
    fn default() -> ConvergenceConfig {
        ConvergenceConfig {
            n: 256,
            half_length_pi: 8.0,
            alpha: 1.0,
            beta: 1.0,
            sigma: 2.0,
            x0: 3.0,
            t_final: 1.0,
            dts: vec![0.04, 0.02, 0.01],
            ref_divisor: 8,
            nonlinear: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtlasConfig {
    /// ε values for the ε-model entries; empty keeps the unit entries only.
    pub eps_list: Vec<f64>,
    pub d_min: i32,
    pub d_max: i32,
    pub base_resolution: usize,
}

impl Default for AtlasConfig {
    fn default() -> AtlasConfig {
        AtlasConfig {
            eps_list: vec![0.1, 0.01],
            d_min: 4,
            d_max: 10,
            base_resolution: 2048,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Random pairs for the product, commutator and reality checks.
    pub pairs: usize,
    /// Random admissible states per model for the decomposition residual.
    pub states: usize,
    /// Points per axis of the phase oracle mesh.
    pub phase_points: usize,
}

impl Default for VerifyConfig {
    fn default() -> VerifyConfig {
        VerifyConfig {
            pairs: 200,
            states: 8,
            phase_points: 401,
        }
    }
}

fn at<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{key}: {m}")),
        other => Error::Config(format!("{key}: {other}")),
    })
}

fn require(key: &str, ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("{key}: {what}")))
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        at("grid", self.grid().map(|_| ()))?;
        at("model.n0", check_n0(self.model.n0))?;
        at(
            "model.epsilon",
            self.system_kind().and_then(|k| k.validate()),
        )?;
        let r = &self.run;
        require(
            "run.t_final",
            r.t_final >= 0.0 && r.t_final.is_finite(),
            "must be ≥ 0",
        )?;
        require("run.sample_every", r.sample_every > 0.0, "must be positive")?;
        require(
            "run.dt",
            r.dt >= 0.0 && r.dt.is_finite(),
            "must be ≥ 0 (0 = default)",
        )?;
        require(
            "run.exit_norm_factor",
            r.exit_norm_factor > 1.0,
            "must exceed 1",
        )?;
        let d = &self.data;
        require("data.sigma", d.sigma > 0.0, "must be positive")?;
        require("data.bumps", d.bumps >= 1, "must be ≥ 1")?;
        at("scaling", self.scaling_spec().and_then(|s| s.validate()))?;
        require(
            "scaling.dt",
            self.scaling.dt >= 0.0,
            "must be ≥ 0 (0 = default)",
        )?;
        let c = &self.convergence;
        at(
            "convergence",
            Grid::new(c.n, c.half_length_pi * PI).map(|_| ()),
        )?;
        require(
            "convergence.dts",
            !c.dts.is_empty(),
            "needs at least one step",
        )?;
        require(
            "convergence.dts",
            c.dts.windows(2).all(|w| w[1] < w[0]) && c.dts.iter().all(|&d| d > 0.0),
            "must be positive and strictly decreasing",
        )?;
        require("convergence.ref_divisor", c.ref_divisor >= 1, "must be ≥ 1")?;
        let a = &self.atlas;
        require("atlas.d_max", a.d_min <= a.d_max, "must be ≥ d_min")?;
        require(
            "atlas.eps_list",
            a.eps_list.iter().all(|&e| e > 0.0 && e < 1.0),
            "values must lie in (0, 1)",
        )?;
        require(
            "atlas.base_resolution",
            a.base_resolution >= 8,
            "must be ≥ 8",
        )?;
        require("verify.pairs", self.verify.pairs >= 1, "must be ≥ 1")?;
        require("verify.states", self.verify.states >= 1, "must be ≥ 1")?;
        require(
            "verify.phase_points",
            self.verify.phase_points >= 3,
            "must be ≥ 3",
        )?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.half_length_pi * PI)
    }

    pub fn system_kind(&self) -> Result<SystemKind> {
        let e = self.model.epsilon;
        Ok(match self.model.kind {
            ModelKind::Unit => SystemKind::BsqUnit,
            ModelKind::Eps => SystemKind::BsqEps(Model::eps_model(e)?.eps()),
            ModelKind::KdvDiag => {
                let k = SystemKind::KdvDiag(e);
                k.validate()?;
                k
            }
        })
    }

    pub fn data_spec(&self) -> DataSpec {
        let d = &self.data;
        match d.family {
            DataFamily::GaussianDerivative => DataSpec::GaussianDerivative {
                alpha: d.alpha,
                beta: d.beta,
                sigma: d.sigma,
                x0: d.x0,
            },
            DataFamily::RandomBumps => DataSpec::RandomBumps {
                amplitude: d.amplitude,
                bumps: d.bumps,
                sigma: d.sigma,
                seed: self.seed,
            },
            DataFamily::Zero => DataSpec::GaussianDerivative {
                alpha: 0.0,
                beta: 0.0,
                sigma: d.sigma,
                x0: d.x0,
            },
        }
    }

    pub fn integrator(&self, grid: &Grid) -> Result<IntegratorSpec> {
        let mut s = IntegratorSpec::default_for(grid, self.system_kind()?);
        if self.run.dt > 0.0 {
            s.dt = self.run.dt;
        }
        s.dealias = self.run.dealias;
        s.nonlinear = self.run.nonlinear;
        s.exit_norm_factor = self.run.exit_norm_factor;
        s.n0 = self.model.n0;
        Ok(s)
    }

    pub fn scaling_spec(&self) -> Result<ScalingSpec> {
        let c = &self.scaling;
        let mut s = ScalingSpec::unit(c.eps_list.clone());
        s.model = match c.model {
            ScalingModel::Unit => Model::Unit,
            // The payload is a placeholder: each run uses its own ε.
            ScalingModel::Eps => Model::Eps(0.5),
        };
        s.n = c.n;
        s.half_length = c.half_length_pi * PI;
        s.sigma = c.sigma;
        s.x0 = c.x0;
        s.n0 = self.model.n0;
        s.horizon_factor = c.horizon_factor;
        s.horizon_exponent = c.horizon_exponent;
        s.exit_norm_factor = c.exit_norm_factor;
        s.dt = (c.dt > 0.0).then_some(c.dt);
        Grid::new(s.n, s.half_length)?;
        Ok(s)
    }

    pub fn convergence_spec(&self) -> Result<ConvergenceSpec> {
        let c = &self.convergence;
        Ok(ConvergenceSpec {
            kind: self.system_kind()?,
            n: c.n,
            half_length: c.half_length_pi * PI,
            data: DataSpec::GaussianDerivative {
                alpha: c.alpha,
                beta: c.beta,
                sigma: c.sigma,
                x0: c.x0,
            },
            t_final: c.t_final,
            dts: c.dts.clone(),
            ref_divisor: c.ref_divisor,
            nonlinear: c.nonlinear,
        })
    }

    pub fn atlas_spec(&self) -> AtlasSpec {
        let a = &self.atlas;
        let mut s = AtlasSpec::standard(&a.eps_list, a.d_min, a.d_max);
        s.base_resolution = a.base_resolution;
        s
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let raw = raw.trim();
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Resolves `key` against the default layout: `section.key`, or a bare key that
/// names a top-level value or occurs in exactly one section.
fn resolve_key(defaults: &toml::Table, key: &str) -> Result<(Option<String>, String)> {
    if let Some((sec, k)) = key.split_once('.') {
        let known = defaults
            .get(sec)
            .and_then(|v| v.as_table())
            .is_some_and(|t| t.contains_key(k));
        return if known {
            Ok((Some(sec.to_string()), k.to_string()))
        } else {
            Err(Error::Config(format!("unknown key `{key}`")))
        };
    }
    if defaults.get(key).is_some_and(|v| !v.is_table()) {
        return Ok((None, key.to_string()));
    }
    let hits: Vec<&String> = defaults
        .iter()
        .filter(|(_, v)| v.as_table().is_some_and(|t| t.contains_key(key)))
        .map(|(s, _)| s)
        .collect();
    match hits.as_slice() {
        [s] => Ok((Some((*s).clone()), key.to_string())),
        [] => Err(Error::Config(format!("unknown key `{key}`"))),
        many => Err(Error::Config(format!(
            "ambiguous key `{key}`: qualify it as one of {}",
            many.iter()
                .map(|s| format!("{s}.{key}"))
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

/// Applies one `key=value` override to a parsed configuration table.
pub fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let defaults = toml::Table::try_from(Config::default())
        .map_err(|e| Error::Config(format!("default layout: {e}")))?;
    let (sec, k) = resolve_key(&defaults, key.trim())?;
    let value = parse_value(raw);
    match sec {
        None => {
            root.insert(k, value);
        }
        Some(s) => {
            let entry = root
                .entry(s.clone())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let table = entry
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("`{s}` must be a section")))?;
            table.insert(k, value);
        }
    }
    Ok(())
}

/// Parses TOML text, applies overrides in order, fills defaults and validates.
pub fn parse_config_str(text: &str, overrides: &[String]) -> Result<Config> {
    let mut root: toml::Table =
        toml::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
    for o in overrides {
        apply_override(&mut root, o)?;
    }
    let cfg = Config::deserialize(toml::Value::Table(root))
        .map_err(|e| Error::Config(format!("config: {}", e.message())))?;
    cfg.validate()?;
    Ok(cfg)
}

/// [`parse_config_str`] on a file, or on an empty document when `path` is `None`.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<Config> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    parse_config_str(&text, overrides)
}
