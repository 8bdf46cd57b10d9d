//! Command-line surface of `bsqlab`: argument parsing, configuration, dispatch
//! and artifact writing.
//!
//! Exit codes: 0 ok, 1 check failure, 2 configuration error, 3 runtime or
//! numerical failure.

pub mod config;
pub mod verify;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::evolution::{initial_data, simulate, write_dump, Exit, Trajectory};
use crate::experiments::{
    convergence_study, energy_budget, resonance_atlas, scaling_study, write_budget_csv, Manifest,
};
use crate::plot::{LinePlot, Series};
use crate::Model;

pub use config::{parse_config, parse_config_str, Config};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Relative energy-budget mismatch above which `budget` reports failure.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "bsqlab",
    version,
    about = "Boussinesq dispersive-system laboratory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML configuration file; omitted keys take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Override one key, `section.key=value` or a bare key unique across sections.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Output directory (default: $OUTPUT_DIR, else `out`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Seed for random data and ensembles; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Suppress progress messages on stderr.
    #[arg(short, long, global = true)]
    pub quiet: bool,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Integrate one trajectory and write its diagnostics.
    Simulate,
    /// Run the invariant suite; JSON lines on stdout, exit 1 on any failure.
    Verify,
    /// Tabulate small-modulation set measures across D.
    Atlas,
    /// Norm-doubling times across ε with a power-law fit.
    Scaling {
        /// `unit` or `eps`; overrides `scaling.model`.
        #[arg(long)]
        model: Option<String>,
        /// Comma-separated ε list; overrides `scaling.eps_list`.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Temporal order of the integrator against a fine reference.
    Convergence,
    /// Energy identity of the good unknown along a trajectory.
    Budget,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Verify => "verify",
            Command::Atlas => "atlas",
            Command::Scaling { .. } => "scaling",
            Command::Convergence => "convergence",
            Command::Budget => "budget",
        }
    }
}

/// Exit code for an error: configuration problems are 2, everything else 3.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// `--out`, then `$OUTPUT_DIR`, then `out`.
pub fn output_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os("OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

struct Ctx {
    cfg: Config,
    out: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn manifest(&self, command: &str, grid: Option<&crate::Grid>, eps: &[f64]) -> Result<()> {
        let cfg = serde_json::to_value(&self.cfg)
            .map_err(|e| Error::Numerical(format!("config serialization: {e}")))?;
        let m = Manifest::new(command, grid, eps, self.cfg.seed, cfg);
        let mut w = self.create("manifest.json")?;
        m.write(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// Resolved configuration for `cli`, with subcommand flags and `--seed` applied.
pub fn resolve_config(cli: &Cli) -> Result<Config> {
    let mut overrides = cli.overrides.clone();
    if let Command::Scaling { model, eps } = &cli.command {
        if let Some(m) = model {
            overrides.push(format!("scaling.model=\"{m}\""));
        }
        if let Some(list) = eps {
            let items: Vec<String> = list.iter().map(|e| format!("{e:?}")).collect();
            overrides.push(format!("scaling.eps_list=[{}]", items.join(",")));
        }
    }
    if let Some(s) = cli.seed {
        overrides.push(format!("seed={s}"));
    }
    parse_config(cli.config.as_deref(), &overrides)
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs the parsed command; `Ok` carries 0 or the check-failure code.
pub fn run(cli: &Cli) -> Result<i32> {
    let cfg = resolve_config(cli)?;
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::Config("--jobs must be ≥ 1".into()));
        }
        // A pool may already exist when running in-process more than once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global();
    }
    let out = output_dir(cli.out.as_deref());
    std::fs::create_dir_all(&out)?;
    let ctx = Ctx {
        cfg,
        out,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Simulate => cmd_simulate(&ctx),
        Command::Verify => cmd_verify(&ctx),
        Command::Atlas => cmd_atlas(&ctx),
        Command::Scaling { .. } => cmd_scaling(&ctx),
        Command::Convergence => cmd_convergence(&ctx),
        Command::Budget => cmd_budget(&ctx),
    }
}

fn eps_of(ctx: &Ctx) -> Vec<f64> {
    match ctx.cfg.system_kind() {
        Ok(k) if k.model() != Model::Unit => vec![k.eps()],
        _ => Vec::new(),
    }
}

fn run_trajectory(ctx: &Ctx, keep_states: bool) -> Result<Trajectory> {
    let cfg = &ctx.cfg;
    let grid = cfg.grid()?;
    let kind = cfg.system_kind()?;
    let s0 = initial_data(&grid, &cfg.data_spec(), kind.model())?;
    let spec = cfg.integrator(&grid)?;
    ctx.note(format!(
        "{}: n = {}, L = {}, dt = {:.3e}, T = {}",
        kind.label(),
        grid.n(),
        grid.half_length(),
        spec.dt,
        cfg.run.t_final
    ));
    simulate(
        &s0,
        kind,
        &spec,
        cfg.run.t_final,
        cfg.run.sample_every,
        keep_states,
    )
}

fn trajectory_plots(ctx: &Ctx, tr: &Trajectory) -> Result<()> {
    let pts = |ys: &[f64]| tr.times.iter().copied().zip(ys.iter().copied()).collect();
    LinePlot::new("energy", "t", "E_N0")
        .with(Series::new("E_N0", pts(&tr.energy)))
        .write(&ctx.out, "energy")?;
    let h0 = tr.hamiltonian.first().copied().unwrap_or(0.0);
    let drift: Vec<f64> = tr.hamiltonian.iter().map(|h| (h - h0).abs()).collect();
    LinePlot::new("Hamiltonian drift", "t", "|H(t) - H(0)|")
        .with(Series::new("drift", pts(&drift)))
        .write(&ctx.out, "hamiltonian")?;
    Ok(())
}

fn cmd_simulate(ctx: &Ctx) -> Result<i32> {
    let tr = run_trajectory(ctx, ctx.cfg.run.dump)?;
    let mut w = ctx.create("trajectory.csv")?;
    tr.write_csv(&mut w)?;
    w.flush()?;
    if ctx.cfg.run.dump {
        write_dump(&tr, &ctx.out.join("states.bin"))?;
    }
    trajectory_plots(ctx, &tr)?;
    ctx.manifest("simulate", Some(&tr.grid), &eps_of(ctx))?;
    println!(
        "exit = {}, samples = {}, hamiltonian_drift = {:.3e}, max_mass = {:.3e}",
        tr.exit.label(),
        tr.len(),
        tr.hamiltonian_drift(),
        tr.max_mass()
    );
    if let Exit::Nonfinite(t) = tr.exit {
        return Err(Error::Numerical(format!(
            "state became nonfinite at t = {t}"
        )));
    }
    Ok(EXIT_OK)
}

fn cmd_verify(ctx: &Ctx) -> Result<i32> {
    ctx.note("running invariant suite");
    let checks = verify::run_checks(&ctx.cfg)?;
    let mut w = ctx.create("verify.jsonl")?;
    let mut ok = true;
    for c in &checks {
        let line = serde_json::to_string(c)
            .map_err(|e| Error::Numerical(format!("report serialization: {e}")))?;
        println!("{line}");
        writeln!(w, "{line}")?;
        ok &= c.pass;
    }
    w.flush()?;
    ctx.manifest("verify", None, &[0.1])?;
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_atlas(ctx: &Ctx) -> Result<i32> {
    let spec = ctx.cfg.atlas_spec();
    ctx.note(format!(
        "atlas: {} entries, D in [{}, {}]",
        spec.entries.len(),
        spec.d_min,
        spec.d_max
    ));
    let r = resonance_atlas(&spec);
    let mut w = ctx.create("atlas.csv")?;
    r.write_csv(&mut w)?;
    w.flush()?;
    let mut plot = LinePlot::new("small-modulation measure", "D", "measure").log_y();
    for (kind, region) in &spec.entries {
        let pts = r
            .rows
            .iter()
            .filter(|row| row.kind == kind.label() && row.region == region.label)
            .map(|row| (row.d as f64, row.measure))
            .collect();
        plot = plot.with(Series::new(
            format!("{} / {}", kind.label(), region.label),
            pts,
        ));
    }
    plot.write(&ctx.out, "atlas")?;
    ctx.manifest("atlas", None, &ctx.cfg.atlas.eps_list)?;
    for f in &r.fits {
        println!("{} on {}: log2 slope {:.4}", f.kind, f.region, f.slope);
    }
    Ok(EXIT_OK)
}

fn cmd_scaling(ctx: &Ctx) -> Result<i32> {
    let spec = ctx.cfg.scaling_spec()?;
    ctx.note(format!(
        "scaling: {:?} model, eps = {:?}",
        spec.model, spec.eps_list
    ));
    let r = scaling_study(&spec)?;
    let mut w = ctx.create("scaling.csv")?;
    r.write_csv(&mut w)?;
    w.flush()?;
    let pts = |cens: bool| {
        r.rows
            .iter()
            .filter(|row| row.censored == cens)
            .map(|row| (1.0 / row.eps, row.t_double))
            .collect()
    };
    LinePlot::new("norm-doubling time", "1/eps", "T_double")
        .log_log()
        .with(Series::new("doubled", pts(false)))
        .with(Series::new("censored (horizon)", pts(true)))
        .write(&ctx.out, "scaling")?;
    let eps = match spec.model {
        Model::Unit => Vec::new(),
        Model::Eps(_) => spec.eps_list.clone(),
    };
    ctx.manifest("scaling", None, &eps)?;
    for row in &r.rows {
        println!(
            "eps = {}: T = {:.4e} ({})",
            row.eps,
            row.t_double,
            if row.censored { "censored" } else { "doubled" }
        );
    }
    match (&r.fit, r.lower_bound) {
        (Some(f), _) => println!("exponent = {:.4} (residual {:.2e})", f.exponent, f.residual),
        (None, Some(lb)) => println!("all runs censored: exponent ≥ {lb:.4} (lower bound)"),
        (None, None) => println!("exponent unavailable"),
    }
    Ok(EXIT_OK)
}

fn cmd_convergence(ctx: &Ctx) -> Result<i32> {
    let spec = ctx.cfg.convergence_spec()?;
    ctx.note(format!(
        "convergence: {} dts = {:?}",
        spec.kind.label(),
        spec.dts
    ));
    let r = convergence_study(&spec)?;
    let mut w = ctx.create("convergence.csv")?;
    r.write_csv(&mut w)?;
    w.flush()?;
    LinePlot::new("temporal convergence", "dt", "relative error")
        .log_log()
        .with(Series::new(
            "error",
            r.rows.iter().map(|row| (row.dt, row.error)).collect(),
        ))
        .write(&ctx.out, "convergence")?;
    let grid = crate::Grid::new(spec.n, spec.half_length)?;
    ctx.manifest("convergence", Some(&grid), &eps_of(ctx))?;
    for row in &r.rows {
        let order = row.order.map_or("-".to_string(), |o| format!("{o:.3}"));
        println!(
            "dt = {:.3e}: error = {:.3e}, order = {order}",
            row.dt, row.error
        );
    }
    Ok(EXIT_OK)
}

fn cmd_budget(ctx: &Ctx) -> Result<i32> {
    let tr = run_trajectory(ctx, true)?;
    ctx.note(format!("budget over {} samples", tr.len()));
    let rows = energy_budget(&tr, ctx.cfg.model.n0)?;
    let mut w = ctx.create("budget.csv")?;
    write_budget_csv(&rows, &mut w)?;
    w.flush()?;
    LinePlot::new("energy budget", "t", "d/dt |V|^2")
        .with(Series::new(
            "dE/dt",
            rows.iter().map(|r| (r.t, r.de_dt)).collect(),
        ))
        .with(Series::new(
            "sum of terms",
            rows.iter().map(|r| (r.t, r.sum_terms)).collect(),
        ))
        .write(&ctx.out, "budget")?;
    ctx.manifest("budget", Some(&tr.grid), &eps_of(ctx))?;
    let worst = rows.iter().map(|r| r.mismatch).fold(0.0, f64::max);
    let pass = worst <= BUDGET_TOLERANCE;
    println!(
        "{}",
        serde_json::json!({
            "check": "energy_budget_mismatch",
            "measured": worst,
            "threshold": BUDGET_TOLERANCE,
            "pass": pass,
        })
    );
    Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}
