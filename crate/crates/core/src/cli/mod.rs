//! The `voterpath` command line.
//!
//! Configuration is TOML. Each subcommand starts from built-in defaults, then
//! applies the `--config` file (top-level keys and the table named after the
//! subcommand), then `--set key=value` pairs in order. The shortcut flags
//! `--seed`, `--budget`, `--d`, `--p` and `--samples` are applied last.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or validation error,
//! 3 refusal by the event budget guard.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::Value;

use crate::error::{Error, Result};
use crate::harness::SweepConfig;
use commands::Outcome;
use output::{prepare_dir, sha256_hex, unix_now, write_manifest, write_results, Manifest};

#[derive(Debug, Parser)]
#[command(name = "voterpath", version, about = "Occupation times of the voter model", arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one configuration key; nested keys use dots. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, env = "VOTERPATH_THREADS", value_name = "N")]
    pub threads: Option<usize>,
    /// Master seed (sets `master_seed`).
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory [default: out/<subcommand>].
    #[arg(long, global = true, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Replace a previous run in the output directory.
    #[arg(long, global = true)]
    pub overwrite: bool,
    /// Run on a single thread; outputs are bit-identical across runs.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Event budget (sets `budget`).
    #[arg(long, global = true, value_name = "EVENTS")]
    pub budget: Option<f64>,
    /// Dimension (sets `d`).
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Initial density (sets `p`).
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Also write per-replica samples (clt only).
    #[arg(long, global = true)]
    pub samples: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Walk constants gamma_d, G(0), G(e1) and C_d(p).
    ///
    /// Keys: d, p, quadrature.{abs_tol, rel_tol, max_time_cut, tail_exponent}.
    /// Prints a JSON record to stdout.
    /// constants.csv: d,p,gamma_d,green0,green0_err,green1,green1_err,c_d
    #[command(verbatim_doc_comment)]
    Constants,
    /// Transition kernel, occupation potential and resolvent at one site.
    ///
    /// Keys: d, x, times, side (0 = Z^d), n_list, quadrature.
    /// kernel.csv: t,p_t,v_t,v_err
    /// resolvent.csv: n,phi,phi_err
    #[command(verbatim_doc_comment)]
    Kernel,
    /// Forward voter model on a torus with the occupation time at the origin.
    ///
    /// Keys: d, side, p, horizon, grid, reps, master_seed, budget.
    /// paths.csv: replica,t,occupation,centered
    /// summary.csv: t,mean_centered,stderr
    #[command(verbatim_doc_comment)]
    Simulate,
    /// Meeting probabilities of two coalescing walkers.
    ///
    /// Keys: d, side (0 = Z^d), x, y, offset, horizons, reps, p, master_seed.
    /// meeting.csv: horizon,offset,meeting_prob,stderr,two_point
    #[command(verbatim_doc_comment)]
    Dual,
    /// Covariance of the limit process and Gaussian sample paths.
    ///
    /// Keys: d, p, scale_c, grid, reps, master_seed, quadrature.
    /// covariance.csv: i,j,s,t,cov
    /// samples.csv: one column per grid time, one row per path
    #[command(verbatim_doc_comment)]
    Limit,
    /// Scaled occupation-time paths against the limit covariance.
    ///
    /// Keys: d, p, horizon, n_list, grid, side (0 = advisor), reps,
    /// master_seed, engine (forward|dual|auto), safety_k, budget, bootstrap,
    /// write_samples.
    /// results.csv: n,side,engine,t_i,t_j,mean_i,mean_stderr_i,cov,cov_stderr,limit_cov
    /// samples.csv (with --samples): n,replica,t,scaled
    #[command(verbatim_doc_comment)]
    Clt,
    /// Growth of Var(xi_N - pN) in N with a fitted log-log slope.
    ///
    /// Keys: d, p, n_list, reps, master_seed, estimator (simulation|dual_identity),
    /// engine, safety_k, budget.
    /// sweep.csv: n,side,variance,stderr,events,var_over_n_log_n
    /// fit.csv: d,slope,slope_stderr,n_log_n_variation,degenerate
    #[command(verbatim_doc_comment)]
    Sweep,
    /// Numerical probe of the conjectured two-dimensional limit.
    ///
    /// Keys: p, n, grid, reps, master_seed, engine, safety_k, budget,
    /// tail_times, tail_reps. Every row is labelled CONJECTURE.
    /// probe.csv: label,quantity,t,value,stderr
    /// probe_cov.csv: label,t_i,t_j,empirical,reference,stderr,z
    #[command(verbatim_doc_comment)]
    Probe2d,
    /// Martingale decomposition of the occupation time in d = 3.
    ///
    /// Keys: p, t, n_list, reps, master_seed, side (0 = advisor), safety_k, quadrature.
    /// mdc.csv: n,side,mean_m,mean_m_stderr,var_v0_scaled,var_v0_exact_scaled,var_m_scaled,limit_var_scaled
    #[command(verbatim_doc_comment)]
    Mdc,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Kernel => "kernel",
            Command::Simulate => "simulate",
            Command::Dual => "dual",
            Command::Limit => "limit",
            Command::Clt => "clt",
            Command::Sweep => "sweep",
            Command::Probe2d => "probe2d",
            Command::Mdc => "mdc",
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) | Error::Domain(_) | Error::Divergent { .. } => 2,
        Error::Budget { .. } => 3,
        _ => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidArgument(_) => "invalid_argument",
        Error::Divergent { .. } => "divergent",
        Error::Domain(_) => "domain",
        Error::Capacity(_) => "capacity",
        Error::Budget { .. } => "budget",
        Error::Inconsistency(_) => "inconsistency",
        Error::Config(_) => "config",
        Error::Io(_) => "io",
    }
}

/// The JSON record written to stderr for a failed run.
pub fn error_record(e: &Error) -> serde_json::Value {
    let mut rec = serde_json::json!({
        "error": error_kind(e),
        "message": e.to_string(),
        "exit_code": exit_code(e),
    });
    if let Error::Budget { estimate, budget } = e {
        rec["event_estimate"] = (*estimate).into();
        rec["budget"] = (*budget).into();
    }
    rec
}

/// What a finished run left behind.
#[derive(Debug)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub stdout: Option<serde_json::Value>,
}

static ABORT_TARGET: Mutex<Option<(PathBuf, Manifest)>> = Mutex::new(None);
static HANDLER: OnceLock<()> = OnceLock::new();

fn install_interrupt_handler() {
    HANDLER.get_or_init(|| {
        let _ = ctrlc::set_handler(|| {
            if let Ok(guard) = ABORT_TARGET.lock() {
                if let Some((dir, m)) = guard.as_ref() {
                    let mut m = m.clone();
                    m.status = "aborted".into();
                    m.finished_unix = unix_now();
                    m.wall_seconds = m.finished_unix - m.started_unix;
                    let _ = write_manifest(dir, &m);
                }
            }
            eprintln!("{}", serde_json::json!({ "error": "interrupted", "exit_code": 130 }));
            std::process::exit(130);
        });
    });
}

fn overrides(cli: &Cli, defaults: &toml::Table) -> Result<Vec<(String, Value)>> {
    let mut out = Vec::new();
    for s in &cli.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {s:?}")))?;
        out.push((k.trim().to_string(), config::parse_value(v.trim())));
    }
    let shortcuts = [
        ("master_seed", "--seed", cli.seed.map(|s| Value::Integer(s as i64))),
        ("budget", "--budget", cli.budget.map(Value::Float)),
        ("d", "--d", cli.d.map(|d| Value::Integer(d as i64))),
        ("p", "--p", cli.p.map(Value::Float)),
        ("write_samples", "--samples", cli.samples.then_some(Value::Boolean(true))),
    ];
    for (key, flag, value) in shortcuts {
        if let Some(v) = value {
            if !defaults.contains_key(key) {
                return Err(Error::Config(format!("{flag} does not apply to {}", cli.command.name())));
            }
            if key == "master_seed" && cli.seed.is_some_and(|s| s > i64::MAX as u64) {
                return Err(Error::Config("--seed must fit in 63 bits".into()));
            }
            out.push((key.to_string(), v));
        }
    }
    Ok(out)
}

fn load_file(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
}

struct Resolved {
    config: serde_json::Value,
    master_seed: u64,
    run: Box<dyn FnOnce() -> Result<Outcome> + Send>,
}

fn prepare<T>(cli: &Cli, file: Option<&toml::Table>, defaults: T, f: fn(&T) -> Result<Outcome>) -> Result<Resolved>
where
    T: Serialize + DeserializeOwned + Send + 'static,
{
    let defaults = config::to_table(&defaults)?;
    let over = overrides(cli, &defaults)?;
    let (cfg, _): (T, _) = config::resolve(defaults, file, cli.command.name(), &over)?;
    let config = serde_json::to_value(&cfg).map_err(|e| Error::Config(e.to_string()))?;
    let master_seed = config.get("master_seed").and_then(|v| v.as_u64()).unwrap_or(0);
    Ok(Resolved { config, master_seed, run: Box::new(move || f(&cfg)) })
}

fn resolve_command(cli: &Cli, file: Option<&toml::Table>) -> Result<Resolved> {
    use commands::*;
    match cli.command {
        Command::Constants => prepare(cli, file, ConstantsArgs::default(), constants),
        Command::Kernel => prepare(cli, file, KernelArgs::default(), kernel),
        Command::Simulate => prepare(cli, file, SimulateArgs::default(), simulate),
        Command::Dual => prepare(cli, file, DualArgs::default(), dual),
        Command::Limit => prepare(cli, file, LimitArgs::default(), limit),
        Command::Clt => prepare(cli, file, CltArgs::default(), clt),
        Command::Sweep => {
            let defaults = SweepConfig::new(3, 0.5, vec![250.0, 500.0, 1000.0, 2000.0], 1000, 0);
            prepare(cli, file, defaults, sweep)
        }
        Command::Probe2d => prepare(cli, file, crate::harness::ProbeConfig::default(), probe2d),
        Command::Mdc => prepare(cli, file, MdcArgs::default(), mdc),
    }
}

/// Resolves the configuration, runs the subcommand and writes its outputs.
pub fn execute(cli: &Cli) -> Result<RunSummary> {
    let file = cli.config.as_deref().map(load_file).transpose()?;
    let resolved = resolve_command(cli, file.as_ref())?;
    let dir = cli.output.clone().unwrap_or_else(|| Path::new("out").join(cli.command.name()));
    let threads = match (cli.sequential, cli.threads.unwrap_or(0)) {
        (true, _) => 1,
        (false, 0) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        (false, n) => n,
    };
    let canonical = serde_json::to_string(&resolved.config).map_err(|e| Error::Config(e.to_string()))?;
    prepare_dir(&dir, cli.overwrite)?;
    let started = unix_now();
    let mut manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: cli.command.name().to_string(),
        status: "running".into(),
        config: resolved.config,
        config_sha256: sha256_hex(canonical.as_bytes()),
        master_seed: resolved.master_seed,
        threads,
        sequential: cli.sequential,
        started_unix: started,
        finished_unix: started,
        wall_seconds: 0.0,
        events: 0,
        files: Vec::new(),
    };
    install_interrupt_handler();
    *ABORT_TARGET.lock().unwrap_or_else(|e| e.into_inner()) = Some((dir.clone(), manifest.clone()));
    let result = crate::parallel::with_threads(threads, resolved.run).and_then(|r| r);
    *ABORT_TARGET.lock().unwrap_or_else(|e| e.into_inner()) = None;
    let outcome = result?;
    manifest.status = "complete".into();
    manifest.events = outcome.events;
    manifest.finished_unix = unix_now();
    manifest.wall_seconds = manifest.finished_unix - started;
    write_results(&dir, &outcome.tables, &mut manifest)?;
    Ok(RunSummary { dir, manifest, stdout: outcome.stdout })
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            if let Some(json) = &summary.stdout {
                println!("{}", serde_json::to_string_pretty(json).unwrap_or_default());
            }
            eprintln!("wrote {} files to {}", summary.manifest.files.len() + 1, summary.dir.display());
            0
        }
        Err(e) => {
            eprintln!("{}", error_record(&e));
            exit_code(&e)
        }
    }
}
