//! Batch runner: config in, report and CSV tables out.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use apsim_core::engines::with_workers;
use apsim_core::protocols::{self, EngineKind, ExperimentConfig, Protocol, ProtocolReport};
use clap::{Args, Parser, Subcommand};

pub use config::{parse_config, ConfigError, Format};
pub use output::{Curves, ErrorReport, Report, RunManifest};

/// Largest tolerated MC/exact total variation distance before a warning.
pub const TVD_WARN: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "apsim", version, about = "Spin-wave/photon entanglement simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its report.
    Run(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Experiment config (TOML, or JSON with a `.json` extension).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub protocol: Option<Protocol>,
    #[arg(long)]
    pub engine: Option<EngineKind>,
    #[arg(long)]
    pub mc_trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Storage time in ns; repeat for a sweep.
    #[arg(long = "tau")]
    pub taus: Vec<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Also write phi_vs_tau.csv and s_vs_tau.csv.
    #[arg(long)]
    pub emit_curves: bool,
    /// Worker threads for Monte Carlo sampling; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Engine(#[from] apsim_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Engine(_) => "engine",
            CliError::Io(_) => "io",
        }
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::json!({ "kind": self.kind(), "message": self.to_string() });
        if let CliError::Config(c) = self {
            v["key"] = c.key.clone().into();
            v["line"] = c.line.into();
        }
        serde_json::json!({ "error": v }).to_string()
    }
}

/// Loads the config (or protocol defaults), applies flag overrides, then
/// resolves and validates.
pub fn build_config(args: &RunArgs) -> Result<ExperimentConfig, ConfigError> {
    let (mut cfg, text) = match &args.config {
        Some(p) => config::load_raw(p)?,
        None => {
            let protocol = args.protocol.ok_or_else(|| ConfigError {
                file: None,
                key: "protocol".into(),
                line: None,
                message: "give --protocol or --config".into(),
            })?;
            (ExperimentConfig::new(protocol), String::new())
        }
    };
    if let Some(p) = args.protocol {
        cfg.protocol = p;
    }
    if let Some(e) = args.engine {
        cfg.engine = e;
    }
    if let Some(n) = args.mc_trials {
        cfg.mc_trials = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if !args.taus.is_empty() {
        cfg.taus = args.taus.clone();
    }
    config::resolve(cfg, &text).map_err(|mut e| {
        e.file = args.config.as_ref().map(|p| p.display().to_string());
        e
    })
}

fn warnings(results: &[ProtocolReport]) -> Vec<String> {
    let mut w = Vec::new();
    for r in results {
        let tau = r.tau_ns();
        if let ProtocolReport::Ghz3(g) = r {
            if !g.heralded {
                w.push(format!("tau {tau} ns: no heralded fourfold coincidences; witness and Mermin omitted"));
            }
        }
        if let Some(mc) = r.mc() {
            if mc.max_tvd > TVD_WARN {
                w.push(format!(
                    "tau {tau} ns: Monte Carlo deviates from the exact distribution by TVD {:.4}",
                    mc.max_tvd
                ));
            }
        }
    }
    w
}

fn manifest(args: &RunArgs, cfg: &ExperimentConfig, outputs: Vec<String>) -> RunManifest {
    RunManifest {
        config_path: args.config.as_ref().map(|p| p.display().to_string()),
        config: cfg.clone(),
        engine: cfg.engine.to_string(),
        seed: cfg.seed,
        out_dir: args.out.display().to_string(),
        outputs,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn simulate(cfg: &ExperimentConfig, workers: Option<usize>) -> apsim_core::Result<Vec<ProtocolReport>> {
    match workers {
        Some(n) => with_workers(n, || protocols::run(cfg))?,
        None => protocols::run(cfg),
    }
}

/// Runs the experiment and writes all artifacts. Engine failures still
/// produce a report carrying the error.
pub fn execute(args: &RunArgs) -> Result<Report, CliError> {
    let cfg = build_config(args)?;
    let out: &Path = &args.out;
    let results = match simulate(&cfg, args.workers) {
        Ok(r) => r,
        Err(e) => {
            let err = CliError::Engine(e);
            let report = Report {
                manifest: manifest(args, &cfg, vec!["report.json".into()]),
                protocol: cfg.protocol.to_string(),
                results: Vec::new(),
                curves: Curves::default(),
                warnings: Vec::new(),
                error: Some(ErrorReport {
                    kind: err.kind().into(),
                    message: err.to_string(),
                }),
            };
            output::write_all(out, &report)?;
            return Err(err);
        }
    };
    let emit_s = args.emit_curves || results.len() > 1;
    let curves = Curves {
        phi_vs_tau: if args.emit_curves { Some(output::phi_curve(&cfg)?) } else { None },
        s_vs_tau: emit_s.then(|| output::s_curve(&results)),
    };
    let outputs = output::planned_outputs(&results, args.emit_curves, emit_s);
    let report = Report {
        manifest: manifest(args, &cfg, outputs),
        protocol: cfg.protocol.to_string(),
        warnings: warnings(&results),
        results,
        curves,
        error: None,
    };
    output::write_all(out, &report)?;
    Ok(report)
}

/// Entry point shared by the binary and tests.
pub fn main_with<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::Run(args) => {
            let start = Instant::now();
            match execute(&args) {
                Ok(report) => {
                    for w in &report.warnings {
                        eprintln!("warning: {w}");
                    }
                    eprintln!(
                        "wrote {} files to {} in {:.2} s",
                        report.manifest.outputs.len(),
                        args.out.display(),
                        start.elapsed().as_secs_f64()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{}", e.to_json());
                    ExitCode::from(match e {
                        CliError::Config(_) => 2,
                        _ => 1,
                    })
                }
            }
        }
    }
}
