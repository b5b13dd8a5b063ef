use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use onebit::config::sha256_hex;
use onebit::experiments::{cmd_adapt, cmd_cdf, cmd_roc};
use onebit::output::{label, num, CsvSink};
use onebit::validate::{run_suite, SuiteOptions};
use onebit::{AppError, ExperimentConfig};

/// Steady-state analysis and simulation of one-bit diffusion detection.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed; overrides `dynamics.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Reduced validation run.
    #[arg(long, global = true)]
    quick: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytical and empirical steady-state CDFs with KS distances.
    Cdf,
    /// Analytical and empirical ROC curves.
    Roc,
    /// Mean trajectories over a hypothesis schedule and reaction times.
    Adapt,
    /// Runs the oracle and invariant suite.
    Validate,
}

fn load(path: Option<&Path>) -> Result<ExperimentConfig, AppError> {
    let path = path.ok_or_else(|| onebit::ConfigError {
        line: None,
        message: "--config is required".into(),
    })?;
    let text = fs::read_to_string(path).map_err(|e| onebit::ConfigError {
        line: None,
        message: format!("{}: {e}", path.display()),
    })?;
    ExperimentConfig::parse(&text).map_err(|mut e| {
        e.message = format!("{}: {}", path.display(), e.message);
        e.into()
    })
}

fn execute(cli: &Cli) -> Result<bool, AppError> {
    if let Command::Validate = cli.command {
        let (seed, sha) = match &cli.config {
            Some(p) => {
                let cfg = load(Some(p))?;
                (cli.seed.unwrap_or(cfg.seed), cfg.sha256)
            }
            None => (cli.seed.unwrap_or(1), sha256_hex(b"")),
        };
        let results = run_suite(&SuiteOptions { quick: cli.quick, seed })?;
        for r in &results {
            println!("{}", r.line());
        }
        if let Some(dir) = &cli.out {
            let mut sink = CsvSink::create(
                &dir.join("validate.csv"),
                &sha,
                seed,
                &["check", "passed", "measured", "tolerance", "detail"],
            )?;
            for r in &results {
                sink.row([
                    r.name.clone(),
                    r.passed.to_string(),
                    num(r.measured),
                    num(r.tolerance),
                    r.detail.clone(),
                ])?;
            }
            sink.finish()?;
        }
        let failed = results.iter().filter(|r| !r.passed).count();
        println!("{} checks, {failed} failed", results.len());
        return Ok(failed == 0);
    }

    let cfg = load(cli.config.as_deref())?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let out = cli.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
    let files = match cli.command {
        Command::Cdf => {
            let report = cmd_cdf(&cfg, seed, &out)?;
            for r in &report.rows {
                println!(
                    "{} {} a={} node={} {:?} ks={:.4}",
                    r.model,
                    num(r.param),
                    num(r.a),
                    label(r.node),
                    r.h,
                    r.ks
                );
            }
            report.files
        }
        Command::Roc => {
            let (summaries, files) = cmd_roc(&cfg, seed, &out)?;
            for s in &summaries {
                println!(
                    "{} {} a={} node={} max|dPd|={:.4}",
                    s.model,
                    num(s.param),
                    num(s.a),
                    label(s.node),
                    s.max_pd_gap
                );
            }
            files
        }
        Command::Adapt => {
            let (rows, files) = cmd_adapt(&cfg, seed, &out)?;
            for r in &rows {
                let t = r.steps.map_or_else(|| "unreached".to_string(), |s| s.to_string());
                println!("{} node={} switch={} reaction={t}", r.scheme.name(), label(r.node), r.switch);
            }
            files
        }
        Command::Validate => unreachable!(),
    };
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ AppError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
