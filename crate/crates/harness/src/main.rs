use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use l3blind_harness::config::parse_methods;
use l3blind_harness::experiments::{run_concentration_experiment, run_convergence_experiment};
use l3blind_harness::report::{self, TRIALS_FILE};
use l3blind_harness::{run_sweep, Result, SystemConfig};

#[derive(Parser)]
#[command(name = "l3blind", version, about = "Blind massive MIMO detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo trials over the configured sweep.
    Simulate(Common),
    /// Normalized-objective traces of the polar iteration.
    Convergence(Common),
    /// Exceedance frequency of the frame concentration statistic.
    Concentration(Common),
    /// Rebuild summary.csv and plots from an existing trials.jsonl.
    Report {
        #[command(flatten)]
        common: Common,
        /// Records to read; defaults to <out>/trials.jsonl.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON file with SystemConfig fields; missing fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated subset of l3, l4, rgd, pilot.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long, action = clap::ArgAction::Set)]
    precondition: Option<bool>,
}

impl Common {
    fn config(&self) -> Result<SystemConfig> {
        let mut cfg = match &self.config {
            Some(p) => SystemConfig::load(p)?,
            None => SystemConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.base_seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
            cfg.concentration.trials = t;
        }
        if let Some(m) = &self.methods {
            cfg.methods = parse_methods(m)?;
        }
        if let Some(p) = self.precondition {
            cfg.solver.precondition = p;
        }
        Ok(cfg)
    }
}

fn announce(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn simulate(c: &Common) -> Result<()> {
    let cfg = c.config()?;
    let records = run_sweep(&cfg)?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} method runs failed; see `error` in {TRIALS_FILE}", records.len());
    }
    announce(&report::emit_report(&c.out, &records)?);
    Ok(())
}

fn convergence(c: &Common) -> Result<()> {
    let cfg = c.config()?;
    let s = &cfg.convergence;
    let results = run_convergence_experiment(
        &s.resolved_variants(),
        cfg.constellation,
        &cfg.solver,
        s.target,
        cfg.trials,
        cfg.base_seed,
    )?;
    for r in &results {
        println!(
            "{:<12} median iterations to {}: {:>5}  final mean {:.4}  planted {:.4}",
            r.variant.label,
            s.target,
            r.median_crossing,
            r.mean_trace.last().copied().unwrap_or(f64::NAN),
            r.planted_mean
        );
    }
    announce(&report::write_convergence(&c.out, &results)?);
    Ok(())
}

fn concentration(c: &Common) -> Result<()> {
    let cfg = c.config()?;
    let rows = run_concentration_experiment(&cfg.concentration, cfg.constellation, cfg.base_seed)?;
    for r in &rows {
        println!("K={:<3} T={:<6} frequency {:<8} bound {:.3e}", r.k_users, r.t_len, r.frequency, r.theory);
    }
    announce(&report::write_concentration(&c.out, &rows)?);
    Ok(())
}

fn rebuild(c: &Common, input: Option<&Path>) -> Result<()> {
    let path = input.map(Path::to_path_buf).unwrap_or_else(|| c.out.join(TRIALS_FILE));
    let records = report::read_jsonl(&path)?;
    announce(&report::summarize(&c.out, &records)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::Convergence(c) => convergence(c),
        Command::Concentration(c) => concentration(c),
        Command::Report { common, input } => rebuild(common, input.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
