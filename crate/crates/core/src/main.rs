use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use twinslice::allocators::AllocatorKind;
use twinslice::ddpg::{self, Checkpoint};
use twinslice::harness::{self, EpisodeRecord, MetricsRecord, Summary};
use twinslice::par::Execution;
use twinslice::{load_config, Error, Result, ScenarioConfig};

#[derive(Parser)]
#[command(version, about = "Digital-twin assisted bandwidth allocation for a UAV-served eMBB slice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON scenario config; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding `rng_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Ticks per training episode (train) or per evaluation run (run, compare).
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the DDPG agent; writes a checkpoint and a learning-curve CSV.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        episodes: Option<usize>,
        /// Where to write the checkpoint.
        #[arg(long, default_value = "checkpoint.bin")]
        checkpoint: PathBuf,
        /// Learning-curve CSV.
        #[arg(long, default_value = "learning_curve.csv")]
        out: PathBuf,
    },
    /// Evaluate one allocator.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        allocator: AllocatorKind,
        /// Trained checkpoint, required for `drl`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value = "metrics.csv")]
        out: PathBuf,
    },
    /// Evaluate all three allocators on paired seeds into one CSV.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value = "compare.csv")]
        out: PathBuf,
    },
}

fn load(common: &Common) -> Result<(ScenarioConfig, u64)> {
    let cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::default(),
    };
    let seed = common.seed.unwrap_or(cfg.rng_seed);
    Ok((cfg, seed))
}

fn load_checkpoint(path: Option<&PathBuf>) -> Result<Option<Checkpoint>> {
    path.map(Checkpoint::load).transpose()
}

fn print_summary(s: &Summary) {
    println!(
        "{:<7} latency {:8.3} ms  utilization {:.3}  jitter {:8.3} ms  reward {:+.4}",
        s.allocator,
        s.avg_latency * 1e3,
        s.utilization,
        s.jitter * 1e3,
        s.reward
    );
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            common,
            episodes,
            checkpoint,
            out,
        } => {
            let (mut cfg, seed) = load(&common)?;
            if let Some(e) = episodes {
                cfg.episodes = e;
            }
            if let Some(h) = common.horizon {
                cfg.horizon_steps = h;
            }
            let outcome = ddpg::train(&cfg, seed, |s| {
                if s.episode % 10 == 0 {
                    eprintln!(
                        "episode {:>5}  reward {:+.4}  latency {:.3} ms  noise {:.3}",
                        s.episode,
                        s.mean_reward,
                        s.mean_latency * 1e3,
                        s.noise_std
                    );
                }
            })?;
            Checkpoint::from_agent(&outcome.agent).save(&checkpoint)?;
            let rows: Vec<EpisodeRecord> = outcome.curve.iter().map(EpisodeRecord::from).collect();
            harness::write_csv(&rows, &out)?;
            println!("wrote {} and {}", checkpoint.display(), out.display());
        }
        Command::Run {
            common,
            allocator,
            checkpoint,
            out,
        } => {
            let (mut cfg, seed) = load(&common)?;
            if let Some(h) = common.horizon {
                cfg.eval_steps = h;
            }
            let ck = load_checkpoint(checkpoint.as_ref())?;
            let run = harness::run_experiment(&cfg, allocator, ck.as_ref(), seed)?;
            harness::write_csv(&run.records, &out)?;
            print_summary(&run.summary);
        }
        Command::Compare {
            common,
            checkpoint,
            out,
        } => {
            let (mut cfg, seed) = load(&common)?;
            if let Some(h) = common.horizon {
                cfg.eval_steps = h;
            }
            let ck = load_checkpoint(checkpoint.as_ref())?.ok_or(Error::MissingCheckpoint)?;
            let runs = harness::compare(&cfg, Some(&ck), seed, Execution::Parallel)?;
            let rows: Vec<MetricsRecord> = runs.iter().flat_map(|r| r.records.iter().cloned()).collect();
            harness::write_csv(&rows, &out)?;
            for r in &runs {
                print_summary(&r.summary);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
