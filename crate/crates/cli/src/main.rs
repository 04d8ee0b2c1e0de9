//! Batch experiment driver for the sumrate library.
//!
//! `sumrate <experiment> --config cfg.json --out results/` runs one
//! experiment described entirely by a JSON config and writes plot-ready
//! CSV files plus a `summary.json`. Outputs are a pure function of
//! (config, binary version): reruns are byte-identical except for the
//! recorded runtime.

mod config;
mod output;
mod runners;

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use output::{write_summary, RunContext, Summary};

const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Parser)]
#[command(
    name = "sumrate",
    version,
    about = "Sum-rate bound, scheduling and power-allocation experiments for OFDMA downlinks"
)]
struct Cli {
    /// Experiment configuration file (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override the seed in the config file.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Worker threads; 0 uses the machine's parallelism.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    threads: usize,

    /// Report rates in bits instead of nats.
    #[arg(long, global = true)]
    bits: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sum-rate bounds over a sweep of user counts.
    Bounds,
    /// Extreme-value scaling points and concentration bands.
    ScalingSweep,
    /// Solve the deterministic power-allocation problem.
    OpSolve,
    /// Simulate the distributed schedule under fixed powers.
    ScheduleSim,
    /// Emit design tradeoff curves and thresholds.
    Design,
    /// Solve the multi-beam allocation problem.
    Miso {
        /// Beams per transmitter; overrides the config value.
        #[arg(long, value_name = "M")]
        m: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::ScalingSweep => "scaling-sweep",
            Command::OpSolve => "op-solve",
            Command::ScheduleSim => "schedule-sim",
            Command::Design => "design",
            Command::Miso { .. } => "miso",
        }
    }
}

fn main() -> anyhow::Result<()> {
    env_logger::init();
    let cli = Cli::parse();
    let config_path = cli
        .config
        .context("--config is required: every experiment is described by a JSON file")?;
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("configuring the thread pool")?;
    }

    let text = fs::read_to_string(&config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let mut raw: Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing {} as JSON", config_path.display()))?;
    let obj = raw
        .as_object_mut()
        .context("config must be a JSON object")?;
    if let Some(seed) = cli.seed {
        obj.insert("seed".into(), json!(seed));
    }
    if let Command::Miso { m: Some(m) } = &cli.command {
        obj.insert("m".into(), json!(m));
    }
    if !obj.contains_key("seed") {
        anyhow::bail!("config must carry an explicit \"seed\" (or pass --seed)");
    }

    fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating {}", cli.out.display()))?;
    let name = cli.command.name();
    let runner = runners::find(name)?;
    let ctx = RunContext {
        out_dir: cli.out.clone(),
        bits: cli.bits,
    };
    let started = Instant::now();
    let artifacts = runner.run(&raw, &ctx)?;
    let summary = Summary {
        experiment: name,
        version: VERSION,
        units: if cli.bits { "bits" } else { "nats" },
        config: &raw,
        results: &artifacts.results,
        outputs: &artifacts.outputs,
        runtime_seconds: started.elapsed().as_secs_f64(),
    };
    write_summary(&ctx.path("summary.json"), &summary)?;
    println!(
        "{name}: wrote {} and summary.json to {}",
        artifacts.outputs.join(", "),
        cli.out.display()
    );
    Ok(())
}
