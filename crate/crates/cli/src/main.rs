use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use terralabel_cli::{cmd_aggregate, cmd_report, cmd_run, cmd_synth, CliError, Overrides};

#[derive(Parser)]
#[command(name = "terralabel", version, about = "Land-cover label synthesis from multispectral scenes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed (overrides the config file)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of scenes processed concurrently
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Trees per forest
    #[arg(long, global = true)]
    trees: Option<usize>,
    /// Scenes at or above this cloud fraction are skipped
    #[arg(long, global = true)]
    cloud_threshold: Option<f64>,
    /// Taxonomy override (JSON)
    #[arg(long, global = true)]
    taxonomy: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic tile
    Synth {
        spec: PathBuf,
        /// Output directory (default: <tile_id> next to the spec)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Process every scene of a tile and aggregate
    Run { config: PathBuf },
    /// Print accuracies and the normalized confusion matrix of a run
    Report { dir: PathBuf },
    /// Rebuild the annual label from existing scene outputs
    Aggregate { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let overrides = Overrides {
        seed: cli.seed,
        workers: cli.workers,
        trees: cli.trees,
        cloud_threshold: cli.cloud_threshold,
        taxonomy: cli.taxonomy.clone(),
    };
    let result: Result<(), CliError> = match &cli.command {
        Command::Synth { spec, out } => cmd_synth(spec, out.as_deref(), cli.seed).map(|(dir, tile)| {
            for (m, cloud) in &tile.scenes {
                println!(
                    "{}  {}  cloud {cloud:.3}",
                    m.scene_id,
                    m.datetime.format("%Y-%m-%dT%H:%M:%SZ")
                );
            }
            println!("tile written to {}", dir.display());
        }),
        Command::Run { config } => cmd_run(config, &overrides).map(|s| {
            for e in &s.scenes {
                println!("{}  {:.4}", e.scene_id, e.accuracy);
            }
            for e in &s.skipped {
                println!("{}  skipped ({} {:.4})", e.scene_id, e.reason, e.cloud_fraction);
            }
            if let Some(a) = s.average_accuracy {
                println!("average  {a:.4}");
            }
        }),
        Command::Report { dir } => cmd_report(dir).map(|text| print!("{text}")),
        Command::Aggregate { dir } => cmd_aggregate(dir).map(|r| {
            println!(
                "{} scenes, {} observed pixels, {} unobserved",
                r.scenes.len(),
                r.observed_pixels,
                r.unobserved_pixels
            );
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
