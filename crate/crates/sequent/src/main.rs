use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sequent::benchmark::{cmd_benchmark, BenchmarkConfig};
use sequent::config::{DatasetKind, PartialConfig};
use sequent::error::{Error, Result};
use sequent::evaluate::cmd_evaluate;
use sequent::grid::{cmd_grid, Bounds};
use sequent::io::write_dataset_csv;
use sequent::run::{cmd_train, load_dataset};
use sequent::verify::{cmd_verify, Fault};

/// Hybrid quantum-classical classifiers: classical baseline, dressed quantum circuit (DQC)
/// and sequential compression + circuit (SEQUENT) on a built-in statevector simulator.
///
/// Exit codes: 0 success, 1 verification failure, 2 configuration or input error,
/// 3 numerical divergence.
#[derive(Debug, Parser)]
#[command(name = "sequent", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON file with flat keys mirroring the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,

    #[command(flatten)]
    flags: PartialConfig,
}

impl ConfigArgs {
    fn merged(self) -> Result<PartialConfig> {
        let base = match &self.config {
            Some(path) => PartialConfig::load(path)?,
            None => PartialConfig::default(),
        };
        Ok(base.overlay(self.flags))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a moons or spirals dataset (raw features, label last) to --out.
    GenerateData(ConfigArgs),

    /// Train one model for every seed; writes report, metrics and snapshot per seed plus
    /// a summary into --out (default: runs).
    Train(ConfigArgs),

    /// Score a snapshot on its own test split, or on --data-file.
    Evaluate {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long = "data-file")]
        data_file: Option<PathBuf>,
    },

    /// Export predictions of a 2-feature snapshot over a regular grid as CSV.
    Grid {
        #[arg(long)]
        snapshot: PathBuf,
        /// x_min,x_max,y_min,y_max in raw feature units.
        #[arg(long, default_value = "-2,3,-2,2", allow_hyphen_values = true)]
        bounds: Bounds,
        /// Points per axis.
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        #[arg(long, default_value = "grid.csv")]
        out: PathBuf,
    },

    /// Run the simulator, gradient and model self-checks.
    Verify {
        #[arg(long = "inject-fault", value_enum, default_value_t = Fault::None, hide = true)]
        inject_fault: Fault,
    },

    /// Train all three models on moons and spirals over several seeds.
    Benchmark {
        /// Benchmark settings; defaults to the bundled calibrated config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "seeds", visible_alias = "seed", value_delimiter = ',', num_args = 1..)]
        seeds: Option<Vec<u64>>,
        #[arg(long, default_value = "benchmark")]
        out: PathBuf,
    },
}

fn generate_data(args: ConfigArgs) -> Result<()> {
    let config = args.merged()?.resolve()?;
    if config.dataset == DatasetKind::Csv {
        return Err(Error::Config(
            "generate-data needs the moons or spirals generator".into(),
        ));
    }
    let out = config
        .out
        .clone()
        .ok_or_else(|| Error::Config("generate-data needs --out".into()))?;
    let seed = config.seeds[0];
    let data = load_dataset(&config, seed)?;
    write_dataset_csv(&out, &data)?;
    println!(
        "wrote {} samples of {} to {}",
        data.len(),
        data.provenance(),
        out.display()
    );
    Ok(())
}

fn train(args: ConfigArgs) -> Result<()> {
    let config = args.merged()?.resolve()?;
    let (summary, outcomes) = cmd_train(&config)?;
    for o in &outcomes {
        println!(
            "{} on {} seed {}: test accuracy {:.4} ({:.1}s)",
            o.report.model, config.dataset, o.report.seed, o.report.final_test_accuracy, o.seconds
        );
    }
    let s = summary.test_accuracy;
    println!(
        "median {:.4} (min {:.4}, max {:.4}) over {} seed(s); artifacts in {}",
        s.median,
        s.min,
        s.max,
        outcomes.len(),
        config.out.as_deref().unwrap_or(Path::new("runs")).display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenerateData(args) => generate_data(args),
        Command::Train(args) => train(args),
        Command::Evaluate {
            snapshot,
            data_file,
        } => {
            let report = cmd_evaluate(&snapshot, data_file.as_deref())?;
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::format(&snapshot, e.to_string()))?;
            println!("{text}");
            Ok(())
        }
        Command::Grid {
            snapshot,
            bounds,
            resolution,
            out,
        } => {
            let rows = cmd_grid(&snapshot, bounds, resolution, &out)?;
            println!("wrote {rows} grid points to {}", out.display());
            Ok(())
        }
        Command::Verify { inject_fault } => {
            let outcomes = cmd_verify(inject_fault)?;
            let seconds: f64 = outcomes.iter().map(|o| o.seconds).sum();
            println!("all {} checks passed in {seconds:.1}s", outcomes.len());
            Ok(())
        }
        Command::Benchmark { config, seeds, out } => {
            let mut settings = match config {
                Some(path) => BenchmarkConfig::load(&path)?,
                None => BenchmarkConfig::default(),
            };
            if let Some(seeds) = seeds {
                settings.seeds = seeds;
            }
            let result = cmd_benchmark(&settings, &out)?;
            print!("{}", result.table());
            println!("artifacts in {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
