use std::path::PathBuf;
use std::process::ExitCode;

use anchored_cli::commands::{self, AnchorKind, Outcome};
use anchored_cli::config::{CommonArgs, RunConfig};
use anchored_core::solver::{EddVariety, Formulation};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "anchored", version, about = "Triangulation of points on a line from multiview images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct one scene with each method.
    Triangulate {
        #[command(flatten)]
        common: CommonArgs,
        /// JSON scene file; a random scene is drawn from --seed otherwise.
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Write the scene used to this JSON file.
        #[arg(long)]
        save_scene: Option<PathBuf>,
    },
    /// Accuracy and timing of the methods over random scenes.
    Benchmark {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Count complex critical points of the distance function.
    Edd {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "anchored-point")]
        variety: VarietyArg,
        #[arg(long, value_enum, default_value = "reduced")]
        formulation: FormulationArg,
    },
    /// Count points of an anchored variety on random linear slices.
    Multidegree {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "line")]
        anchor: AnchorKind,
        /// Hyperplanes per view, comma-separated; defaults to all on view 1.
        #[arg(long, value_delimiter = ',')]
        pattern: Option<Vec<usize>>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VarietyArg {
    AnchoredPoint,
    AnchoredLine,
    PointMultiview,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    Reduced,
    Standard,
}

fn run(cli: Cli) -> anyhow::Result<(Outcome, bool)> {
    Ok(match cli.command {
        Command::Triangulate {
            common,
            scene,
            save_scene,
        } => {
            let cfg = RunConfig::from_args(&common, None)?;
            (commands::triangulate(&cfg, scene.as_deref(), save_scene)?, cfg.strict)
        }
        Command::Benchmark { common } => {
            let cfg = RunConfig::from_args(&common, None)?;
            (commands::benchmark(&cfg)?, cfg.strict)
        }
        Command::Edd {
            common,
            variety,
            formulation,
        } => {
            let cfg = RunConfig::from_args(&common, Some(20))?;
            let variety = match variety {
                VarietyArg::AnchoredPoint => EddVariety::AnchoredPoint,
                VarietyArg::AnchoredLine => EddVariety::AnchoredLine,
                VarietyArg::PointMultiview => EddVariety::PointMultiview,
            };
            let formulation = match formulation {
                FormulationArg::Reduced => Formulation::Reduced,
                FormulationArg::Standard => Formulation::Standard,
            };
            (commands::edd(&cfg, variety, formulation)?.1, cfg.strict)
        }
        Command::Multidegree {
            common,
            anchor,
            pattern,
        } => {
            let cfg = RunConfig::from_args(&common, Some(50))?;
            (commands::multidegree(&cfg, anchor, pattern)?.1, cfg.strict)
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((outcome, strict)) => {
            if strict && outcome.failures > 0 {
                eprintln!("strict: {} failures", outcome.failures);
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
