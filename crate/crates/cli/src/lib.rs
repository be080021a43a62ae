//! Command-line driver: `search`, `export-labels`, `eval` and `validate`.

use std::path::PathBuf;

use articand_core::eval::{EvalConfig, DEFAULT_AE_THRESH_DEG, DEFAULT_PE_THRESH};
use articand_core::records::to_json_string;
use articand_core::{Error, Result};
use clap::{ArgAction, Parser, Subcommand};

pub mod config;
pub mod eval;
pub mod labels;
pub mod search;
pub mod validate;

pub use config::{config_hash, ConfigArgs};

/// Success.
pub const EXIT_OK: i32 = 0;
/// Some shapes failed; the rest were written.
pub const EXIT_PARTIAL: i32 = 1;
/// Bad configuration, input or I/O.
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "articand", version, about = "Articulation-candidate discovery for segmented shapes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search candidate articulations for every shape in a dataset.
    Search {
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to available parallelism.
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Flatten candidate files into one label table.
    ExportLabels {
        candidates: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score candidates or predictions against dataset annotations.
    Eval {
        predictions: PathBuf,
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Axis-error threshold for candidate recall, degrees.
        #[arg(long, default_value_t = DEFAULT_AE_THRESH_DEG)]
        ae_thresh: f64,
        /// Point-error threshold for candidate recall, normalized units.
        #[arg(long, default_value_t = DEFAULT_PE_THRESH)]
        pe_thresh: f64,
        /// Ignore the sign of axes when comparing them.
        #[arg(long, default_value_t = true, action = ArgAction::Set)]
        flip_invariant: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Re-simulate listed articulations and report their actual free range.
    Validate {
        dataset: PathBuf,
        articulations: PathBuf,
        /// Report file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Search {
            dataset,
            out,
            workers,
            config,
        } => {
            let cfg = config.resolve()?;
            if workers == Some(0) {
                return Err(Error::InvalidInput("--workers must be at least 1".into()));
            }
            let r = search::run_search(&dataset, &out, &cfg, workers)?;
            log::info!(
                "{} shapes, {} failed",
                r.manifest.shapes.len(),
                r.failures
            );
            Ok(if r.failures == 0 { EXIT_OK } else { EXIT_PARTIAL })
        }
        Command::ExportLabels { candidates, out } => {
            let n = labels::run_export_labels(&candidates, &out)?;
            log::info!("{n} label rows written to {}", out.display());
            Ok(EXIT_OK)
        }
        Command::Eval {
            predictions,
            dataset,
            out,
            ae_thresh,
            pe_thresh,
            flip_invariant,
            config,
        } => {
            let cfg = EvalConfig {
                ae_thresh_deg: ae_thresh,
                pe_thresh,
                flip_invariant,
            };
            eval::run_eval(&predictions, &dataset, &out, &cfg, &config.resolve()?)?;
            Ok(EXIT_OK)
        }
        Command::Validate {
            dataset,
            articulations,
            out,
            config,
        } => {
            let report = validate::run_validate(&dataset, &articulations, &config.resolve()?)?;
            let text = to_json_string(&report);
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?,
                None => print!("{text}"),
            }
            Ok(EXIT_OK)
        }
    }
}

/// Runs a parsed command and maps errors to exit code 2.
pub fn run(cli: Cli) -> i32 {
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}
