//! Command-line batch runner for the interferometer simulator.
//!
//! `swapmeter run <config>` executes every experiment section in the config
//! and writes raw-count CSVs, figure curve CSVs, and a `manifest.txt` that
//! echoes each effective parameter next to each estimate, oracle, and
//! verdict. `validate` checks a config without running it; `presets` lists
//! the shipped figure presets.
//!
//! Exit codes: 0 success, 2 config problem, 3 estimator failure, 4 I/O
//! failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use swapmeter::experiment::config::{ExperimentConfig, parse_config};
use swapmeter::experiment::runner::{RunOutput, list_presets, run_sections};

const OUT_DIR_ENV: &str = "SWAPMETER_OUT";

#[derive(Parser)]
#[command(
    name = "swapmeter",
    version,
    about = "Simulates a controlled-SWAP photonic interferometer and estimates state \
             functionals from the generated counts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment in a config file and write CSVs plus a manifest.
    Run {
        /// Path to the experiment config file.
        config: PathBuf,
        /// Override the seed of every section.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the mean counts per phase point of every section.
        #[arg(long)]
        mean_counts: Option<f64>,
        /// Output directory; defaults to $SWAPMETER_OUT, then the current
        /// directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config file fully without executing anything.
    Validate {
        /// Path to the experiment config file.
        config: PathBuf,
    },
    /// List the shipped figure presets.
    Presets,
}

enum CliError {
    Config(String),
    Estimator(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Estimator(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Estimator(m) | CliError::Io(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {}", error.message());
            ExitCode::from(error.exit_code())
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Presets => {
            print!("{}", list_presets());
            Ok(())
        }
        Command::Validate { config } => {
            load_config(&config)?;
            println!("OK");
            Ok(())
        }
        Command::Run { config, seed, mean_counts, out } => {
            let mut sections = load_config(&config)?;
            apply_overrides(&mut sections, seed, mean_counts)?;
            let output = run_sections(&sections)
                .map_err(|e| CliError::Estimator(e.to_string()))?;
            let out_dir = resolve_out_dir(out);
            write_output(&out_dir, &output)?;
            print!("{}", output.manifest);
            println!("wrote {} files to {}", output.artifacts.len() + 1, out_dir.display());
            Ok(())
        }
    }
}

fn load_config(path: &Path) -> Result<Vec<ExperimentConfig>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::Config(e.to_string()))
}

fn apply_overrides(
    sections: &mut [ExperimentConfig],
    seed: Option<u64>,
    mean_counts: Option<f64>,
) -> Result<(), CliError> {
    if let Some(n0) = mean_counts
        && !(n0.is_finite() && n0 > 0.0)
    {
        return Err(CliError::Config(format!(
            "--mean-counts must be positive and finite, got {n0}"
        )));
    }
    for section in sections {
        if let Some(seed) = seed {
            section.seed = seed;
        }
        if let Some(n0) = mean_counts {
            section.mean_counts = n0;
        }
    }
    Ok(())
}

fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_output(out_dir: &Path, output: &RunOutput) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    for artifact in &output.artifacts {
        let path = out_dir.join(&artifact.filename);
        std::fs::write(&path, &artifact.contents)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    let manifest_path = out_dir.join("manifest.txt");
    std::fs::write(&manifest_path, &output.manifest)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", manifest_path.display())))
}
