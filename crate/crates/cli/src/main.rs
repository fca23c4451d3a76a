use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qgraph::{recipes, run, CliError, ExperimentConfig, Pool};

/// Spectra and densities of states of metric graphs.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment from a config file or a built-in recipe.
    Run {
        #[arg(long, env = "QGRAPH_CONFIG", conflicts_with = "recipe")]
        config: Option<PathBuf>,
        #[arg(long, env = "QGRAPH_RECIPE")]
        recipe: Option<String>,
        #[arg(long, env = "QGRAPH_OUT", default_value = "out")]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long, env = "QGRAPH_SEED")]
        seed: Option<u64>,
        /// Worker threads; defaults to the number of cores.
        #[arg(long, env = "QGRAPH_JOBS")]
        jobs: Option<usize>,
    },
    /// List built-in recipes.
    Recipes,
}

fn load(config: Option<PathBuf>, recipe: Option<String>) -> Result<(ExperimentConfig, PathBuf), CliError> {
    match (config, recipe) {
        (Some(path), _) => {
            let text = fs::read_to_string(&path).map_err(|e| CliError::io(path.display().to_string(), e))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok((ExperimentConfig::parse(&text)?, base))
        }
        (None, Some(name)) => recipes::load(&name)
            .map(|c| (c, PathBuf::new()))
            .ok_or_else(|| CliError::Schema(format!("unknown recipe `{name}`"))),
        (None, None) => Err(CliError::Schema("missing field `config` (or give --recipe)".into())),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Cmd::Recipes => {
            for r in recipes::RECIPES {
                println!("{:<24} {}", r.name, r.summary);
            }
            ExitCode::SUCCESS
        }
        Cmd::Run { config, recipe, out, seed, jobs } => {
            let result = load(config, recipe).and_then(|(mut cfg, base)| {
                if let Some(s) = seed {
                    cfg.seed = s;
                }
                run(&cfg, &base, &out, &Pool::new(jobs))
            });
            match result {
                Ok(manifest) => {
                    println!("{} files written to {} (config {})", manifest.files.len() + 1, out.display(), manifest.config_hash);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{}", serde_json::to_string(&e.record()).expect("error record serializes"));
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
