//! Batch driver for weighted shift scenarios.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fockweight::config::{load_scenario, ConfigError, ScenarioConfig, Task};
use fockweight::fock::analysis::{truncated_norm, OperatorNorm};
use fockweight::fock::{left_shift, right_shift, FockBasis};
use fockweight::graph::PathTable;
use fockweight::runner::{run_scenario, RunOptions};
use fockweight::scalar::format_rat;
use fockweight::weight::{LeftWeight, PathWeight, RightWeight};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "fockweight",
    version,
    about = "Exact truncated Fock-space calculus for weighted shifts on directed graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// Write the JSON report to this file ("-" for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Seed for float cross-checks (power iteration start vectors).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refuse exact elimination beyond this basis dimension.
    #[arg(long, default_value_t = 600)]
    max_dim: usize,
    /// Include per-task timings in the report (off keeps output byte-stable).
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task in a scenario config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Print the canonical path table of the scenario graph.
    Paths {
        config: PathBuf,
        #[arg(long)]
        horizon: usize,
    },
    /// Build the left/right shifts of a path and print their norms.
    Norms {
        config: PathBuf,
        /// Path literal (vertex id, edge word, or dotted edge word).
        #[arg(long)]
        path: String,
        #[arg(long, default_value_t = 8)]
        horizon: usize,
        /// Export the two operators as sparse triplets into this directory.
        #[arg(long)]
        export: Option<PathBuf>,
        /// Seed for the power-iteration fallback.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solve the windowed commutant of the left-shift family.
    Commutant {
        config: PathBuf,
        #[arg(long)]
        horizon: usize,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Double-commutant probe: the right-shift windowed commutant on the
    /// interior window, compared against the left-shift span.
    Probe {
        config: PathBuf,
        /// Generators come from the bounded classification up to this cap.
        #[arg(long)]
        cap: usize,
        #[arg(long)]
        horizon: usize,
        /// Horizon for the classification itself (defaults to `horizon`).
        #[arg(long)]
        classify_horizon: Option<usize>,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Tail-condition witness search at the given cap.
    Tails {
        config: PathBuf,
        #[arg(long)]
        cap: usize,
        /// Classification horizon (defaults to a safe multiple of the cap).
        #[arg(long)]
        horizon: Option<usize>,
        #[command(flatten)]
        flags: CommonFlags,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn dispatch() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, flags } => {
            let cfg = load(&config)?;
            run_and_emit(&cfg, &flags)
        }
        Command::Paths { config, horizon } => {
            let cfg = load(&config)?;
            let table = PathTable::enumerate(cfg.graph.clone(), horizon);
            println!("# {} paths, horizon {}", table.len(), horizon);
            for ix in 0..table.len() {
                let p = table.path(ix);
                println!(
                    "{ix}\t{}\t|{}|\ts={} r={}",
                    table.display(ix),
                    p.len(),
                    cfg.graph.vertex_id(cfg.graph.path_source(p)),
                    cfg.graph.vertex_id(cfg.graph.path_range(p)),
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Norms {
            config,
            path,
            horizon,
            export,
            seed,
        } => {
            let cfg = load(&config)?;
            let target = cfg
                .graph
                .parse_path(&path)
                .map_err(|e| ConfigError::Semantic(e.to_string()))?;
            let table = Arc::new(PathTable::enumerate(cfg.graph.clone(), horizon));
            let alpha = PathWeight::from_program(table.clone(), &cfg.weight)
                .context("weight evaluation failed")?;
            let basis = FockBasis::new(table);
            let lambda = LeftWeight::Alpha(alpha.clone());
            let rho = RightWeight::Alpha(alpha);
            let l = left_shift(&lambda, &target, &basis)?;
            let r = right_shift(&rho, &target, &basis)?;
            for (name, op) in [("left", &l), ("right", &r)] {
                match truncated_norm(op, seed) {
                    OperatorNorm::Exact { norm_sq, value } => match value {
                        Some(v) => println!("{name} shift norm: {} (exact)", format_rat(&v)),
                        None => println!(
                            "{name} shift norm: sqrt({}) (exact square)",
                            format_rat(&norm_sq)
                        ),
                    },
                    OperatorNorm::Approximate { value, iterations } => println!(
                        "{name} shift norm: {value:.12e} (approximate, {iterations} iterations)"
                    ),
                }
            }
            if let Some(dir) = export {
                std::fs::create_dir_all(&dir)
                    .with_context(|| format!("cannot create {}", dir.display()))?;
                let base = path.replace('.', "_");
                for (tag, op) in [("left", &l), ("right", &r)] {
                    let file = dir.join(format!("{base}.{tag}.triplets"));
                    std::fs::write(&file, op.export_triplets())
                        .with_context(|| format!("cannot write {}", file.display()))?;
                    println!("exported {}", file.display());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Commutant {
            config,
            horizon,
            flags,
        } => {
            let cfg = load(&config)?;
            let task = Task::Commutant {
                horizon,
                expect_dim: None,
            };
            run_and_emit(&with_tasks(&cfg, vec![task]), &flags)
        }
        Command::Probe {
            config,
            cap,
            horizon,
            classify_horizon,
            flags,
        } => {
            let cfg = load(&config)?;
            let task = Task::DoubleCommutant {
                gens: None,
                cap: Some(cap),
                classify_horizon,
                horizon,
                min_gap: None,
                expect_gap: None,
            };
            run_and_emit(&with_tasks(&cfg, vec![task]), &flags)
        }
        Command::Tails {
            config,
            cap,
            horizon,
            flags,
        } => {
            let cfg = load(&config)?;
            let task = Task::Tails {
                cap,
                horizon: horizon.unwrap_or(4 * cap),
                expect: None,
            };
            run_and_emit(&with_tasks(&cfg, vec![task]), &flags)
        }
    }
}

fn load(path: &std::path::Path) -> Result<ScenarioConfig> {
    Ok(load_scenario(path)?)
}

fn with_tasks(cfg: &ScenarioConfig, tasks: Vec<Task>) -> ScenarioConfig {
    ScenarioConfig {
        source: cfg.source.clone(),
        graph: cfg.graph.clone(),
        weight: cfg.weight.clone(),
        phases: cfg.phases.clone(),
        tasks,
    }
}

fn run_and_emit(cfg: &ScenarioConfig, flags: &CommonFlags) -> Result<ExitCode> {
    let opts = RunOptions {
        seed: flags.seed,
        max_dim: flags.max_dim,
        with_timings: flags.timings,
    };
    let report = run_scenario(cfg, &opts);
    print!("{}", report.render_text());
    if let Some(path) = &flags.json {
        let json = report.to_json();
        if path.as_os_str() == "-" {
            println!("{json}");
        } else {
            std::fs::write(path, json)
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}
