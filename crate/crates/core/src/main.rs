use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use spbp::engine::{Scenario, Simulation, SimulationParams};
use spbp::experiment::{self, ExperimentConfig, Manifest, RunKey};
use spbp::Error;

#[derive(Parser)]
#[command(name = "spbp", version, about = "Backpressure routing and scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment sweep and write flows.csv, aggregate.csv and manifest.toml.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to the CPU count).
        #[arg(long)]
        jobs: Option<usize>,
        /// Overrides the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// 200 slots and 2 instances per size.
        #[arg(long)]
        quick: bool,
    },
    /// Reproduce a run from its manifest.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print mean ± 95% CI per size and variant from an output directory.
    Summarize {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Export one scenario's network, conflict structure and bias table.
    Inspect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        instance: usize,
        #[arg(long, default_value_t = 0)]
        realization: usize,
        /// Index of the variant whose scheduler and bias to use.
        #[arg(long, default_value_t = 0)]
        variant: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            jobs,
            seed,
            quick,
        } => ExperimentConfig::load(&config).and_then(|mut c| {
            if let Some(s) = seed {
                c.seed = s;
            }
            if quick {
                c.quick();
            }
            let out = out
                .or_else(|| c.output.clone())
                .ok_or_else(|| Error::Config("no output directory: pass --out or set `output`".into()))?;
            run(&c, &out, jobs)
        }),
        Command::Rerun { manifest, out, jobs } => Manifest::load(&manifest).and_then(|m| {
            if m.version != env!("CARGO_PKG_VERSION") {
                eprintln!(
                    "warning: manifest written by version {}, running {}",
                    m.version,
                    env!("CARGO_PKG_VERSION")
                );
            }
            run(&m.config, &out, jobs)
        }),
        Command::Summarize { dir } => experiment::summarize(&dir).map(|table| print!("{table}")),
        Command::Inspect {
            config,
            size,
            instance,
            realization,
            variant,
            out,
        } => ExperimentConfig::load(&config).and_then(|c| {
            let key = RunKey {
                size,
                lambda: None,
                instance,
                realization,
            };
            inspect(&c, key, variant, &out)
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::InfeasibleAssignment { .. } => 3,
                _ => 1,
            })
        }
    }
}

fn run(config: &ExperimentConfig, out: &Path, jobs: Option<usize>) -> spbp::Result<()> {
    let started = Instant::now();
    match experiment::run_experiment(config, out, jobs) {
        Ok(results) => {
            eprintln!(
                "{} scenarios x {} variants in {:.1}s, written to {}",
                results.len(),
                config.variants.len(),
                started.elapsed().as_secs_f64(),
                out.display()
            );
            Ok(())
        }
        Err(Error::InfeasibleAssignment { slot, reason, trace }) => {
            if let Some(t) = &trace {
                fs::create_dir_all(out)?;
                let path = out.join("infeasible_trace.jsonl");
                fs::write(&path, t)?;
                eprintln!("decision trace of the failing slot: {}", path.display());
            }
            Err(Error::InfeasibleAssignment { slot, reason, trace })
        }
        Err(e) => Err(e),
    }
}

fn inspect(config: &ExperimentConfig, key: RunKey, variant: usize, out: &Path) -> spbp::Result<()> {
    let v = config
        .variants
        .get(variant)
        .ok_or_else(|| Error::Config(format!("variant index {variant} out of range")))?;
    let scenario = Scenario::generate(
        key.size,
        key.instance_seed(config.seed),
        key.realization_seed(config.seed),
        &config.radio,
        &config.traffic,
        config.horizon,
    )?;
    let params = SimulationParams {
        horizon: config.horizon,
        max_iterations: config.max_iterations,
        check_feasibility: false,
        trace: false,
    };
    let sim = Simulation::new(&scenario, v, &config.radio, params)?;
    fs::create_dir_all(out)?;
    scenario
        .graph
        .write_edge_list(&scenario.rates, fs::File::create(out.join("network.txt"))?)?;
    sim.conflicts().write_text(fs::File::create(out.join("conflicts.txt"))?)?;
    sim.state().bias().write_csv(fs::File::create(out.join("bias.csv"))?)?;
    eprintln!(
        "{} nodes, {} links, {} flows; wrote network.txt, conflicts.txt, bias.csv to {}",
        scenario.graph.node_count(),
        scenario.graph.link_count(),
        scenario.flows.len(),
        out.display()
    );
    Ok(())
}
