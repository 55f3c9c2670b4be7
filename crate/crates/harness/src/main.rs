use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arbor::samplers::{sample_uniform_tree, OffspringDistribution, RngStream};
use arbor::simply_generated::{partition_zn, partition_zn_exact};
use arbor::DegreeStatistics;
use arbor_harness::{run, ConcentrationClass, ExperimentConfig, ExperimentKind, ExperimentReport, HarnessError, Result, Target};
use clap::{Parser, Subcommand};
use num_rational::BigRational;

#[derive(Parser)]
#[command(name = "arbor", version, about = "Random plane trees with prescribed degree statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive oracle equivalence suite.
    Equiv {
        #[arg(long, default_value_t = 9)]
        max_n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tail sweep against the explicit bounds. Without `--stats`, runs the
    /// exact-law battery over every statistics up to `--max-n`.
    Tails {
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "80,125,216,343")]
        grid: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 9)]
        max_n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Size-ladder trends, or `Ĉ` across the lazy-binary family with `--epsilons`.
    Converge {
        #[arg(long, conflicts_with = "epsilons")]
        mu: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        epsilons: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "200,800,3200")]
        sizes: Vec<u64>,
        #[arg(long, default_value_t = 200)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Treat `--mu` as a finite-variance control.
        #[arg(long)]
        control: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Concentration of degree statistics.
    Concentrate {
        #[arg(long)]
        class: ConcentrationClass,
        #[arg(long, required_unless_present = "weights")]
        mu: Option<PathBuf>,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1000)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10.0)]
        c: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.99)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a configuration file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Uniform trees with the given statistics, one Łukasiewicz word per line.
    Sample {
        #[arg(long)]
        stats: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The partition function `Z_n` of a weight sequence.
    Zn {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        n: usize,
    },
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn weights_value(path: &Path) -> Result<serde_json::Value> {
    Ok(serde_json::from_str(&read(path)?)?)
}

fn emit(report: &ExperimentReport, out: Option<PathBuf>) -> Result<bool> {
    match out.or_else(|| report.config.output.clone()) {
        Some(path) => report.write_files(&path)?,
        None => println!("{}", report.to_json()?),
    }
    for c in report.failures() {
        eprintln!("FAIL {} target={} n={} grid={} empirical={} bound={}", c.experiment, c.target, c.n, c.grid_value, c.empirical, c.bound);
    }
    Ok(report.all_pass())
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Equiv { max_n, out } => {
            let config = ExperimentConfig::new(ExperimentKind::Equivalence, Target::AllSmall, vec![max_n], 1, 0);
            emit(&run(&config)?, out)
        }
        Command::Tails { stats, grid, reps, seed, max_n, out } => {
            let config = match stats {
                Some(path) => ExperimentConfig::new(
                    ExperimentKind::TailSweep,
                    Target::Statistics(DegreeStatistics::from_json(&read(&path)?)?),
                    vec![],
                    reps,
                    seed,
                ),
                None => ExperimentConfig::new(ExperimentKind::TailSweep, Target::AllSmall, vec![max_n], 1, seed),
            };
            let mut config = config.with_grid(grid);
            if let Target::Statistics(s) = &config.target {
                config.sizes = vec![s.node_count()];
            }
            emit(&run(&config)?, out)
        }
        Command::Converge { mu, epsilons, sizes, reps, seed, control, out } => {
            let target = match mu {
                Some(path) => Target::Offspring(serde_json::from_str::<OffspringDistribution>(&read(&path)?)?),
                None if !epsilons.is_empty() => Target::LazyBinaryFamily,
                None => return Err(HarnessError::Config("give --mu or --epsilons".into())),
            };
            let mut config = ExperimentConfig::new(ExperimentKind::Convergence, target, sizes, reps, seed).with_grid(epsilons);
            config.control = control;
            emit(&run(&config)?, out)
        }
        Command::Concentrate { class, mu, weights, n, reps, seed, c, epsilon, threshold, out } => {
            let target = match (mu, weights) {
                (Some(path), _) => Target::Offspring(serde_json::from_str::<OffspringDistribution>(&read(&path)?)?),
                (None, Some(path)) => Target::Weights(weights_value(&path)?),
                (None, None) => unreachable!("clap requires one of them"),
            };
            let mut config = ExperimentConfig::new(ExperimentKind::Concentration, target, vec![n], reps, seed);
            config.class = Some(class);
            config.c = c;
            config.epsilon = epsilon;
            config.threshold = threshold;
            emit(&run(&config)?, out)
        }
        Command::Run { config, out } => {
            let config = ExperimentConfig::from_json(&read(&config)?)?;
            emit(&run(&config)?, out)
        }
        Command::Sample { stats, count, seed } => {
            let stats = DegreeStatistics::from_json(&read(&stats)?)?;
            for i in 0..count {
                let tree = sample_uniform_tree(&stats, &mut RngStream::new(seed, i).rng())?;
                let word: Vec<String> = tree.word().iter().map(usize::to_string).collect();
                println!("{}", word.join(" "));
            }
            Ok(true)
        }
        Command::Zn { weights, n } => {
            let value = weights_value(&weights)?;
            let seq = Target::Weights(value.clone()).weights()?;
            let mut result = serde_json::json!({ "n": n, "zn": partition_zn(&seq, n) });
            let listed: Option<Vec<BigRational>> = value
                .get("weights")
                .and_then(|w| w.as_array())
                .and_then(|w| w.iter().map(|x| x.as_f64().and_then(BigRational::from_float)).collect());
            if let Some(exact) = listed {
                result["zn_exact"] = serde_json::json!(partition_zn_exact(&exact, n).to_string());
            }
            println!("{}", serde_json::to_string_pretty(&result)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
