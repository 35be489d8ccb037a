//! `moql`: oracle tables, seeded experiment runs and model files from the
//! command line.
//!
//! Exit status is 0 on success, 2 for usage or configuration errors and 1
//! for failures while running.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use moql_core::agents::AlgorithmId;
use moql_core::envs::{EnvId, MomdpModel};
use moql_core::harness::{self, EnvSource, ExperimentSpec, PRESETS};
use moql_core::oracle::{oracle_table, OracleRow};
use moql_core::{Decimal, Error, Schedule, TloUtility};

#[derive(Parser)]
#[command(
    name = "moql",
    version,
    about = "Thresholded lexicographic multi-objective Q(lambda) experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every deterministic policy exactly and mark the optimal one.
    Oracle {
        /// Built-in environment name or `file:<path>`.
        env: EnvSource,
        /// Threshold override, once per thresholded objective.
        #[arg(long = "threshold")]
        thresholds: Vec<Decimal>,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a multi-trial experiment from a TOML file or `preset:<name>`.
    Run(RunArgs),
    /// List environments, algorithms and presets.
    List,
    /// Write a built-in environment in the model file format.
    EmitEnv {
        env: EnvId,
        /// Output path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment file or `preset:<name>`.
    config: String,
    /// Environment override: built-in name or `file:<path>`.
    #[arg(long)]
    env: Option<EnvSource>,
    #[arg(long)]
    algorithm: Option<AlgorithmId>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u32>,
    /// Episodes per trial; schedules spanning the run are stretched to match.
    #[arg(long)]
    episodes: Option<u64>,
    /// Learning rate (the starting value when decaying).
    #[arg(long)]
    alpha: Option<f64>,
    /// Final learning rate of a linear decay; implies `--decay`.
    #[arg(long)]
    alpha_final: Option<f64>,
    /// Decay the learning rate linearly over the run (to 0.0001 by default).
    #[arg(long)]
    decay: bool,
    /// Visit-probability floor of two-phase MOSS.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Data-gathering phase length of two-phase MOSS.
    #[arg(long)]
    dd: Option<u64>,
    /// Learning phase length of two-phase MOSS.
    #[arg(long)]
    dl: Option<u64>,
    /// Maximum trials running at once.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory; defaults to `runs/<config name>`.
    #[arg(long)]
    out: Option<PathBuf>,
}

const DEFAULT_ALPHA_FINAL: f64 = 0.0001;

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentSpec, Error> {
        let mut spec = harness::resolve(&self.config)?;
        if let Some(env) = &self.env {
            spec.environment = env.clone();
        }
        if let Some(a) = self.algorithm {
            spec.algorithm = a;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(t) = self.trials {
            spec.trials = t;
        }
        if let Some(e) = self.episodes {
            spec.set_episodes(e);
        }
        let initial = self.alpha.unwrap_or(spec.agent.alpha.initial());
        spec.agent.alpha = match (spec.agent.alpha, self.decay || self.alpha_final.is_some()) {
            (Schedule::LinearDecay { last, .. }, false) => {
                Schedule::linear(initial, last, spec.episodes())
            }
            (_, true) => Schedule::linear(
                initial,
                self.alpha_final.unwrap_or(DEFAULT_ALPHA_FINAL),
                spec.episodes(),
            ),
            (Schedule::Constant { .. }, false) => Schedule::constant(initial),
        };
        if let Some(e) = self.epsilon {
            spec.agent.epsilon = e;
        }
        if let Some(d) = self.dd {
            spec.agent.data_phase = d;
        }
        if let Some(d) = self.dl {
            spec.agent.learning_phase = d;
        }
        if self.jobs.is_some() {
            spec.jobs = self.jobs;
        }
        if let Some(out) = &self.out {
            spec.output = Some(out.clone());
        } else if spec.output.is_none() {
            spec.output = Some(Path::new("runs").join(config_name(&self.config)));
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn config_name(config: &str) -> String {
    match config.strip_prefix("preset:") {
        Some(name) => name.to_owned(),
        None => Path::new(config)
            .file_stem()
            .map_or("run".into(), |s| s.to_string_lossy().into_owned()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Oracle {
            env,
            thresholds,
            csv,
        } => cmd_oracle(&env, thresholds, csv.as_deref()),
        Command::Run(args) => cmd_run(&args),
        Command::List => {
            cmd_list();
            Ok(())
        }
        Command::EmitEnv { env, output } => cmd_emit_env(env, output.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

fn fmt_vec(v: &[Decimal]) -> String {
    let parts: Vec<String> = v.iter().map(|d| d.normalize().to_string()).collect();
    format!("({})", parts.join(", "))
}

fn cmd_oracle(env: &EnvSource, thresholds: Vec<Decimal>, csv: Option<&Path>) -> Result<(), Error> {
    let mut model = env.load(None)?;
    if !thresholds.is_empty() {
        model = model.with_utility(TloUtility::new(thresholds))?;
    }
    let rows = oracle_table(&model, model.utility())?;
    print_oracle(&model, &rows);
    if let Some(path) = csv {
        write_oracle_csv(path, &model, &rows)?;
    }
    Ok(())
}

fn print_oracle(model: &MomdpModel, rows: &[OracleRow]) {
    println!("thresholds: {}", fmt_vec(model.utility().thresholds()));
    println!(
        "   {:<8} {:<20} {:<20} {:<8} meets",
        "policy", "mean return", "clipped", "P(goal)"
    );
    for r in rows {
        println!(
            "{}  {:<8} {:<20} {:<20} {:<8} {}",
            if r.optimal { "*" } else { " " },
            r.evaluation.label,
            fmt_vec(&r.evaluation.mean_return),
            fmt_vec(&r.clipped),
            r.evaluation.success_probability.normalize(),
            if r.meets_thresholds { "yes" } else { "no" },
        );
    }
}

fn write_oracle_csv(path: &Path, model: &MomdpModel, rows: &[OracleRow]) -> Result<(), Error> {
    let mut out = String::from("label");
    for i in 1..=model.objectives() {
        out += &format!(",mean_obj{i}");
    }
    for i in 1..=model.objectives() {
        out += &format!(",clipped_obj{i}");
    }
    out += ",success_probability,meets_thresholds,optimal\n";
    for r in rows {
        out += r.evaluation.label.as_str();
        for d in r.evaluation.mean_return.iter().chain(&r.clipped) {
            out += &format!(",{}", d.normalize());
        }
        out += &format!(
            ",{},{},{}\n",
            r.evaluation.success_probability.normalize(),
            r.meets_thresholds,
            r.optimal
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<(), Error> {
    let spec = args.resolve()?;
    let out = spec.output.clone().unwrap_or_default();
    eprintln!(
        "running {} on {}: {} trials x {} episodes, seed {}",
        spec.algorithm,
        spec.environment,
        spec.trials,
        spec.episodes(),
        spec.seed
    );
    let experiment = harness::run_experiment(&spec)?;
    let s = &experiment.summary;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "final policies: {}", s.counts_line())?;
    writeln!(
        stdout,
        "oracle optimal: {} (matched in {:.0}% of trials)",
        s.oracle_optimal,
        100.0 * s.match_fraction
    )?;
    writeln!(stdout, "artifacts: {}", out.display())?;
    Ok(())
}

fn cmd_list() {
    println!("environments:");
    for e in EnvId::ALL {
        println!("  {:<16} {}", e.as_str(), e.description());
    }
    println!("algorithms:");
    for a in AlgorithmId::ALL {
        println!("  {:<18} {}", a.as_str(), a.description());
    }
    println!("presets (use as preset:<name>):");
    for (name, description) in PRESETS {
        println!("  {name:<28} {description}");
    }
}

fn cmd_emit_env(env: EnvId, output: Option<&Path>) -> Result<(), Error> {
    let text = env.build(None)?.to_toml();
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
