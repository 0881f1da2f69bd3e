use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entwalk_cli::{run_with_workers, CliError, EngineKind, Experiment, ExperimentConfig, Overrides, StepGrid};
use entwalk_core::gates::GateMode;
use entwalk_core::topology::Topology;

#[derive(Parser)]
#[command(name = "entwalk", version, about = "Random two-qubit gate walks and their entanglement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expected block purity: exact chain, optional state-vector Monte Carlo.
    PurityConvergence(Flags),
    /// Per-realization block entanglement along the walk.
    Trace(Flags),
    /// TV distance of the entanglement histogram to its limit, swept over N.
    Cutoff(Flags),
    /// Mean entanglement of contiguous ring blocks versus block size.
    AreaVolume(Flags),
    /// Log-negativity, mutual information and S(C) for a three-way split.
    Tripartite(Flags),
    /// Dump closed-form tables for every split up to --n.
    Oracles(Flags),
    /// Moment tests of the Haar and Clifford single-qubit measures.
    Selfcheck(Flags),
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// Qubit count; a comma list sweeps sizes (cutoff only).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    na: Option<usize>,
    #[arg(long)]
    nb: Option<usize>,
    #[arg(long)]
    nc: Option<usize>,
    /// statevector, stabilizer or chain.
    #[arg(long)]
    engine: Option<EngineKind>,
    /// all or ring.
    #[arg(long, value_parser = parse_topology)]
    topology: Option<Topology>,
    /// haar or clifford single-qubit gates.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<GateMode>,
    /// Comma list or start:stop:stride (inclusive).
    #[arg(long)]
    steps: Option<StepGrid>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// TV resolution the trial count must support (cutoff).
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to $ENTWALK_WORKERS, then all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Write every gate event as `realization step c t gc gt` (trace).
    #[arg(long)]
    gate_log: Option<PathBuf>,
    /// key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_topology(s: &str) -> Result<Topology, String> {
    s.parse().map_err(|e: entwalk_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<GateMode, String> {
    s.parse().map_err(|e: entwalk_core::Error| e.to_string())
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            n: self.n.clone(),
            na: self.na,
            nb: self.nb,
            nc: self.nc,
            engine: self.engine,
            topology: self.topology,
            mode: self.mode,
            steps: self.steps.clone(),
            trials: self.trials,
            seed: self.seed,
            epsilon: self.epsilon,
            out: self.out.clone(),
            workers: self.workers,
            gate_log: self.gate_log.clone(),
            resolution: self.resolution,
        }
    }
}

fn env_workers() -> Result<Option<usize>, CliError> {
    match std::env::var(entwalk_cli::WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{}: not a count: {v:?}", entwalk_cli::WORKERS_ENV))),
        Err(_) => Ok(None),
    }
}

fn build(experiment: Experiment, flags: &Flags) -> Result<ExperimentConfig, CliError> {
    let file = match &flags.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    let env = Overrides { workers: env_workers()?, ..Default::default() };
    ExperimentConfig::resolve(experiment, flags.overrides().over(file).over(env))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, flags) = match &cli.command {
        Command::PurityConvergence(f) => (Experiment::PurityConvergence, f),
        Command::Trace(f) => (Experiment::Trace, f),
        Command::Cutoff(f) => (Experiment::Cutoff, f),
        Command::AreaVolume(f) => (Experiment::AreaVolume, f),
        Command::Tripartite(f) => (Experiment::Tripartite, f),
        Command::Oracles(f) => (Experiment::Oracles, f),
        Command::Selfcheck(f) => (Experiment::Selfcheck, f),
    };
    let outcome = build(experiment, flags).and_then(|cfg| run_with_workers(&cfg));
    match outcome {
        Ok(summary) => {
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            for n in &summary.notes {
                println!("{n}");
            }
            match summary.failure {
                Some(msg) => {
                    eprintln!("entwalk: {msg}");
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("entwalk: {e}");
            ExitCode::from(2)
        }
    }
}
