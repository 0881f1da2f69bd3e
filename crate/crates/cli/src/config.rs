//! Experiment configuration: step grids, `key = value` files and the
//! merged, validated [`ExperimentConfig`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use entwalk_core::gates::GateMode;
use entwalk_core::topology::Topology;

use crate::error::{CliError, Result};

/// Hard limit on grid length, so a typo like `0:1e9:1` fails fast.
pub const MAX_GRID_POINTS: usize = 1 << 22;

/// Strictly increasing list of step counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepGrid(Vec<usize>);

impl StepGrid {
    pub fn new(steps: Vec<usize>) -> Result<Self> {
        if steps.is_empty() {
            return Err(CliError::Config("step grid is empty".into()));
        }
        if steps.len() > MAX_GRID_POINTS {
            return Err(CliError::Config(format!("step grid has more than {MAX_GRID_POINTS} points")));
        }
        if steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config("step grid must be strictly increasing".into()));
        }
        Ok(StepGrid(steps))
    }

    /// `start..=stop` in increments of `stride`.
    pub fn range(start: usize, stop: usize, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(CliError::Config("stride must be positive".into()));
        }
        if stop < start {
            return Err(CliError::Config(format!("range {start}:{stop} runs backwards")));
        }
        if (stop - start) / stride >= MAX_GRID_POINTS {
            return Err(CliError::Config(format!("step grid has more than {MAX_GRID_POINTS} points")));
        }
        StepGrid::new((start..=stop).step_by(stride).collect())
    }

    pub fn steps(&self) -> &[usize] {
        &self.0
    }

    pub fn last(&self) -> usize {
        *self.0.last().expect("grid is non-empty")
    }
}

fn parse_count(s: &str, what: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| CliError::Config(format!("{what}: expected a non-negative integer, got {s:?}")))
}

impl FromStr for StepGrid {
    type Err = CliError;

    /// `"0,5,10"` or `"start:stop:stride"` (inclusive).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(CliError::Config(format!("range {s:?} must be start:stop:stride")));
            }
            let start = parse_count(parts[0], "range start")?;
            let stop = parse_count(parts[1], "range stop")?;
            let stride = parse_count(parts[2], "range stride")?;
            StepGrid::range(start, stop, stride)
        } else {
            let steps = s.split(',').map(|p| parse_count(p, "step")).collect::<Result<Vec<_>>>()?;
            StepGrid::new(steps)
        }
    }
}

impl fmt::Display for StepGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineKind {
    StateVector,
    Stabilizer,
    Chain,
}

impl FromStr for EngineKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "statevector" | "sv" => Ok(EngineKind::StateVector),
            "stabilizer" | "tableau" => Ok(EngineKind::Stabilizer),
            "chain" => Ok(EngineKind::Chain),
            other => Err(CliError::Config(format!("unknown engine {other:?}"))),
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::StateVector => "statevector",
            EngineKind::Stabilizer => "stabilizer",
            EngineKind::Chain => "chain",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    PurityConvergence,
    Trace,
    Cutoff,
    AreaVolume,
    Tripartite,
    Oracles,
    Selfcheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::PurityConvergence => "purity-convergence",
            Experiment::Trace => "trace",
            Experiment::Cutoff => "cutoff",
            Experiment::AreaVolume => "area-volume",
            Experiment::Tripartite => "tripartite",
            Experiment::Oracles => "oracles",
            Experiment::Selfcheck => "selfcheck",
        }
    }
}

/// Every setting that may come from a flag or a config file. `None` means
/// "not given here".
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<Vec<usize>>,
    pub na: Option<usize>,
    pub nb: Option<usize>,
    pub nc: Option<usize>,
    pub engine: Option<EngineKind>,
    pub topology: Option<Topology>,
    pub mode: Option<GateMode>,
    pub steps: Option<StepGrid>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub gate_log: Option<PathBuf>,
    pub resolution: Option<f64>,
}

pub const CONFIG_KEYS: [&str; 15] = [
    "n",
    "na",
    "nb",
    "nc",
    "engine",
    "topology",
    "mode",
    "steps",
    "trials",
    "seed",
    "epsilon",
    "out",
    "workers",
    "gate-log",
    "resolution",
];

pub fn parse_n_list(s: &str) -> Result<Vec<usize>> {
    let list = s.split(',').map(|p| parse_count(p, "n")).collect::<Result<Vec<_>>>()?;
    if list.is_empty() {
        return Err(CliError::Config("empty qubit-count list".into()));
    }
    Ok(list)
}

fn parse_float(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| CliError::Config(format!("{what}: not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(CliError::Config(format!("{what}: must be finite")));
    }
    Ok(v)
}

impl Overrides {
    /// Parses the line-oriented config format: `key = value`, `#` starts a
    /// comment, blank lines ignored. Unknown and repeated keys are errors.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().replace('_', "-");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("line {}: unknown key {key:?}", lineno + 1)));
            }
            if seen.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
        }
        let mut o = Overrides::default();
        for (key, value) in &seen {
            o.set(key, value)?;
        }
        Ok(o)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Overrides::parse_config(&std::fs::read_to_string(path)?)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let core = |e: entwalk_core::Error| CliError::Config(format!("{key}: {e}"));
        match key {
            "n" => self.n = Some(parse_n_list(value)?),
            "na" => self.na = Some(parse_count(value, key)?),
            "nb" => self.nb = Some(parse_count(value, key)?),
            "nc" => self.nc = Some(parse_count(value, key)?),
            "engine" => self.engine = Some(value.parse()?),
            "topology" => self.topology = Some(value.parse().map_err(core)?),
            "mode" => self.mode = Some(value.parse().map_err(core)?),
            "steps" => self.steps = Some(value.parse()?),
            "trials" => self.trials = Some(parse_count(value, key)?),
            "seed" => {
                self.seed = Some(value.parse().map_err(|_| CliError::Config(format!("seed: not a u64: {value:?}")))?)
            }
            "epsilon" => self.epsilon = Some(parse_float(value, key)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "workers" => self.workers = Some(parse_count(value, key)?),
            "gate-log" => self.gate_log = Some(PathBuf::from(value)),
            "resolution" => self.resolution = Some(parse_float(value, key)?),
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Overrides) -> Overrides {
        Overrides {
            n: self.n.or(base.n),
            na: self.na.or(base.na),
            nb: self.nb.or(base.nb),
            nc: self.nc.or(base.nc),
            engine: self.engine.or(base.engine),
            topology: self.topology.or(base.topology),
            mode: self.mode.or(base.mode),
            steps: self.steps.or(base.steps),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            epsilon: self.epsilon.or(base.epsilon),
            out: self.out.or(base.out),
            workers: self.workers.or(base.workers),
            gate_log: self.gate_log.or(base.gate_log),
            resolution: self.resolution.or(base.resolution),
        }
    }
}

/// Fully resolved settings for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// One entry per system size; only `cutoff` sweeps more than one.
    pub n: Vec<usize>,
    pub n_a: Option<usize>,
    pub n_b: Option<usize>,
    pub n_c: Option<usize>,
    pub engine: EngineKind,
    pub topology: Topology,
    pub mode: GateMode,
    /// `None` means the experiment picks a grid per system size.
    pub steps: Option<StepGrid>,
    pub trials: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub gate_log: Option<PathBuf>,
    pub resolution: f64,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl ExperimentConfig {
    /// Fills unset fields with per-experiment defaults and validates.
    pub fn resolve(experiment: Experiment, o: Overrides) -> Result<Self> {
        use Experiment::*;
        let (n, engine, topology, trials) = match experiment {
            PurityConvergence => (vec![6], EngineKind::Chain, Topology::AllToAll, 1000),
            Trace => (vec![10], EngineKind::Stabilizer, Topology::AllToAll, 20),
            Cutoff => (vec![8, 12, 16], EngineKind::Stabilizer, Topology::AllToAll, 1000),
            AreaVolume => (vec![16], EngineKind::Stabilizer, Topology::Ring, 1000),
            Tripartite => (vec![10], EngineKind::StateVector, Topology::AllToAll, 20),
            Oracles => (vec![10], EngineKind::Chain, Topology::AllToAll, 1),
            Selfcheck => (vec![2], EngineKind::StateVector, Topology::AllToAll, 100_000),
        };
        let (n_a, n_b, n_c) = match experiment {
            Tripartite if o.n.is_none() && o.na.is_none() && o.nb.is_none() && o.nc.is_none() => {
                (Some(3), Some(3), Some(4))
            }
            _ => (o.na, o.nb, o.nc),
        };
        let cfg = ExperimentConfig {
            experiment,
            n: o.n.unwrap_or(n),
            n_a,
            n_b,
            n_c,
            engine: o.engine.unwrap_or(engine),
            topology: o.topology.unwrap_or(topology),
            mode: o.mode.unwrap_or(GateMode::Haar),
            steps: o.steps,
            trials: o.trials.unwrap_or(trials),
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            epsilon: o.epsilon.unwrap_or(0.05),
            out: o.out.unwrap_or_else(|| PathBuf::from(format!("{}.csv", experiment.name()))),
            workers: o.workers,
            gate_log: o.gate_log,
            resolution: o.resolution.unwrap_or(0.25),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() {
            return Err(CliError::Config("no system size given".into()));
        }
        if self.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(CliError::Config("epsilon must be positive".into()));
        }
        if !(self.resolution > 0.0 && self.resolution <= 1.0) {
            return Err(CliError::Config("resolution must lie in (0, 1]".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        if self.experiment != Experiment::Cutoff && self.n.len() > 1 {
            return Err(CliError::Config(format!("{} takes a single --n", self.experiment.name())));
        }
        for &n in &self.n {
            self.partition(n)?;
        }
        Ok(())
    }

    /// `(N_A, N_B, N_C)` for system size `n`; `N_C` is zero outside the
    /// tripartite experiment. Unset block sizes default to an even split.
    pub fn partition(&self, n: usize) -> Result<(usize, usize, usize)> {
        if n < 2 {
            return Err(CliError::Config(format!("N = {n}: need at least two qubits")));
        }
        if self.experiment == Experiment::Tripartite {
            let (a, b) = (self.n_a.unwrap_or(n / 3), self.n_b.unwrap_or(n / 3));
            let c = self.n_c.unwrap_or_else(|| n.saturating_sub(a + b));
            if a == 0 || b == 0 || c == 0 || a + b + c != n {
                return Err(CliError::Config(format!("N_A = {a}, N_B = {b}, N_C = {c} do not split N = {n}")));
            }
            return Ok((a, b, c));
        }
        if self.n_c.is_some_and(|c| c != 0) {
            return Err(CliError::Config("--nc only applies to the tripartite experiment".into()));
        }
        let a = self.n_a.unwrap_or(n / 2);
        let b = self.n_b.unwrap_or(n.saturating_sub(a));
        if a == 0 || b == 0 || a + b != n {
            return Err(CliError::Config(format!("N_A = {a}, N_B = {b} do not split N = {n}")));
        }
        Ok((a, b, 0))
    }

    pub fn single_n(&self) -> usize {
        self.n[0]
    }

    /// The configured grid, or `fallback` when none was given.
    pub fn grid_or(&self, fallback: impl FnOnce() -> Result<StepGrid>) -> Result<StepGrid> {
        match &self.steps {
            Some(g) => Ok(g.clone()),
            None => fallback(),
        }
    }

    /// `<stem>_<suffix>.<ext>` next to the main output.
    pub fn companion_path(&self, suffix: &str) -> PathBuf {
        companion_path(&self.out, suffix)
    }
}

pub fn companion_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_{suffix}.{ext}"))
}
