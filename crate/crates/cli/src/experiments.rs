//! Runners for the walk experiments. Each returns its data in memory;
//! [`crate::report`] turns it into CSV tables.

use std::collections::BTreeMap;

use entwalk_core::chain::{initial_size_distribution, lemma1_bound, purity_series, ChainStart};
use entwalk_core::convergence::{self, cutoff_curve, tau_sat, tau_vol, CutoffCurve};
use entwalk_core::density::{entropy_vn, purity, reduced_density};
use entwalk_core::ensemble::{mean_stderr, run_trials};
use entwalk_core::gates::{GateEvent, GateMode};
use entwalk_core::oracles::{asymptotic_purity, page_average, pmf_mean, stabilizer_pmf};
use entwalk_core::stabilizer::{walk_step_stab, Tableau};
use entwalk_core::statevector::{walk_step, StateVector};
use entwalk_core::topology::Topology;
use rand_chacha::ChaCha8Rng;

use crate::config::{EngineKind, ExperimentConfig, StepGrid};
use crate::error::{CliError, Result};
use crate::output::GateLogEntry;

// Domain tags for per-trial streams. The walk tag is shared by every
// walk-based experiment, so one seed means one gate sequence per realization
// regardless of engine.
pub(crate) const WALK_TAG: u64 = 0x77a1_c0de;
const PURITY_TAG: u64 = 0x9b21_7e57;

/// Clifford-mode state-vector entropies closer than this to an integer are
/// reported as that integer.
pub const INTEGER_SNAP: f64 = 1e-9;

/// One walk on either simulation engine.
#[derive(Clone, Debug)]
pub enum Walker {
    StateVector { state: StateVector, mode: GateMode },
    Stabilizer(Tableau),
}

impl Walker {
    pub fn new(engine: EngineKind, n: usize, mode: GateMode) -> Result<Self> {
        match engine {
            EngineKind::StateVector => Ok(Walker::StateVector { state: StateVector::new_basis(n)?, mode }),
            EngineKind::Stabilizer => Ok(Walker::Stabilizer(Tableau::new(n)?)),
            EngineKind::Chain => Err(CliError::Config("the chain engine does not simulate walks".into())),
        }
    }

    pub fn step(&mut self, topology: Topology, rng: &mut ChaCha8Rng) -> Result<GateEvent> {
        Ok(match self {
            Walker::StateVector { state, mode } => walk_step(state, topology, *mode, rng)?,
            Walker::Stabilizer(tab) => walk_step_stab(tab, topology, rng)?,
        })
    }

    /// Entanglement in ebits between `subset` and the rest.
    pub fn ebits(&self, subset: &[usize]) -> Result<f64> {
        match self {
            Walker::Stabilizer(tab) => Ok(tab.cut_entanglement(subset)? as f64),
            Walker::StateVector { state, mode } => {
                let n = state.n_qubits();
                // Reduce onto the smaller side; both give the same spectrum.
                let side: Vec<usize> = if 2 * subset.len() <= n {
                    subset.to_vec()
                } else {
                    (0..n).filter(|q| !subset.contains(q)).collect()
                };
                let s = entropy_vn(&reduced_density(state, &side)?)?;
                if *mode == GateMode::Clifford && (s - s.round()).abs() <= INTEGER_SNAP {
                    Ok(s.round())
                } else {
                    Ok(s)
                }
            }
        }
    }
}

fn walk_engine(cfg: &ExperimentConfig) -> Result<EngineKind> {
    match cfg.engine {
        EngineKind::Chain => {
            Err(CliError::Config(format!("{} needs --engine statevector or stabilizer", cfg.experiment.name())))
        }
        e => Ok(e),
    }
}

// ---------------------------------------------------------------- purity

#[derive(Clone, Debug, PartialEq)]
pub struct PurityRow {
    pub step: usize,
    pub exact: f64,
    /// `exact − limit`, free of cancellation.
    pub deviation: f64,
    pub mc: Option<(f64, f64)>,
    pub bound: f64,
    pub asymptote: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PurityConvergence {
    pub n: usize,
    pub n_a: usize,
    pub rows: Vec<PurityRow>,
}

impl PurityConvergence {
    /// Rows whose exact value strays outside the bound.
    pub fn bound_violations(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| r.deviation.abs() > r.bound).map(|r| r.step).collect()
    }
}

/// Default purity grid: up to `20·9N(N−1)` in about 200 strides.
fn default_purity_grid(n: usize) -> Result<StepGrid> {
    let horizon = 20 * 9 * n * (n - 1);
    StepGrid::range(0, horizon, (horizon / 200).max(1))
}

pub fn run_purity_convergence(cfg: &ExperimentConfig) -> Result<PurityConvergence> {
    let n = cfg.single_n();
    let (n_a, n_b, _) = cfg.partition(n)?;
    let grid = cfg.grid_or(|| default_purity_grid(n))?;
    let start = initial_size_distribution(n, ChainStart::BasisState)?;
    let series = purity_series(&start, n_a, grid.last())?;
    let asymptote = asymptotic_purity(n_a, n_b)?;
    if cfg.topology != Topology::AllToAll {
        return Err(CliError::Config("the exact chain covers the all-to-all walk only".into()));
    }

    let mc = match cfg.engine {
        EngineKind::Chain => None,
        EngineKind::StateVector => {
            let block: Vec<usize> = (0..n_a).collect();
            let runs = run_trials(cfg.trials, cfg.seed, PURITY_TAG, |_, rng| {
                let mut s = StateVector::new_basis(n)?;
                let mut step = 0;
                let mut out = Vec::with_capacity(grid.steps().len());
                for &target in grid.steps() {
                    while step < target {
                        walk_step(&mut s, cfg.topology, cfg.mode, rng)?;
                        step += 1;
                    }
                    out.push(purity(&reduced_density(&s, &block)?));
                }
                Ok::<_, CliError>(out)
            })?;
            let per_step = (0..grid.steps().len())
                .map(|g| mean_stderr(&runs.iter().map(|r| r[g]).collect::<Vec<_>>()))
                .collect::<Vec<_>>();
            Some(per_step)
        }
        EngineKind::Stabilizer => {
            return Err(CliError::Config("purity-convergence runs on the chain or statevector engine".into()))
        }
    };

    let rows = grid
        .steps()
        .iter()
        .enumerate()
        .map(|(g, &step)| {
            let p = series[step];
            PurityRow {
                step,
                exact: p.purity,
                deviation: p.deviation,
                mc: mc.as_ref().map(|m| m[g]),
                bound: lemma1_bound(n, step),
                asymptote,
            }
        })
        .collect();
    Ok(PurityConvergence { n, n_a, rows })
}

// ----------------------------------------------------------------- trace

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub n: usize,
    pub n_a: usize,
    pub engine: EngineKind,
    pub grid: Vec<usize>,
    /// `ebits[realization][grid index]`.
    pub ebits: Vec<Vec<f64>>,
    pub gate_log: Option<Vec<GateLogEntry>>,
}

impl Trace {
    /// Mean and standard error across realizations at each grid step.
    pub fn mean(&self) -> Vec<(usize, f64, f64)> {
        self.grid
            .iter()
            .enumerate()
            .map(|(g, &step)| {
                let (m, se) = mean_stderr(&self.ebits.iter().map(|r| r[g]).collect::<Vec<_>>());
                (step, m, se)
            })
            .collect()
    }

    pub fn tau_sat(&self, epsilon: f64) -> Result<Option<usize>> {
        let series: Vec<(usize, f64)> = self.mean().into_iter().map(|(s, m, _)| (s, m)).collect();
        Ok(tau_sat(&series, epsilon)?)
    }
}

/// Walks one realization along `grid`, recording `ebits(block)` and
/// optionally every event.
fn trace_one(
    engine: EngineKind,
    n: usize,
    cfg: &ExperimentConfig,
    blocks: &[Vec<usize>],
    grid: &[usize],
    log: bool,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Vec<f64>>, Vec<GateEvent>)> {
    let mut w = Walker::new(engine, n, cfg.mode)?;
    let mut events = Vec::new();
    let mut out = Vec::with_capacity(grid.len());
    let mut step = 0;
    for &target in grid {
        while step < target {
            let ev = w.step(cfg.topology, rng)?;
            if log {
                events.push(ev);
            }
            step += 1;
        }
        out.push(blocks.iter().map(|b| w.ebits(b)).collect::<Result<Vec<_>>>()?);
    }
    Ok((out, events))
}

pub fn run_entanglement_trace(cfg: &ExperimentConfig) -> Result<Trace> {
    let engine = walk_engine(cfg)?;
    let n = cfg.single_n();
    let (n_a, _, _) = cfg.partition(n)?;
    cfg.topology.check(n)?;
    let grid = cfg.grid_or(|| StepGrid::range(0, 5 * n * n, 1))?;
    let block = vec![(0..n_a).collect::<Vec<usize>>()];
    let log = cfg.gate_log.is_some();
    let runs =
        run_trials(cfg.trials, cfg.seed, WALK_TAG, |_, rng| trace_one(engine, n, cfg, &block, grid.steps(), log, rng))?;
    let gate_log = log.then(|| {
        runs.iter()
            .enumerate()
            .flat_map(|(r, (_, evs))| {
                evs.iter().enumerate().map(move |(i, ev)| GateLogEntry { realization: r, step: i + 1, event: *ev })
            })
            .collect()
    });
    let ebits = runs.into_iter().map(|(vals, _)| vals.into_iter().map(|v| v[0]).collect()).collect();
    Ok(Trace { n, n_a, engine, grid: grid.steps().to_vec(), ebits, gate_log })
}

// ---------------------------------------------------------------- cutoff

#[derive(Clone, Debug, PartialEq)]
pub struct CutoffSweep {
    pub curves: Vec<CutoffCurve>,
}

pub fn run_cutoff(cfg: &ExperimentConfig) -> Result<CutoffSweep> {
    let engine = match walk_engine(cfg)? {
        EngineKind::StateVector => convergence::Engine::StateVector,
        _ => convergence::Engine::Stabilizer,
    };
    if cfg.topology != Topology::AllToAll {
        return Err(CliError::Config("cutoff runs on the all-to-all walk".into()));
    }
    let mut curves = Vec::with_capacity(cfg.n.len());
    for &n in &cfg.n {
        let (n_a, _, _) = cfg.partition(n)?;
        let grid = cfg.grid_or(|| StepGrid::range(0, 10 * n * n, 1))?;
        curves.push(cutoff_curve(engine, n, n_a, grid.steps(), cfg.trials, cfg.resolution, cfg.seed)?);
    }
    Ok(CutoffSweep { curves })
}

// ----------------------------------------------------------- area-volume

#[derive(Clone, Debug, PartialEq)]
pub struct AreaVolume {
    pub n: usize,
    pub grid: Vec<usize>,
    /// Block sizes `1..=N/2`; block `k` is qubits `0..k` of the ring.
    pub blocks: Vec<usize>,
    /// `mean[grid index][block index]`, likewise `stderr`.
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub asymptotic: Vec<f64>,
}

impl AreaVolume {
    pub fn grid_index(&self, step: usize) -> Option<usize> {
        self.grid.iter().position(|&s| s == step)
    }

    pub fn tau_vol(&self, epsilon: f64) -> Result<Option<usize>> {
        let mut per = BTreeMap::new();
        let mut asym = BTreeMap::new();
        for (b, &k) in self.blocks.iter().enumerate() {
            per.insert(k, self.grid.iter().enumerate().map(|(g, &s)| (s, self.mean[g][b])).collect());
            asym.insert(k, self.asymptotic[b]);
        }
        Ok(tau_vol(&per, &asym, epsilon)?)
    }
}

pub fn run_area_volume(cfg: &ExperimentConfig) -> Result<AreaVolume> {
    let engine = walk_engine(cfg)?;
    if cfg.topology != Topology::Ring {
        return Err(CliError::Config("area-volume uses contiguous blocks on a ring (--topology ring)".into()));
    }
    let n = cfg.single_n();
    cfg.topology.check(n)?;
    let grid = cfg.grid_or(|| StepGrid::range(0, 20 * n * n, (n / 2).max(1)))?;
    let blocks: Vec<usize> = (1..=n / 2).collect();
    let subsets: Vec<Vec<usize>> = blocks.iter().map(|&k| (0..k).collect()).collect();
    let runs = run_trials(cfg.trials, cfg.seed, WALK_TAG, |_, rng| {
        trace_one(engine, n, cfg, &subsets, grid.steps(), false, rng).map(|r| r.0)
    })?;
    let mut mean = Vec::with_capacity(grid.steps().len());
    let mut stderr = Vec::with_capacity(grid.steps().len());
    for g in 0..grid.steps().len() {
        let (m, s): (Vec<f64>, Vec<f64>) =
            (0..blocks.len()).map(|b| mean_stderr(&runs.iter().map(|r| r[g][b]).collect::<Vec<_>>())).unzip();
        mean.push(m);
        stderr.push(s);
    }
    let asymptotic = blocks
        .iter()
        .map(|&k| match engine {
            EngineKind::StateVector => page_average(k, n - k),
            _ => stabilizer_pmf(n, k).map(|p| pmf_mean(&p)),
        })
        .collect::<entwalk_core::Result<Vec<_>>>()?;
    Ok(AreaVolume { n, grid: grid.steps().to_vec(), blocks, mean, stderr, asymptotic })
}
