//! Tripartite correlations `(S(ρ_C), E_N(A:B), I(A:B))` along the walk from
//! several starting states, and the displacement field they trace out.

use std::collections::BTreeMap;

use entwalk_core::convergence::pearson;
use entwalk_core::density::{entropy_vn, log_negativity, reduced_density, PartitionSpec};
use entwalk_core::ensemble::{mean_stderr, run_trials};
use entwalk_core::gates::haar_u2_matrix;
use entwalk_core::mat2::Mat2;
use entwalk_core::oracles::page_average;
use entwalk_core::statevector::{walk_step, StateVector};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::config::{EngineKind, ExperimentConfig, StepGrid};
use crate::error::{CliError, Result};

const TRIPARTITE_TAG: u64 = 0x3a7_71a5;
const LONG_RUN_TAG: u64 = 0x10e6_2a11;

pub const FLOW_BIN: f64 = 0.25;
pub const FLOW_MIN_COUNT: usize = 20;
pub const FLOW_LAG: usize = 10;
/// Radius around the attractor used by the settle-step summary.
pub const ATTRACTOR_RADIUS: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Start {
    Product,
    /// Bell pairs `(A_i, B_i)`.
    BellAb,
    /// Bell pairs cycling through the block pairs AB, BC, CA.
    BellAbc,
    Ghz,
    /// Independent Haar-random single-qubit states.
    RandomProduct,
}

impl Start {
    pub const ALL: [Start; 5] = [Start::Product, Start::BellAb, Start::BellAbc, Start::Ghz, Start::RandomProduct];

    pub fn name(self) -> &'static str {
        match self {
            Start::Product => "product",
            Start::BellAb => "bell_ab",
            Start::BellAbc => "bell_abc",
            Start::Ghz => "ghz",
            Start::RandomProduct => "random_product",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Blocks {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
}

impl Blocks {
    pub fn contiguous(n_a: usize, n_b: usize, n_c: usize) -> Self {
        Blocks { a: (0..n_a).collect(), b: (n_a..n_a + n_b).collect(), c: (n_a + n_b..n_a + n_b + n_c).collect() }
    }

    pub fn n(&self) -> usize {
        self.a.len() + self.b.len() + self.c.len()
    }
}

fn bell_pair(s: &mut StateVector, p: usize, q: usize) -> Result<()> {
    s.apply_single(p, &Mat2::hadamard())?;
    s.apply_cnot(p, q)?;
    Ok(())
}

pub fn prepare(start: Start, blocks: &Blocks, rng: &mut ChaCha8Rng) -> Result<StateVector> {
    let n = blocks.n();
    let mut s = StateVector::new_basis(n)?;
    match start {
        Start::Product => {}
        Start::BellAb => {
            for (&p, &q) in blocks.a.iter().zip(&blocks.b) {
                bell_pair(&mut s, p, q)?;
            }
        }
        Start::BellAbc => {
            let mut pools = [blocks.a.iter(), blocks.b.iter(), blocks.c.iter()];
            'outer: for round in 0.. {
                let (i, j) = [(0, 1), (1, 2), (2, 0)][round % 3];
                let p = match pools[i].next() {
                    Some(&p) => p,
                    None => break 'outer,
                };
                let q = match pools[j].next() {
                    Some(&q) => q,
                    None => break 'outer,
                };
                bell_pair(&mut s, p, q)?;
            }
        }
        Start::Ghz => {
            s.apply_single(0, &Mat2::hadamard())?;
            for q in 1..n {
                s.apply_cnot(0, q)?;
            }
        }
        Start::RandomProduct => {
            // U|0⟩ is the first column of a Haar unitary.
            let qubits: Vec<[Complex64; 2]> = (0..n)
                .map(|_| {
                    let u = haar_u2_matrix(rng);
                    [u.get(0, 0), u.get(1, 0)]
                })
                .collect();
            s = StateVector::product(&qubits)?;
        }
    }
    Ok(s)
}

/// One point of the `(S_C, E_N, I)` trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correlations {
    pub entropy_c: f64,
    pub negativity: f64,
    pub mutual_info: f64,
}

pub fn correlations(s: &StateVector, blocks: &Blocks) -> Result<Correlations> {
    let mut ab = blocks.a.clone();
    ab.extend(&blocks.b);
    let rho_ab = reduced_density(s, &ab)?;
    // After reduction A occupies the leading bits, since A precedes B.
    let local_a: Vec<usize> = if blocks.a.iter().max() < blocks.b.iter().min() {
        (0..blocks.a.len()).collect()
    } else {
        let mut sorted = ab.clone();
        sorted.sort_unstable();
        blocks.a.iter().map(|q| sorted.iter().position(|x| x == q).expect("in AB")).collect()
    };
    let negativity = log_negativity(&rho_ab, &PartitionSpec::new(ab.len(), &local_a)?)?;
    let s_ab = entropy_vn(&rho_ab)?;
    let s_a = entropy_vn(&reduced_density(s, &blocks.a)?)?;
    let s_b = entropy_vn(&reduced_density(s, &blocks.b)?)?;
    // The global state is pure, so S(C) = S(AB).
    Ok(Correlations { entropy_c: s_ab, negativity, mutual_info: s_a + s_b - s_ab })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeanPoint {
    pub step: usize,
    pub entropy_c: (f64, f64),
    pub negativity: (f64, f64),
    pub mutual_info: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowBin {
    /// Lower-left corner in `(S_C, E_N)`.
    pub x: f64,
    pub y: f64,
    pub count: usize,
    /// Mean displacement; only defined for bins with enough samples.
    pub displacement: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tripartite {
    pub blocks: Blocks,
    pub grid: Vec<usize>,
    pub trajectories: BTreeMap<Start, Vec<MeanPoint>>,
    pub flow: Vec<FlowBin>,
    /// Haar average of `S(ρ_C)`.
    pub attractor_x: f64,
    /// Long-run mean of `E_N(A:B)` at `50 N²` steps.
    pub attractor_y: f64,
    pub long_run_entropy_c: f64,
    pub long_run_trials: usize,
}

impl Tripartite {
    /// First grid step from which the mean trajectory stays within
    /// `radius` of the attractor until the end of the grid.
    pub fn settle_step(&self, start: Start, radius: f64) -> Option<usize> {
        let traj = self.trajectories.get(&start)?;
        let inside = |p: &MeanPoint| {
            let dx = p.entropy_c.0 - self.attractor_x;
            let dy = p.negativity.0 - self.attractor_y;
            (dx * dx + dy * dy).sqrt() <= radius
        };
        let last_outside = traj.iter().rposition(|p| !inside(p));
        match last_outside {
            None => traj.first().map(|p| p.step),
            Some(i) if i + 1 < traj.len() => Some(traj[i + 1].step),
            Some(_) => None,
        }
    }

    /// Pearson correlation of the mean `E_N` and `I(A:B)` trajectories,
    /// pooled over starts, up to each start's settle step.
    pub fn transient_pearson(&self, radius: f64) -> Result<f64> {
        let (mut en, mut mi) = (Vec::new(), Vec::new());
        for (&start, traj) in &self.trajectories {
            let end = self.settle_step(start, radius).unwrap_or(usize::MAX);
            for p in traj.iter().filter(|p| p.step <= end) {
                en.push(p.negativity.0);
                mi.push(p.mutual_info.0);
            }
        }
        Ok(pearson(&en, &mi)?)
    }
}

fn walk_trajectory(
    start: Start,
    blocks: &Blocks,
    cfg: &ExperimentConfig,
    grid: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Correlations>> {
    let mut s = prepare(start, blocks, rng)?;
    let mut step = 0;
    let mut out = Vec::with_capacity(grid.len());
    for &target in grid {
        while step < target {
            walk_step(&mut s, cfg.topology, cfg.mode, rng)?;
            step += 1;
        }
        out.push(correlations(&s, blocks)?);
    }
    Ok(out)
}

fn bin_of(v: f64) -> i64 {
    (v / FLOW_BIN).floor() as i64
}

/// Bins `(S_C, E_N)` samples and averages their displacement `FLOW_LAG`
/// steps later. Only grid points with a partner exactly `FLOW_LAG` ahead
/// contribute.
pub fn flow_field(grid: &[usize], runs: &[Vec<Correlations>]) -> Vec<FlowBin> {
    let index: BTreeMap<usize, usize> = grid.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut acc: BTreeMap<(i64, i64), (usize, f64, f64)> = BTreeMap::new();
    for run in runs {
        for (i, &s) in grid.iter().enumerate() {
            let Some(&j) = index.get(&(s + FLOW_LAG)) else { continue };
            let (p, q) = (run[i], run[j]);
            let e = acc.entry((bin_of(p.entropy_c), bin_of(p.negativity))).or_insert((0, 0.0, 0.0));
            e.0 += 1;
            e.1 += q.entropy_c - p.entropy_c;
            e.2 += q.negativity - p.negativity;
        }
    }
    acc.into_iter()
        .map(|((bx, by), (count, dx, dy))| FlowBin {
            x: bx as f64 * FLOW_BIN,
            y: by as f64 * FLOW_BIN,
            count,
            displacement: (count >= FLOW_MIN_COUNT).then(|| (dx / count as f64, dy / count as f64)),
        })
        .collect()
}

pub fn run_tripartite(cfg: &ExperimentConfig) -> Result<Tripartite> {
    if cfg.engine != EngineKind::StateVector {
        return Err(CliError::Config("tripartite runs on the statevector engine".into()));
    }
    let n = cfg.single_n();
    let (n_a, n_b, n_c) = cfg.partition(n)?;
    cfg.topology.check(n)?;
    let blocks = Blocks::contiguous(n_a, n_b, n_c);
    let grid = cfg.grid_or(|| StepGrid::range(0, 4 * n * n, 5))?;
    let steps = grid.steps();

    let mut trajectories = BTreeMap::new();
    let mut all_runs = Vec::new();
    for (k, &start) in Start::ALL.iter().enumerate() {
        let runs = run_trials(cfg.trials, cfg.seed, TRIPARTITE_TAG + k as u64, |_, rng| {
            walk_trajectory(start, &blocks, cfg, steps, rng)
        })?;
        let col =
            |g: usize, f: fn(&Correlations) -> f64| mean_stderr(&runs.iter().map(|r| f(&r[g])).collect::<Vec<_>>());
        let means = steps
            .iter()
            .enumerate()
            .map(|(g, &step)| MeanPoint {
                step,
                entropy_c: col(g, |c| c.entropy_c),
                negativity: col(g, |c| c.negativity),
                mutual_info: col(g, |c| c.mutual_info),
            })
            .collect();
        trajectories.insert(start, means);
        all_runs.extend(runs);
    }
    let flow = flow_field(steps, &all_runs);

    let horizon = 50 * n * n;
    let long_run_trials = cfg.trials.max(100);
    let late = run_trials(long_run_trials, cfg.seed, LONG_RUN_TAG, |_, rng| {
        walk_trajectory(Start::Product, &blocks, cfg, &[horizon], rng).map(|v| v[0])
    })?;
    let attractor_y = mean_stderr(&late.iter().map(|c| c.negativity).collect::<Vec<_>>()).0;
    let long_run_entropy_c = mean_stderr(&late.iter().map(|c| c.entropy_c).collect::<Vec<_>>()).0;
    let attractor_x = page_average(n_c.min(n_a + n_b), n_c.max(n_a + n_b))?;

    Ok(Tripartite {
        blocks,
        grid: steps.to_vec(),
        trajectories,
        flow,
        attractor_x,
        attractor_y,
        long_run_entropy_c,
        long_run_trials,
    })
}
