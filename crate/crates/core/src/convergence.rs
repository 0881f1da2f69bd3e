//! Entanglement histograms, total-variation curves and the transition
//! times read off them.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

use crate::density::{entropy_vn, reduced_density};
use crate::ensemble::run_trials;
use crate::error::{Error, Result};
use crate::gates::GateMode;
use crate::oracles::stabilizer_pmf;
use crate::stabilizer::{walk_step_stab, Tableau};
use crate::statevector::{walk_step, StateVector};
use crate::topology::Topology;

const NEGATIVE_TOL: f64 = 1e-9;

/// `½ Σ |p_i − q_i|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!("supports of size {} and {}", p.len(), q.len())));
    }
    Ok((0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()).clamp(0.0, 1.0))
}

/// Counts of entanglement values rounded half-up to integers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EntanglementHistogram {
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl EntanglementHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let mut h = Self::new();
        for &s in samples {
            h.add(s)?;
        }
        Ok(h)
    }

    pub fn add(&mut self, value: f64) -> Result<()> {
        if !(value >= -NEGATIVE_TOL) || !value.is_finite() {
            return Err(Error::InvalidParameter(format!("entanglement sample {value} is negative or not finite")));
        }
        let bin = (value.max(0.0) + 0.5).floor() as u64;
        *self.counts.entry(bin).or_insert(0) += 1;
        self.total += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &EntanglementHistogram) {
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn count(&self, bin: u64) -> u64 {
        self.counts.get(&bin).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn max_bin(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    /// Normalized frequencies on bins `0..len`; fails if mass lies beyond.
    pub fn probabilities(&self, len: usize) -> Result<Vec<f64>> {
        if self.total == 0 {
            return Err(Error::InsufficientTrials { required: 1, got: 0 });
        }
        if self.max_bin().is_some_and(|b| b as usize >= len) {
            return Err(Error::DimensionMismatch(format!("histogram has mass beyond bin {}", len - 1)));
        }
        let mut p = vec![0.0; len];
        for (&k, &c) in &self.counts {
            p[k as usize] = c as f64 / self.total as f64;
        }
        Ok(p)
    }

    pub fn mean(&self) -> f64 {
        self.counts.iter().map(|(&k, &c)| k as f64 * c as f64).sum::<f64>() / self.total as f64
    }
}

/// `(step, TV)` points with strictly increasing steps.
#[derive(Clone, Debug, PartialEq)]
pub struct TvSeries {
    points: Vec<(usize, f64)>,
}

impl TvSeries {
    pub fn new(points: Vec<(usize, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidParameter("TV steps must be strictly increasing".into()));
        }
        if points.iter().any(|(_, v)| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter("TV values must lie in [0, 1]".into()));
        }
        Ok(TvSeries { points })
    }

    pub fn points(&self) -> &[(usize, f64)] {
        &self.points
    }

    /// First step (linearly interpolated) at which TV falls to `level`.
    pub fn crossing(&self, level: f64) -> Option<f64> {
        let first = self.points.first()?;
        if first.1 <= level {
            return Some(first.0 as f64);
        }
        self.points.windows(2).find(|w| w[1].1 <= level).map(|w| {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            x0 as f64 + (y0 - level) / (y0 - y1) * (x1 - x0) as f64
        })
    }

    /// Steps between the `high` and `low` crossings.
    pub fn window_width(&self, high: f64, low: f64) -> Option<f64> {
        Some(self.crossing(low)? - self.crossing(high)?)
    }

    /// Width of the `[0.1, 0.9]` window over the 0.5 crossing step.
    pub fn relative_width(&self) -> Option<f64> {
        let mid = self.crossing(0.5)?;
        (mid > 0.0).then(|| self.window_width(0.9, 0.1).map(|w| w / mid)).flatten()
    }

    /// Steps shifted so the 0.5 crossing sits at zero.
    pub fn rescaled(&self) -> Option<Vec<(f64, f64)>> {
        let mid = self.crossing(0.5)?;
        Some(self.points.iter().map(|&(s, v)| (s as f64 - mid, v)).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    StateVector,
    Stabilizer,
}

/// Trials needed for histogram noise below `resolution`.
pub fn required_trials(resolution: f64) -> usize {
    (50.0 / (resolution * resolution)).ceil() as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutoffCurve {
    pub n: usize,
    pub n_a: usize,
    pub series: TvSeries,
    /// `(step − n_{0.5}, TV)`; absent when TV never reaches 0.5.
    pub rescaled: Option<Vec<(f64, f64)>>,
    pub reference: Vec<f64>,
}

fn block(n_a: usize) -> Vec<usize> {
    (0..n_a).collect()
}

/// Entanglement of the leading `n_a` qubits along `grid` for one walk.
fn walk_entanglement(
    engine: Engine,
    n: usize,
    n_a: usize,
    topology: Topology,
    grid: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let a = block(n_a);
    let mut out = Vec::with_capacity(grid.len());
    let mut step = 0;
    match engine {
        Engine::Stabilizer => {
            let mut tab = Tableau::new(n)?;
            for &target in grid {
                while step < target {
                    walk_step_stab(&mut tab, topology, rng)?;
                    step += 1;
                }
                out.push(tab.cut_entanglement(&a)? as f64);
            }
        }
        Engine::StateVector => {
            let mut s = StateVector::new_basis(n)?;
            for &target in grid {
                while step < target {
                    walk_step(&mut s, topology, GateMode::Haar, rng)?;
                    step += 1;
                }
                out.push(entropy_vn(&reduced_density(&s, &a)?)?);
            }
        }
    }
    Ok(out)
}

/// Empirical entanglement histograms at each grid step.
pub fn entanglement_histograms(
    engine: Engine,
    n: usize,
    n_a: usize,
    topology: Topology,
    grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<EntanglementHistogram>> {
    let runs =
        run_trials(trials, seed, HISTOGRAM_TAG, |_, rng| walk_entanglement(engine, n, n_a, topology, grid, rng))?;
    let mut hists = vec![EntanglementHistogram::new(); grid.len()];
    for run in &runs {
        for (h, &v) in hists.iter_mut().zip(run) {
            h.add(v)?;
        }
    }
    Ok(hists)
}

const HISTOGRAM_TAG: u64 = 0xc0f_f00;
const REFERENCE_TAG: u64 = 0x2ef_e2e;

/// Pooled long-run histogram at `50 N²` steps, used as the state-vector reference.
pub fn long_run_reference(n: usize, n_a: usize, trials: usize, seed: u64) -> Result<Vec<f64>> {
    let horizon = 50 * n * n;
    let samples = run_trials(trials, seed, REFERENCE_TAG, |_, rng| {
        walk_entanglement(Engine::StateVector, n, n_a, Topology::AllToAll, &[horizon], rng).map(|v| v[0])
    })?;
    EntanglementHistogram::from_samples(&samples)?.probabilities(n_a + 1)
}

/// TV distance between the step-`n` histogram and the asymptotic law.
pub fn cutoff_curve(
    engine: Engine,
    n: usize,
    n_a: usize,
    grid: &[usize],
    trials: usize,
    resolution: f64,
    seed: u64,
) -> Result<CutoffCurve> {
    let required = required_trials(resolution);
    if trials < required {
        return Err(Error::InsufficientTrials { required, got: trials });
    }
    if n_a == 0 || 2 * n_a > n {
        return Err(Error::InvalidPartition(format!("need 1 ≤ N_A ≤ N/2, got N_A = {n_a}")));
    }
    let reference = match engine {
        Engine::Stabilizer => stabilizer_pmf(n, n_a)?,
        Engine::StateVector => long_run_reference(n, n_a, trials, seed)?,
    };
    let hists = entanglement_histograms(engine, n, n_a, Topology::AllToAll, grid, trials, seed)?;
    let points = grid
        .iter()
        .zip(&hists)
        .map(|(&step, h)| Ok((step, tv_distance(&h.probabilities(n_a + 1)?, &reference)?)))
        .collect::<Result<Vec<_>>>()?;
    let series = TvSeries::new(points)?;
    let rescaled = series.rescaled();
    Ok(CutoffCurve { n, n_a, series, rescaled, reference })
}

/// First step whose forward slope over a five-point window is below
/// `epsilon`. Near the end the window is truncated to the last point.
pub fn tau_sat(series: &[(usize, f64)], epsilon: f64) -> Result<Option<usize>> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    if series.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::InvalidParameter("steps must be strictly increasing".into()));
    }
    for i in 0..series.len().saturating_sub(1) {
        let j = (i + 4).min(series.len() - 1);
        let (x0, y0) = series[i];
        let (x1, y1) = series[j];
        if (y1 - y0) / (x1 - x0) as f64 <= epsilon {
            return Ok(Some(x0));
        }
    }
    Ok(None)
}

/// First step where every partition's mean is within `epsilon` of its
/// asymptote. All series must share one step grid.
pub fn tau_vol(
    per_partition: &BTreeMap<usize, Vec<(usize, f64)>>,
    asymptotes: &BTreeMap<usize, f64>,
    epsilon: f64,
) -> Result<Option<usize>> {
    let mut iter = per_partition.values();
    let grid: Vec<usize> = match iter.next() {
        Some(first) => first.iter().map(|p| p.0).collect(),
        None => return Err(Error::InvalidParameter("no partitions given".into())),
    };
    for series in per_partition.values() {
        if series.len() != grid.len() || series.iter().zip(&grid).any(|(p, &g)| p.0 != g) {
            return Err(Error::DimensionMismatch("partition series use different step grids".into()));
        }
    }
    for n_a in per_partition.keys() {
        if !asymptotes.contains_key(n_a) {
            return Err(Error::InvalidParameter(format!("no asymptote for N_A = {n_a}")));
        }
    }
    for (i, &step) in grid.iter().enumerate() {
        let worst = per_partition.iter().map(|(n_a, s)| (asymptotes[n_a] - s[i].1).abs()).fold(0.0, f64::max);
        if worst <= epsilon {
            return Ok(Some(step));
        }
    }
    Ok(None)
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::DimensionMismatch("need two equal series of length ≥ 2".into()));
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    Ok(sxy / (sxx * syy).sqrt())
}
