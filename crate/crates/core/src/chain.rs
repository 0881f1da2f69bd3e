//! The Markov chain on Pauli supports that governs expected purity.
//!
//! Expanding `|ψ⟩⟨ψ|` in Pauli strings, the squared coefficients form a
//! probability distribution whose support `𝒳_n` performs a random walk under
//! the circuit. Under qubit-exchangeable starts only `|𝒳_n|` matters, which
//! gives a birth–death chain on `k = 0..N`:
//!
//! ```text
//! P[k][k+1] = 4k(N−k) / (3N(N−1))
//! P[k][k−1] = 4k(k−1) / (9N(N−1))
//! ```
//!
//! and `E Tr ρ_A² = 2^{N_B} Pr(𝒳_n ⊆ A)`.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ensemble::trial_rng;
use crate::error::{Error, Result};
use crate::pauli::{hat_map, Pauli, PauliString};
use crate::statevector::StateVector;

const SUM_TOL: f64 = 1e-12;

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] + (i as f64).ln();
    }
    out
}

/// `ln C(n, k)` from a factorial table covering `n`.
fn ln_binom(lf: &[f64], n: usize, k: usize) -> f64 {
    lf[n] - lf[k] - lf[n - k]
}

/// `ln(4^N − 1)`.
fn ln_omega_size(n: usize) -> f64 {
    n as f64 * 4f64.ln() + (-(0.25f64.powi(n as i32))).ln_1p()
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::QubitCount { n, min: 2, max: usize::MAX });
    }
    Ok(())
}

/// Tridiagonal `(N+1)×(N+1)` transition matrix over support sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct SizeTransitionMatrix {
    n: usize,
    up: Vec<f64>,
    down: Vec<f64>,
    stay: Vec<f64>,
}

pub fn size_transition_matrix(n: usize) -> Result<SizeTransitionMatrix> {
    check_n(n)?;
    let denom = (n * (n - 1)) as f64;
    let mut up = vec![0.0; n + 1];
    let mut down = vec![0.0; n + 1];
    let mut stay = vec![0.0; n + 1];
    for k in 0..=n {
        let kf = k as f64;
        up[k] = 4.0 * kf * (n - k) as f64 / (3.0 * denom);
        down[k] = if k >= 1 { 4.0 * kf * (kf - 1.0) / (9.0 * denom) } else { 0.0 };
        stay[k] = 1.0 - up[k] - down[k];
    }
    Ok(SizeTransitionMatrix { n, up, down, stay })
}

impl SizeTransitionMatrix {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        if to == from + 1 {
            self.up[from]
        } else if from == to + 1 {
            self.down[from]
        } else if from == to {
            self.stay[from]
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n + 1, self.n + 1, |r, c| self.get(r, c))
    }

    /// Row vector times matrix: `v · P`.
    pub fn step(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..=n)
            .map(|j| {
                let mut s = v[j] * self.stay[j];
                if j >= 1 {
                    s += v[j - 1] * self.up[j - 1];
                }
                if j < n {
                    s += v[j + 1] * self.down[j + 1];
                }
                s
            })
            .collect()
    }
}

/// Distribution of `|𝒳_n|` over `0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSupportDistribution {
    probs: Vec<f64>,
}

impl PauliSupportDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 3 {
            return Err(Error::QubitCount { n: probs.len().saturating_sub(1), min: 2, max: usize::MAX });
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidParameter("negative or NaN probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}")));
        }
        Ok(PauliSupportDistribution { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_qubits(&self) -> usize {
        self.probs.len() - 1
    }
}

/// Exchangeable starting states whose lumped distribution is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainStart {
    /// `|0…0⟩`: squared coefficients `2^{−N}` on every string in `{0, z}^N`.
    BasisState,
}

pub fn initial_size_distribution(n: usize, start: ChainStart) -> Result<PauliSupportDistribution> {
    check_n(n)?;
    match start {
        ChainStart::BasisState => {
            let lf = ln_factorials(n);
            let probs = (0..=n).map(|k| (ln_binom(&lf, n, k) - n as f64 * LN_2).exp()).collect();
            Ok(PauliSupportDistribution { probs })
        }
    }
}

pub fn evolve(dist: &PauliSupportDistribution, steps: usize) -> Result<PauliSupportDistribution> {
    let p = size_transition_matrix(dist.n_qubits())?;
    let mut v = dist.probs.clone();
    for _ in 0..steps {
        v = p.step(&v);
    }
    Ok(PauliSupportDistribution { probs: v })
}

/// `ℳ(k) = C(N,k) 3^k / (4^N − 1)` on `k ≥ 1`, zero at `k = 0`.
pub fn stationary_size_distribution(n: usize) -> Result<PauliSupportDistribution> {
    check_n(n)?;
    let lf = ln_factorials(n);
    let z = ln_omega_size(n);
    let mut probs: Vec<f64> =
        (0..=n).map(|k| if k == 0 { 0.0 } else { (ln_binom(&lf, n, k) + k as f64 * 3f64.ln() - z).exp() }).collect();
    // Remove the last few ulps of normalization drift.
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(PauliSupportDistribution { probs })
}

/// `n → ∞` limit: the isolated `∅` keeps its mass, the rest equilibrates.
pub fn limit_size_distribution(dist: &PauliSupportDistribution) -> Result<PauliSupportDistribution> {
    let st = stationary_size_distribution(dist.n_qubits())?;
    let p0 = dist.probs[0];
    let probs = st.probs.iter().enumerate().map(|(k, m)| if k == 0 { p0 } else { (1.0 - p0) * m }).collect();
    Ok(PauliSupportDistribution { probs })
}

/// Weights `w_k = 2^{N_B} C(N_A,k) / C(N,k)` so that purity is `Σ_k p_k w_k`.
fn purity_weights(n: usize, n_a: usize) -> Result<Vec<f64>> {
    if n_a == 0 || n_a >= n {
        return Err(Error::InvalidPartition(format!("N_A = {n_a} must lie in 1..{n}")));
    }
    let lf = ln_factorials(n);
    let n_b = n - n_a;
    Ok((0..=n)
        .map(|k| if k > n_a { 0.0 } else { (n_b as f64 * LN_2 + ln_binom(&lf, n_a, k) - ln_binom(&lf, n, k)).exp() })
        .collect())
}

/// `2^{N_B} Σ_k p_k C(N_A,k)/C(N,k)`, valid for exchangeable distributions.
pub fn expected_purity(dist: &PauliSupportDistribution, n_a: usize) -> Result<f64> {
    let w = purity_weights(dist.n_qubits(), n_a)?;
    Ok(dist.probs.iter().zip(&w).map(|(p, w)| p * w).sum())
}

/// `4^N exp(−4n / (9N(N−1)))`.
pub fn lemma1_bound(n_qubits: usize, steps: usize) -> f64 {
    let n = n_qubits as f64;
    (n * 4f64.ln() - 4.0 * steps as f64 / (9.0 * n * (n - 1.0))).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PurityPoint {
    pub step: usize,
    pub purity: f64,
    /// `purity − limit`, tracked without cancellation.
    pub deviation: f64,
    pub limit: f64,
}

/// Exact expected purity for steps `0..=max_steps` from an exchangeable start.
///
/// The deviation `d_n = p_n − p_∞` is evolved on its own and re-projected
/// onto zero total mass each step. Subtracting two nearly equal purities
/// would stall near 1e-16, far above the bound at late steps.
pub fn purity_series(start: &PauliSupportDistribution, n_a: usize, max_steps: usize) -> Result<Vec<PurityPoint>> {
    let n = start.n_qubits();
    let p = size_transition_matrix(n)?;
    let w = purity_weights(n, n_a)?;
    let limit_dist = limit_size_distribution(start)?;
    let stationary = stationary_size_distribution(n)?;
    let limit: f64 = limit_dist.probs.iter().zip(&w).map(|(a, b)| a * b).sum();
    let mut d: Vec<f64> = start.probs.iter().zip(&limit_dist.probs).map(|(a, b)| a - b).collect();
    d[0] = 0.0;
    let mut out = Vec::with_capacity(max_steps + 1);
    for step in 0..=max_steps {
        let deviation: f64 = d.iter().zip(&w).map(|(a, b)| a * b).sum();
        out.push(PurityPoint { step, purity: limit + deviation, deviation, limit });
        d = p.step(&d);
        let drift: f64 = d.iter().sum();
        for (x, m) in d.iter_mut().zip(&stationary.probs) {
            *x -= drift * m;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainParams {
    pub n: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub epsilon: f64,
    pub steps: usize,
}

impl ChainParams {
    pub fn new(n_a: usize, n_b: usize, epsilon: f64, steps: usize) -> Result<Self> {
        let p = ChainParams { n: n_a + n_b, n_a, n_b, epsilon, steps };
        p.validate()?;
        Ok(p)
    }

    pub fn t(&self) -> i64 {
        self.n_b as i64 - self.n_a as i64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_a + self.n_b != self.n || self.n_a == 0 {
            return Err(Error::InvalidPartition(format!(
                "N_A = {}, N_B = {} do not split N = {}",
                self.n_a, self.n_b, self.n
            )));
        }
        if self.t() < 0 {
            return Err(Error::InvalidPartition(format!("t = N_B − N_A = {} is negative", self.t())));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon {} outside (0, 1)", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem1Thresholds {
    pub n_min: u64,
    pub n_min_raw: f64,
    pub entropy_lower_bound: f64,
    pub fidelity_lower_bound: f64,
}

/// Step count after which the block entropy is within `(2^{−t}+ε)/ln 2` of `N_A`.
pub fn theorem1_thresholds(params: &ChainParams) -> Result<Theorem1Thresholds> {
    params.validate()?;
    let n = params.n as f64;
    let eps = params.epsilon;
    let raw = 9.0 * n * (n - 1.0) * (2.0 * LN_2 * n + (1.0 / eps).ln()) / 4.0;
    let slack = 2f64.powi(-(params.t() as i32)) + eps;
    Ok(Theorem1Thresholds {
        n_min: raw.ceil() as u64,
        n_min_raw: raw,
        entropy_lower_bound: params.n_a as f64 - slack / LN_2,
        fidelity_lower_bound: 1.0 - (4.0 * slack / LN_2).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainScope {
    /// Birth–death chain on sizes `1..=N`.
    Lumped,
    /// Chain on the `2^N − 1` non-empty supports.
    FullSet,
}

pub const FULL_SET_MAX_QUBITS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    /// `1 − max |λ|` over the non-unit eigenvalues.
    pub gap: f64,
    pub second_modulus: f64,
    /// Descending; the leading unit eigenvalue is dropped.
    pub nonunit_eigenvalues: Vec<f64>,
    pub leading: f64,
}

/// Transition matrix of the full support chain on `Ω`, generated by the
/// literal procedure: nonzero letters on the pair are randomized uniformly
/// over `{x, y, z}`, then mapped through the CNOT conjugation table.
/// Row/column `i` is the support with bitmask `i + 1`.
pub fn full_set_transition_matrix(n: usize) -> Result<DMatrix<f64>> {
    check_n(n)?;
    if n > FULL_SET_MAX_QUBITS {
        return Err(Error::QubitCount { n, min: 2, max: FULL_SET_MAX_QUBITS });
    }
    let states = (1usize << n) - 1;
    let pair_weight = 1.0 / (n * (n - 1)) as f64;
    let mut p = DMatrix::<f64>::zeros(states, states);
    for mask in 1..=states {
        for c in 0..n {
            for t in 0..n {
                if c == t {
                    continue;
                }
                let in_c = (mask >> c) & 1 == 1;
                let in_t = (mask >> t) & 1 == 1;
                let letters_c: &[Pauli] = if in_c { &Pauli::NONTRIVIAL } else { &[Pauli::I] };
                let letters_t: &[Pauli] = if in_t { &Pauli::NONTRIVIAL } else { &[Pauli::I] };
                let w = pair_weight / (letters_c.len() * letters_t.len()) as f64;
                for &lc in letters_c {
                    for &lt in letters_t {
                        let (hc, ht) = hat_map(lc, lt);
                        let mut next = mask & !(1 << c) & !(1 << t);
                        if !hc.is_identity() {
                            next |= 1 << c;
                        }
                        if !ht.is_identity() {
                            next |= 1 << t;
                        }
                        p[(mask - 1, next - 1)] += w;
                    }
                }
            }
        }
    }
    Ok(p)
}

fn spectrum(sym: DMatrix<f64>) -> SpectralReport {
    let mut eig: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let leading = eig[0];
    let rest = eig[1..].to_vec();
    let second = rest.iter().map(|l| l.abs()).fold(0.0, f64::max);
    SpectralReport { gap: 1.0 - second, second_modulus: second, nonunit_eigenvalues: rest, leading }
}

/// Spectral data of the chain restricted to `Ω`, symmetrized through its
/// reversible stationary measure `∝ 3^{|E|}`.
pub fn spectral_gap_numeric(n: usize, scope: ChainScope) -> Result<SpectralReport> {
    check_n(n)?;
    match scope {
        ChainScope::Lumped => {
            let p = size_transition_matrix(n)?;
            let sym = DMatrix::from_fn(n, n, |r, c| {
                let (i, j) = (r + 1, c + 1);
                if i == j {
                    p.stay[i]
                } else if i + 1 == j || j + 1 == i {
                    (p.get(i, j) * p.get(j, i)).sqrt()
                } else {
                    0.0
                }
            });
            Ok(spectrum(sym))
        }
        ChainScope::FullSet => {
            let p = full_set_transition_matrix(n)?;
            Ok(spectrum(symmetrize_full(&p)))
        }
    }
}

/// `D^{1/2} P D^{−1/2}` with `D = diag(3^{|E|})`.
pub fn symmetrize_full(p: &DMatrix<f64>) -> DMatrix<f64> {
    let half_ln3 = 0.5 * 3f64.ln();
    let weight = |i: usize| ((i + 1).count_ones() as f64 * half_ln3).exp();
    DMatrix::from_fn(p.nrows(), p.ncols(), |r, c| p[(r, c)] * weight(r) / weight(c))
}

/// Initial law of the explicit support process.
#[derive(Clone, Debug, PartialEq)]
pub enum SetChainStart {
    /// `|0…0⟩`: each qubit in the support independently with probability 1/2.
    BasisState,
    Fixed(PauliString),
    /// Strings with squared-coefficient weights (normalized internally).
    Weighted(Vec<(PauliString, f64)>),
}

impl SetChainStart {
    /// Squared Pauli coefficients `Tr(σ_p ρ)² / 2^N` of a pure state.
    pub fn from_state(state: &StateVector) -> Result<Self> {
        let n = state.n_qubits();
        if n > 8 {
            return Err(Error::QubitCount { n, min: 1, max: 8 });
        }
        let amps = state.amplitudes();
        let mut out = Vec::new();
        for code in 0..(1usize << (2 * n)) {
            let letters: Vec<Pauli> = (0..n).map(|q| Pauli::from_index(code >> (2 * q))).collect();
            let (mut xmask, mut zmask, mut ys) = (0usize, 0usize, 0u32);
            for (q, l) in letters.iter().enumerate() {
                let (xb, zb) = l.bits();
                xmask |= usize::from(xb) << q;
                zmask |= usize::from(zb) << q;
                ys += u32::from(xb && zb);
            }
            // ⟨ψ|P|ψ⟩ with P = i^{#Y} X^x Z^z.
            let mut expval = num_complex::Complex64::new(0.0, 0.0);
            for (idx, a) in amps.iter().enumerate() {
                let sign = if (idx & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                expval += amps[idx ^ xmask].conj() * a * sign;
            }
            let phase = num_complex::Complex64::new(0.0, 1.0).powu(ys);
            let e = (phase * expval).re;
            let w = e * e / (1usize << n) as f64;
            if w > 1e-15 {
                out.push((PauliString::new(letters)?, w));
            }
        }
        Ok(SetChainStart::Weighted(out))
    }

    fn sampler(&self, n: usize) -> Result<StartSampler> {
        match self {
            SetChainStart::BasisState => Ok(StartSampler::Basis),
            SetChainStart::Fixed(p) => {
                if p.len() != n {
                    return Err(Error::DimensionMismatch(format!("start string has {} letters", p.len())));
                }
                Ok(StartSampler::Weighted(vec![(support_mask(p), 1.0)]))
            }
            SetChainStart::Weighted(items) => {
                if items.is_empty() || items.iter().any(|(p, w)| p.len() != n || !(*w >= 0.0)) {
                    return Err(Error::InvalidParameter("bad weighted start".into()));
                }
                let total: f64 = items.iter().map(|(_, w)| w).sum();
                if !(total > 0.0) {
                    return Err(Error::InvalidParameter("start weights sum to zero".into()));
                }
                let mut acc = 0.0;
                let cdf = items
                    .iter()
                    .map(|(p, w)| {
                        acc += w / total;
                        (support_mask(p), acc)
                    })
                    .collect();
                Ok(StartSampler::Weighted(cdf))
            }
        }
    }
}

fn support_mask(p: &PauliString) -> u64 {
    p.support().iter().fold(0u64, |m, &q| m | (1 << q))
}

enum StartSampler {
    Basis,
    /// Cumulative weights over support masks.
    Weighted(Vec<(u64, f64)>),
}

impl StartSampler {
    fn draw(&self, n: usize, rng: &mut ChaCha8Rng) -> u64 {
        match self {
            StartSampler::Basis => {
                let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
                rng.random::<u64>() & full
            }
            StartSampler::Weighted(cdf) => {
                let u: f64 = rng.random();
                cdf.iter().find(|(_, c)| u < *c).unwrap_or(cdf.last().expect("non-empty")).0
            }
        }
    }
}

/// One step of the explicit support process on a bitmask.
pub fn set_chain_step<R: Rng + ?Sized>(mask: u64, n: usize, rng: &mut R) -> u64 {
    let c = rng.random_range(0..n);
    let mut t = rng.random_range(0..n - 1);
    if t >= c {
        t += 1;
    }
    let letter = |inside: bool, rng: &mut R| {
        if inside {
            Pauli::NONTRIVIAL[rng.random_range(0..3)]
        } else {
            Pauli::I
        }
    };
    let lc = letter((mask >> c) & 1 == 1, rng);
    let lt = letter((mask >> t) & 1 == 1, rng);
    let (hc, ht) = hat_map(lc, lt);
    let mut next = mask & !(1 << c) & !(1 << t);
    if !hc.is_identity() {
        next |= 1 << c;
    }
    if !ht.is_identity() {
        next |= 1 << t;
    }
    next
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetChainEstimate {
    pub step: usize,
    pub purity: f64,
    pub stderr: f64,
    /// Trials with `𝒳_n ⊆ A`.
    pub inside: usize,
    /// Histogram of `|𝒳_n|` over `0..=N`.
    pub size_counts: Vec<usize>,
    pub trials: usize,
}

/// Monte Carlo estimate of `2^{N_B} Pr(𝒳_n ⊆ A)` at each step of `grid`.
pub fn monte_carlo_set_chain(
    start: &SetChainStart,
    grid: &[usize],
    trials: usize,
    subset_a: &[bool],
    seed: u64,
) -> Result<Vec<SetChainEstimate>> {
    let n = subset_a.len();
    check_n(n)?;
    if n > 64 {
        return Err(Error::QubitCount { n, min: 2, max: 64 });
    }
    let n_a = subset_a.iter().filter(|&&b| b).count();
    if n_a == 0 || n_a == n {
        return Err(Error::InvalidPartition("A must be proper and non-empty".into()));
    }
    if trials == 0 {
        return Err(Error::InsufficientTrials { required: 1, got: 0 });
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("step grid must be strictly increasing".into()));
    }
    let sampler = start.sampler(n)?;
    let outside: u64 = (0..n).filter(|&q| !subset_a[q]).fold(0, |m, q| m | (1 << q));

    let per_trial: Vec<Vec<u64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, SET_CHAIN_TAG, trial as u64);
            let mut mask = sampler.draw(n, &mut rng);
            let mut step = 0;
            grid.iter()
                .map(|&target| {
                    while step < target {
                        mask = set_chain_step(mask, n, &mut rng);
                        step += 1;
                    }
                    mask
                })
                .collect()
        })
        .collect();

    let scale = 2f64.powi((n - n_a) as i32);
    Ok(grid
        .iter()
        .enumerate()
        .map(|(g, &step)| {
            let mut size_counts = vec![0usize; n + 1];
            let mut inside = 0;
            for masks in &per_trial {
                size_counts[masks[g].count_ones() as usize] += 1;
                inside += usize::from(masks[g] & outside == 0);
            }
            let p = inside as f64 / trials as f64;
            SetChainEstimate {
                step,
                purity: scale * p,
                stderr: scale * (p * (1.0 - p) / trials as f64).sqrt(),
                inside,
                size_counts,
                trials,
            }
        })
        .collect())
}

const SET_CHAIN_TAG: u64 = 0x5e7c_4a1e;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn two_qubit_matrix() {
        let p = size_transition_matrix(2).unwrap();
        assert_abs_diff_eq!(p.get(1, 1), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(1, 2), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(2, 1), 4.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(2, 2), 5.0 / 9.0, epsilon = 1e-15);
        assert_eq!(p.get(0, 0), 1.0);
        assert_abs_diff_eq!(0.4 * p.get(1, 2), 4.0 / 15.0, epsilon = 1e-15);
        assert_abs_diff_eq!(0.6 * p.get(2, 1), 4.0 / 15.0, epsilon = 1e-15);
        assert!(size_transition_matrix(1).is_err());
    }

    #[test]
    fn rows_are_stochastic_and_tridiagonal() {
        for n in 2..40 {
            let m = size_transition_matrix(n).unwrap().to_dense();
            for r in 0..=n {
                assert_abs_diff_eq!(m.row(r).sum(), 1.0, epsilon = 1e-12);
                for c in 0..=n {
                    assert!(m[(r, c)] >= 0.0);
                    if r.abs_diff(c) > 1 {
                        assert_eq!(m[(r, c)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn basis_start() {
        let d = initial_size_distribution(2, ChainStart::BasisState).unwrap();
        for (a, b) in d.probs().iter().zip([0.25, 0.5, 0.25]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        for n in 2..30 {
            let d = initial_size_distribution(n, ChainStart::BasisState).unwrap();
            assert_abs_diff_eq!(d.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(d.probs()[0], 0.5f64.powi(n as i32), epsilon = 1e-15);
        }
    }

    #[test]
    fn evolution_keeps_empty_mass_and_converges() {
        let d0 = initial_size_distribution(2, ChainStart::BasisState).unwrap();
        assert_eq!(evolve(&d0, 0).unwrap(), d0);
        let d = evolve(&d0, 1000).unwrap();
        assert_eq!(d.probs()[0], 0.25);
        assert_abs_diff_eq!(d.probs()[1], 0.75 * 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(d.probs()[2], 0.75 * 0.6, epsilon = 1e-12);
    }

    #[test]
    fn stationary_examples() {
        let s = stationary_size_distribution(2).unwrap();
        assert_abs_diff_eq!(s.probs()[1], 6.0 / 15.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.probs()[2], 9.0 / 15.0, epsilon = 1e-15);
        for n in 2..25 {
            let s = stationary_size_distribution(n).unwrap();
            // Normalizer: Σ_{k≥1} C(N,k) 3^k = 4^N − 1.
            let lf = ln_factorials(n);
            let z: f64 = (1..=n).map(|k| (ln_binom(&lf, n, k) + k as f64 * 3f64.ln()).exp()).sum();
            assert_abs_diff_eq!(z / (4f64.powi(n as i32) - 1.0), 1.0, epsilon = 1e-12);
            let next = size_transition_matrix(n).unwrap().step(s.probs());
            for (a, b) in next.iter().zip(s.probs()) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn purity_examples() {
        let d0 = initial_size_distribution(6, ChainStart::BasisState).unwrap();
        assert_abs_diff_eq!(expected_purity(&d0, 3).unwrap(), 1.0, epsilon = 1e-12);
        let lim = limit_size_distribution(&initial_size_distribution(2, ChainStart::BasisState).unwrap()).unwrap();
        assert_abs_diff_eq!(expected_purity(&lim, 1).unwrap(), 0.8, epsilon = 1e-12);
        assert!(expected_purity(&d0, 0).is_err());
        assert!(expected_purity(&d0, 6).is_err());
    }

    #[test]
    fn purity_bound_examples() {
        assert_abs_diff_eq!(lemma1_bound(6, 0), 4096.0, epsilon = 1e-9);
        // 4^4 e^{−4n/108} = 1 at n = 27 ln 256.
        let n_star = 27.0 * 256f64.ln();
        let below = lemma1_bound(4, n_star.floor() as usize);
        let above = lemma1_bound(4, n_star.ceil() as usize);
        assert!(below > 1.0 && above < 1.0);
        assert!((0..500).all(|n| lemma1_bound(5, n + 1) < lemma1_bound(5, n)));
    }

    #[test]
    fn deviation_series_matches_direct_evolution() {
        let d0 = initial_size_distribution(6, ChainStart::BasisState).unwrap();
        let series = purity_series(&d0, 3, 200).unwrap();
        for pt in series.iter().step_by(20) {
            let direct = expected_purity(&evolve(&d0, pt.step).unwrap(), 3).unwrap();
            assert_abs_diff_eq!(pt.purity, direct, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(series[0].limit, 16.0 / 65.0, epsilon = 1e-12);
    }

    #[test]
    fn threshold_examples() {
        let p = ChainParams::new(3, 7, 0.01, 0).unwrap();
        let th = theorem1_thresholds(&p).unwrap();
        assert_eq!(th.n_min, 3740);
        assert_abs_diff_eq!(th.entropy_lower_bound, 3.0 - (0.0625 + 0.01) / LN_2, epsilon = 1e-12);
        assert!(ChainParams::new(4, 3, 0.01, 0).is_err());
        assert!(ChainParams::new(3, 3, 1.0, 0).is_err());
        let far = theorem1_thresholds(&ChainParams::new(3, 60, 1e-12, 0).unwrap()).unwrap();
        assert_abs_diff_eq!(far.entropy_lower_bound, 3.0, epsilon = 1e-10);
    }

    #[test]
    fn two_qubit_spectrum_by_hand() {
        // [[1/3, 2/3], [4/9, 5/9]] has eigenvalues 1 and −1/9.
        let r = spectral_gap_numeric(2, ChainScope::Lumped).unwrap();
        assert_abs_diff_eq!(r.leading, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.nonunit_eigenvalues[0], -1.0 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.gap, 8.0 / 9.0, epsilon = 1e-12);
    }

    #[test]
    fn full_set_chain_is_reversible_and_lumps() {
        for n in 2..=6 {
            let p = full_set_transition_matrix(n).unwrap();
            let s = symmetrize_full(&p);
            let asym = (&s - s.transpose()).amax();
            assert!(asym < 1e-12, "N={n}: {asym}");
            let lumped = size_transition_matrix(n).unwrap();
            for mask in 1..(1usize << n) {
                let k = mask.count_ones() as usize;
                let mut by_size = vec![0.0; n + 1];
                for next in 1..(1usize << n) {
                    by_size[next.count_ones() as usize] += p[(mask - 1, next - 1)];
                }
                for (j, v) in by_size.iter().enumerate() {
                    assert_abs_diff_eq!(*v, lumped.get(k, j), epsilon = 1e-12);
                }
            }
        }
        assert!(full_set_transition_matrix(13).is_err());
    }

    #[test]
    fn set_chain_start_from_product_state_is_basis_law() {
        let s = StateVector::new_basis(3).unwrap();
        let SetChainStart::Weighted(items) = SetChainStart::from_state(&s).unwrap() else { panic!() };
        assert_eq!(items.len(), 8);
        for (p, w) in &items {
            assert!(p.letters().iter().all(|l| matches!(l, Pauli::I | Pauli::Z)));
            assert_abs_diff_eq!(*w, 0.125, epsilon = 1e-12);
        }
    }

    #[test]
    fn full_support_start_is_never_inside() {
        let start = SetChainStart::Fixed(PauliString::uniform(4, Pauli::Z).unwrap());
        let est = monte_carlo_set_chain(&start, &[0], 100, &[true, true, false, false], 1).unwrap();
        assert_eq!(est[0].inside, 0);
        assert_eq!(est[0].size_counts[4], 100);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn detailed_balance_at_the_set_level(n in 2usize..60, k in 1usize..59) {
            prop_assume!(k < n);
            // 3^k · P(E → E ∪ {d}) = 3^{k+1} · P(E ∪ {d} → E), per specific d.
            let p = size_transition_matrix(n).unwrap();
            let add_one = p.get(k, k + 1) / (n - k) as f64;
            let remove_one = p.get(k + 1, k) / (k + 1) as f64;
            prop_assert!((add_one - 3.0 * remove_one).abs() <= 1e-14 * add_one.max(1e-300));
        }

        #[test]
        fn lumping_identity(n in 2usize..20, n_a in 1usize..19, k in 0usize..20) {
            prop_assume!(n_a < n && k <= n);
            // Fraction of size-k subsets inside A equals C(N_A,k)/C(N,k).
            let lf = ln_factorials(n);
            let w = purity_weights(n, n_a).unwrap()[k] / 2f64.powi((n - n_a) as i32);
            let expected = if k > n_a { 0.0 } else { (ln_binom(&lf, n_a, k) - ln_binom(&lf, n, k)).exp() };
            prop_assert!((w - expected).abs() < 1e-12);
            if n <= 12 {
                let count = (0usize..1 << n)
                    .filter(|m| m.count_ones() as usize == k && m >> n_a == 0)
                    .count() as f64;
                let total = (0usize..1 << n).filter(|m| m.count_ones() as usize == k).count() as f64;
                prop_assert!((w - count / total).abs() < 1e-12);
            }
        }
    }
}
