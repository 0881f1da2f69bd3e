//! `selfcheck` (moment tests of the single-qubit measures) and `oracles`
//! (closed-form tables).

use entwalk_core::chain::{expected_purity, initial_size_distribution, limit_size_distribution, ChainStart};
use entwalk_core::ensemble::trial_rng;
use entwalk_core::gates::haar_u2_matrix;
use entwalk_core::oracles::{asymptotic_purity, page_average, pmf_mean, stabilizer_pmf};
use entwalk_core::pauli::Pauli;
use entwalk_core::randomizing::{bloch_correlations, clifford_exhaustive_moments, requirement1_check, MomentReport};

use crate::config::ExperimentConfig;
use crate::error::Result;

const SELFCHECK_TAG: u64 = 0x5e1f_c4ec;

/// Largest allowed `|E[r_u r_u'] − δ/3|`.
pub const BLOCH_TOLERANCE: f64 = 0.01;
/// Largest allowed z-score of a Monte Carlo moment.
pub const MOMENT_Z_LIMIT: f64 = 5.0;
pub const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SelfCheck {
    pub samples: usize,
    pub bloch_mean: [[f64; 3]; 3],
    pub bloch_max_error: f64,
    pub haar: Vec<MomentReport>,
    pub clifford: Vec<MomentReport>,
}

impl SelfCheck {
    pub fn haar_max_z(&self) -> f64 {
        self.haar.iter().map(|r| r.max_z_score()).fold(0.0, f64::max)
    }

    pub fn clifford_max_error(&self) -> f64 {
        self.clifford.iter().map(|r| r.max_abs_error()).fold(0.0, f64::max)
    }

    pub fn bloch_ok(&self) -> bool {
        self.bloch_max_error <= BLOCH_TOLERANCE
    }

    pub fn haar_ok(&self) -> bool {
        self.haar_max_z() <= MOMENT_Z_LIMIT
    }

    pub fn clifford_ok(&self) -> bool {
        self.clifford_max_error() <= EXACT_TOLERANCE
    }

    pub fn passed(&self) -> bool {
        self.bloch_ok() && self.haar_ok() && self.clifford_ok()
    }
}

pub fn run_selfcheck(cfg: &ExperimentConfig) -> Result<SelfCheck> {
    let samples = cfg.trials;
    let mut rng = trial_rng(cfg.seed, SELFCHECK_TAG, 0);
    let bloch = bloch_correlations(|| haar_u2_matrix(&mut rng), samples);
    let mut bloch_max_error = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 / 3.0 } else { 0.0 };
            bloch_max_error = bloch_max_error.max((bloch.mean[i][j] - target).abs());
        }
    }
    let mut haar = Vec::new();
    let mut clifford = Vec::new();
    for (k, a) in Pauli::ALL.into_iter().enumerate() {
        for (l, b) in Pauli::ALL.into_iter().enumerate() {
            let mut rng = trial_rng(cfg.seed, SELFCHECK_TAG, 1 + (4 * k + l) as u64);
            haar.push(requirement1_check(a, b, || haar_u2_matrix(&mut rng), samples));
            clifford.push(clifford_exhaustive_moments(a, b));
        }
    }
    Ok(SelfCheck { samples, bloch_mean: bloch.mean, bloch_max_error, haar, clifford })
}

/// One row of the closed-form dump for a split `N_A | N_B`.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRow {
    pub n: usize,
    pub n_a: usize,
    pub page: f64,
    pub purity: f64,
    pub stabilizer_mean: f64,
    /// Long-run expected purity of the lumped chain from `|0…0⟩`.
    pub chain_purity: f64,
}

/// `(N, N_A, E, P(E))` for the stabilizer distribution.
pub type PmfRow = (usize, usize, usize, f64);

pub fn run_oracles(cfg: &ExperimentConfig) -> Result<(Vec<OracleRow>, Vec<PmfRow>)> {
    let max_n = cfg.single_n();
    let mut rows = Vec::new();
    let mut pmfs = Vec::new();
    for n in 2..=max_n {
        let limit = limit_size_distribution(&initial_size_distribution(n, ChainStart::BasisState)?)?;
        for n_a in 1..=n / 2 {
            let n_b = n - n_a;
            let pmf = stabilizer_pmf(n, n_a)?;
            for (e, p) in pmf.iter().enumerate() {
                pmfs.push((n, n_a, e, *p));
            }
            rows.push(OracleRow {
                n,
                n_a,
                page: page_average(n_a, n_b)?,
                purity: asymptotic_purity(n_a, n_b)?,
                stabilizer_mean: pmf_mean(&pmf),
                chain_purity: expected_purity(&limit, n_a)?,
            });
        }
    }
    Ok((rows, pmfs))
}
