//! Per-trial seeding and ordered parallel trial execution.
//!
//! Trial `i` of an experiment draws from a ChaCha8 generator keyed by the
//! master seed and a domain tag, on stream `i`. Results are collected in
//! trial order, so output does not depend on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Independent generator for one trial.
pub fn trial_rng(master: u64, tag: u64, trial: u64) -> ChaCha8Rng {
    let key = splitmix64(master ^ splitmix64(tag));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(trial);
    rng
}

/// Runs `f(trial, rng)` for every trial on the current rayon pool.
pub fn run_trials<T, E, F>(trials: usize, master: u64, tag: u64, f: F) -> std::result::Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> std::result::Result<T, E> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master, tag, i as u64);
            f(i, &mut rng)
        })
        .collect()
}

/// Mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
