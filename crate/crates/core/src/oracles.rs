//! Closed-form reference values: Haar-average block entropy, the Haar
//! asymptotic purity and the entanglement law of random stabilizer states.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// Largest `N` summed term by term; beyond it the harmonic expansion is used.
const DIRECT_SUM_MAX_QUBITS: usize = 22;

fn harmonic_tail_direct(lo: u64, hi: u64) -> f64 {
    // Σ_{k=lo+1}^{hi} 1/k, smallest terms first, compensated.
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for k in (lo + 1..=hi).rev() {
        let y = 1.0 / k as f64 - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// `H(m) − H(n)` through `ln(m/n)` and the Euler–Maclaurin corrections.
fn harmonic_tail_asymptotic(ln_ratio: f64, n: f64, m: f64) -> f64 {
    let corr = |x: f64| 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x) + 1.0 / (120.0 * x.powi(4)) - 1.0 / (252.0 * x.powi(6));
    ln_ratio + corr(m) - corr(n)
}

/// Haar average of `S(ρ_A)` in ebits for `1 ≤ N_A ≤ N_B`.
pub fn page_average(n_a: usize, n_b: usize) -> Result<f64> {
    if n_a == 0 || n_a > n_b {
        return Err(Error::InvalidPartition(format!("need 1 ≤ N_A ≤ N_B, got N_A = {n_a}, N_B = {n_b}")));
    }
    let n = n_a + n_b;
    let tail = if n <= DIRECT_SUM_MAX_QUBITS {
        harmonic_tail_direct(1u64 << n_b, 1u64 << n)
    } else {
        let lo = 2f64.powi(n_b as i32);
        harmonic_tail_asymptotic(n_a as f64 * LN_2, lo, 2f64.powi(n as i32))
    };
    let correction = (2f64.powi(n_a as i32) - 1.0) / 2f64.powi(n_b as i32 + 1);
    Ok((tail - correction) / LN_2)
}

/// `(2^{N_A} + 2^{N_B}) / (2^N + 1)`.
pub fn asymptotic_purity(n_a: usize, n_b: usize) -> Result<f64> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::InvalidPartition("both parties need at least one qubit".into()));
    }
    let (lo, hi) = (n_a.min(n_b) as i32, n_a.max(n_b) as i32);
    // Divide through by 2^{hi} to stay finite for large N.
    let num = 1.0 + 2f64.powi(lo - hi);
    let den = 2f64.powi(lo) + 2f64.powi(-hi);
    Ok(num / den)
}

/// `ln(2^a − 1)` for `a ≥ 1`.
fn ln_pow2_minus_one(a: i64) -> f64 {
    a as f64 * LN_2 + (-(2f64.powi(-a as i32))).ln_1p()
}

/// `ln(2^a + 1)`.
fn ln_pow2_plus_one(a: i64) -> f64 {
    a as f64 * LN_2 + 2f64.powi(-a as i32).ln_1p()
}

/// Law of the block entanglement `E ∈ 0..=N_A` of a uniformly random pure
/// stabilizer state, evaluated in log space.
pub fn stabilizer_pmf(n: usize, n_a: usize) -> Result<Vec<f64>> {
    if n_a == 0 || 2 * n_a > n {
        return Err(Error::InvalidPartition(format!("need 1 ≤ N_A ≤ N − N_A, got N = {n}, N_A = {n_a}")));
    }
    let (n_i, na_i) = (n as i64, n_a as i64);
    let ln_prefactor: f64 =
        (1..=na_i).map(ln_pow2_plus_one).sum::<f64>() - (n_i - na_i + 1..=n_i).map(ln_pow2_plus_one).sum::<f64>();
    let mut out = Vec::with_capacity(n_a + 1);
    let mut acc = ln_prefactor;
    out.push(acc.exp());
    for j in 1..=na_i {
        // (2^{N−N_A+1−j} − 1)(2^{N_A+j} − 2^{2j−1}) / (2^{2j} − 1)
        let first = ln_pow2_minus_one(n_i - na_i + 1 - j);
        let second = (2 * j - 1) as f64 * LN_2 + ln_pow2_minus_one(na_i - j + 1);
        acc += first + second - ln_pow2_minus_one(2 * j);
        out.push(acc.exp());
    }
    Ok(out)
}

pub fn pmf_mean(pmf: &[f64]) -> f64 {
    pmf.iter().enumerate().map(|(e, p)| e as f64 * p).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn page_examples() {
        assert_abs_diff_eq!(page_average(1, 1).unwrap(), 1.0 / (3.0 * LN_2), epsilon = 1e-12);
        let direct = (1.0 / 5.0 + 1.0 / 6.0 + 1.0 / 7.0 + 1.0 / 8.0 - 1.0 / 8.0) / LN_2;
        assert_abs_diff_eq!(page_average(1, 2).unwrap(), direct, epsilon = 1e-12);
        assert_abs_diff_eq!(page_average(1, 2).unwrap(), 0.7350874727, epsilon = 1e-9);
        assert_abs_diff_eq!(page_average(2, 2).unwrap(), 1.3307356441, epsilon = 1e-9);
        assert_abs_diff_eq!(page_average(5, 5).unwrap(), 4.2794744, epsilon = 1e-6);
        assert!(page_average(3, 2).is_err());
        assert!(page_average(0, 2).is_err());
    }

    #[test]
    fn asymptotic_and_direct_sums_agree_at_the_switch() {
        for n_a in 1..=11 {
            let n_b = DIRECT_SUM_MAX_QUBITS - n_a;
            let direct = harmonic_tail_direct(1u64 << n_b, 1u64 << DIRECT_SUM_MAX_QUBITS);
            let asym = harmonic_tail_asymptotic(
                n_a as f64 * LN_2,
                2f64.powi(n_b as i32),
                2f64.powi(DIRECT_SUM_MAX_QUBITS as i32),
            );
            assert_abs_diff_eq!(direct, asym, epsilon = 1e-12);
        }
    }

    #[test]
    fn asymptotic_purity_examples() {
        assert_abs_diff_eq!(asymptotic_purity(1, 1).unwrap(), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(asymptotic_purity(5, 5).unwrap(), 64.0 / 1025.0, epsilon = 1e-15);
        assert_eq!(asymptotic_purity(2, 7).unwrap(), asymptotic_purity(7, 2).unwrap());
        assert!(asymptotic_purity(600, 600).unwrap() > 0.0);
    }

    #[test]
    fn stabilizer_small_cases() {
        let p = stabilizer_pmf(2, 1).unwrap();
        assert_abs_diff_eq!(p[0], 0.6, epsilon = 1e-14);
        assert_abs_diff_eq!(p[1], 0.4, epsilon = 1e-14);
        let p = stabilizer_pmf(3, 1).unwrap();
        assert_abs_diff_eq!(p[0], 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p[1], 2.0 / 3.0, epsilon = 1e-14);
        assert!(stabilizer_pmf(4, 3).is_err());
    }

    #[test]
    fn stabilizer_pmf_normalized_up_to_thirty_qubits() {
        for n in 2..=30 {
            for n_a in 1..=n / 2 {
                let p = stabilizer_pmf(n, n_a).unwrap();
                assert_eq!(p.len(), n_a + 1);
                assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-10);
                assert!(p.iter().all(|&x| x >= 0.0));
            }
        }
        let big = stabilizer_pmf(200, 100).unwrap();
        assert_abs_diff_eq!(big.iter().sum::<f64>(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn averages_for_every_split_up_to_twenty() {
        for n in 2..=20 {
            for n_a in 1..=n / 2 {
                let n_b = n - n_a;
                let page = page_average(n_a, n_b).unwrap();
                assert!(page <= n_a as f64);
                assert!(n_a as f64 - page <= (2f64.powi(-((n_b - n_a) as i32)) + 1e-12) / LN_2);
                assert!(-asymptotic_purity(n_a, n_b).unwrap().log2() <= page + 1e-12);
                let mean = pmf_mean(&stabilizer_pmf(n, n_a).unwrap());
                assert!(mean >= page - 1.0 && mean <= n_a as f64 + 1e-12);
                if n_a < n_b - 1 {
                    // Moving a qubit to the smaller party raises the average.
                    assert!(page_average(n_a + 1, n_b - 1).unwrap() > page);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn purity_is_symmetric(a in 1usize..40, b in 1usize..40) {
            prop_assert_eq!(asymptotic_purity(a, b).unwrap(), asymptotic_purity(b, a).unwrap());
        }
    }
}
