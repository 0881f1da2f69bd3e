//! Monte Carlo and exhaustive checks of the second-moment property a
//! single-qubit measure must have for the support-chain reduction to hold:
//!
//! ```text
//! E[F(T σ_a T†, T σ_b T†)] = F(I, I)                    a = b = 0
//!                          = (1/3) Σ_w F(σ_w, σ_w)      a = b ≠ 0
//!                          = 0                          otherwise
//! ```
//!
//! for every bilinear `F`. Bilinear forms on 2×2 operators are spanned by
//! `F_uv(A, B) = Tr(σ_u A) · Tr(σ_v B)`, so the checks sweep all 16 `(u, v)`.

use crate::gates::CliffordGroup;
use crate::mat2::Mat2;
use crate::pauli::Pauli;

/// `F_uv(A, B) = Tr(σ_u A) Tr(σ_v B)`, real for Hermitian arguments.
pub fn trace_form(u: Pauli, v: Pauli, a: &Mat2, b: &Mat2) -> f64 {
    ((u.matrix() * *a).trace() * (v.matrix() * *b).trace()).re
}

/// Value the randomizing property predicts for `F_uv` at letters `(a, b)`.
pub fn predicted_moment(a: Pauli, b: Pauli, u: Pauli, v: Pauli) -> f64 {
    if a.is_identity() && b.is_identity() {
        trace_form(u, v, &Mat2::IDENTITY, &Mat2::IDENTITY)
    } else if a == b {
        Pauli::NONTRIVIAL.iter().map(|w| trace_form(u, v, &w.matrix(), &w.matrix())).sum::<f64>() / 3.0
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentEntry {
    pub estimate: f64,
    pub stderr: f64,
    pub predicted: f64,
}

impl MomentEntry {
    /// Deviation in standard errors; exact entries (zero stderr) report 0 or ∞.
    pub fn z_score(&self) -> f64 {
        let diff = (self.estimate - self.predicted).abs();
        if self.stderr > 0.0 {
            diff / self.stderr
        } else if diff <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Estimates of `E[F_uv(T σ_a T†, T σ_b T†)]` for all `u, v`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub a: Pauli,
    pub b: Pauli,
    pub trials: usize,
    /// Indexed `[u][v]` by [`Pauli::index`].
    pub entries: [[MomentEntry; 4]; 4],
}

impl MomentReport {
    pub fn max_z_score(&self) -> f64 {
        self.entries.iter().flatten().map(MomentEntry::z_score).fold(0.0, f64::max)
    }

    pub fn max_abs_error(&self) -> f64 {
        self.entries.iter().flatten().map(|e| (e.estimate - e.predicted).abs()).fold(0.0, f64::max)
    }
}

/// Monte Carlo estimate of the randomizing moments under the measure `draw`.
pub fn requirement1_check(a: Pauli, b: Pauli, mut draw: impl FnMut() -> Mat2, trials: usize) -> MomentReport {
    let mut sum = [[0.0f64; 4]; 4];
    let mut sum_sq = [[0.0f64; 4]; 4];
    for _ in 0..trials {
        let t = draw();
        let ca = t.conjugate(&a.matrix());
        let cb = t.conjugate(&b.matrix());
        let ta: Vec<f64> = Pauli::ALL.iter().map(|u| (u.matrix() * ca).trace().re).collect();
        let tb: Vec<f64> = Pauli::ALL.iter().map(|v| (v.matrix() * cb).trace().re).collect();
        for u in 0..4 {
            for v in 0..4 {
                let f = ta[u] * tb[v];
                sum[u][v] += f;
                sum_sq[u][v] += f * f;
            }
        }
    }
    let n = trials as f64;
    let mut entries = [[MomentEntry::default(); 4]; 4];
    for u in Pauli::ALL {
        for v in Pauli::ALL {
            let (i, j) = (u.index(), v.index());
            let mean = sum[i][j] / n;
            let var = if trials > 1 { ((sum_sq[i][j] / n - mean * mean) * n / (n - 1.0)).max(0.0) } else { 0.0 };
            // Conjugation fixes the identity, so identity-only entries are exact.
            let stderr = if var < 1e-24 { 0.0 } else { (var / n).sqrt() };
            entries[i][j] = MomentEntry { estimate: mean, stderr, predicted: predicted_moment(a, b, u, v) };
        }
    }
    MomentReport { a, b, trials, entries }
}

/// Exact moments of the uniform measure on the 24 single-qubit Cliffords.
pub fn clifford_exhaustive_moments(a: Pauli, b: Pauli) -> MomentReport {
    let group = CliffordGroup::get();
    let mut entries = [[MomentEntry::default(); 4]; 4];
    for u in Pauli::ALL {
        for v in Pauli::ALL {
            let total: f64 = group
                .elements()
                .iter()
                .map(|e| {
                    let t = e.matrix;
                    trace_form(u, v, &t.conjugate(&a.matrix()), &t.conjugate(&b.matrix()))
                })
                .sum();
            entries[u.index()][v.index()] = MomentEntry {
                estimate: total / group.len() as f64,
                stderr: 0.0,
                predicted: predicted_moment(a, b, u, v),
            };
        }
    }
    MomentReport { a, b, trials: group.len(), entries }
}

/// Empirical `E[r_u r_u']` with `r_u = Tr(σ_u T σ_z T†) / 2`, `u, u' ∈ {x, y, z}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochCorrelations {
    pub samples: usize,
    pub mean: [[f64; 3]; 3],
    pub stderr: [[f64; 3]; 3],
}

pub fn bloch_correlations(mut draw: impl FnMut() -> Mat2, samples: usize) -> BlochCorrelations {
    let mut sum = [[0.0f64; 3]; 3];
    let mut sum_sq = [[0.0f64; 3]; 3];
    let z = Pauli::Z.matrix();
    for _ in 0..samples {
        let rotated = draw().conjugate(&z);
        let r: Vec<f64> = Pauli::NONTRIVIAL.iter().map(|u| (u.matrix() * rotated).trace().re / 2.0).collect();
        for i in 0..3 {
            for j in 0..3 {
                let f = r[i] * r[j];
                sum[i][j] += f;
                sum_sq[i][j] += f * f;
            }
        }
    }
    let n = samples as f64;
    let mut mean = [[0.0; 3]; 3];
    let mut stderr = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            mean[i][j] = sum[i][j] / n;
            let var = (sum_sq[i][j] / n - mean[i][j] * mean[i][j]).max(0.0);
            stderr[i][j] = (var / n).sqrt();
        }
    }
    BlochCorrelations { samples, mean, stderr }
}
