//! Reduced density matrices and the entanglement measures built on them.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::statevector::StateVector;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const CLIP_TOL: f64 = 1e-9;
const ZERO_EIGEN: f64 = 1e-12;

/// Density operator on `m` qubits; qubit `j` is bit `j` of the row index.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
    m: usize,
}

impl DensityMatrix {
    /// Validates shape, hermiticity and unit trace.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let dim = entries.nrows();
        if dim != entries.ncols() || dim < 1 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix shape {}×{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let defect = (&entries - entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidParameter(format!("trace {tr} differs from 1")));
        }
        Ok(DensityMatrix { m: dim.trailing_zeros() as usize, entries })
    }

    /// `diag(p)` for a probability vector of power-of-two length.
    pub fn diagonal(p: &[f64]) -> Result<Self> {
        let d = p.len();
        Self::new(DMatrix::from_fn(
            d,
            d,
            |r, c| {
                if r == c {
                    Complex64::new(p[r], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            },
        ))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        let d = a.len();
        DensityMatrix { entries: DMatrix::from_fn(d, d, |r, c| a[r] * a[c].conj()), m: state.n_qubits() }
    }

    pub fn n_qubits(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Eigenvalues in ascending order, with `[−1e-9, 0)` clipped to zero.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        clipped_eigenvalues(&self.entries)
    }
}

fn clipped_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let mut eig: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    for v in eig.iter_mut() {
        if *v < -CLIP_TOL {
            return Err(Error::NegativeEigenvalue(*v));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(eig)
}

/// A proper, non-empty subset `A` of the `n` qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSpec {
    n: usize,
    subset_a: Vec<usize>,
}

impl PartitionSpec {
    pub fn new(n: usize, subset_a: &[usize]) -> Result<Self> {
        let a = validate_subset(n, subset_a)?;
        if a.is_empty() || a.len() == n {
            return Err(Error::InvalidPartition(format!(
                "subset A must be proper and non-empty, got {} of {n} qubits",
                a.len()
            )));
        }
        Ok(PartitionSpec { n, subset_a: a })
    }

    /// `A = {0, …, n_a − 1}`.
    pub fn leading(n: usize, n_a: usize) -> Result<Self> {
        Self::new(n, &(0..n_a).collect::<Vec<_>>())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn subset_a(&self) -> &[usize] {
        &self.subset_a
    }

    pub fn complement(&self) -> Vec<usize> {
        (0..self.n).filter(|q| !self.subset_a.contains(q)).collect()
    }

    pub fn n_a(&self) -> usize {
        self.subset_a.len()
    }

    pub fn n_b(&self) -> usize {
        self.n - self.subset_a.len()
    }

    /// `t = N_B − N_A`, negative when `A` is the larger side.
    pub fn t(&self) -> i64 {
        self.n_b() as i64 - self.n_a() as i64
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &q in &self.subset_a {
            m[q] = true;
        }
        m
    }
}

/// Sorted copy of `subset` after range and duplicate checks.
fn validate_subset(n: usize, subset: &[usize]) -> Result<Vec<usize>> {
    let mut s = subset.to_vec();
    s.sort_unstable();
    for w in s.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidSubset(format!("qubit {} listed twice", w[0])));
        }
    }
    if let Some(&q) = s.iter().find(|&&q| q >= n) {
        return Err(Error::QubitIndex { index: q, n });
    }
    Ok(s)
}

#[inline]
fn scatter(value: usize, positions: &[usize]) -> usize {
    positions.iter().enumerate().fold(0, |acc, (j, &q)| acc | (((value >> j) & 1) << q))
}

#[inline]
fn gather(index: usize, positions: &[usize]) -> usize {
    positions.iter().enumerate().fold(0, |acc, (j, &q)| acc | (((index >> q) & 1) << j))
}

fn complement_of(n: usize, keep: &[usize]) -> Vec<usize> {
    (0..n).filter(|q| !keep.contains(q)).collect()
}

/// `ρ_keep` of a pure state; `keep` may be the whole register.
fn reduce_pure(state: &StateVector, keep: &[usize]) -> DensityMatrix {
    let n = state.n_qubits();
    let rest = complement_of(n, keep);
    let (rows, cols) = (1usize << keep.len(), 1usize << rest.len());
    let amps = state.amplitudes();
    let mut m = DMatrix::<Complex64>::zeros(rows, cols);
    for (idx, a) in amps.iter().enumerate() {
        m[(gather(idx, keep), gather(idx, &rest))] = *a;
    }
    DensityMatrix { entries: &m * m.adjoint(), m: keep.len() }
}

/// `ρ_subset = Tr_complement |ψ⟩⟨ψ|`, with `subset[j]` mapped to bit `j`.
pub fn reduced_density(state: &StateVector, subset: &[usize]) -> Result<DensityMatrix> {
    let s = validate_subset(state.n_qubits(), subset)?;
    if s.is_empty() || s.len() == state.n_qubits() {
        return Err(Error::InvalidSubset(format!(
            "subset must be proper and non-empty, got {} of {} qubits",
            s.len(),
            state.n_qubits()
        )));
    }
    Ok(reduce_pure(state, &s))
}

/// Partial trace of a density matrix onto `keep` (non-empty, any size).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    let keep = validate_subset(n, keep)?;
    if keep.is_empty() {
        return Err(Error::InvalidSubset("cannot trace out every qubit".into()));
    }
    let rest = complement_of(n, &keep);
    let (dk, dr) = (1usize << keep.len(), 1usize << rest.len());
    let e = rho.entries();
    let out = DMatrix::from_fn(dk, dk, |i, j| {
        let (bi, bj) = (scatter(i, &keep), scatter(j, &keep));
        (0..dr)
            .map(|k| {
                let r = scatter(k, &rest);
                e[(bi | r, bj | r)]
            })
            .sum()
    });
    Ok(DensityMatrix { entries: out, m: keep.len() })
}

/// Von Neumann entropy in bits.
pub fn entropy_vn(rho: &DensityMatrix) -> Result<f64> {
    Ok(rho.eigenvalues()?.into_iter().filter(|&l| l >= ZERO_EIGEN).map(|l| -l * l.log2()).sum::<f64>().max(0.0))
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.entries().iter().map(|z| z.norm_sqr()).sum()
}

/// `−log2 Tr ρ²`.
pub fn renyi2(rho: &DensityMatrix) -> f64 {
    -purity(rho).log2()
}

/// `log2 ‖ρ^{T_A}‖₁` with the transpose taken over `partition`'s subset A.
pub fn log_negativity(rho: &DensityMatrix, partition: &PartitionSpec) -> Result<f64> {
    if rho.n_qubits() != partition.n() {
        return Err(Error::DimensionMismatch(format!(
            "density matrix on {} qubits, partition on {}",
            rho.n_qubits(),
            partition.n()
        )));
    }
    let a_mask = partition.subset_a().iter().fold(0usize, |acc, &q| acc | (1 << q));
    let e = rho.entries();
    let d = rho.dim();
    let pt = DMatrix::from_fn(d, d, |i, j| {
        let i2 = (i & !a_mask) | (j & a_mask);
        let j2 = (j & !a_mask) | (i & a_mask);
        e[(i2, j2)]
    });
    let trace_norm: f64 = SymmetricEigen::new(pt).eigenvalues.iter().map(|l| l.abs()).sum();
    Ok(trace_norm.log2().max(0.0))
}

fn check_disjoint(n: usize, a: &[usize], b: &[usize]) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let a = validate_subset(n, a)?;
    let b = validate_subset(n, b)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidSubset("mutual information needs non-empty A and B".into()));
    }
    if a.iter().any(|q| b.contains(q)) {
        return Err(Error::InvalidSubset("A and B overlap".into()));
    }
    let mut ab: Vec<usize> = a.iter().chain(&b).copied().collect();
    ab.sort_unstable();
    Ok((a, b, ab))
}

/// `S(ρ_A) + S(ρ_B) − S(ρ_AB)` for a pure global state.
pub fn mutual_information(state: &StateVector, a: &[usize], b: &[usize]) -> Result<f64> {
    let (a, b, ab) = check_disjoint(state.n_qubits(), a, b)?;
    let s_a = entropy_vn(&reduce_pure(state, &a))?;
    let s_b = entropy_vn(&reduce_pure(state, &b))?;
    let s_ab = if ab.len() == state.n_qubits() { 0.0 } else { entropy_vn(&reduce_pure(state, &ab))? };
    Ok(s_a + s_b - s_ab)
}

/// Mutual information between qubit sets of a mixed state.
pub fn mutual_information_rho(rho: &DensityMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    let (a, b, ab) = check_disjoint(rho.n_qubits(), a, b)?;
    let s_ab = if ab.len() == rho.n_qubits() { entropy_vn(rho)? } else { entropy_vn(&partial_trace(rho, &ab)?)? };
    Ok(entropy_vn(&partial_trace(rho, &a)?)? + entropy_vn(&partial_trace(rho, &b)?)? - s_ab)
}
