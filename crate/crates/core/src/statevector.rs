//! Dense state-vector engine. Qubit `q` is bit `q` of the amplitude index.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gates::{GateEvent, GateMode};
use crate::mat2::Mat2;
use crate::topology::Topology;

/// Default largest register the dense engine accepts.
pub const DEFAULT_QUBIT_CAP: usize = 14;
/// Hard ceiling regardless of the requested cap.
pub const MAX_QUBIT_CAP: usize = 28;

const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    n: usize,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits, `1 ≤ n ≤ DEFAULT_QUBIT_CAP`.
    pub fn new_basis(n: usize) -> Result<Self> {
        Self::new_basis_with_cap(n, DEFAULT_QUBIT_CAP)
    }

    pub fn new_basis_with_cap(n: usize, cap: usize) -> Result<Self> {
        let max = cap.min(MAX_QUBIT_CAP);
        if n == 0 || n > max {
            return Err(Error::QubitCount { n, min: 1, max });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amps, n })
    }

    /// Computational basis state with qubit `q` set to `bits[q]`.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut s = Self::new_basis(bits.len())?;
        let idx = bits.iter().enumerate().fold(0usize, |acc, (q, &b)| acc | (usize::from(b) << q));
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Tensor product of single-qubit states `(α_q, β_q)`, qubit 0 first.
    pub fn product(qubits: &[[Complex64; 2]]) -> Result<Self> {
        let n = qubits.len();
        if n == 0 || n > DEFAULT_QUBIT_CAP {
            return Err(Error::QubitCount { n, min: 1, max: DEFAULT_QUBIT_CAP });
        }
        let amps = (0..1usize << n)
            .map(|i| qubits.iter().enumerate().fold(Complex64::new(1.0, 0.0), |acc, (q, a)| acc * a[(i >> q) & 1]))
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!("{len} amplitudes is not a power of two ≥ 2")));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_QUBIT_CAP {
            return Err(Error::QubitCount { n, min: 1, max: MAX_QUBIT_CAP });
        }
        let s = StateVector { amps, n };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!("state norm² {norm} differs from 1")));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitIndex { index: q, n: self.n });
        }
        Ok(())
    }

    pub fn apply_single(&mut self, q: usize, u: &Mat2) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        let (u00, u01, u10, u11) = (u.get(0, 0), u.get(0, 1), u.get(1, 0), u.get(1, 1));
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                self.amps[i] = u00 * a0 + u01 * a1;
                self.amps[i | bit] = u10 * a0 + u11 * a1;
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::SameQubit(control));
        }
        let (cb, tb) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
        Ok(())
    }

    /// `CNOT[c,t] · (U[c] ⊗ V[t])`.
    pub fn apply_gate_event(&mut self, ev: &GateEvent) -> Result<()> {
        ev.check_bounds(self.n)?;
        self.apply_single(ev.control, &ev.gate_c.matrix())?;
        self.apply_single(ev.target, &ev.gate_t.matrix())?;
        self.apply_cnot(ev.control, ev.target)
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("{} vs {} qubits", self.n, other.n)));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }
}

/// One walk step: sample an event and apply it.
pub fn walk_step<R: Rng + ?Sized>(
    state: &mut StateVector,
    topology: Topology,
    mode: GateMode,
    rng: &mut R,
) -> Result<GateEvent> {
    let ev = GateEvent::sample(state.n_qubits(), topology, mode, rng)?;
    state.apply_gate_event(&ev)?;
    Ok(ev)
}

/// CNOT as a 4×4 matrix with basis index `control_bit + 2·target_bit`.
pub fn cnot_matrix() -> DMatrix<Complex64> {
    DMatrix::from_fn(4, 4, |r, c| {
        let (cb, tb) = (c & 1, c >> 1);
        let image = cb + 2 * (tb ^ cb);
        if r == image {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
