//! Stabilizer tableau engine: `N` generator rows, no destabilizers.
//!
//! Row `i` stores the X and Z bits of generator `g_i` packed into `u64`
//! words plus a sign bit. `x = z = 1` on a qubit denotes `Y`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gates::{CliffordGen, CliffordGroup, GateEvent, GateMode, SingleQubitGate};
use crate::gf2::{rank_u64, BitMatrix};
use crate::pauli::{Pauli, PauliString};
use crate::topology::Topology;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CliffordOp {
    H(usize),
    S(usize),
    Cnot(usize, usize),
    /// Canonical single-qubit Clifford `index` on qubit `q`.
    Single {
        q: usize,
        index: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    signs: Vec<bool>,
}

impl Tableau {
    /// Generators `Z_0 … Z_{N−1}` of `|0…0⟩`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::QubitCount { n, min: 1, max: usize::MAX });
        }
        let words = n.div_ceil(64);
        let mut t = Tableau { n, words, x: vec![0; n * words], z: vec![0; n * words], signs: vec![false; n] };
        for i in 0..n {
            t.z[i * words + i / 64] |= 1 << (i % 64);
        }
        Ok(t)
    }

    /// Tableau from explicit generators; `negative[i]` flips the sign of row `i`.
    pub fn from_generators(gens: &[PauliString], negative: &[bool]) -> Result<Self> {
        let n = gens.len();
        if gens.iter().any(|g| g.len() != n) || negative.len() != n {
            return Err(Error::DimensionMismatch("need N generators on N qubits".into()));
        }
        let mut t = Tableau::new(n)?;
        t.z.fill(0);
        for (i, g) in gens.iter().enumerate() {
            for q in 0..n {
                let (xb, zb) = g.get(q).bits();
                t.set_bit(i, q, xb, zb);
            }
            t.signs[i] = negative[i];
        }
        t.check_invariants()?;
        Ok(t)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn bit(v: &[u64], words: usize, row: usize, q: usize) -> bool {
        (v[row * words + q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    pub fn x_bit(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.x, self.words, row, q)
    }

    #[inline]
    pub fn z_bit(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.z, self.words, row, q)
    }

    fn set_bit(&mut self, row: usize, q: usize, xb: bool, zb: bool) {
        let (idx, m) = (row * self.words + q / 64, 1u64 << (q % 64));
        self.x[idx] = if xb { self.x[idx] | m } else { self.x[idx] & !m };
        self.z[idx] = if zb { self.z[idx] | m } else { self.z[idx] & !m };
    }

    pub fn sign(&self, row: usize) -> bool {
        self.signs[row]
    }

    pub fn generator(&self, row: usize) -> PauliString {
        let letters = (0..self.n).map(|q| Pauli::from_bits(self.x_bit(row, q), self.z_bit(row, q))).collect();
        PauliString::new(letters).expect("n ≥ 1")
    }

    pub fn generators(&self) -> Vec<(PauliString, bool)> {
        (0..self.n).map(|i| (self.generator(i), self.signs[i])).collect()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitIndex { index: q, n: self.n });
        }
        Ok(())
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for i in 0..self.n {
            let k = i * self.words + w;
            let (xb, zb) = (self.x[k] & m, self.z[k] & m);
            if xb != 0 && zb != 0 {
                self.signs[i] ^= true;
            }
            self.x[k] = (self.x[k] & !m) | zb;
            self.z[k] = (self.z[k] & !m) | xb;
        }
        Ok(())
    }

    pub fn apply_s(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for i in 0..self.n {
            let k = i * self.words + w;
            let (xb, zb) = (self.x[k] & m, self.z[k] & m);
            if xb != 0 && zb != 0 {
                self.signs[i] ^= true;
            }
            self.z[k] ^= xb;
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, c: usize, t: usize) -> Result<()> {
        self.check_qubit(c)?;
        self.check_qubit(t)?;
        if c == t {
            return Err(Error::SameQubit(c));
        }
        for i in 0..self.n {
            let (xc, zc) = (self.x_bit(i, c), self.z_bit(i, c));
            let (xt, zt) = (self.x_bit(i, t), self.z_bit(i, t));
            if xc && zt && (xt == zc) {
                self.signs[i] ^= true;
            }
            self.set_bit(i, t, xt ^ xc, zt);
            self.set_bit(i, c, xc, zc ^ zt);
        }
        Ok(())
    }

    /// Applies canonical Clifford `index` via its H/S word.
    pub fn apply_clifford_index(&mut self, q: usize, index: usize) -> Result<()> {
        let group = CliffordGroup::get();
        if index >= group.len() {
            return Err(Error::InvalidParameter(format!("Clifford index {index} out of range")));
        }
        self.check_qubit(q)?;
        for g in &group.element(index).word {
            match g {
                CliffordGen::H => self.apply_h(q)?,
                CliffordGen::S => self.apply_s(q)?,
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, op: CliffordOp) -> Result<()> {
        match op {
            CliffordOp::H(q) => self.apply_h(q),
            CliffordOp::S(q) => self.apply_s(q),
            CliffordOp::Cnot(c, t) => self.apply_cnot(c, t),
            CliffordOp::Single { q, index } => self.apply_clifford_index(q, index),
        }
    }

    fn apply_single_gate(&mut self, q: usize, g: &SingleQubitGate) -> Result<()> {
        match g {
            SingleQubitGate::CliffordIndex(i) => self.apply_clifford_index(q, *i as usize),
            SingleQubitGate::HaarUnitary(m) => match CliffordGroup::get().index_of(m) {
                Some(i) => self.apply_clifford_index(q, i),
                None => Err(Error::InvalidParameter("non-Clifford gate on the stabilizer engine".into())),
            },
        }
    }

    /// `CNOT[c,t] · (U[c] ⊗ V[t])` for Clifford `U`, `V`.
    pub fn apply_gate_event(&mut self, ev: &GateEvent) -> Result<()> {
        ev.check_bounds(self.n)?;
        self.apply_single_gate(ev.control, &ev.gate_c)?;
        self.apply_single_gate(ev.target, &ev.gate_t)?;
        self.apply_cnot(ev.control, ev.target)
    }

    /// Checks independence, mutual commutation and absence of `−I`.
    pub fn check_invariants(&self) -> Result<()> {
        let mut m = BitMatrix::zeros(self.n, 2 * self.n);
        for i in 0..self.n {
            for q in 0..self.n {
                m.set(i, q, self.x_bit(i, q));
                m.set(i, self.n + q, self.z_bit(i, q));
            }
        }
        if m.rank() != self.n {
            return Err(Error::InvalidParameter("stabilizer generators are dependent".into()));
        }
        let w = self.words;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let mut parity = 0u32;
                for k in 0..w {
                    parity ^= (self.x[i * w + k] & self.z[j * w + k]).count_ones()
                        ^ (self.z[i * w + k] & self.x[j * w + k]).count_ones();
                }
                if parity & 1 == 1 {
                    return Err(Error::InvalidParameter(format!("generators {i} and {j} anticommute")));
                }
            }
        }
        // Independence already excludes an all-identity row, hence −I.
        Ok(())
    }

    /// Bipartite entanglement `rank_GF2(G|_A) − |A|` in ebits.
    pub fn cut_entanglement(&self, subset: &[usize]) -> Result<usize> {
        let mut a = subset.to_vec();
        a.sort_unstable();
        a.dedup();
        if a.len() != subset.len() {
            return Err(Error::InvalidSubset("repeated qubit in subset".into()));
        }
        if let Some(&q) = a.iter().find(|&&q| q >= self.n) {
            return Err(Error::QubitIndex { index: q, n: self.n });
        }
        if a.is_empty() || a.len() == self.n {
            return Err(Error::InvalidSubset(format!(
                "cut must be proper and non-empty, got {} of {} qubits",
                a.len(),
                self.n
            )));
        }
        let k = a.len();
        let rank = if 2 * k <= 64 {
            let mut rows: Vec<u64> = (0..self.n)
                .map(|i| {
                    a.iter().enumerate().fold(0u64, |acc, (j, &q)| {
                        acc | (u64::from(self.x_bit(i, q)) << j) | (u64::from(self.z_bit(i, q)) << (k + j))
                    })
                })
                .collect();
            rank_u64(&mut rows)
        } else {
            let mut m = BitMatrix::zeros(self.n, 2 * k);
            for i in 0..self.n {
                for (j, &q) in a.iter().enumerate() {
                    m.set(i, j, self.x_bit(i, q));
                    m.set(i, k + j, self.z_bit(i, q));
                }
            }
            m.rank_in_place()
        };
        Ok(rank - k)
    }

    /// Entanglement of the leading block `{0, …, n_a − 1}`.
    pub fn block_entanglement(&self, n_a: usize) -> Result<usize> {
        self.cut_entanglement(&(0..n_a).collect::<Vec<_>>())
    }
}

/// One stabilizer walk step with two uniformly drawn Cliffords.
pub fn walk_step_stab<R: Rng + ?Sized>(tab: &mut Tableau, topology: Topology, rng: &mut R) -> Result<GateEvent> {
    let ev = GateEvent::sample(tab.n_qubits(), topology, GateMode::Clifford, rng)?;
    tab.apply_gate_event(&ev)?;
    Ok(ev)
}
