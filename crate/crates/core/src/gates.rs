//! Single-qubit gate samplers and the two-qubit walk step record.
//!
//! Two single-qubit measures drive the walk: Haar measure on U(2), and the
//! uniform measure on the 24-element single-qubit Clifford group (modulo
//! global phase). Both satisfy the second-moment randomizing property checked
//! in [`crate::randomizing`].

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::pauli::Pauli;
use crate::topology::{sample_pair, Topology};

/// Generators of the single-qubit Clifford group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CliffordGen {
    H,
    S,
}

impl CliffordGen {
    pub fn matrix(self) -> Mat2 {
        match self {
            CliffordGen::H => Mat2::hadamard(),
            CliffordGen::S => Mat2::phase_s(),
        }
    }
}

/// One element of the canonical enumeration.
#[derive(Clone, Debug)]
pub struct CliffordElement {
    /// Phase-normalized matrix.
    pub matrix: Mat2,
    /// Shortest H/S word producing `matrix` up to phase, in application order.
    pub word: Vec<CliffordGen>,
    /// Image of X and Z under conjugation, with sign (`true` = negative).
    pub image_x: (Pauli, bool),
    pub image_z: (Pauli, bool),
}

/// The 24 single-qubit Cliffords modulo global phase, indexed by sorting
/// the phase-normalized matrices on a rounded entry fingerprint.
#[derive(Debug)]
pub struct CliffordGroup {
    elements: Vec<CliffordElement>,
}

pub const CLIFFORD_GROUP_ORDER: usize = 24;

fn fingerprint(m: &Mat2) -> [i64; 8] {
    let n = m.phase_normalized();
    let mut out = [0i64; 8];
    for r in 0..2 {
        for c in 0..2 {
            let e = n.get(r, c);
            out[4 * r + 2 * c] = (e.re * 1e6).round() as i64;
            out[4 * r + 2 * c + 1] = (e.im * 1e6).round() as i64;
        }
    }
    out
}

fn pauli_image(u: &Mat2, p: Pauli) -> (Pauli, bool) {
    let conj = u.conjugate(&p.matrix());
    for q in Pauli::NONTRIVIAL {
        if conj.max_abs_diff(&q.matrix()) < 1e-9 {
            return (q, false);
        }
        if conj.max_abs_diff(&q.matrix().scale(Complex64::new(-1.0, 0.0))) < 1e-9 {
            return (q, true);
        }
    }
    unreachable!("Clifford conjugation left the Pauli group")
}

impl CliffordGroup {
    fn generate() -> Self {
        let mut found: Vec<([i64; 8], Mat2, Vec<CliffordGen>)> =
            vec![(fingerprint(&Mat2::IDENTITY), Mat2::IDENTITY, Vec::new())];
        let mut frontier = 0;
        while frontier < found.len() {
            let (_, m, word) = found[frontier].clone();
            for g in [CliffordGen::H, CliffordGen::S] {
                let next = g.matrix() * m;
                let fp = fingerprint(&next);
                if found.iter().all(|(f, _, _)| *f != fp) {
                    let mut w = word.clone();
                    w.push(g);
                    found.push((fp, next, w));
                }
            }
            frontier += 1;
        }
        found.sort_by_key(|a| a.0);
        let elements = found
            .into_iter()
            .map(|(_, m, word)| CliffordElement {
                matrix: m.phase_normalized(),
                image_x: pauli_image(&m, Pauli::X),
                image_z: pauli_image(&m, Pauli::Z),
                word,
            })
            .collect();
        CliffordGroup { elements }
    }

    /// Shared canonical enumeration.
    pub fn get() -> &'static CliffordGroup {
        static GROUP: OnceLock<CliffordGroup> = OnceLock::new();
        GROUP.get_or_init(CliffordGroup::generate)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, index: usize) -> &CliffordElement {
        &self.elements[index]
    }

    pub fn elements(&self) -> &[CliffordElement] {
        &self.elements
    }

    pub fn identity_index(&self) -> usize {
        self.elements
            .iter()
            .position(|e| e.matrix.eq_up_to_phase(&Mat2::IDENTITY, 1e-9))
            .expect("identity is in the group")
    }

    /// Index of the element equal to `m` up to phase, if any.
    pub fn index_of(&self, m: &Mat2) -> Option<usize> {
        self.elements.iter().position(|e| e.matrix.eq_up_to_phase(m, 1e-9))
    }
}

/// A gate applied to one qubit during a walk step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SingleQubitGate {
    HaarUnitary(Mat2),
    CliffordIndex(u8),
}

impl SingleQubitGate {
    pub fn clifford(index: usize) -> Result<Self> {
        if index >= CLIFFORD_GROUP_ORDER {
            return Err(Error::InvalidParameter(format!("Clifford index {index} outside 0..{CLIFFORD_GROUP_ORDER}")));
        }
        Ok(SingleQubitGate::CliffordIndex(index as u8))
    }

    pub fn unitary(m: Mat2) -> Result<Self> {
        let defect = m.unitarity_defect();
        if !(defect <= 1e-10) {
            return Err(Error::InvalidParameter(format!("matrix is not unitary (defect {defect:e})")));
        }
        Ok(SingleQubitGate::HaarUnitary(m))
    }

    pub fn matrix(&self) -> Mat2 {
        match self {
            SingleQubitGate::HaarUnitary(m) => *m,
            SingleQubitGate::CliffordIndex(i) => CliffordGroup::get().element(*i as usize).matrix,
        }
    }

    pub fn is_clifford(&self) -> bool {
        matches!(self, SingleQubitGate::CliffordIndex(_))
    }
}

impl fmt::Display for SingleQubitGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingleQubitGate::CliffordIndex(i) => write!(f, "C{i}"),
            SingleQubitGate::HaarUnitary(m) => {
                write!(f, "U")?;
                for r in 0..2 {
                    for c in 0..2 {
                        let e = m.get(r, c);
                        write!(f, ":{}:{}", e.re, e.im)?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl FromStr for SingleQubitGate {
    type Err = Error;

    /// Accepts `C<index>` or `U:<re00>:<im00>:<re01>:<im01>:<re10>:<im10>:<re11>:<im11>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('C') {
            let idx: usize = rest.parse().map_err(|_| Error::Parse(format!("bad Clifford index {rest:?}")))?;
            return SingleQubitGate::clifford(idx);
        }
        if let Some(rest) = s.strip_prefix("U:") {
            let parts = rest
                .split(':')
                .map(|p| p.parse::<f64>().map_err(|_| Error::Parse(format!("bad matrix entry {p:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if parts.len() != 8 {
                return Err(Error::Parse(format!("expected 8 matrix components, got {}", parts.len())));
            }
            let c = |k: usize| Complex64::new(parts[2 * k], parts[2 * k + 1]);
            return SingleQubitGate::unitary(Mat2::new(c(0), c(1), c(2), c(3)));
        }
        Err(Error::Parse(format!("unrecognised gate {s:?}")))
    }
}

/// Which single-qubit measure a walk draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateMode {
    Haar,
    Clifford,
}

impl FromStr for GateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "haar" => Ok(GateMode::Haar),
            "clifford" => Ok(GateMode::Clifford),
            other => Err(Error::Parse(format!("unknown gate mode {other:?}"))),
        }
    }
}

/// Haar-random element of U(2): Gram–Schmidt on the columns of an i.i.d.
/// complex Gaussian matrix. Gram–Schmidt yields the QR factor whose `R` has
/// positive real diagonal, which is the phase-corrected (Haar) choice.
pub fn sample_haar_u2<R: Rng + ?Sized>(rng: &mut R) -> SingleQubitGate {
    SingleQubitGate::HaarUnitary(haar_u2_matrix(rng))
}

pub fn haar_u2_matrix<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let mut gauss = || {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    };
    let (a0, a1) = (gauss(), gauss());
    let (b0, b1) = (gauss(), gauss());

    let na = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
    let (q00, q10) = (a0 / na, a1 / na);
    let proj = q00.conj() * b0 + q10.conj() * b1;
    let (r0, r1) = (b0 - proj * q00, b1 - proj * q10);
    let nr = (r0.norm_sqr() + r1.norm_sqr()).sqrt();
    Mat2::new(q00, r0 / nr, q10, r1 / nr)
}

pub fn sample_single_qubit_clifford<R: Rng + ?Sized>(rng: &mut R) -> SingleQubitGate {
    SingleQubitGate::CliffordIndex(rng.random_range(0..CLIFFORD_GROUP_ORDER) as u8)
}

pub fn sample_gate<R: Rng + ?Sized>(mode: GateMode, rng: &mut R) -> SingleQubitGate {
    match mode {
        GateMode::Haar => sample_haar_u2(rng),
        GateMode::Clifford => sample_single_qubit_clifford(rng),
    }
}

/// One walk step: `CNOT[control, target] · (gate_c[control] ⊗ gate_t[target])`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateEvent {
    pub control: usize,
    pub target: usize,
    pub gate_c: SingleQubitGate,
    pub gate_t: SingleQubitGate,
}

impl GateEvent {
    pub fn new(control: usize, target: usize, gate_c: SingleQubitGate, gate_t: SingleQubitGate) -> Result<Self> {
        if control == target {
            return Err(Error::SameQubit(control));
        }
        Ok(GateEvent { control, target, gate_c, gate_t })
    }

    pub fn check_bounds(&self, n: usize) -> Result<()> {
        for index in [self.control, self.target] {
            if index >= n {
                return Err(Error::QubitIndex { index, n });
            }
        }
        if self.control == self.target {
            return Err(Error::SameQubit(self.control));
        }
        Ok(())
    }

    pub fn is_clifford(&self) -> bool {
        self.gate_c.is_clifford() && self.gate_t.is_clifford()
    }

    /// Draws the pair first, then `gate_c`, then `gate_t`. Every engine uses
    /// this order, so one seed yields one event log across engines.
    pub fn sample<R: Rng + ?Sized>(n: usize, topology: Topology, mode: GateMode, rng: &mut R) -> Result<Self> {
        let (control, target) = sample_pair(n, topology, rng)?;
        let gate_c = sample_gate(mode, rng);
        let gate_t = sample_gate(mode, rng);
        Ok(GateEvent { control, target, gate_c, gate_t })
    }
}

impl fmt::Display for GateEvent {
    /// Space-separated log form: `control target gate_c gate_t`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.control, self.target, self.gate_c, self.gate_t)
    }
}

impl FromStr for GateEvent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fields: Vec<&str> = s.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!("expected 4 fields, got {}", fields.len())));
        }
        let control = fields[0].parse().map_err(|_| Error::Parse(format!("bad control {:?}", fields[0])))?;
        let target = fields[1].parse().map_err(|_| Error::Parse(format!("bad target {:?}", fields[1])))?;
        GateEvent::new(control, target, fields[2].parse()?, fields[3].parse()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bloch_axes() -> Vec<Mat2> {
        // Projectors onto the six single-qubit stabilizer states.
        let mut out = Vec::new();
        for p in Pauli::NONTRIVIAL {
            for sign in [1.0, -1.0] {
                let m = Mat2::IDENTITY.scale(Complex64::new(0.5, 0.0));
                let half = p.matrix().scale(Complex64::new(0.5 * sign, 0.0));
                let mut sum = m;
                for r in 0..2 {
                    for c in 0..2 {
                        sum.0[r][c] += half.0[r][c];
                    }
                }
                out.push(sum);
            }
        }
        out
    }

    #[test]
    fn enumeration_has_24_distinct_elements_and_one_identity() {
        let g = CliffordGroup::get();
        assert_eq!(g.len(), 24);
        let identities = g.elements().iter().filter(|e| e.matrix.eq_up_to_phase(&Mat2::IDENTITY, 1e-9)).count();
        assert_eq!(identities, 1);
        for (i, a) in g.elements().iter().enumerate() {
            for b in &g.elements()[i + 1..] {
                assert!(!a.matrix.eq_up_to_phase(&b.matrix, 1e-9));
            }
        }
    }

    #[test]
    fn words_reproduce_matrices() {
        for e in CliffordGroup::get().elements() {
            let m = e.word.iter().fold(Mat2::IDENTITY, |acc, g| g.matrix() * acc);
            assert!(m.eq_up_to_phase(&e.matrix, 1e-9));
        }
    }

    #[test]
    fn every_element_permutes_the_six_stabilizer_states() {
        let axes = bloch_axes();
        for e in CliffordGroup::get().elements() {
            let mut hit = [false; 6];
            for rho in &axes {
                let img = e.matrix.conjugate(rho);
                let j = axes.iter().position(|a| a.max_abs_diff(&img) < 1e-9).expect("image is a stabilizer state");
                hit[j] = true;
            }
            assert!(hit.iter().all(|&h| h));
        }
    }

    #[test]
    fn haar_draws_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let u = haar_u2_matrix(&mut rng);
            assert!(u.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn gate_text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ev = GateEvent::new(2, 0, sample_haar_u2(&mut rng), SingleQubitGate::clifford(5).unwrap()).unwrap();
        let parsed: GateEvent = ev.to_string().parse().unwrap();
        assert_eq!(parsed, ev);
        assert!("1 1 C0 C0".parse::<GateEvent>().is_err());
        assert!("0 1 C24 C0".parse::<GateEvent>().is_err());
        assert!("0 1 U:1:0:1:0:0:0:1:0 C0".parse::<GateEvent>().is_err());
    }

    #[test]
    fn bounds_are_checked() {
        let id = SingleQubitGate::clifford(0).unwrap();
        let ev = GateEvent::new(0, 3, id, id).unwrap();
        assert!(ev.check_bounds(4).is_ok());
        assert_eq!(ev.check_bounds(3), Err(Error::QubitIndex { index: 3, n: 3 }));
    }
}
