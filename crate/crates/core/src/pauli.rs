//! Pauli letters, Pauli strings and the CNOT conjugation ("hat") map.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat2::Mat2;

/// One letter of a Pauli string: identity (`0`) or one of `x`, `y`, `z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const NONTRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub fn is_identity(self) -> bool {
        self == Pauli::I
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i & 3]
    }

    /// Symplectic `(x, z)` bits: `X = (1,0)`, `Z = (0,1)`, `Y = (1,1)`.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn matrix(self) -> Mat2 {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => Mat2::new(l, o, o, l),
            Pauli::X => Mat2::new(o, l, l, o),
            Pauli::Y => Mat2::new(o, -i, i, o),
            Pauli::Z => Mat2::new(l, o, o, -l),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => '0',
            Pauli::X => 'x',
            Pauli::Y => 'y',
            Pauli::Z => 'z',
        }
    }

    pub fn from_letter(c: char) -> Option<Pauli> {
        match c {
            '0' | 'i' | 'I' => Some(Pauli::I),
            'x' | 'X' => Some(Pauli::X),
            'y' | 'Y' => Some(Pauli::Y),
            'z' | 'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Image of the letter pair on (control, target) under conjugation by
/// CNOT[control, target], signs dropped.
///
/// The map is an involution on the 16 pairs:
///
/// ```text
/// 00 <-> 00   x0 <-> xx   y0 <-> yx   z0 <-> z0   0x <-> 0x
/// 0y <-> zy   0z <-> zz   xz <-> yy   yz <-> xy   zx <-> zx
/// ```
pub fn hat_map(control: Pauli, target: Pauli) -> (Pauli, Pauli) {
    use Pauli::*;
    match (control, target) {
        (I, I) => (I, I),
        (X, I) => (X, X),
        (X, X) => (X, I),
        (Y, I) => (Y, X),
        (Y, X) => (Y, I),
        (Z, I) => (Z, I),
        (I, X) => (I, X),
        (I, Y) => (Z, Y),
        (Z, Y) => (I, Y),
        (I, Z) => (Z, Z),
        (Z, Z) => (I, Z),
        (X, Z) => (Y, Y),
        (Y, Y) => (X, Z),
        (Y, Z) => (X, Y),
        (X, Y) => (Y, Z),
        (Z, X) => (Z, X),
    }
}

/// A word over `{0, x, y, z}` of length `N ≥ 1`; letter `i` acts on qubit `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::QubitCount { n: 0, min: 1, max: usize::MAX });
        }
        Ok(PauliString { letters })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(vec![Pauli::I; n])
    }

    /// The string with `letter` on every qubit.
    pub fn uniform(n: usize, letter: Pauli) -> Result<Self> {
        Self::new(vec![letter; n])
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    #[inline]
    pub fn get(&self, qubit: usize) -> Pauli {
        self.letters[qubit]
    }

    #[inline]
    pub fn set(&mut self, qubit: usize, letter: Pauli) {
        self.letters[qubit] = letter;
    }

    /// Positions carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        self.letters.iter().enumerate().filter(|(_, p)| !p.is_identity()).map(|(i, _)| i).collect()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|p| !p.is_identity()).count()
    }

    /// True when every non-identity letter sits inside `subset`.
    pub fn supported_within(&self, subset: &[bool]) -> bool {
        self.letters.iter().zip(subset).all(|(p, &inside)| inside || p.is_identity())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        let letters = trimmed
            .chars()
            .enumerate()
            .map(|(i, c)| {
                Pauli::from_letter(c).ok_or_else(|| Error::Parse(format!("invalid Pauli letter {c:?} at position {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        PauliString::new(letters)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::cnot_matrix;
    use nalgebra::DMatrix;

    fn kron(a: &Mat2, b: &Mat2) -> DMatrix<Complex64> {
        // Basis index = control_bit + 2 * target_bit, matching the state-vector
        // convention with control on qubit 0 and target on qubit 1.
        DMatrix::from_fn(4, 4, |r, c| {
            let (rc, rt) = (r & 1, r >> 1);
            let (cc, ct) = (c & 1, c >> 1);
            a.get(rc, cc) * b.get(rt, ct)
        })
    }

    #[test]
    fn table_examples() {
        use Pauli::*;
        assert_eq!(hat_map(I, I), (I, I));
        assert_eq!(hat_map(X, I), (X, X));
        assert_eq!(hat_map(X, Z), (Y, Y));
    }

    #[test]
    fn hat_map_is_an_involution_and_bijection() {
        let mut seen = std::collections::HashSet::new();
        for &a in &Pauli::ALL {
            for &b in &Pauli::ALL {
                let (c, d) = hat_map(a, b);
                assert_eq!(hat_map(c, d), (a, b));
                seen.insert((c, d));
                if !(a.is_identity() && b.is_identity()) {
                    assert_ne!((c, d), (Pauli::I, Pauli::I));
                }
            }
        }
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn hat_map_matches_cnot_conjugation() {
        let cnot = cnot_matrix();
        for &a in &Pauli::ALL {
            for &b in &Pauli::ALL {
                let p = kron(&a.matrix(), &b.matrix());
                let conj = &cnot * &p * cnot.adjoint();
                let (c, d) = hat_map(a, b);
                let q = kron(&c.matrix(), &d.matrix());
                let plus = (&conj - &q).iter().map(|z| z.norm()).fold(0.0, f64::max);
                let minus = (&conj + &q).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(plus < 1e-12 || minus < 1e-12, "{a}{b} -> {c}{d}");
            }
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        let p: PauliString = "0xyz".parse().unwrap();
        assert_eq!(p.to_string(), "0xyz");
        assert_eq!(p.support(), vec![1, 2, 3]);
        assert_eq!(p.weight(), 3);
        assert!("".parse::<PauliString>().is_err());
        assert!("0xq".parse::<PauliString>().is_err());
    }

    #[test]
    fn identity_is_the_only_empty_support() {
        let id = PauliString::identity(3).unwrap();
        assert!(id.support().is_empty());
        assert!(PauliString::identity(0).is_err());
    }
}
