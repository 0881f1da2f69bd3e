//! Which ordered qubit pairs a walk step may act on.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Topology {
    /// Every ordered pair of distinct qubits.
    AllToAll,
    /// Nearest neighbours on a cycle `0 - 1 - … - (N-1) - 0`.
    Ring,
}

impl Topology {
    pub fn min_qubits(self) -> usize {
        match self {
            Topology::AllToAll => 2,
            Topology::Ring => 3,
        }
    }

    pub fn check(self, n: usize) -> Result<()> {
        if n < self.min_qubits() {
            return Err(Error::QubitCount { n, min: self.min_qubits(), max: usize::MAX });
        }
        Ok(())
    }

    /// All admissible ordered `(control, target)` pairs.
    pub fn pairs(self, n: usize) -> Result<Vec<(usize, usize)>> {
        self.check(n)?;
        Ok(match self {
            Topology::AllToAll => (0..n).flat_map(|c| (0..n).filter(move |&t| t != c).map(move |t| (c, t))).collect(),
            Topology::Ring => (0..n)
                .flat_map(|i| {
                    let j = (i + 1) % n;
                    [(i, j), (j, i)]
                })
                .collect(),
        })
    }

    pub fn are_adjacent(self, n: usize, a: usize, b: usize) -> bool {
        match self {
            Topology::AllToAll => a != b && a < n && b < n,
            Topology::Ring => a < n && b < n && ((a + 1) % n == b || (b + 1) % n == a),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::AllToAll => "all",
            Topology::Ring => "ring",
        })
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" | "all-to-all" | "alltoall" => Ok(Topology::AllToAll),
            "ring" => Ok(Topology::Ring),
            other => Err(Error::Parse(format!("unknown topology {other:?}"))),
        }
    }
}

/// Uniform draw of an ordered `(control, target)` pair.
///
/// On the ring an adjacent bond is chosen uniformly among the `N` bonds and
/// its orientation by a fair coin.
pub fn sample_pair<R: Rng + ?Sized>(n: usize, topology: Topology, rng: &mut R) -> Result<(usize, usize)> {
    topology.check(n)?;
    Ok(match topology {
        Topology::AllToAll => {
            let c = rng.random_range(0..n);
            let mut t = rng.random_range(0..n - 1);
            if t >= c {
                t += 1;
            }
            (c, t)
        }
        Topology::Ring => {
            let i = rng.random_range(0..n);
            let j = (i + 1) % n;
            if rng.random_bool(0.5) {
                (i, j)
            } else {
                (j, i)
            }
        }
    })
}
