//! Dense GF(2) matrices packed into `u64` words, row-major.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        BitMatrix { rows, cols, words, data: vec![0; rows * words] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        let bit = 1u64 << (c % 64);
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    /// Rank by word-level Gaussian elimination; `self` is left in echelon form.
    pub fn rank_in_place(&mut self) -> usize {
        let w = self.words;
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let (word, bit) = (col / 64, 1u64 << (col % 64));
            let Some(pivot) = (rank..self.rows).find(|&r| self.data[r * w + word] & bit != 0) else {
                continue;
            };
            if pivot != rank {
                for k in 0..w {
                    self.data.swap(pivot * w + k, rank * w + k);
                }
            }
            for r in rank + 1..self.rows {
                if self.data[r * w + word] & bit != 0 {
                    for k in word..w {
                        let v = self.data[rank * w + k];
                        self.data[r * w + k] ^= v;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn rank(&self) -> usize {
        self.clone().rank_in_place()
    }
}

/// Rank of rows that each fit in one word, eliminating by lowest set bit.
pub fn rank_u64(rows: &mut [u64]) -> usize {
    let mut rank = 0;
    for i in 0..rows.len() {
        let v = rows[i];
        if v == 0 {
            continue;
        }
        let low = v & v.wrapping_neg();
        for r in rows.iter_mut().skip(i + 1) {
            if *r & low != 0 {
                *r ^= v;
            }
        }
        rank += 1;
    }
    rank
}
