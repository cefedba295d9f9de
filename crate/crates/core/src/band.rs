//! Direct banded LU factorization with partial pivoting for complex matrices.
//!
//! Lexicographic numbering of a structured grid is already a bandwidth
//! minimizing ordering, so the fill of an LU factorization stays inside a
//! band of width `3·b + 1` (`b` sub-diagonals in `L`, up to `2·b`
//! super-diagonals in `U` after row interchanges). Storage is column-major
//! in the LAPACK `gbtrf` layout.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    /// Number of sub-diagonals of the original matrix.
    kl: usize,
    /// Column stride: `2·kl + kl + 1` (room for `U` fill).
    ld: usize,
    data: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandLu {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        // Row i of column j, with i in [j - 2kl, j + kl].
        j * self.ld + (i + 2 * self.kl - j)
    }

    /// Factorizes a square matrix whose non-zeros satisfy `|i − j| <= kl`.
    pub fn factorize(a: &CsrMatrix, kl: usize) -> Result<Self> {
        let n = a.n();
        let ld = 3 * kl + 1;
        let mut lu = Self {
            n,
            kl,
            ld,
            data: alloc::vec![Complex64::default(); ld * n],
            pivots: alloc::vec![0; n],
        };
        for (i, j, v) in a.iter() {
            if i.abs_diff(j) > kl {
                return Err(Error::InvalidParameter(alloc::format!(
                    "entry ({i}, {j}) lies outside the declared half-bandwidth {kl}"
                )));
            }
            let k = lu.idx(i, j);
            lu.data[k] = v;
        }
        lu.eliminate()?;
        Ok(lu)
    }

    fn eliminate(&mut self) -> Result<()> {
        let (n, kl) = (self.n, self.kl);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + 2 * kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].norm();
            for i in k + 1..=last_row {
                let v = self.data[self.idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular { column: k });
            }
            self.pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let inv_pivot = self.data[self.idx(k, k)].inv();
            for i in k + 1..=last_row {
                let m = self.idx(i, k);
                self.data[m] *= inv_pivot;
            }
            for j in k + 1..=last_col {
                let ukj = self.data[self.idx(k, j)];
                if ukj == Complex64::default() {
                    continue;
                }
                let col = j * self.ld;
                let lcol = k * self.ld;
                for i in k + 1..=last_row {
                    let l = self.data[lcol + i + 2 * kl - k];
                    self.data[col + i + 2 * kl - j] -= l * ukj;
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) -> Result<()> {
        let (n, kl) = (self.n, self.kl);
        if b.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: b.len(),
            });
        }
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk == Complex64::default() {
                continue;
            }
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= self.data[self.idx(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let xk = b[k] / self.data[self.idx(k, k)];
            b[k] = xk;
            if xk == Complex64::default() {
                continue;
            }
            for i in k.saturating_sub(2 * kl)..k {
                b[i] -= self.data[self.idx(i, k)] * xk;
            }
        }
        Ok(())
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }
}
