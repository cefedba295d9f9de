//! Compressed sparse row storage for assembled Galerkin matrices.

use alloc::vec::Vec;

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    /// Builds a symmetric matrix from upper-triangular triplets `(i, j, v)`
    /// with `i <= j`. Duplicates are summed once per unordered pair and
    /// mirrored, so the result satisfies `A = Aᵀ` bit-for-bit.
    pub fn from_upper_triplets(n: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        debug_assert!(triplets.iter().all(|&(i, j, _)| i <= j && j < n));
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(triplets.len());
        for (i, j, v) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        let mut full: Vec<(usize, usize, Complex64)> = Vec::with_capacity(2 * merged.len());
        for &(i, j, v) in &merged {
            full.push((i, j, v));
            if i != j {
                full.push((j, i, v));
            }
        }
        full.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = alloc::vec![0usize; n + 1];
        for &(i, _, _) in &full {
            row_ptr[i + 1] += 1;
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        let col_idx = full.iter().map(|t| t.1).collect();
        let values = full.iter().map(|t| t.2).collect();
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.row(i)
            .find(|&(c, _)| c == j)
            .map(|(_, v)| v)
            .unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `max |A_ij − A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i)).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A_ij − conj(A_ji)|`; zero for Hermitian matrices.
    pub fn max_non_hermitian(&self) -> f64 {
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_half_bandwidth(&self) -> usize {
        self.iter().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
    }
}

pub fn norm2(v: &[Complex64]) -> f64 {
    crate::math::sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_summed_and_mirrored() {
        let c = |re| Complex64::new(re, 0.5);
        let a = CsrMatrix::from_upper_triplets(3, alloc::vec![(0, 1, c(1.0)), (0, 0, c(2.0)), (0, 1, c(3.0)), (2, 2, c(1.0))]);
        assert_eq!(a.get(0, 1), Complex64::new(4.0, 1.0));
        assert_eq!(a.get(1, 0), Complex64::new(4.0, 1.0));
        assert_eq!(a.get(1, 1), Complex64::default());
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.max_asymmetry(), 0.0);
        let y = a.mul_vec(&[Complex64::new(1.0, 0.0); 3]);
        assert_eq!(y[1], Complex64::new(4.0, 1.0));
    }
}
