//! Dense row-major square matrices used for similarities and messages.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self::filled(n, 0.0)
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Self {
            n,
            data: vec![value; n * n],
        }
    }

    /// Builds a matrix from row-major data. Panics if `data.len() != n * n`.
    pub fn from_rows(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "square matrix data has wrong length");
        Self { n, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    /// Inserts a new row and column at `at`, filled with `value`.
    pub fn insert(&mut self, at: usize, value: f64) {
        assert!(at <= self.n);
        let n = self.n + 1;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            if i == at {
                data.extend(core::iter::repeat_n(value, n));
                continue;
            }
            let src = if i < at { i } else { i - 1 };
            let row = self.row(src);
            data.extend_from_slice(&row[..at]);
            data.push(value);
            data.extend_from_slice(&row[at..]);
        }
        self.n = n;
        self.data = data;
    }

    /// Keeps only the rows and columns whose index satisfies `keep`.
    pub fn retain(&mut self, keep: &[bool]) {
        assert_eq!(keep.len(), self.n);
        let kept: Vec<usize> = (0..self.n).filter(|&i| keep[i]).collect();
        let n = kept.len();
        let mut data = Vec::with_capacity(n * n);
        for &i in &kept {
            let row = self.row(i);
            data.extend(kept.iter().map(|&j| row[j]));
        }
        self.n = n;
        self.data = data;
    }

    /// Copies row `src` into row `dst`, column `src` into column `dst`, and
    /// the diagonal entry `(src, src)` into `(dst, dst)`.
    pub fn copy_node(&mut self, src: usize, dst: usize) {
        if src == dst {
            return;
        }
        let n = self.n;
        for j in 0..n {
            let v = self.get(src, j);
            self.set(dst, j, v);
        }
        for i in 0..n {
            let v = self.get(i, src);
            self.set(i, dst, v);
        }
        let v = self.get(src, src);
        self.set(dst, dst, v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numbered(n: usize) -> SquareMatrix {
        SquareMatrix::from_rows(n, (0..n * n).map(|x| x as f64).collect())
    }

    #[test]
    fn insert_then_retain_restores() {
        let original = numbered(3);
        let mut m = original.clone();
        m.insert(1, -1.0);
        assert_eq!(m.dim(), 4);
        assert_eq!(m.row(1), &[-1.0; 4]);
        assert_eq!(m.get(0, 1), -1.0);
        assert_eq!(m.get(2, 2), original.get(1, 1));
        m.retain(&[true, false, true, true]);
        assert_eq!(m, original);
    }

    #[test]
    fn insert_at_end() {
        let mut m = numbered(2);
        m.insert(2, 9.0);
        assert_eq!(m.as_slice(), &[0.0, 1.0, 9.0, 2.0, 3.0, 9.0, 9.0, 9.0, 9.0]);
    }

    #[test]
    fn copy_node_copies_row_column_and_diagonal() {
        let mut m = numbered(3);
        m.copy_node(0, 2);
        assert_eq!(m.row(2), &[0.0, 1.0, 0.0]);
        assert_eq!(m.get(1, 2), 3.0);
        assert_eq!(m.get(2, 2), 0.0);
    }
}
