//! Square banded matrices and a direct banded LU solver with partial pivoting.
//!
//! Storage is row-major over the band: row `i` keeps columns `i - lower ..= i + upper`.
//! Entries outside the band are structurally zero.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix<T> {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<T>,
}

impl<T: Real> BandedMatrix<T> {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Self {
            n,
            lower,
            upper,
            data: vec![T::zero(); n * (lower + upper + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0, 0);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    /// Builds a tridiagonal matrix from constant sub, main and super diagonal values.
    pub fn tridiagonal_constant(n: usize, sub: T, diag: T, sup: T) -> Self {
        let mut m = Self::zeros(n, 1, 1);
        for i in 0..n {
            m.set(i, i, diag);
            if i > 0 {
                m.set(i, i - 1, sub);
            }
            if i + 1 < n {
                m.set(i, i + 1, sup);
            }
        }
        m
    }

    pub fn from_dense(rows: &[Vec<T>], lower: usize, upper: usize) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n, lower, upper);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    if !m.in_band(i, j) {
                        return Err(Error::Config(format!(
                            "entry ({i}, {j}) lies outside the band ({lower}, {upper})"
                        )));
                    }
                    m.set(i, j, v);
                }
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn lower_bandwidth(&self) -> usize {
        self.lower
    }

    #[inline]
    pub fn upper_bandwidth(&self) -> usize {
        self.upper
    }

    #[inline]
    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.lower >= i && j <= i + self.upper
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.lower - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            T::zero()
        }
    }

    /// Panics if `(i, j)` is outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    /// Panics if `(i, j)` is outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// Column range of row `i` inside the band.
    #[inline]
    fn row_cols(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.lower)..(i + self.upper + 1).min(self.n)
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// `y = A x`
    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for j in self.row_cols(i) {
                acc += self.data[self.idx(i, j)] * x[j];
            }
            *yi = acc;
        }
    }

    /// `y += alpha * A x`
    pub fn matvec_acc(&self, alpha: T, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for j in self.row_cols(i) {
                acc += self.data[self.idx(i, j)] * x[j];
            }
            *yi += alpha * acc;
        }
    }

    /// Linear combination `sum_k c_k A_k`; the result carries the widest band of the terms.
    pub fn linear_combination(terms: &[(T, &BandedMatrix<T>)]) -> Self {
        assert!(!terms.is_empty());
        let n = terms[0].1.n;
        let lower = terms.iter().map(|(_, m)| m.lower).max().unwrap_or(0);
        let upper = terms.iter().map(|(_, m)| m.upper).max().unwrap_or(0);
        let mut out = Self::zeros(n, lower, upper);
        for &(c, m) in terms {
            assert_eq!(m.n, n, "matrix sizes differ");
            for i in 0..n {
                for j in m.row_cols(i) {
                    out.add(i, j, c * m.data[m.idx(i, j)]);
                }
            }
        }
        out
    }

    /// Adds `alpha * other * diag(d)` in place. `other` must fit inside this band.
    pub fn add_scaled_columns(&mut self, alpha: T, other: &BandedMatrix<T>, d: &[T]) {
        assert_eq!(other.n, self.n);
        assert_eq!(d.len(), self.n);
        assert!(other.lower <= self.lower && other.upper <= self.upper);
        for i in 0..self.n {
            for j in other.row_cols(i) {
                if d[j] != T::zero() {
                    let v = alpha * other.data[other.idx(i, j)] * d[j];
                    self.add(i, j, v);
                }
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n, self.upper, self.lower);
        for i in 0..self.n {
            for j in self.row_cols(i) {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, v| a.max(v.abs()))
    }

    /// Factorizes the matrix as `P A = L U` with partial pivoting restricted to the band.
    pub fn lu(&self) -> Result<BandedLu<T>> {
        BandedLu::factor(self)
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        self.lu()?.solve(b)
    }
}

/// LU factors of a banded matrix. Row interchanges widen the upper band of `U` to
/// `lower + upper`.
#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: Real> BandedLu<T> {
    fn factor(a: &BandedMatrix<T>) -> Result<Self> {
        let n = a.n;
        let kl = a.lower;
        let ku = a.upper + a.lower;
        let w = kl + ku + 1;
        let idx = |i: usize, j: usize| i * w + (j + kl - i);
        let mut data = vec![T::zero(); n * w];
        for i in 0..n {
            for j in a.row_cols(i) {
                data[idx(i, j)] = a.get(i, j);
            }
        }
        let tiny = a.max_abs() * T::epsilon() * T::from_count(n.max(1));
        let mut pivots = vec![0; n];

        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku).min(n - 1);
            let mut p = k;
            let mut best = data[idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = data[idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(Error::SingularSystem {
                    row: k,
                    step: None,
                    iteration: None,
                });
            }
            pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    data.swap(idx(k, j), idx(p, j));
                }
            }
            let pivot = data[idx(k, k)];
            for i in k + 1..=last_row {
                let l = data[idx(i, k)] / pivot;
                data[idx(i, k)] = l;
                if l != T::zero() {
                    for j in k + 1..=last_col {
                        let ukj = data[idx(k, j)];
                        data[idx(i, j)] -= l * ukj;
                    }
                }
            }
        }
        Ok(Self {
            n,
            lower: kl,
            upper: ku,
            data,
            pivots,
        })
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> T {
        self.data[i * (self.lower + self.upper + 1) + (j + self.lower - i)]
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        if b.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: b.len(),
            });
        }
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + self.lower).min(n.saturating_sub(1)) {
                x[i] -= self.at(i, k) * xk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for j in k + 1..=(k + self.upper).min(n - 1) {
                acc -= self.at(k, j) * x[j];
            }
            x[k] = acc / self.at(k, k);
        }
        Ok(x)
    }
}
