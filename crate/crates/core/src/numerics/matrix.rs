use std::ops::{Add, AddAssign, Index, Mul, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::scalar::{czero, Cx, Real};

/// Relative tolerance of the Hermitian symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense square complex Hermitian matrix, stored row-major.
///
/// Construction through [`HermitianMatrix::new`] validates symmetry. Arithmetic
/// between Hermitian matrices stays Hermitian by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix<T: Real> {
    dim: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> HermitianMatrix<T> {
    /// Validates `data` (row-major, `dim * dim` entries) and takes ownership.
    ///
    /// Symmetry is checked against `1e-12` relative to the largest entry magnitude;
    /// the error names the worst offending entry pair.
    pub fn new(dim: usize, data: Vec<Cx<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: data.len(),
            });
        }
        let scale = data.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        let mut worst = (0, 0, T::zero());
        for i in 0..dim {
            for j in i..dim {
                let d = (data[i * dim + j] - data[j * dim + i].conj()).norm();
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        if worst.2 > T::lit(HERMITIAN_TOL) * scale {
            return Err(Error::NotHermitian {
                row: worst.0,
                col: worst.1,
                deviation: worst.2.as_f64(),
            });
        }
        let mut m = Self { dim, data };
        m.symmetrize();
        Ok(m)
    }

    /// Builds from a closure over `(row, col)`; the result is checked like [`new`](Self::new).
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Cx<T>) -> Result<Self> {
        let data = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self::new(dim, data)
    }

    /// Internal constructor for data that is Hermitian up to rounding.
    pub(crate) fn from_raw(dim: usize, data: Vec<Cx<T>>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        let mut m = Self { dim, data };
        m.symmetrize();
        m
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![czero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); dim])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * dim + i] = Cx::new(d, T::zero());
        }
        m
    }

    /// Rank-one outer product `v * v^H`.
    pub fn outer(v: &[Cx<T>]) -> Self {
        let dim = v.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in v {
            for b in v {
                data.push(a * b.conj());
            }
        }
        Self::from_raw(dim, data)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Cx<T> {
        self.data[row * self.dim + col]
    }

    /// Row-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).collect()
    }

    pub fn trace(&self) -> T {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius_norm_sqr(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.frobenius_norm_sqr().sqrt()
    }

    /// Real inner product `Re Tr(self^H * other)`, which equals `Tr(self * other)` for Hermitian pairs.
    pub fn inner(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim, "inner product dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(v.len(), self.dim, "matrix-vector dimension mismatch");
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).fold(czero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    /// `v^H * self * v` (real for Hermitian matrices).
    pub fn quadratic_form(&self, v: &[Cx<T>]) -> T {
        let av = self.mul_vec(v);
        crate::scalar::dot_h(v, &av).re
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self + s * other`, in place.
    pub fn axpy(&mut self, s: T, other: &Self) {
        assert_eq!(self.dim, other.dim, "axpy dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    /// `self += s * v * v^H`.
    pub fn add_outer(&mut self, s: T, v: &[Cx<T>]) {
        let n = self.dim;
        for i in 0..n {
            let vi = v[i] * s;
            for j in 0..n {
                self.data[i * n + j] += vi * v[j].conj();
            }
        }
    }

    /// Adds `v` to diagonal entry `i`.
    pub(crate) fn add_to_diagonal(&mut self, i: usize, v: T) {
        self.data[i * self.dim + i].re += v;
    }

    /// `a * x + b * y`.
    pub fn lin_comb(a: T, x: &Self, b: T, y: &Self) -> Self {
        assert_eq!(x.dim, y.dim, "linear combination dimension mismatch");
        Self {
            dim: x.dim,
            data: x.data.iter().zip(&y.data).map(|(p, q)| p * a + q * b).collect(),
        }
    }

    /// Principal submatrix on `idx`.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.data[i * self.dim + j]);
            }
        }
        Self { dim: k, data }
    }

    /// Inverse of [`restrict`](Self::restrict): places `self` on rows/columns `idx`
    /// of a zero matrix of size `dim`.
    pub fn embed(&self, dim: usize, idx: &[usize]) -> Self {
        assert_eq!(idx.len(), self.dim, "embedding index count mismatch");
        let mut out = Self::zeros(dim);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.data[i * dim + j] = self.data[a * self.dim + b];
            }
        }
        out
    }

    /// Largest deviation from Hermitian symmetry, absolute.
    pub fn asymmetry(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Converts to another scalar precision.
    pub fn cast<U: Real>(&self) -> HermitianMatrix<U> {
        HermitianMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|z| Cx::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64())))
                .collect(),
        }
    }

    fn symmetrize(&mut self) {
        let n = self.dim;
        let half = T::lit(0.5);
        for i in 0..n {
            let d = &mut self.data[i * n + i];
            d.im = T::zero();
            for j in (i + 1)..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i].conj()) * half;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg.conj();
            }
        }
    }
}

impl<T: Real> Index<(usize, usize)> for HermitianMatrix<T> {
    type Output = Cx<T>;

    fn index(&self, (row, col): (usize, usize)) -> &Cx<T> {
        &self.data[row * self.dim + col]
    }
}

impl<T: Real> Add for &HermitianMatrix<T> {
    type Output = HermitianMatrix<T>;

    fn add(self, rhs: Self) -> HermitianMatrix<T> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<T: Real> Sub for &HermitianMatrix<T> {
    type Output = HermitianMatrix<T>;

    fn sub(self, rhs: Self) -> HermitianMatrix<T> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<T: Real> AddAssign<&HermitianMatrix<T>> for HermitianMatrix<T> {
    fn add_assign(&mut self, rhs: &HermitianMatrix<T>) {
        self.axpy(T::one(), rhs);
    }
}

impl<T: Real> SubAssign<&HermitianMatrix<T>> for HermitianMatrix<T> {
    fn sub_assign(&mut self, rhs: &HermitianMatrix<T>) {
        self.axpy(-T::one(), rhs);
    }
}

impl<T: Real> Mul<T> for &HermitianMatrix<T> {
    type Output = HermitianMatrix<T>;

    fn mul(self, rhs: T) -> HermitianMatrix<T> {
        self.scaled(rhs)
    }
}
