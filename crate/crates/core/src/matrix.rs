//! Dense symmetric storage and the norm/scaling primitives the iteration is
//! analysed with: `off`, the off-diagonal part `Ω(A)`, and the scaled matrix
//! `H = |D|^{-1/2} A |D|^{-1/2}`.
//!
//! Storage is full row-major. Every mutation writes both triangles, so
//! `a(i, j) == a(j, i)` holds bit-exactly at all times.

use std::fmt;

use crate::error::{Error, Result};

/// Dense real symmetric matrix in full storage.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix order must be at least 1");
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut a = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            a.data[i * a.n + i] = d;
        }
        a
    }

    /// Builds a matrix from a generator evaluated on the lower triangle
    /// (`i >= j`) and mirrored.
    pub fn from_lower_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut a = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                a.set(i, j, f(i, j));
            }
        }
        a
    }

    /// Builds a matrix from `n*n` row-major values.
    ///
    /// Entries must be finite and symmetric within `4·ε·‖A‖_F`; the stored
    /// matrix is the symmetric part `(A + Aᵀ)/2`.
    pub fn from_row_major(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if values.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: k / n,
                col: k % n,
            });
        }
        let frob = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        let limit = 4.0 * f64::EPSILON * frob;
        let mut a = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let (x, y) = (values[i * n + j], values[j * n + i]);
                let diff = (x - y).abs();
                if diff > limit {
                    return Err(Error::AsymmetricInput {
                        row: i,
                        col: j,
                        diff,
                    });
                }
                a.set(i, j, if x == y { x } else { 0.5 * (x + y) });
            }
        }
        Ok(a)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::from_row_major(n, values)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Writes `v` to both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(v.is_finite(), "non-finite entry at ({i}, {j})");
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                n: self.n,
            })
        }
    }

    /// Frobenius norm of `Ω(A)`: `sqrt(Σ_{i≠j} a_ij²)`.
    pub fn off_norm(&self) -> f64 {
        self.off_norm_sq().sqrt()
    }

    pub(crate) fn off_norm_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i).iter().enumerate() {
                if i != j {
                    s += v * v;
                }
            }
        }
        s
    }

    /// `off(A(i, :))`, the 2-norm of row `i` without its diagonal entry.
    pub fn off_row(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.off_row_unchecked(i))
    }

    pub(crate) fn off_row_unchecked(&self, i: usize) -> f64 {
        self.row(i)
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `Ω(A) = A − diag(A)`.
    pub fn omega(&self) -> SymMatrix {
        let mut w = self.clone();
        for i in 0..self.n {
            w.data[i * self.n + i] = 0.0;
        }
        w
    }

    /// The scaled matrix `H`, with `h_ij = a_ij / sqrt(|a_ii|·|a_jj|)`.
    pub fn scaled(&self) -> Result<ScaledView> {
        let d = self.abs_diag_nonzero()?;
        let n = self.n;
        let mut h = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..i {
                h.set(i, j, self.get(i, j) / (d[i] * d[j]).sqrt());
            }
            h.data[i * n + i] = self.get(i, i).signum();
        }
        Ok(ScaledView { h })
    }

    fn abs_diag_nonzero(&self) -> Result<Vec<f64>> {
        (0..self.n)
            .map(|i| {
                let d = self.get(i, i).abs();
                if d == 0.0 {
                    Err(Error::ZeroDiagonal(i))
                } else {
                    Ok(d)
                }
            })
            .collect()
    }

    /// `off(H)` without materialising `H`; `None` when a diagonal entry is 0.
    pub(crate) fn scaled_off_norm(&self) -> Option<f64> {
        let d = self.abs_diag_nonzero().ok()?;
        let mut s = 0.0;
        for i in 0..self.n {
            let row = self.row(i);
            for j in 0..i {
                s += row[j] * row[j] / (d[i] * d[j]);
            }
        }
        Some((2.0 * s).sqrt())
    }

    /// `off(H(i, :))` without materialising `H`; `None` when a diagonal entry is 0.
    pub(crate) fn scaled_off_row(&self, i: usize) -> Option<f64> {
        let d = self.abs_diag_nonzero().ok()?;
        let s: f64 = self
            .row(i)
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, v)| v * v / (d[i] * d[j]))
            .sum();
        Some(s.sqrt())
    }

    /// `A(p, p)`: entry `(i, j)` of the result is `a(p[i], p[j])`.
    pub fn permuted(&self, p: &Permutation) -> SymMatrix {
        assert_eq!(p.len(), self.n, "permutation length mismatch");
        let map = p.as_slice();
        SymMatrix::from_lower_fn(self.n, |i, j| self.get(map[i], map[j]))
    }

    /// Stable ascending sort of the diagonal, returning `A(p, p)` and `p`.
    pub fn sort_by_diagonal(&self) -> (SymMatrix, Permutation) {
        let d = self.diag();
        let mut map: Vec<usize> = (0..self.n).collect();
        map.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
        let p = Permutation { map };
        (self.permuted(&p), p)
    }

    /// `A·x` for a vector of length `n`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// The scaled matrix `H = |D|^{-1/2} A |D|^{-1/2}`, whose diagonal is `sign(a_ii)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledView {
    h: SymMatrix,
}

impl ScaledView {
    pub fn matrix(&self) -> &SymMatrix {
        &self.h
    }

    pub fn into_matrix(self) -> SymMatrix {
        self.h
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.h.get(i, j)
    }

    pub fn off_norm(&self) -> f64 {
        self.h.off_norm()
    }

    pub fn off_row(&self, i: usize) -> Result<f64> {
        self.h.off_row(i)
    }
}

/// A bijection on `0..n`. Applied as `A(p, p)`, i.e. position `i` of the
/// permuted object holds element `p[i]` of the original.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn from_vec(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &k in &map {
            if k >= n || seen[k] {
                return Err(Error::InvalidArgument(format!(
                    "not a permutation of 0..{n}: {map:?}"
                )));
            }
            seen[k] = true;
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &k)| i == k)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &k) in self.map.iter().enumerate() {
            inv[k] = i;
        }
        Self { map: inv }
    }

    /// `self ∘ other`: index `i` maps to `self[other[i]]`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        Self {
            map: other.map.iter().map(|&k| self.map[k]).collect(),
        }
    }

    /// Gathers `x` into permuted order: `y[i] = x[p[i]]`.
    pub fn gather(&self, x: &[f64]) -> Vec<f64> {
        self.map.iter().map(|&k| x[k]).collect()
    }

    /// Inverse of [`gather`](Self::gather): `y[p[i]] = x[i]`.
    pub fn scatter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for (i, &k) in self.map.iter().enumerate() {
            y[k] = x[i];
        }
        y
    }

    /// 1-based indices, as presented in files and on the command line.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.map.iter().map(|k| k + 1).collect()
    }
}

/// General dense square matrix, row-major. Used for accumulated rotations
/// and eigenvector bases.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SquareMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            writeln!(f, "  {:?}", &self.data[i * self.n..(i + 1) * self.n])?;
        }
        Ok(())
    }
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    /// Builds a matrix whose `j`-th column is `cols[j]`.
    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        let n = cols.len();
        let mut m = Self::zeros(n);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), n, "column {j} has wrong length");
            for (i, &v) in c.iter().enumerate() {
                m.data[i * n + j] = v;
            }
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.data[j * n + i] = self.data[i * n + j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut c = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                let crow = &mut c.data[i * n..(i + 1) * n];
                for (cv, bv) in crow.iter_mut().zip(brow) {
                    *cv += a * bv;
                }
            }
        }
        c
    }

    /// `‖MᵀM − I‖_F`.
    pub fn orthogonality_defect(&self) -> f64 {
        let g = self.transpose().matmul(self);
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let e = g.get(i, j) - if i == j { 1.0 } else { 0.0 };
                s += e * e;
            }
        }
        s.sqrt()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Flips `v` so that its largest-magnitude entry is positive (lowest index
/// wins ties).
pub fn normalize_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
