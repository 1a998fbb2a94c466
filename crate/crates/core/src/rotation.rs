//! Plane rotations: the annihilating Jacobi angle, the ordered 2×2 Schur
//! decomposition, and their two-sided application to a [`SymMatrix`].

use crate::error::{Error, Result};
use crate::matrix::{SquareMatrix, SymMatrix};

/// 2×2 orthogonal matrix, indexed `u[row][col]`.
pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY2: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

/// Plane rotation `[[c, s], [-s, c]]` with `c >= 0` and `|s| <= c`, i.e. the
/// angle lies in `[-π/4, π/4]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation2 {
    pub c: f64,
    pub s: f64,
}

impl Rotation2 {
    pub const IDENTITY: Rotation2 = Rotation2 { c: 1.0, s: 0.0 };

    /// `tan(φ) = s / c`.
    pub fn tan(&self) -> f64 {
        self.s / self.c
    }

    pub fn matrix(&self) -> Mat2 {
        [[self.c, self.s], [-self.s, self.c]]
    }
}

/// Rotation annihilating the off-diagonal pair of `[[a_pp, a_pq], [a_pq, a_qq]]`
/// under `Uᵀ B U`, using the tangent form `t = sign(θ)/(|θ| + sqrt(1+θ²))`,
/// `θ = (a_qq − a_pp)/(2 a_pq)`.
pub fn jacobi_angle(a_pp: f64, a_pq: f64, a_qq: f64) -> Rotation2 {
    if a_pq == 0.0 {
        return Rotation2::IDENTITY;
    }
    let theta = (a_qq - a_pp) / (2.0 * a_pq);
    let t = if theta == 0.0 {
        1.0
    } else if theta.abs() > 1e150 {
        // θ² would overflow; t ≈ 1/(2θ)
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + theta.mul_add(theta, 1.0).sqrt())
    };
    let c = 1.0 / t.mul_add(t, 1.0).sqrt();
    Rotation2 { c, s: t * c }
}

/// `B = U·diag(t)·Uᵀ` for a symmetric 2×2 `B`, with `t[0] <= t[1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schur2Result {
    pub u: Mat2,
    pub t: [f64; 2],
    /// Whether the columns of the Jacobi rotation were exchanged to order `t`.
    pub swapped: bool,
}

/// The unordered decomposition given by the inner Jacobi rotation; the
/// rotated diagonal keeps the order of `b11`, `b22`.
pub fn inner_schur2(b11: f64, b12: f64, b22: f64) -> Schur2Result {
    let rot = jacobi_angle(b11, b12, b22);
    let tan = rot.tan();
    Schur2Result {
        u: rot.matrix(),
        t: [b11 - tan * b12, b22 + tan * b12],
        swapped: false,
    }
}

/// Ordered Schur decomposition of `[[b11, b12], [b12, b22]]`: the Jacobi
/// rotation, with its columns exchanged when the rotated diagonal comes out
/// decreasing.
pub fn schur2(b11: f64, b12: f64, b22: f64) -> Schur2Result {
    let inner = inner_schur2(b11, b12, b22);
    let [t1, t2] = inner.t;
    if t1 > t2 {
        let u = inner.u;
        Schur2Result {
            u: [[u[0][1], u[0][0]], [u[1][1], u[1][0]]],
            t: [t2, t1],
            swapped: true,
        }
    } else {
        inner
    }
}

fn check_plane(n: usize, p: usize, q: usize) -> Result<()> {
    for i in [p, q] {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
    }
    if p == q {
        return Err(Error::SamePlaneIndex(p));
    }
    Ok(())
}

/// Rows/columns `p`, `q` outside the 2×2 block: `A([p,q], j) ← Uᵀ A([p,q], j)`,
/// mirrored into the columns.
#[inline]
fn rotate_off_block(a: &mut SymMatrix, p: usize, q: usize, u: &Mat2) {
    let n = a.n();
    let data = a.data_mut();
    for j in 0..n {
        if j == p || j == q {
            continue;
        }
        let x = data[p * n + j];
        let y = data[q * n + j];
        let nx = u[0][0] * x + u[1][0] * y;
        let ny = u[0][1] * x + u[1][1] * y;
        data[p * n + j] = nx;
        data[q * n + j] = ny;
        data[j * n + p] = nx;
        data[j * n + q] = ny;
    }
}

/// `A ← Qᵀ A Q` where `Q` is the identity except for `U` in the `(p, q)` plane.
///
/// The 2×2 block is formed explicitly as `Uᵀ B U`; its off-diagonal value is
/// computed once and written to both positions.
pub fn apply_two_sided(a: &mut SymMatrix, p: usize, q: usize, u: &Mat2) -> Result<()> {
    check_plane(a.n(), p, q)?;
    let (app, apq, aqq) = (a.get(p, p), a.get(p, q), a.get(q, q));
    rotate_off_block(a, p, q, u);
    // M = B U
    let m00 = app * u[0][0] + apq * u[1][0];
    let m01 = app * u[0][1] + apq * u[1][1];
    let m10 = apq * u[0][0] + aqq * u[1][0];
    let m11 = apq * u[0][1] + aqq * u[1][1];
    a.set(p, p, u[0][0] * m00 + u[1][0] * m10);
    a.set(q, q, u[0][1] * m01 + u[1][1] * m11);
    a.set(p, q, u[0][0] * m01 + u[1][0] * m11);
    Ok(())
}

/// Applies an annihilating Schur rotation in the `(p, q)` plane: the diagonal
/// pair becomes `schur.t` and `a_pq` is set to exactly zero. Returns the
/// annihilated value.
pub(crate) fn annihilate(a: &mut SymMatrix, p: usize, q: usize, schur: &Schur2Result) -> f64 {
    debug_assert!(p != q && p < a.n() && q < a.n());
    let apq = a.get(p, q);
    rotate_off_block(a, p, q, &schur.u);
    a.set(p, p, schur.t[0]);
    a.set(q, q, schur.t[1]);
    a.set(p, q, 0.0);
    apq
}

/// `V(:, [p, q]) ← V(:, [p, q])·U`.
pub fn apply_right(v: &mut SquareMatrix, p: usize, q: usize, u: &Mat2) -> Result<()> {
    let n = v.n();
    check_plane(n, p, q)?;
    let data = v.data_mut();
    for i in 0..n {
        let x = data[i * n + p];
        let y = data[i * n + q];
        data[i * n + p] = x * u[0][0] + y * u[1][0];
        data[i * n + q] = x * u[0][1] + y * u[1][1];
    }
    Ok(())
}
