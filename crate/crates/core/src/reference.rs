//! Classical cyclic-by-rows Jacobi eigendecomposition, used as the oracle
//! for the targeted solver and as the exact spectrum source for diagnostics.

use crate::error::{Error, Result};
use crate::matrix::{normalize_sign, SquareMatrix, SymMatrix};
use crate::rotation::{annihilate, apply_right, inner_schur2};

pub const DEFAULT_MAX_SWEEPS: usize = 60;

/// `A = V·diag(values)·Vᵀ` with ascending `values`; column `j` of `vectors`
/// pairs with `values[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: SquareMatrix,
    pub sweeps: usize,
}

impl EigDecomposition {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j)
    }
}

/// Cyclic Jacobi over all pairs `p < q`, skipping entries with
/// `|a_pq| < threshold·‖A₀‖_F / n`.
///
/// Sweeps run until `off(A) <= sqrt(ε)·‖A₀‖_F`; a few polishing sweeps then
/// drive `off(A)` to rounding level, which the quadratic convergence of the
/// cyclic method makes cheap.
pub fn full_jacobi(a: &SymMatrix, threshold: f64, max_sweeps: usize) -> Result<EigDecomposition> {
    decompose(a, threshold, max_sweeps, true)
}

pub fn full_jacobi_default(a: &SymMatrix) -> Result<EigDecomposition> {
    full_jacobi(a, 0.0, DEFAULT_MAX_SWEEPS)
}

/// Eigenvalues only, ascending. Skips the eigenvector accumulation.
pub fn eigenvalues(a: &SymMatrix) -> Result<Vec<f64>> {
    decompose(a, 0.0, DEFAULT_MAX_SWEEPS, false).map(|d| d.values)
}

const POLISH_SWEEPS: usize = 3;

fn decompose(a: &SymMatrix, threshold: f64, max_sweeps: usize, vectors: bool) -> Result<EigDecomposition> {
    let n = a.n();
    let frob = a.frob_norm();
    let skip_below = threshold * frob / n as f64;
    let coarse = f64::EPSILON.sqrt() * frob;
    let fine = 4.0 * n as f64 * f64::EPSILON * frob;

    let mut work = a.clone();
    let mut v = vectors.then(|| SquareMatrix::identity(n));
    let mut sweeps = 0;
    let mut polish = 0;
    let mut off = work.off_norm();
    while off > fine {
        if off <= coarse {
            if polish == POLISH_SWEEPS {
                break;
            }
            polish += 1;
        }
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence(max_sweeps));
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = work.get(p, q);
                if apq == 0.0 || apq.abs() < skip_below {
                    continue;
                }
                let s = inner_schur2(work.get(p, p), apq, work.get(q, q));
                annihilate(&mut work, p, q, &s);
                if let Some(v) = v.as_mut() {
                    apply_right(v, p, q, &s.u)?;
                }
                rotated = true;
            }
        }
        sweeps += 1;
        let next = work.off_norm();
        if !rotated || (off <= coarse && next >= off) {
            break;
        }
        off = next;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag = work.diag();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = match v {
        Some(v) => {
            let cols: Vec<Vec<f64>> = order
                .iter()
                .map(|&j| {
                    let mut c = v.column(j);
                    normalize_sign(&mut c);
                    c
                })
                .collect();
            SquareMatrix::from_columns(&cols)
        }
        None => SquareMatrix::zeros(0),
    };
    Ok(EigDecomposition {
        values,
        vectors,
        sweeps,
    })
}
