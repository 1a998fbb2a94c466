//! Targeted Jacobi iteration for a single eigenpair.
//!
//! After a stable sort of the diagonal, each sweep applies at most `n − 1`
//! rotations, all in planes `(k, m)`: first `k = 1, …, m−1`, then
//! `k = n, …, m+1`. Every rotation annihilates `a_mk` and keeps the two
//! diagonal entries in ascending order, so the `m`-th diagonal entry tracks
//! the `m`-th smallest eigenvalue. A sweep costs `O(n²)`.

use crate::error::{Error, Result};
use crate::matrix::{normalize_sign, norm2, Permutation, SquareMatrix, SymMatrix};
use crate::rotation::{annihilate, apply_right, schur2};

/// Number of sweeps over which `off(A(m,:))` must shrink before the solve
/// is declared stagnated.
pub const DEFAULT_STAGNATION_WINDOW: usize = 10;
/// Minimum relative decrease of `off(A(m,:))` over the stagnation window.
pub const STAGNATION_MIN_DECREASE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Target index (0-based) in the diagonal order produced by the sort.
    pub m: usize,
    /// Per-entry gate: `a_mk` is rotated away only when `|a_mk| >= tol`.
    pub tol: f64,
    /// Stop when `off(A(m,:)) <= stop_rel · ‖A₀‖_F`.
    pub stop_rel: f64,
    pub max_sweeps: usize,
    /// Sweeps without a `1e-3` relative decrease before giving up;
    /// `0` disables the check.
    pub stagnation_window: usize,
    pub want_vector: bool,
    pub record_history: bool,
}

impl SolveOptions {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            tol: 0.0,
            stop_rel: f64::EPSILON.sqrt(),
            max_sweeps: 200,
            stagnation_window: DEFAULT_STAGNATION_WINDOW,
            want_vector: false,
            record_history: false,
        }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn stop_rel(mut self, stop_rel: f64) -> Self {
        self.stop_rel = stop_rel;
        self
    }

    pub fn max_sweeps(mut self, max_sweeps: usize) -> Self {
        self.max_sweeps = max_sweeps;
        self
    }

    pub fn stagnation_window(mut self, window: usize) -> Self {
        self.stagnation_window = window;
        self
    }

    pub fn with_vector(mut self) -> Self {
        self.want_vector = true;
        self
    }

    pub fn with_history(mut self) -> Self {
        self.record_history = true;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.m >= n {
            return Err(Error::InvalidOptions(format!(
                "target index {} outside 0..{n}",
                self.m
            )));
        }
        if !(self.tol >= 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidOptions(format!("tol = {}", self.tol)));
        }
        if !(self.stop_rel >= 0.0) || !self.stop_rel.is_finite() {
            return Err(Error::InvalidOptions(format!("stop_rel = {}", self.stop_rel)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidOptions("max_sweeps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    /// `off(A(m,:)) <= stop_rel · ‖A₀‖_F`.
    Converged,
    /// A full sweep found no entry passing the `tol` gate.
    ToleranceFloor,
    MaxSweeps,
    Stagnated,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::ToleranceFloor => "tolerance_floor",
            Status::MaxSweeps => "max_sweeps",
            Status::Stagnated => "stagnated",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// State of the iterate at the end of a sweep (`sweep == 0` is the sorted input).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub sweep: usize,
    /// `off(A(m,:))`.
    pub off_row_m: f64,
    /// `off(H(m,:))` of the scaled iterate; `None` if a diagonal entry is zero.
    pub off_row_m_scaled: Option<f64>,
    /// `off(A)`.
    pub off_total: f64,
    pub a_mm: f64,
    /// `off(H)`; `None` if a diagonal entry is zero.
    pub alpha: Option<f64>,
    pub rotations_applied: usize,
    /// `Σ a_mk²` over the entries annihilated during this sweep.
    pub annihilated_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenpairResult {
    pub lambda_hat: f64,
    /// Unit eigenvector in the caller's (unsorted) coordinates, largest
    /// entry positive.
    pub vector: Option<Vec<f64>>,
    pub status: Status,
    pub sweeps_used: usize,
    /// Final `off(A(m,:))`.
    pub off_row_m: f64,
    pub history: Vec<SweepRecord>,
    /// Diagonal sort applied before iterating.
    pub permutation: Permutation,
}

impl EigenpairResult {
    /// The eigenvector in original coordinates.
    pub fn eigenvector(&self) -> Result<&[f64]> {
        eigenvector(self)
    }

    /// Position of the target in the caller's ordering.
    pub fn original_index(&self, m: usize) -> usize {
        self.permutation.as_slice()[m]
    }
}

pub fn eigenvector(result: &EigenpairResult) -> Result<&[f64]> {
    result.vector.as_deref().ok_or(Error::VectorNotAccumulated)
}

/// One cycle of the iteration on an already sorted matrix. Returns the number
/// of rotations applied and `Σ a_mk²` of the annihilated entries.
///
/// Exact zeros are skipped even when `tol == 0`.
pub fn sweep(
    a: &mut SymMatrix,
    m: usize,
    tol: f64,
    mut v: Option<&mut SquareMatrix>,
) -> Result<(usize, f64)> {
    a.check_index(m)?;
    let n = a.n();
    if let Some(v) = v.as_deref() {
        if v.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.n(),
            });
        }
    }
    let mut count = 0;
    let mut annihilated_sq = 0.0;
    let planes = (0..m).map(|k| (k, m)).chain((m + 1..n).rev().map(|k| (m, k)));
    for (p, q) in planes {
        let apq = a.get(p, q);
        if apq == 0.0 || apq.abs() < tol {
            continue;
        }
        let schur = schur2(a.get(p, p), apq, a.get(q, q));
        annihilate(a, p, q, &schur);
        if let Some(v) = v.as_deref_mut() {
            apply_right(v, p, q, &schur.u)?;
        }
        annihilated_sq += apq * apq;
        count += 1;
    }
    Ok((count, annihilated_sq))
}

fn record(a: &SymMatrix, m: usize, sweep: usize, rotations: usize, annihilated_sq: f64) -> SweepRecord {
    SweepRecord {
        sweep,
        off_row_m: a.off_row_unchecked(m),
        off_row_m_scaled: a.scaled_off_row(m),
        off_total: a.off_norm(),
        a_mm: a.get(m, m),
        alpha: a.scaled_off_norm(),
        rotations_applied: rotations,
        annihilated_sq,
    }
}

/// Approximates the `m`-th smallest eigenpair (in diagonal order) of `a`.
pub fn solve(a: &SymMatrix, opts: &SolveOptions) -> Result<EigenpairResult> {
    solve_with_state(a, opts).map(|(r, _)| r)
}

/// As [`solve`], also returning the final (sorted) iterate.
pub fn solve_with_state(a: &SymMatrix, opts: &SolveOptions) -> Result<(EigenpairResult, SymMatrix)> {
    let n = a.n();
    opts.validate(n)?;
    let m = opts.m;
    let (mut work, perm) = a.sort_by_diagonal();
    let mut acc = opts.want_vector.then(|| SquareMatrix::identity(n));
    let threshold = opts.stop_rel * a.frob_norm();

    let mut history = Vec::new();
    if opts.record_history {
        history.push(record(&work, m, 0, 0, 0.0));
    }
    let mut recent = vec![work.off_row_unchecked(m)];
    let mut sweeps = 0;
    let status = loop {
        let off = *recent.last().unwrap();
        if off <= threshold {
            break Status::Converged;
        }
        if sweeps == opts.max_sweeps {
            break Status::MaxSweeps;
        }
        let (count, annihilated_sq) = sweep(&mut work, m, opts.tol, acc.as_mut())?;
        sweeps += 1;
        if opts.record_history {
            history.push(record(&work, m, sweeps, count, annihilated_sq));
        }
        let off = work.off_row_unchecked(m);
        recent.push(off);
        if off <= threshold {
            break Status::Converged;
        }
        if count == 0 {
            break Status::ToleranceFloor;
        }
        let w = opts.stagnation_window;
        if w > 0 && recent.len() > w {
            let earlier = recent[recent.len() - 1 - w];
            if off > (1.0 - STAGNATION_MIN_DECREASE) * earlier {
                break Status::Stagnated;
            }
        }
    };

    let vector = acc.map(|v| {
        let mut x = perm.scatter(&v.column(m));
        let norm = norm2(&x);
        x.iter_mut().for_each(|e| *e /= norm);
        normalize_sign(&mut x);
        x
    });
    let result = EigenpairResult {
        lambda_hat: work.get(m, m),
        vector,
        status,
        sweeps_used: sweeps,
        off_row_m: work.off_row_unchecked(m),
        history,
        permutation: perm,
    };
    Ok((result, work))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::dot;
    use crate::reference::full_jacobi_default;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EPS: f64 = f64::EPSILON;

    fn random_sym(n: usize, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SymMatrix::from_lower_fn(n, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn random_dd(n: usize, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SymMatrix::from_lower_fn(n, |i, j| {
            if i == j {
                (i + 1) as f64 * 2.0
            } else {
                rng.gen_range(-0.1..0.1)
            }
        })
    }

    #[test]
    fn diagonal_input_converges_immediately() {
        let a = SymMatrix::from_diag(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let r = solve(&a, &SolveOptions::new(2).with_history()).unwrap();
        assert_eq!(r.lambda_hat, 3.0);
        assert_eq!(r.status, Status::Converged);
        assert_eq!(r.sweeps_used, 0);
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.history[0].rotations_applied, 0);
    }

    #[test]
    fn sweep_on_diagonal_is_noop() {
        let mut a = SymMatrix::from_diag(&[1.0, 2.0, 3.0]);
        let before = a.clone();
        assert_eq!(sweep(&mut a, 1, 0.0, None).unwrap(), (0, 0.0));
        assert_eq!(a, before);
    }

    #[test]
    fn sweep_rejects_bad_index() {
        let mut a = SymMatrix::identity(3);
        assert!(sweep(&mut a, 3, 0.0, None).is_err());
    }

    #[test]
    fn one_sweep_diagonalizes_two_by_two() {
        let mut a = SymMatrix::from_rows(&[vec![1.0, 0.4], vec![0.4, 3.0]]).unwrap();
        let (count, _) = sweep(&mut a, 1, 0.0, None).unwrap();
        assert_eq!(count, 1);
        assert_eq!(a.off_norm(), 0.0);
        assert!(a.get(0, 0) <= a.get(1, 1));
    }

    #[test]
    fn sweep_telescopes_off_norm() {
        let mut a = random_sym(8, 17);
        let frob_sq = a.frob_norm().powi(2);
        for m in 0..8 {
            let before = a.off_norm_sq();
            let (_, sq) = sweep(&mut a, m, 0.0, None).unwrap();
            let after = a.off_norm_sq();
            assert!((before - after - 2.0 * sq).abs() <= 32.0 * 8.0 * EPS * frob_sq);
        }
    }

    #[test]
    fn invalid_options() {
        let a = SymMatrix::identity(3);
        assert!(matches!(solve(&a, &SolveOptions::new(3)), Err(Error::InvalidOptions(_))));
        assert!(solve(&a, &SolveOptions::new(0).tol(-1.0)).is_err());
        assert!(solve(&a, &SolveOptions::new(0).max_sweeps(0)).is_err());
        assert!(solve(&a, &SolveOptions::new(0).stop_rel(f64::NAN)).is_err());
    }

    #[test]
    fn order_one_matrix() {
        let a = SymMatrix::from_diag(&[-2.5]);
        let r = solve(&a, &SolveOptions::new(0).with_vector()).unwrap();
        assert_eq!(r.lambda_hat, -2.5);
        assert_eq!(r.vector.unwrap(), vec![1.0]);
    }

    #[test]
    fn eigenvector_of_diagonal() {
        let a = SymMatrix::from_diag(&[1.0, 2.0, 3.0]);
        let r = solve(&a, &SolveOptions::new(1).with_vector()).unwrap();
        assert_eq!(r.eigenvector().unwrap(), &[0.0, 1.0, 0.0]);
        let r = solve(&a, &SolveOptions::new(1)).unwrap();
        assert!(matches!(r.eigenvector(), Err(Error::VectorNotAccumulated)));
    }

    #[test]
    fn eigenvector_is_back_permuted() {
        let a = random_dd(6, 3);
        let p = Permutation::from_vec(vec![4, 0, 5, 2, 1, 3]).unwrap();
        let b = a.permuted(&p);
        for m in 0..6 {
            let ra = solve(&a, &SolveOptions::new(m).with_vector()).unwrap();
            let rb = solve(&b, &SolveOptions::new(m).with_vector()).unwrap();
            assert!((ra.lambda_hat - rb.lambda_hat).abs() <= 1e-12 * a.frob_norm());
            // b = A(p,p): entry i of b's eigenvector is entry p[i] of a's
            let va = p.gather(ra.eigenvector().unwrap());
            let vb = rb.eigenvector().unwrap();
            assert!(dot(&va, vb).abs() >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn matches_oracle_on_random_dd() {
        for seed in 0..5 {
            let a = random_dd(8, seed);
            let frob = a.frob_norm();
            let oracle = full_jacobi_default(&a).unwrap();
            for m in 0..8 {
                let r = solve(&a, &SolveOptions::new(m).with_vector()).unwrap();
                assert_eq!(r.status, Status::Converged);
                assert!((r.lambda_hat - oracle.values[m]).abs() <= 1e-10 * frob);
                let v = r.eigenvector().unwrap();
                assert!((norm2(v) - 1.0).abs() <= 8.0 * EPS);
                let av = a.mul_vec(v);
                let res: f64 = av
                    .iter()
                    .zip(v)
                    .map(|(x, y)| (x - r.lambda_hat * y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                // the residual of the pair is the remaining row norm
                assert!(res <= r.off_row_m + 1e-12 * frob);
                assert!(dot(v, &oracle.vectors.column(m)).abs() >= 1.0 - 1e-8);
            }
        }
    }

    #[test]
    fn off_total_is_monotone() {
        for seed in 0..10 {
            let a = random_sym(9, seed);
            let frob0 = a.frob_norm();
            let r = solve(&a, &SolveOptions::new(4).max_sweeps(30).with_history()).unwrap();
            for w in r.history.windows(2) {
                assert!(w[1].off_total.powi(2) <= w[0].off_total.powi(2) + 16.0 * 9.0 * EPS * frob0 * frob0);
                assert!(w[1].off_row_m <= w[1].off_total);
                assert!(w[1].rotations_applied <= 8);
            }
        }
    }

    #[test]
    fn converged_status_honours_threshold() {
        let a = random_dd(10, 42);
        let opts = SolveOptions::new(5);
        let r = solve(&a, &opts).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!(r.off_row_m <= opts.stop_rel * a.frob_norm());
    }

    #[test]
    fn tolerance_floor_with_positive_tol() {
        for seed in 0..10 {
            let a = random_sym(10, 100 + seed);
            let tol = 1e-2;
            let opts = SolveOptions::new(4)
                .tol(tol)
                .stop_rel(0.0)
                .max_sweeps(1_000_000)
                .stagnation_window(0);
            let r = solve(&a, &opts).unwrap();
            assert_eq!(r.status, Status::ToleranceFloor);
            assert!(r.off_row_m < 10f64.sqrt() * tol);
        }
    }

    #[test]
    fn stagnation_is_reported() {
        // far from dominant; off(A(0,:)) creeps upward from sweep to sweep
        let a = SymMatrix::from_rows(&[
            vec![0.0, 2.0, -1.0, 1.0, -2.0],
            vec![2.0, 1.0, -1.0, 2.0, -2.0],
            vec![-1.0, -1.0, 1.0, 0.0, 1.0],
            vec![1.0, 2.0, 0.0, 1.0, 0.0],
            vec![-2.0, -2.0, 1.0, 0.0, 2.0],
        ])
        .unwrap();
        let r = solve(&a, &SolveOptions::new(0).with_history()).unwrap();
        assert_eq!(r.status, Status::Stagnated);
        assert!(r.sweeps_used > DEFAULT_STAGNATION_WINDOW && r.sweeps_used < 200);
        let h = &r.history;
        let last = h[h.len() - 1].off_row_m;
        let earlier = h[h.len() - 1 - DEFAULT_STAGNATION_WINDOW].off_row_m;
        assert!(last > (1.0 - STAGNATION_MIN_DECREASE) * earlier);
    }

    #[test]
    fn max_sweeps_is_reported() {
        let a = random_sym(12, 5);
        let r = solve(&a, &SolveOptions::new(6).stop_rel(0.0).max_sweeps(2).stagnation_window(0)).unwrap();
        assert_eq!(r.status, Status::MaxSweeps);
        assert_eq!(r.sweeps_used, 2);
    }
}
