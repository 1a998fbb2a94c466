//! Eigenpath tracking along `A(t) = diag(A) + t·Ω(A)`, `t ∈ [0, 1]`.
//!
//! At `t = 0` the decomposition is trivial. Each step forms
//! `B = Σ(t_k) + s_k·Q(t_k)ᵀ·Ω(A)·Q(t_k)`, solves every eigenpair of `B`
//! independently with the targeted solver, and composes the resulting
//! (re-orthonormalized) eigenvector matrix into `Q`.

use rayon::prelude::*;

use crate::diagnostics::min_relative_gap;
use crate::error::{Error, Result};
use crate::matrix::{dot, SquareMatrix, SymMatrix};
use crate::solver::{self, EigenpairResult, SolveOptions, Status};

/// Smallest relative gap the tracker will step across.
pub const GAP_FLOOR: f64 = 1e-14;
/// Step halvings tried before a stalled solve is reported.
pub const MAX_HALVINGS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Step constant: `s_k·‖Ω(A)‖_F / γ̂_k <= c`.
    pub c: f64,
    pub max_steps: usize,
    /// Options for every per-eigenpair solve; `m` and `want_vector` are
    /// overridden.
    pub solve: SolveOptions,
    /// Run the per-step solves on the rayon pool.
    pub parallel: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_steps: 10_000,
            // Σ carries each step's residual into the next, so solves run
            // well past the solver's default stopping level.
            solve: SolveOptions::new(0).stop_rel(1e-12),
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyStep {
    pub t: f64,
    pub s: f64,
    /// Ascending eigenvalues of `A(t)`.
    pub sigma: Vec<f64>,
    /// Minimum relative gap of `sigma`.
    pub gamma_hat: f64,
    pub iters_per_eig: Vec<usize>,
    /// `‖QᵀQ − I‖_F` after the step.
    pub orthogonality_defect: f64,
}

impl HomotopyStep {
    pub fn avg_iters(&self) -> f64 {
        mean(&self.iters_per_eig)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyPath {
    pub steps: Vec<HomotopyStep>,
    /// Eigenvectors of `A` as columns, paired with the last `sigma`.
    pub final_q: SquareMatrix,
    pub total_steps: usize,
    /// Mean solver sweeps per eigenpair per step.
    pub avg_iters: f64,
}

impl HomotopyPath {
    pub fn eigenvalues(&self) -> &[f64] {
        self.steps.last().map_or(&[], |s| s.sigma.as_slice())
    }
}

fn mean(x: &[usize]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<usize>() as f64 / x.len() as f64
    }
}

/// `s = min(1 − t, c·γ̂/‖Ω‖_F)`, or `1 − t` when `Ω = 0`.
pub fn step_length(gamma_hat: f64, omega_frob: f64, c: f64, t: f64) -> Result<f64> {
    if !(omega_frob >= 0.0) || !(0.0..1.0).contains(&t) || !(c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step_length(omega_frob = {omega_frob}, c = {c}, t = {t})"
        )));
    }
    if gamma_hat <= GAP_FLOOR {
        return Err(Error::CollapsedGap { t, gap: gamma_hat });
    }
    let rest = 1.0 - t;
    if omega_frob == 0.0 {
        return Ok(rest);
    }
    Ok(rest.min(c * gamma_hat / omega_frob))
}

/// `Qᵀ·Ω·Q`.
fn congruence(q: &SquareMatrix, omega: &SymMatrix) -> SymMatrix {
    let n = q.n();
    let mut wq = SquareMatrix::zeros(n);
    for i in 0..n {
        let row = omega.row(i);
        for j in 0..n {
            let mut acc = 0.0;
            for (k, &w) in row.iter().enumerate() {
                acc += w * q.get(k, j);
            }
            wq.set(i, j, acc);
        }
    }
    SymMatrix::from_lower_fn(n, |i, j| (0..n).map(|k| q.get(k, i) * wq.get(k, j)).sum())
}

/// Modified Gram–Schmidt on the columns, in order.
fn orthonormalize(cols: &mut [Vec<f64>]) {
    for j in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        for u in done.iter() {
            let r = dot(u, v);
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= r * y);
        }
        let norm = dot(v, v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn solve_all(b: &SymMatrix, cfg: &TrackerConfig) -> Result<Vec<EigenpairResult>> {
    let one = |m: usize| {
        let mut o = cfg.solve.clone();
        o.m = m;
        o.want_vector = true;
        solver::solve(b, &o)
    };
    if cfg.parallel {
        (0..b.n()).into_par_iter().map(one).collect()
    } else {
        (0..b.n()).map(one).collect()
    }
}

fn accepted(status: Status) -> bool {
    matches!(status, Status::Converged | Status::ToleranceFloor)
}

/// Follows all `n` eigenpairs from `t = 0` to `t = 1`.
pub fn track(a: &SymMatrix, cfg: &TrackerConfig) -> Result<HomotopyPath> {
    if !(cfg.c > 0.0) {
        return Err(Error::InvalidArgument(format!("c = {} must be positive", cfg.c)));
    }
    let n = a.n();
    let omega = a.omega();
    let omega_frob = omega.off_norm();
    let mut sigma = a.diag();
    sigma.sort_by(f64::total_cmp);
    // Q's columns follow the ascending order of Σ.
    let (_, perm) = a.sort_by_diagonal();
    let q0: Vec<Vec<f64>> = perm
        .as_slice()
        .iter()
        .map(|&i| (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut q = SquareMatrix::from_columns(&q0);

    let mut steps = Vec::new();
    let mut t = 0.0;
    if n == 1 || omega_frob == 0.0 {
        steps.push(HomotopyStep {
            t: 1.0,
            s: 1.0,
            gamma_hat: if n > 1 { min_relative_gap(&sigma)?.gamma } else { 0.0 },
            sigma,
            iters_per_eig: vec![0; n],
            orthogonality_defect: q.orthogonality_defect(),
        });
        return Ok(HomotopyPath {
            steps,
            final_q: q,
            total_steps: 1,
            avg_iters: 0.0,
        });
    }

    let mut gamma_hat = min_relative_gap(&sigma)?.gamma;
    while t < 1.0 {
        if steps.len() == cfg.max_steps {
            return Err(Error::StepLimit(cfg.max_steps));
        }
        let mut s = step_length(gamma_hat, omega_frob, cfg.c, t)?;
        let rotated = congruence(&q, &omega);
        let mut halvings = 0;
        let results = loop {
            let b = SymMatrix::from_lower_fn(n, |i, j| {
                let d = if i == j { sigma[i] } else { 0.0 };
                d + s * rotated.get(i, j)
            });
            let results = solve_all(&b, cfg)?;
            match results.iter().position(|r| !accepted(r.status)) {
                None => break results,
                Some(m) if halvings == MAX_HALVINGS => {
                    return Err(Error::TrackerStalled { t, m });
                }
                Some(_) => {
                    s *= 0.5;
                    halvings += 1;
                }
            }
        };

        let mut cols = Vec::with_capacity(n);
        let mut next_sigma = Vec::with_capacity(n);
        let mut iters = Vec::with_capacity(n);
        for r in &results {
            cols.push(r.eigenvector()?.to_vec());
            next_sigma.push(r.lambda_hat);
            iters.push(r.sweeps_used);
        }
        orthonormalize(&mut cols);
        q = q.matmul(&SquareMatrix::from_columns(&cols));

        t = if s >= 1.0 - t { 1.0 } else { t + s };
        sigma = next_sigma;
        gamma_hat = min_relative_gap(&sigma)?.gamma;
        if gamma_hat <= GAP_FLOOR {
            return Err(Error::CollapsedGap { t, gap: gamma_hat });
        }
        steps.push(HomotopyStep {
            t,
            s,
            sigma: sigma.clone(),
            gamma_hat,
            iters_per_eig: iters,
            orthogonality_defect: q.orthogonality_defect(),
        });
    }

    let all: Vec<usize> = steps.iter().flat_map(|s| s.iters_per_eig.iter().copied()).collect();
    Ok(HomotopyPath {
        total_steps: steps.len(),
        avg_iters: mean(&all),
        steps,
        final_q: q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seeded(n: usize, scale: f64, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SymMatrix::from_lower_fn(n, |i, j| {
            if i == j {
                (i + 1) as f64
            } else {
                scale * rng.gen_range(-1.0..1.0)
            }
        })
    }

    #[test]
    fn step_length_examples() {
        assert_relative_eq!(step_length(0.1, 2.0, 1.0, 0.0).unwrap(), 0.05);
        assert_eq!(step_length(0.1, 0.0, 1.0, 0.3).unwrap(), 0.7);
        assert_relative_eq!(step_length(10.0, 1.0, 1.0, 0.99).unwrap(), 0.01, max_relative = 1e-12);
        assert!(matches!(
            step_length(1e-15, 1.0, 1.0, 0.0),
            Err(Error::CollapsedGap { .. })
        ));
    }

    #[test]
    fn diagonal_input_is_one_step() {
        let a = SymMatrix::from_diag(&[3.0, 1.0, 2.0]);
        let p = track(&a, &TrackerConfig::default()).unwrap();
        assert_eq!(p.total_steps, 1);
        assert_eq!(p.eigenvalues(), &[1.0, 2.0, 3.0]);
        assert_eq!(p.final_q.orthogonality_defect(), 0.0);
        assert_eq!(p.final_q.get(1, 0), 1.0);
    }

    #[test]
    fn two_by_two_closed_form() {
        let a = SymMatrix::from_rows(&[vec![1.0, 0.1], vec![0.1, 2.0]]).unwrap();
        let p = track(&a, &TrackerConfig::default()).unwrap();
        let mid = 1.5;
        let rad = (0.25f64 + 0.01).sqrt();
        let ev = p.eigenvalues();
        assert!((ev[0] - (mid - rad)).abs() <= 1e-10);
        assert!((ev[1] - (mid + rad)).abs() <= 1e-10);
        assert_eq!(p.steps.last().unwrap().t, 1.0);
    }

    #[test]
    fn seeded_33_reaches_oracle() {
        let n = 33;
        let a = seeded(n, 0.1, 7);
        let omega_frob = a.off_norm();
        let p = track(&a, &TrackerConfig::default()).unwrap();
        let d = reference::full_jacobi_default(&a).unwrap();
        let frob = a.frob_norm();
        for (x, y) in p.eigenvalues().iter().zip(&d.values) {
            assert!((x - y).abs() <= 1e-8 * frob);
        }
        let mut prev_t = 0.0;
        let mut prev = {
            let mut s = a.diag();
            s.sort_by(f64::total_cmp);
            s
        };
        for st in &p.steps {
            assert!(st.t > prev_t);
            assert!(st.orthogonality_defect <= 1e-10 * n as f64);
            for (u, v) in st.sigma.iter().zip(&prev) {
                assert!((u - v).abs() <= st.s * omega_frob + 1e-10);
            }
            prev_t = st.t;
            prev = st.sigma.clone();
        }
        assert!(p.total_steps < 10_000 && p.avg_iters.is_finite());
        // columns of Q are eigenvectors of A
        for j in 0..n {
            let v = p.final_q.column(j);
            let av = a.mul_vec(&v);
            let r: f64 = av.iter().zip(&v).map(|(x, y)| (x - p.eigenvalues()[j] * y).powi(2)).sum();
            assert!(r.sqrt() <= 1e-8 * frob);
        }
    }

    #[test]
    fn parallel_matches_serial() {
        let a = seeded(12, 0.2, 3);
        let serial = track(&a, &TrackerConfig::default()).unwrap();
        let cfg = TrackerConfig {
            parallel: true,
            ..TrackerConfig::default()
        };
        assert_eq!(serial, track(&a, &cfg).unwrap());
    }

    #[test]
    fn step_limit() {
        let a = seeded(6, 0.3, 1);
        let cfg = TrackerConfig {
            max_steps: 1,
            ..TrackerConfig::default()
        };
        assert!(matches!(track(&a, &cfg), Err(Error::StepLimit(1))));
    }

    #[test]
    fn repeated_diagonal_collapses() {
        let a = SymMatrix::from_rows(&[vec![1.0, 0.1], vec![0.1, 1.0]]).unwrap();
        assert!(matches!(
            track(&a, &TrackerConfig::default()),
            Err(Error::CollapsedGap { .. })
        ));
    }
}
