//! Convergence quantities for the targeted iteration: relative gaps, the
//! scaled off-norm `α`, the linear-rate bound for strongly dominant inputs,
//! the first-order reduction factor, the diagonal-vs-eigenvalue error bound,
//! and a least-squares fit of the observed rate.

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::reference;
use crate::solver::SweepRecord;

/// Constant of the contraction bound `(2.8·1.001·α₀/γ)^ℓ·α₀`.
pub const THM2_RATE_CONSTANT: f64 = 2.8 * 1.001;
/// Growth allowance of `α_k` over the first `n` sweeps.
pub const ALPHA_GROWTH: f64 = 1.001;

/// Minimum relative gaps of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSet {
    pub gamma: f64,
    pub gamma_j: Vec<f64>,
}

/// `γ_j = min_{i≠j} |λ_i − λ_j| / (|λ_i| + |λ_j|)` and `γ = min_j γ_j`.
/// A pair of zeros contributes a gap of 0.
pub fn min_relative_gap(values: &[f64]) -> Result<GapSet> {
    let n = values.len();
    if n < 2 {
        return Err(Error::SingleEigenvalue);
    }
    let mut gamma_j = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in i + 1..n {
            let g = rel(values[i], values[j]).unwrap_or(0.0);
            gamma_j[i] = gamma_j[i].min(g);
            gamma_j[j] = gamma_j[j].min(g);
        }
    }
    let gamma = gamma_j.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GapSet { gamma, gamma_j })
}

/// `|x − y| / (|x| + |y|)`.
pub fn rel(x: f64, y: f64) -> Result<f64> {
    let denom = x.abs() + y.abs();
    if denom == 0.0 {
        return Err(Error::BothZero);
    }
    Ok((x - y).abs() / denom)
}

/// `α = off(H)`, the off-norm of the scaled matrix.
pub fn alpha(a: &SymMatrix) -> Result<f64> {
    Ok(a.scaled()?.off_norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm2Bound {
    /// `α₀ <= min(1/n, γ)/11`.
    pub applicable: bool,
    /// `(2.8·1.001·α₀/γ)^ℓ · α₀`.
    pub bound: f64,
}

/// Per-sweep contraction factor `2.8·1.001·α₀/γ`.
pub fn thm2_rate(alpha0: f64, gamma: f64) -> f64 {
    THM2_RATE_CONSTANT * alpha0 / gamma
}

pub fn thm2_applicable(alpha0: f64, gamma: f64, n: usize) -> bool {
    n >= 3 && alpha0 <= (1.0 / n as f64).min(gamma) / 11.0
}

/// Bound on `off(H(m,:))` after `ell` sweeps, valid for `1 <= ell <= n`
/// when `applicable` holds.
pub fn thm2_bound(alpha0: f64, gamma: f64, n: usize, ell: usize) -> Result<Thm2Bound> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma = {gamma} must be positive")));
    }
    if n < 3 {
        return Err(Error::InvalidArgument(format!("order {n} < 3")));
    }
    if ell == 0 || ell > n {
        return Err(Error::InvalidArgument(format!("sweep count {ell} outside 1..={n}")));
    }
    Ok(Thm2Bound {
        applicable: thm2_applicable(alpha0, gamma, n),
        bound: thm2_rate(alpha0, gamma).powi(ell as i32) * alpha0,
    })
}

/// First-order quantities for target `m`: `γ̂ = min_{p≠m} |a_mm/a_pp − 1|`
/// and `α̂₀`, the scaled off-norm of `A` with row and column `m` removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrder {
    pub gamma_hat: f64,
    pub alpha_hat0: f64,
    /// `α̂₀ / (√2·γ̂)`: predicted reduction of `off(H(m,:))` over one sweep.
    pub factor: f64,
}

/// `γ̂` alone; fails with `DegenerateGapHat` if some `a_pp == a_mm`.
pub fn gamma_hat(a: &SymMatrix, m: usize) -> Result<f64> {
    a.check_index(m)?;
    let amm = a.get(m, m);
    let mut g = f64::INFINITY;
    for p in (0..a.n()).filter(|&p| p != m) {
        let app = a.get(p, p);
        if app == 0.0 {
            return Err(Error::ZeroDiagonal(p));
        }
        if app == amm {
            return Err(Error::DegenerateGapHat(p));
        }
        g = g.min((amm / app - 1.0).abs());
    }
    Ok(g)
}

/// First-order analysis for an arbitrary target `m` (the `m = n` case with
/// `a_nn` replaced by `a_mm`).
pub fn first_order(a: &SymMatrix, m: usize) -> Result<FirstOrder> {
    a.check_index(m)?;
    let d: Vec<f64> = a.diag().iter().map(|x| x.abs()).collect();
    if let Some(i) = d.iter().position(|&x| x == 0.0) {
        return Err(Error::ZeroDiagonal(i));
    }
    let gamma_hat = gamma_hat(a, m)?;
    let mut s = 0.0;
    for i in (0..a.n()).filter(|&i| i != m) {
        for j in (0..i).filter(|&j| j != m) {
            let h = a.get(i, j);
            s += h * h / (d[i] * d[j]);
        }
    }
    let alpha_hat0 = (2.0 * s).sqrt();
    Ok(FirstOrder {
        gamma_hat,
        alpha_hat0,
        factor: alpha_hat0 / (std::f64::consts::SQRT_2 * gamma_hat),
    })
}

pub fn foa_factor(a: &SymMatrix, m: usize) -> Result<f64> {
    first_order(a, m).map(|f| f.factor)
}

/// Bound `4·off(H(i,:))²/γ` on `|a_ii − λ_i| / |a_ii|`, valid when
/// `α <= γ/(γ+3)`.
pub fn sep_bound(a_ii: f64, off_row_h: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::BoundUndefined);
    }
    if a_ii == 0.0 {
        return Err(Error::InvalidArgument("a_ii must be nonzero".into()));
    }
    Ok(4.0 * off_row_h * off_row_h / gamma)
}

/// Whether `α` is small enough for [`sep_bound`] to hold.
pub fn sep_bound_valid(alpha: f64, gamma: f64) -> bool {
    gamma > 0.0 && alpha <= gamma / (gamma + 3.0)
}

/// Per-sweep contraction factor `exp(slope)` of a least-squares line through
/// `ln(values[k])` against `k`. Fitting stops at the first value below
/// `floor`.
pub fn fit_rate_values(values: &[f64], floor: f64) -> Result<f64> {
    let mut usable = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        if v < floor {
            break;
        }
        if !(v > 0.0) {
            return Err(Error::NonpositiveValues(k));
        }
        usable.push(v.ln());
    }
    if usable.len() < 3 {
        return Err(Error::InsufficientHistory(usable.len()));
    }
    let len = usable.len() as f64;
    let mean_x = (len - 1.0) / 2.0;
    let mean_y = usable.iter().sum::<f64>() / len;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, y) in usable.iter().enumerate() {
        let dx = k as f64 - mean_x;
        sxy += dx * (y - mean_y);
        sxx += dx * dx;
    }
    Ok((sxy / sxx).exp())
}

/// Rate fit of `off(A(m,:))` over a solver history, truncated at
/// `100·ε·frob_norm`.
pub fn fit_rate(history: &[SweepRecord], frob_norm: f64) -> Result<f64> {
    let values: Vec<f64> = history.iter().map(|r| r.off_row_m).collect();
    fit_rate_values(&values, 100.0 * f64::EPSILON * frob_norm)
}

/// Where the eigenvalues behind `γ` come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    /// Full cyclic Jacobi decomposition, `O(n³)`.
    Exact,
    /// Sorted diagonal entries as eigenvalue surrogates.
    Estimated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub source: SpectrumSource,
    pub alpha0: f64,
    pub gamma: Option<f64>,
    pub gamma_m: Option<f64>,
    /// `0` when the diagonal has a repeated `a_mm`.
    pub gamma_hat: f64,
    /// `α₀ / γ_m`.
    pub rho: Option<f64>,
    pub thm2_applicable: bool,
    pub thm2_rate_bound: Option<f64>,
    /// `α̂₀/(√2·γ̂)`; `None` when `γ̂ == 0`.
    pub foa_factor: Option<f64>,
    pub fitted_rate: Option<f64>,
}

/// Diagnostics for target `m` (0-based, in sorted-diagonal order as used by
/// the solver).
pub fn diagnose(a: &SymMatrix, m: usize, source: SpectrumSource) -> Result<DiagnosticsReport> {
    a.check_index(m)?;
    let (sorted, _) = a.sort_by_diagonal();
    let alpha0 = alpha(&sorted)?;
    let (gamma_hat, foa) = match first_order(&sorted, m) {
        Ok(f) => (f.gamma_hat, Some(f.factor)),
        Err(Error::DegenerateGapHat(_)) => (0.0, None),
        Err(e) => return Err(e),
    };
    let spectrum = match source {
        SpectrumSource::Exact => reference::eigenvalues(a)?,
        SpectrumSource::Estimated => sorted.diag(),
    };
    let gaps = if spectrum.len() >= 2 {
        Some(min_relative_gap(&spectrum)?)
    } else {
        None
    };
    let gamma = gaps.as_ref().map(|g| g.gamma);
    let gamma_m = gaps.as_ref().map(|g| g.gamma_j[m]);
    let rho = gamma_m.filter(|&g| g > 0.0).map(|g| alpha0 / g);
    let n = a.n();
    let thm2_applicable = gamma.is_some_and(|g| g > 0.0 && thm2_applicable(alpha0, g, n));
    let thm2_rate_bound = gamma.filter(|&g| g > 0.0).map(|g| thm2_rate(alpha0, g));
    Ok(DiagnosticsReport {
        source,
        alpha0,
        gamma,
        gamma_m,
        gamma_hat,
        rho,
        thm2_applicable,
        thm2_rate_bound,
        foa_factor: foa,
        fitted_rate: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{self, SolveOptions};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gap_examples() {
        let g = min_relative_gap(&[1.0, 2.0, 4.0]).unwrap();
        for x in g.gamma_j.iter().chain([&g.gamma]) {
            assert_relative_eq!(*x, 1.0 / 3.0, max_relative = 1e-15);
        }
        assert_eq!(min_relative_gap(&[1.0, 1.0]).unwrap().gamma, 0.0);
        assert_eq!(min_relative_gap(&[0.0, 0.0, 1.0]).unwrap().gamma, 0.0);
        assert!(matches!(min_relative_gap(&[1.0]), Err(Error::SingleEigenvalue)));
    }

    #[test]
    fn rel_examples() {
        assert_eq!(rel(1.0, 3.0).unwrap(), 0.5);
        assert_eq!(rel(2.5, 2.5).unwrap(), 0.0);
        assert_eq!(rel(-1.0, 1.0).unwrap(), 1.0);
        assert!(matches!(rel(0.0, 0.0), Err(Error::BothZero)));
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(&SymMatrix::from_diag(&[1.0, -2.0, 3.0])).unwrap(), 0.0);
        let a = SymMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 9.0]]).unwrap();
        assert_relative_eq!(alpha(&a).unwrap(), 2f64.sqrt() / 3.0, max_relative = 1e-15);
        let z = SymMatrix::from_rows(&[vec![0.0, 2.0], vec![2.0, 9.0]]).unwrap();
        assert!(matches!(alpha(&z), Err(Error::ZeroDiagonal(0))));
    }

    #[test]
    fn thm2_examples() {
        let b = thm2_bound(0.01, 0.5, 5, 1).unwrap();
        assert!(b.applicable);
        assert_relative_eq!(b.bound, 2.8 * 1.001 * 0.01 / 0.5 * 0.01, max_relative = 1e-15);
        assert_relative_eq!(b.bound, 5.6056e-4, max_relative = 1e-12);
        assert!(!thm2_bound(0.1, 0.5, 5, 1).unwrap().applicable);
        assert!(thm2_bound(0.01, 0.5, 5, 0).is_err());
        assert!(thm2_bound(0.01, 0.0, 5, 1).is_err());
        assert!(thm2_bound(0.01, 0.5, 2, 1).is_err());
    }

    #[test]
    fn gamma_hat_example() {
        let mut a = SymMatrix::from_diag(&[1.0, 2.0, 10.0]);
        a.set(0, 1, 1e-6);
        a.set(0, 2, 2e-6);
        a.set(1, 2, -1e-6);
        let f = first_order(&a, 2).unwrap();
        assert_eq!(f.gamma_hat, 4.0);
    }

    #[test]
    fn foa_zero_for_diagonal() {
        let a = SymMatrix::from_diag(&[1.0, 2.0, 10.0]);
        assert_eq!(foa_factor(&a, 1).unwrap(), 0.0);
    }

    #[test]
    fn foa_errors() {
        let a = SymMatrix::from_diag(&[1.0, 2.0, 2.0]);
        assert!(matches!(foa_factor(&a, 2), Err(Error::DegenerateGapHat(1))));
        let a = SymMatrix::from_diag(&[0.0, 2.0, 3.0]);
        assert!(matches!(foa_factor(&a, 2), Err(Error::ZeroDiagonal(0))));
    }

    /// Builds a matrix with `diag = 1..n`, target `m = n−1`, a tiny last
    /// row, and the leading block scaled to a prescribed first-order factor.
    fn foa_construction(n: usize, factor: f64, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = SymMatrix::from_lower_fn(n, |i, j| {
            if i == j {
                (i + 1) as f64
            } else if i == n - 1 {
                rng.gen_range(-1e-6..1e-6)
            } else {
                rng.gen_range(-1.0..1.0)
            }
        });
        let f = first_order(&a, n - 1).unwrap().factor;
        let scale = factor / f;
        for i in 0..n - 1 {
            for j in 0..i {
                a.set(i, j, a.get(i, j) * scale);
            }
        }
        a
    }

    #[test]
    fn foa_predicts_one_sweep_reduction() {
        for seed in 0..50 {
            let n = 6;
            let a = foa_construction(n, 0.8, seed);
            let f = foa_factor(&a, n - 1).unwrap();
            assert_relative_eq!(f, 0.8, max_relative = 1e-12);
            let before = a.scaled_off_row(n - 1).unwrap();
            let mut work = a.clone();
            solver::sweep(&mut work, n - 1, 0.0, None).unwrap();
            let after = work.scaled_off_row(n - 1).unwrap();
            assert!(after <= f * before, "seed {seed}: {after} > {f}·{before}");
        }
    }

    #[test]
    fn sep_bound_examples() {
        assert_eq!(sep_bound(2.0, 0.0, 0.3).unwrap(), 0.0);
        assert_relative_eq!(sep_bound(1.0, 1e-3, 0.1).unwrap(), 4e-5, max_relative = 1e-12);
        assert!(matches!(sep_bound(1.0, 1e-3, 0.0), Err(Error::BoundUndefined)));
    }

    #[test]
    fn sep_bound_holds_on_random_dd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        for _ in 0..200 {
            let a = SymMatrix::from_lower_fn(8, |i, j| {
                if i == j {
                    (i + 1) as f64
                } else {
                    rng.gen_range(-0.01..0.01)
                }
            });
            let values = reference::eigenvalues(&a).unwrap();
            let gaps = min_relative_gap(&values).unwrap();
            let alpha = alpha(&a).unwrap();
            if !sep_bound_valid(alpha, gaps.gamma) {
                continue;
            }
            for i in 0..8 {
                let aii = a.get(i, i);
                let b = sep_bound(aii, a.scaled_off_row(i).unwrap(), gaps.gamma).unwrap();
                assert!((aii - values[i]).abs() / aii.abs() <= b + 1e-15);
            }
            checked += 1;
        }
        assert!(checked > 50);
    }

    #[test]
    fn fit_rate_examples() {
        let geo: Vec<f64> = (0..8).map(|k| 0.1f64.powi(k)).collect();
        assert_relative_eq!(fit_rate_values(&geo, 0.0).unwrap(), 0.1, max_relative = 1e-12);
        assert_relative_eq!(fit_rate_values(&[3.0; 5], 0.0).unwrap(), 1.0, max_relative = 1e-15);
        assert!(matches!(
            fit_rate_values(&[1.0, 0.5], 0.0),
            Err(Error::InsufficientHistory(2))
        ));
        assert!(matches!(
            fit_rate_values(&[1.0, 0.5, 0.0, 0.1], 0.0),
            Err(Error::NonpositiveValues(2))
        ));
        // truncated at the floor
        let r = fit_rate_values(&[1.0, 0.1, 0.01, 1e-20, 5.0], 1e-10).unwrap();
        assert_relative_eq!(r, 0.1, max_relative = 1e-12);
    }

    #[test]
    fn fit_rate_on_history() {
        let a = SymMatrix::from_lower_fn(6, |i, j| if i == j { (i + 1) as f64 } else { 0.01 });
        let r = solver::solve(&a, &SolveOptions::new(2).with_history()).unwrap();
        let rate = fit_rate(&r.history, a.frob_norm()).unwrap();
        assert!(rate > 0.0 && rate < 0.1);
    }

    #[test]
    fn diagnose_diagonal_input() {
        let a = SymMatrix::from_diag(&[3.0, 1.0, 2.0]);
        let r = diagnose(&a, 0, SpectrumSource::Exact).unwrap();
        assert_eq!(r.alpha0, 0.0);
        assert_eq!(r.foa_factor, Some(0.0));
        assert_relative_eq!(r.gamma.unwrap(), 0.2, max_relative = 1e-15);
    }

    #[test]
    fn diagnose_zero_diagonal_fails() {
        let a = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            diagnose(&a, 0, SpectrumSource::Estimated),
            Err(Error::ZeroDiagonal(_))
        ));
    }

    proptest! {
        #[test]
        fn gap_is_scale_and_permutation_invariant(
            mut values in proptest::collection::vec(0.1f64..100.0, 2..10),
            c in 0.01f64..100.0,
            rot in 0usize..10,
        ) {
            let base = min_relative_gap(&values).unwrap();
            let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
            let s = min_relative_gap(&scaled).unwrap();
            prop_assert!((s.gamma - base.gamma).abs() <= 1e-12);
            let len = values.len();
            values.rotate_left(rot % len);
            let r = min_relative_gap(&values).unwrap();
            prop_assert!((r.gamma - base.gamma).abs() <= 1e-15);
            prop_assert!(base.gamma_j.iter().all(|g| (0.0..=1.0).contains(g)));
        }

        #[test]
        fn alpha_is_invariant_under_positive_scaling(
            seed in 0u64..1000,
            s in proptest::collection::vec(0.1f64..10.0, 6),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = SymMatrix::from_lower_fn(6, |i, j| {
                if i == j { rng.gen_range(1.0..5.0) } else { rng.gen_range(-1.0..1.0) }
            });
            let sas = SymMatrix::from_lower_fn(6, |i, j| s[i] * a.get(i, j) * s[j]);
            let x = alpha(&a).unwrap();
            let y = alpha(&sas).unwrap();
            prop_assert!((x - y).abs() <= 8.0 * 6.0 * f64::EPSILON * x.max(1.0));
        }

        #[test]
        fn applicable_rate_is_at_most_026(alpha0 in 0f64..0.2, gamma in 1e-3f64..1.0, n in 3usize..50) {
            let b = thm2_bound(alpha0, gamma, n, 1).unwrap();
            if b.applicable {
                prop_assert!(thm2_rate(alpha0, gamma) <= 0.26 + 1e-12);
            }
        }
    }
}
