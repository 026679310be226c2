//! Numerical checks of the shape optimum.
//!
//! The objective is `F(p) = prod p_i / D(p)^d` with `p_1 = 1` fixed (it is
//! invariant under scaling). [`maximize`] searches it without derivatives,
//! [`grid_oracle`] is a brute-force cross-check for `d <= 3`, and
//! [`kkt_check`] evaluates the first-order conditions of the reformulation
//! `max F_1(p) = prod p_i / D_1(p)^d` subject to `D_j(p)^2 <= D_1(p)^2`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{diameter_candidates, enumerate_w_hat, objective, objective_over};
use crate::params::{optimal_params, ParamVector};

/// Relative tolerance on `D_j^2 - D_1^2` for a constraint to count as active.
pub const ACTIVE_TOL: f64 = 1e-9;
/// Step of the central differences used to cross-check gradients.
pub const FD_STEP: f64 = 1e-6;

const SEED: u64 = 0x5eed_0f_7e55e11a;
const MAX_SWEEPS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    /// Best point found, normalized to `p_1 = 1`.
    pub p_hat: ParamVector,
    pub f_value: f64,
    /// Coordinate sweeps summed over all starts.
    pub iterations: usize,
    pub starts: usize,
    pub converged: bool,
}

fn with_unit_head(tail: &[f64]) -> Result<ParamVector> {
    let mut v = Vec::with_capacity(tail.len() + 1);
    v.push(1.0);
    v.extend_from_slice(tail);
    ParamVector::new(v)
}

fn eval_tail(tail: &[f64]) -> f64 {
    with_unit_head(tail)
        .and_then(|p| objective(&p))
        .unwrap_or(f64::NEG_INFINITY)
}

/// Projected coordinate search from one start; returns `(point, value, sweeps, converged)`.
fn coordinate_search(mut x: Vec<f64>, tol: f64) -> (Vec<f64>, f64, usize, bool) {
    let mut fx = eval_tail(&x);
    let mut step = 0.5;
    let mut sweeps = 0;
    while step >= tol {
        if sweeps >= MAX_SWEEPS {
            return (x, fx, sweeps, false);
        }
        sweeps += 1;
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let old = x[i];
                x[i] = (old + dir * step).max(tol);
                let f = eval_tail(&x);
                if f > fx {
                    fx = f;
                    improved = true;
                    break;
                }
                x[i] = old;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx, sweeps, true)
}

/// Multistart derivative-free maximization of the objective over
/// `(p_2, ..., p_d)` with `p_1 = 1`.
///
/// Starts are scattered uniformly in `[0.1, 2]^{d-1}` by a fixed-seed
/// generator, so results are reproducible.
pub fn maximize(d: usize, starts: usize, tol: f64) -> Result<OptimizeResult> {
    if d < 2 {
        return Err(Error::InvalidDimension {
            got: d,
            reason: "the objective needs d >= 2",
        });
    }
    if starts == 0 {
        return Err(Error::Unsupported("at least one start is required".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Unsupported(format!("tolerance {tol} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ d as u64);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut iterations = 0;
    let mut converged = true;
    for _ in 0..starts {
        let x0: Vec<f64> = (1..d).map(|_| rng.random_range(0.1..=2.0)).collect();
        let (x, fx, sweeps, ok) = coordinate_search(x0, tol);
        iterations += sweeps;
        converged &= ok;
        if best.as_ref().map_or(true, |(_, fb)| fx > *fb) {
            best = Some((x, fx));
        }
    }
    let (x, _) = best.expect("at least one start");
    let p_hat = with_unit_head(&x)?;
    Ok(OptimizeResult {
        f_value: objective(&p_hat)?,
        p_hat,
        iterations,
        starts,
        converged,
    })
}

/// Exhaustive grid over `[0.05, 2]^{d-1}` followed by one finer grid around
/// the best node. The objective is evaluated over the full candidate class
/// set rather than the dominating classes.
pub fn grid_oracle(d: usize, resolution: usize) -> Result<ParamVector> {
    if !(2..=3).contains(&d) {
        return Err(Error::InvalidDimension {
            got: d,
            reason: "the grid oracle covers d = 2 and d = 3",
        });
    }
    if resolution < 100 {
        return Err(Error::Unsupported(format!(
            "grid resolution {resolution} is below 100"
        )));
    }
    let classes = enumerate_w_hat(d)?;
    let eval = |tail: &[f64]| {
        with_unit_head(tail)
            .and_then(|p| objective_over(&p, &classes))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let (lo, hi) = (0.05, 2.0);
    let h = (hi - lo) / (resolution - 1) as f64;
    let axis: Vec<f64> = (0..resolution).map(|i| lo + i as f64 * h).collect();

    let search = |axes: &[Vec<f64>]| -> (Vec<f64>, f64) {
        let mut best = (Vec::new(), f64::NEG_INFINITY);
        let mut idx = vec![0usize; axes.len()];
        loop {
            let x: Vec<f64> = idx.iter().zip(axes).map(|(&i, a)| a[i]).collect();
            let f = eval(&x);
            if f > best.1 {
                best = (x, f);
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return best;
                }
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    };

    let coarse = search(&vec![axis; d - 1]);
    let fine_axes: Vec<Vec<f64>> = coarse
        .0
        .iter()
        .map(|&c| {
            let (a, b) = ((c - h).max(lo), (c + h).min(hi));
            (0..=100).map(|i| a + (b - a) * i as f64 / 100.0).collect()
        })
        .collect();
    let fine = search(&fine_axes);
    with_unit_head(if fine.1 >= coarse.1 { &fine.0 } else { &coarse.0 })
}

/// First-order optimality report at a point with `p_1 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// Indices `j >= 2` with `|D_j^2 - D_1^2| <= 1e-9 D_1^2`.
    pub active_set: Vec<usize>,
    /// `mu_2, ..., mu_d`; zero off the active set.
    pub multipliers: Vec<f64>,
    /// Max-norm defect of the stationarity equations.
    pub stationarity_residual: f64,
    /// `max_j max(0, D_j^2 - D_1^2) / D_1^2`.
    pub feasibility_violation: f64,
    /// Closed-form gradient of `F_1` with respect to `p_2, ..., p_d`.
    pub gradient: Vec<f64>,
    /// Largest gap between `gradient` and central differences, relative to
    /// the max norm of `gradient`.
    pub gradient_fd_mismatch: f64,
    /// Central-difference gradient of the max-based objective `F`.
    pub objective_fd_gradient: Vec<f64>,
}

impl KktReport {
    /// Stationary, feasible and with nonnegative multipliers.
    pub fn is_kkt_point(&self, residual_tol: f64) -> bool {
        self.stationarity_residual < residual_tol
            && self.feasibility_violation <= ACTIVE_TOL
            && self.multipliers.iter().all(|&m| m >= -1e-9)
    }
}

/// `D_1(p)^2 = p_1^2 + sum_{j >= 2} (j-1)^2 p_j^2`.
fn d1_squared(p: &[f64]) -> f64 {
    p.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = i.max(1) as f64;
            c * c * x * x
        })
        .sum()
}

/// `F_1(p) = prod_{i>=2} p_i / D_1(p)^d`.
fn f1(p: &[f64]) -> f64 {
    let d = p.len() as i32;
    p[1..].iter().product::<f64>() / d1_squared(p).sqrt().powi(d)
}

/// `dF_1/dp_j = F_1 (1/p_j - d (j-1)^2 p_j / D_1^2)` for `j = 2..=d`.
pub fn f1_gradient(p: &ParamVector) -> Vec<f64> {
    let p = p.as_slice();
    let d = p.len() as f64;
    let f = f1(p);
    let d1sq = d1_squared(p);
    (2..=p.len())
        .map(|j| {
            let pj = p[j - 1];
            let c = (j - 1) as f64;
            f * (1.0 / pj - d * c * c * pj / d1sq)
        })
        .collect()
}

fn central_difference(p: &[f64], j: usize, g: impl Fn(&[f64]) -> f64) -> f64 {
    let mut hi = p.to_vec();
    let mut lo = p.to_vec();
    hi[j - 1] += FD_STEP;
    lo[j - 1] -= FD_STEP;
    (g(&hi) - g(&lo)) / (2.0 * FD_STEP)
}

/// `d(D_i^2 - D_1^2)/dp_j` with `p_1 = 1`.
fn constraint_derivative(p: &[f64], i: usize, j: usize) -> f64 {
    let pj = p[j - 1];
    let c = (j - 1) as f64;
    match j.cmp(&i) {
        std::cmp::Ordering::Less => -2.0 * c * c * pj,
        std::cmp::Ordering::Equal => 2.0 * (2.0 * j as f64 - 1.0) * pj,
        std::cmp::Ordering::Greater => 0.0,
    }
}

/// Evaluates the first-order conditions at `p`.
///
/// Multipliers on the active set are the least-squares solution of the
/// stationarity equations `grad F_1 = sum_i mu_i grad(D_i^2 - D_1^2)`.
pub fn kkt_check(p: &ParamVector) -> Result<KktReport> {
    let d = p.dim();
    if d < 2 {
        return Err(Error::InvalidDimension {
            got: d,
            reason: "the optimality system needs d >= 2",
        });
    }
    if (p.get(1) - 1.0).abs() > 1e-15 {
        return Err(Error::InvalidParameter {
            index: 1,
            value: p.get(1),
        });
    }
    let x = p.as_slice();
    let ds = diameter_candidates(p)?;
    let d1sq = ds[0] * ds[0];
    let active_set: Vec<usize> = (2..=d)
        .filter(|&j| (ds[j - 1] * ds[j - 1] - d1sq).abs() <= ACTIVE_TOL * d1sq)
        .collect();
    let feasibility_violation = (2..=d)
        .map(|j| ((ds[j - 1] * ds[j - 1] - d1sq) / d1sq).max(0.0))
        .fold(0.0, f64::max);

    let gradient = f1_gradient(p);
    // relative to the gradient's max norm: components vanish at the optimum
    let scale = gradient.iter().fold(0.0f64, |m, g| m.max(g.abs())).max(1e-300);
    let gradient_fd_mismatch = (2..=d)
        .map(|j| (central_difference(x, j, f1) - gradient[j - 2]).abs() / scale)
        .fold(0.0, f64::max);
    let objective_fd_gradient = (2..=d)
        .map(|j| {
            central_difference(x, j, |y| {
                ParamVector::new(y.to_vec())
                    .and_then(|q| objective(&q))
                    .unwrap_or(f64::NAN)
            })
        })
        .collect();

    let rows = d - 1;
    let mut multipliers = vec![0.0; rows];
    if !active_set.is_empty() {
        let a = DMatrix::from_fn(rows, active_set.len(), |r, c| {
            constraint_derivative(x, active_set[c], r + 2)
        });
        let b = DVector::from_column_slice(&gradient);
        let svd = a.svd(true, true);
        let mu = svd
            .solve(&b, 1e-14)
            .map_err(|e| Error::Unsupported(format!("multiplier solve failed: {e}")))?;
        for (c, &i) in active_set.iter().enumerate() {
            multipliers[i - 2] = mu[c];
        }
    }
    let stationarity_residual = (2..=d)
        .map(|j| {
            let rhs: f64 = (2..=d)
                .map(|i| multipliers[i - 2] * constraint_derivative(x, i, j))
                .sum();
            (gradient[j - 2] - rhs).abs()
        })
        .fold(0.0, f64::max);

    Ok(KktReport {
        active_set,
        multipliers,
        stationarity_residual,
        feasibility_violation,
        gradient,
        gradient_fd_mismatch,
        objective_fd_gradient,
    })
}

/// The point where `grad F_1` vanishes with every multiplier zero:
/// `p_j = D_1 / ((j-1) sqrt(d))`, which with `p_1 = 1` forces `D_1^2 = d`.
pub fn unconstrained_stationary_point(d: usize) -> Result<ParamVector> {
    if d < 2 {
        return Err(Error::InvalidDimension {
            got: d,
            reason: "needs d >= 2",
        });
    }
    let d1 = (d as f64).sqrt();
    let mut v = vec![1.0];
    v.extend((2..=d).map(|j| d1 / ((j - 1) as f64 * (d as f64).sqrt())));
    ParamVector::new(v)
}

/// Parameters forced by a single active constraint `D_1 = D_k`, expressed
/// through the common diameter `dk`.
pub fn single_active_parameters(d: usize, k: usize, dk: f64) -> Result<Vec<f64>> {
    if d < 2 || k < 2 || k > d {
        return Err(Error::InvalidDimension {
            got: k,
            reason: "active index must satisfy 2 <= k <= d",
        });
    }
    let (df, kf) = (d as f64, k as f64);
    let mut v = vec![1.0];
    for j in 2..=d {
        let c = (j - 1) as f64;
        let pj = match j.cmp(&k) {
            std::cmp::Ordering::Less => {
                2f64.sqrt() * dk / (c * (df * kf).sqrt()) * ((2.0 * kf - 1.0) / (kf - 1.0)).sqrt()
            }
            std::cmp::Ordering::Equal => dk / (df * kf).sqrt(),
            std::cmp::Ordering::Greater => dk / (c * df.sqrt()),
        };
        v.push(pj);
    }
    Ok(v)
}

/// Shrinks `p_2, ..., p_d` by `1 + delta`, keeping `p_1`.
///
/// When the diameter is attained by some `D_k` with `k >= 2` this raises the
/// objective by exactly the factor `1 + delta` for small `delta`.
pub fn shrink_tail(p: &ParamVector, delta: f64) -> Result<ParamVector> {
    let mut v = p.as_slice().to_vec();
    for x in v.iter_mut().skip(1) {
        *x /= 1.0 + delta;
    }
    ParamVector::new(v)
}

/// Outcome of the optimum verification for one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumVerification {
    pub d: usize,
    /// `D(p*)^2 = 2d/3`.
    pub diameter_identity: bool,
    /// `D_1 = D_2` and `D_j < D_1` for `j >= 3`.
    pub active_pattern: bool,
    /// Numerical maximizer within `1e-4` of `p*`.
    pub maximizer_agrees: bool,
    /// The single-active-constraint formula at `k = 2` reproduces `p*`.
    pub general_k_formula: bool,
    /// No `k >= 3` can be the active constraint.
    pub no_higher_active: bool,
    pub failures: Vec<String>,
}

impl OptimumVerification {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the closed-form optimum from several independent angles.
pub fn verify_optimum(d: usize) -> Result<OptimumVerification> {
    let p = optimal_params(d)?;
    let ds = diameter_candidates(&p)?;
    let dsq: Vec<f64> = ds.iter().map(|x| x * x).collect();
    let target = 2.0 * d as f64 / 3.0;
    let mut failures = Vec::new();

    let dmax_sq = dsq.iter().copied().fold(0.0, f64::max);
    let diameter_identity = (dmax_sq - target).abs() <= 1e-12;
    if !diameter_identity {
        failures.push(format!("D(p*)^2 = {dmax_sq}, expected {target}"));
    }

    let tie = (dsq[1] - dsq[0]).abs() <= 1e-12 * dsq[0];
    let strict = dsq[2..].iter().all(|&x| x < dsq[0]);
    let active_pattern = tie && strict;
    if !active_pattern {
        failures.push(format!("unexpected active pattern {dsq:?}"));
    }

    let opt = maximize(d, default_starts(d), 1e-10)?;
    let maximizer_agrees = opt
        .p_hat
        .as_slice()
        .iter()
        .zip(p.as_slice())
        .all(|(a, b)| (a - b).abs() <= 1e-4);
    if !maximizer_agrees {
        failures.push(format!("maximizer {:?} differs from p*", opt.p_hat.as_slice()));
    }

    let from_k2 = single_active_parameters(d, 2, target.sqrt())?;
    let general_k_formula = from_k2
        .iter()
        .zip(p.as_slice())
        .all(|(a, b)| (a - b).abs() <= 1e-12);
    if !general_k_formula {
        failures.push(format!("k = 2 formula gives {from_k2:?}"));
    }

    let mut no_higher_active = true;
    for k in 3..=d {
        let kf = k as f64;
        // the contradiction inequality (2k^2 + 9k - 5) / (k(k-1)) < 0
        let lhs = (2.0 * kf * kf + 9.0 * kf - 5.0) / (kf * (kf - 1.0));
        // and directly: with k active, D_2 would not stay below D_k
        let q = single_active_parameters(d, k, 1.0)?;
        let d2sq = 4.0 * q[1] * q[1]
            + q.iter().enumerate().skip(2).map(|(i, x)| (i * i) as f64 * x * x).sum::<f64>();
        if lhs < 0.0 || d2sq < 1.0 {
            no_higher_active = false;
            failures.push(format!("k = {k} is not excluded (lhs {lhs}, D_2^2/D^2 {d2sq})"));
        }
    }

    Ok(OptimumVerification {
        d,
        diameter_identity,
        active_pattern,
        maximizer_agrees,
        general_k_formula,
        no_higher_active,
        failures,
    })
}

/// Start count used by the CLI and verification.
pub fn default_starts(d: usize) -> usize {
    8 + 4 * d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::optimal_objective_value;

    #[test]
    fn maximize_low_dimensions() {
        let r = maximize(2, 8, 1e-10).unwrap();
        assert!((r.p_hat.get(2) - 0.5773502691896258).abs() < 1e-4);
        assert!(r.converged);
        assert_eq!(r.p_hat.get(1), 1.0);
        assert_eq!(r.f_value, objective(&r.p_hat).unwrap());
        let r = maximize(3, 12, 1e-10).unwrap();
        assert!((r.p_hat.get(2) - 0.57735).abs() < 1e-4);
        assert!((r.p_hat.get(3) - 0.40825).abs() < 1e-4);
        let r = maximize(5, default_starts(5), 1e-10).unwrap();
        assert!(r.f_value >= optimal_objective_value(5) - 1e-8);
    }

    #[test]
    fn maximize_rejects_bad_input() {
        assert!(maximize(1, 4, 1e-8).is_err());
        assert!(maximize(3, 0, 1e-8).is_err());
        assert!(maximize(3, 4, 0.0).is_err());
    }

    #[test]
    fn maximize_is_deterministic() {
        assert_eq!(maximize(4, 6, 1e-9).unwrap(), maximize(4, 6, 1e-9).unwrap());
    }

    #[test]
    fn grid() {
        let g = grid_oracle(2, 2000).unwrap();
        assert!((g.get(2) - 1.0 / 3f64.sqrt()).abs() < 2e-3);
        let g = grid_oracle(3, 400).unwrap();
        assert!((g.get(2) - 1.0 / 3f64.sqrt()).abs() < 5e-3);
        assert!((g.get(3) - (2.0f64 / 3.0).sqrt() / 2.0).abs() < 5e-3);
        assert!(objective(&g).unwrap() <= optimal_objective_value(3) + 1e-9);
        assert!(grid_oracle(4, 100).is_err());
        assert!(grid_oracle(2, 99).is_err());
    }

    #[test]
    fn kkt_at_optimum() {
        for d in 3..=5 {
            let r = kkt_check(&optimal_params(d).unwrap()).unwrap();
            assert_eq!(r.active_set, vec![2], "d = {d}");
            assert!(r.multipliers[0] > 0.0);
            assert!(r.multipliers[1..].iter().all(|&m| m == 0.0));
            assert!(r.stationarity_residual < 1e-7);
            assert!(r.gradient_fd_mismatch < 1e-5);
            assert!(r.is_kkt_point(1e-7));
        }
    }

    #[test]
    fn kkt_infeasible_unit_point() {
        let r = kkt_check(&ParamVector::unit(2).unwrap()).unwrap();
        assert!(r.active_set.is_empty());
        assert!(r.feasibility_violation > 0.0);
        assert!(!r.is_kkt_point(1e-7));
        // F itself is strictly decreasing in p_2 there: F = 1 / (4 p_2)
        assert!((r.objective_fd_gradient[0] + 0.25).abs() < 1e-6);
        assert!(kkt_check(&ParamVector::new(vec![2.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn unconstrained_point_violates_d2() {
        for d in 2..=8 {
            let p = unconstrained_stationary_point(d).unwrap();
            let g = f1_gradient(&p);
            assert!(g.iter().all(|x| x.abs() < 1e-12));
            let ds = diameter_candidates(&p).unwrap();
            let ratio = ds[1] * ds[1] / (ds[0] * ds[0]);
            assert!((ratio - (d as f64 + 2.0) / d as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn verification_passes() {
        for d in [2, 4, 6] {
            let v = verify_optimum(d).unwrap();
            assert!(v.passed(), "{:?}", v.failures);
        }
        let p = optimal_params(2).unwrap();
        let p2 = p.get(2);
        assert!((1.0 + p2 * p2 - 4.0 * p2 * p2).abs() < 1e-12);
        let ds = diameter_candidates(&optimal_params(4).unwrap()).unwrap();
        assert!(ds[2] < ds[0] && ds[3] < ds[0]);
    }
}
