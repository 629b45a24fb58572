//! Scalar update rules of the trust-region loop.

use crate::linalg::Vector;
use crate::problem::{violation_l2, EvalRecord};

const ETA1: f64 = 0.1;
const ETA2: f64 = 0.7;
const ETA3: f64 = 16.0;
const ETA4: f64 = 250.0;
const THETA1: f64 = 0.5;
const THETA2: f64 = 1.4;
const THETA3: f64 = std::f64::consts::SQRT_2;
const THETA4: f64 = 2.0;
const THETA5: f64 = 0.1;
const PENALTY_TRIGGER: f64 = 1.5;
const PENALTY_FACTOR: f64 = 2.0;
/// Ratio below which a step counts as poor for the model swap.
pub const SWAP_RATIO: f64 = 0.01;
/// Gradient-norm ratio above which the least Frobenius norm models are preferred.
pub const SWAP_GRADIENT_FACTOR: f64 = 10.0;
pub const SWAP_STREAK: usize = 3;
/// Violations up to this size count as rounding when selecting the solution.
pub const ROUNDOFF_VIOLATION: f64 = 1e-12;

/// ℓ2 merit `f + γ ‖([c_ub]₊, c_eq)‖`.
pub fn merit_actual(f: f64, cub: &[f64], ceq: &[f64], gamma: f64) -> f64 {
    if gamma == 0.0 {
        f
    } else {
        f + gamma * violation_l2(cub, ceq)
    }
}

/// Model merit `gᵀd + ½ dᵀHd + γ Φ(d)` from its pieces.
pub fn merit_model(quad: f64, phi: f64, gamma: f64) -> f64 {
    quad + gamma * phi
}

/// Smallest penalty making the model merit of `d` no larger than at zero,
/// given `quad = gᵀd + ½ dᵀHd`, `phi0 = Φ(0)` and `phid = Φ(d)`.
pub fn penalty_threshold(quad: f64, phi0: f64, phid: f64) -> f64 {
    if phi0 - phid <= 0.0 {
        0.0
    } else {
        (quad / (phi0 - phid)).max(0.0)
    }
}

/// Increases the penalty parameter when it is not comfortably above both
/// the threshold and the multiplier norm.
pub fn penalty_increase(gamma_prev: f64, gamma_bar: f64, lambda_norm: f64) -> f64 {
    let floor = gamma_bar.max(lambda_norm);
    if gamma_prev <= PENALTY_TRIGGER * floor {
        PENALTY_FACTOR * floor
    } else {
        gamma_prev
    }
}

pub fn update_radius(delta: f64, resolution: f64, ratio: f64, step_norm: f64) -> f64 {
    let next = if ratio <= ETA1 {
        THETA1 * delta
    } else if ratio <= ETA2 {
        (THETA1 * delta).max(step_norm)
    } else {
        (THETA3 * delta).min((THETA1 * delta).max(THETA4 * step_norm))
    };
    clamp_to_resolution(next, resolution)
}

/// Replaces radii close to the resolution by the resolution itself.
pub fn clamp_to_resolution(delta: f64, resolution: f64) -> f64 {
    if delta <= THETA2 * resolution {
        resolution
    } else {
        delta
    }
}

/// Reduces the resolution `δ` towards `final_resolution`, returning the new
/// resolution and radius, or `None` once the final resolution is reached.
pub fn reduce_resolution(resolution: f64, delta: f64, final_resolution: f64) -> Option<(f64, f64)> {
    if resolution <= final_resolution {
        return None;
    }
    let ratio = resolution / final_resolution;
    let next = if ratio > ETA4 {
        THETA5 * resolution
    } else if ratio > ETA3 {
        (resolution * final_resolution).sqrt()
    } else {
        final_resolution
    };
    Some((next, delta.max(next)))
}

/// Lowers the penalty parameter from the spread of the objective and
/// constraint values over the interpolation set. Equalities count as two
/// inequalities. `cub[i]` and `ceq[i]` hold the values at point `i`.
pub fn penalty_reduce(fvals: &[f64], cub: &[Vec<f64>], ceq: &[Vec<f64>], gamma: f64) -> f64 {
    let finite = |v: f64| if v.is_finite() { Some(v) } else { None };
    let fmax = fvals.iter().filter_map(|&v| finite(v)).fold(f64::NEG_INFINITY, f64::max);
    let fmin = fvals.iter().filter_map(|&v| finite(v)).fold(f64::INFINITY, f64::min);
    let mi = cub.first().map_or(0, |c| c.len());
    let me = ceq.first().map_or(0, |c| c.len());
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(mi + 2 * me);
    for j in 0..mi {
        columns.push(cub.iter().map(|c| c[j]).collect());
    }
    for j in 0..me {
        columns.push(ceq.iter().map(|c| c[j]).collect());
        columns.push(ceq.iter().map(|c| -c[j]).collect());
    }
    let mut denom = f64::INFINITY;
    let mut important = false;
    for col in &columns {
        let cmin = col.iter().copied().fold(f64::INFINITY, f64::min);
        let cmax = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if cmin < 2.0 * cmax {
            important = true;
            let neg_min = col.iter().map(|&c| c.min(0.0)).fold(f64::INFINITY, f64::min);
            denom = denom.min(cmax - neg_min);
        }
    }
    if !important {
        return 0.0;
    }
    if !(denom > 0.0) || !(fmax >= fmin) {
        return gamma;
    }
    let ratio = (fmax - fmin) / denom;
    if ratio.is_nan() {
        gamma
    } else {
        gamma.min(ratio)
    }
}

/// Index maximizing `|σ_i| ‖y_i − x̄‖⁴`, skipping `exclude`. Ties go to the
/// lowest index.
pub fn select_removal(sigma: &Vector, distances: &[f64], exclude: Option<usize>) -> usize {
    let mut best = None;
    let mut best_score = f64::NEG_INFINITY;
    for i in 0..sigma.len() {
        if Some(i) == exclude {
            continue;
        }
        let score = sigma[i].abs() * distances[i].powi(4);
        let score = if score.is_nan() { 0.0 } else { score };
        if best.is_none() || score > best_score {
            best = Some(i);
            best_score = score;
        }
    }
    best.expect("at least two interpolation points")
}

/// Position in `records` of the returned solution: among the records whose
/// violation is at most twice the least one (or at most
/// [`ROUNDOFF_VIOLATION`]), the merit minimizer, ties going
/// to the smaller violation, then the smaller objective, then the earlier
/// evaluation.
pub fn select_best(records: &[EvalRecord], gamma: f64) -> usize {
    assert!(!records.is_empty());
    let min_cv = records.iter().map(|r| r.maxcv).fold(f64::INFINITY, f64::min);
    let key = |r: &EvalRecord| {
        let phi = merit_actual(r.f, &r.cub, &r.ceq, gamma);
        (if phi.is_nan() { f64::INFINITY } else { phi }, r.maxcv, r.f)
    };
    let mut best: Option<usize> = None;
    for (i, r) in records.iter().enumerate() {
        if !(r.maxcv <= (2.0 * min_cv).max(ROUNDOFF_VIOLATION)) {
            continue;
        }
        match best {
            None => best = Some(i),
            Some(b) => {
                let (pi, ci, fi) = key(r);
                let (pb, cb, fb) = key(&records[b]);
                if pi < pb || (pi == pb && (ci < cb || (ci == cb && fi < fb))) {
                    best = Some(i);
                }
            }
        }
    }
    best.unwrap_or(0)
}

/// Streak counter deciding when to replace the models by their least
/// Frobenius norm counterparts.
#[derive(Debug, Clone, Default)]
pub struct SwapTracker {
    pub count: usize,
}

impl SwapTracker {
    /// Records one iteration and returns true when the swap is due, which
    /// also restarts the streak.
    pub fn observe(&mut self, at_resolution: bool, ratio: f64, grad_norm: f64, min_frobenius_grad_norm: f64) -> bool {
        if at_resolution && ratio <= SWAP_RATIO && grad_norm >= SWAP_GRADIENT_FACTOR * min_frobenius_grad_norm {
            self.count += 1;
        } else {
            self.count = 0;
        }
        if self.count >= SWAP_STREAK {
            self.count = 0;
            true
        } else {
            false
        }
    }
}
