//! Convergence test, performance profiles and data profiles.

/// Violations at or below this level count as feasible.
pub const FEASIBLE_CV: f64 = 1e-10;
/// Violations at or above this level make the merit infinite.
pub const INFEASIBLE_CV: f64 = 1e-5;
pub const MERIT_PENALTY: f64 = 1e5;

/// Largest constraint violation of one evaluation.
pub fn max_violation(cub: &[f64], ceq: &[f64]) -> f64 {
    let v = cub.iter().fold(0.0f64, |a, &c| a.max(c));
    ceq.iter().fold(v, |a, &c| a.max(c.abs()))
}

pub fn benchmark_merit(f: f64, cub: &[f64], ceq: &[f64]) -> f64 {
    let v = max_violation(cub, ceq);
    if v.is_nan() || f.is_nan() || v >= INFEASIBLE_CV {
        f64::INFINITY
    } else if v <= FEASIBLE_CV {
        f
    } else {
        f + MERIT_PENALTY * v
    }
}

/// One-based index of the first merit value with
/// `φ ≤ φ* + τ(φ₀ − φ*)`, or `None`. Infinite merits never pass.
pub fn converged_at(history: &[f64], phi0: f64, phi_star: f64, tau: f64) -> Option<usize> {
    let threshold = if tau == 0.0 || phi0 == phi_star { phi_star } else { phi_star + tau * (phi0 - phi_star) };
    history.iter().position(|&phi| phi.is_finite() && phi <= threshold).map(|i| i + 1)
}

/// Evaluations needed by each solver on each problem for one tolerance,
/// `∞` when the problem was not solved.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcomes {
    pub tau: f64,
    /// Problem ids with their dimensions.
    pub problems: Vec<(String, usize)>,
    pub solvers: Vec<String>,
    /// `t[p][s]`.
    pub t: Vec<Vec<f64>>,
}

impl Outcomes {
    /// Fraction of problems solved by solver `s`.
    pub fn solved_fraction(&self, s: usize) -> f64 {
        if self.problems.is_empty() {
            return 0.0;
        }
        self.t.iter().filter(|row| row[s].is_finite()).count() as f64 / self.problems.len() as f64
    }
}

/// Step functions sampled at their jump points; `fractions[s][k]` is the
/// value of solver `s` at `alphas[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub tau: f64,
    pub solvers: Vec<String>,
    pub alphas: Vec<f64>,
    pub fractions: Vec<Vec<f64>>,
}

impl ProfileCurve {
    /// Value of the step function of solver `s` at `alpha`.
    pub fn value_at(&self, s: usize, alpha: f64) -> f64 {
        match self.alphas.iter().rposition(|&a| a <= alpha) {
            Some(k) => self.fractions[s][k],
            None => 0.0,
        }
    }
}

fn fraction_at_most(values: &[f64], alpha: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v <= alpha).count() as f64 / values.len() as f64
}

fn step_curve(tau: f64, solvers: &[String], per_solver: &[Vec<f64>], mut alphas: Vec<f64>) -> ProfileCurve {
    alphas.extend(per_solver.iter().flatten().copied().filter(|v| v.is_finite()));
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let fractions = per_solver.iter().map(|vals| alphas.iter().map(|&a| fraction_at_most(vals, a)).collect()).collect();
    ProfileCurve { tau, solvers: solvers.to_vec(), alphas, fractions }
}

/// `ρ_s(α)`: fraction of problems whose ratio `t_{p,s} / min_u t_{p,u}` is
/// at most `α`, sampled from `α = 1`.
pub fn performance_profile(out: &Outcomes) -> ProfileCurve {
    let ns = out.solvers.len();
    let mut ratios = vec![Vec::with_capacity(out.problems.len()); ns];
    for row in &out.t {
        let best = row.iter().copied().fold(f64::INFINITY, f64::min);
        for s in 0..ns {
            ratios[s].push(if row[s].is_finite() { row[s] / best } else { f64::INFINITY });
        }
    }
    step_curve(out.tau, &out.solvers, &ratios, vec![1.0])
}

/// `d_s(α)`: fraction of problems solved within `α(n_p + 1)` evaluations,
/// sampled from `α = 0`.
pub fn data_profile(out: &Outcomes) -> ProfileCurve {
    let ns = out.solvers.len();
    let mut budgets = vec![Vec::with_capacity(out.problems.len()); ns];
    for (row, (_, n)) in out.t.iter().zip(&out.problems) {
        for s in 0..ns {
            budgets[s].push(row[s] / (*n as f64 + 1.0));
        }
    }
    step_curve(out.tau, &out.solvers, &budgets, vec![0.0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merit_branches() {
        assert_eq!(benchmark_merit(3.0, &[-1.0], &[]), 3.0);
        assert_eq!(benchmark_merit(3.0, &[1e-3], &[]), f64::INFINITY);
        assert!((benchmark_merit(1.0, &[], &[-1e-7]) - 1.01).abs() < 1e-12);
    }

    #[test]
    fn convergence_index() {
        let h = [10.0, 5.0, 0.009, 0.0];
        assert_eq!(converged_at(&h, 10.0, 0.0, 1e-3), Some(3));
        assert_eq!(converged_at(&h, 10.0, 0.0, 1.0), Some(1));
        assert_eq!(converged_at(&h, 10.0, 0.0, 0.0), Some(4));
        assert_eq!(converged_at(&[f64::INFINITY], f64::INFINITY, f64::INFINITY, 0.1), None);
    }

    fn outcomes(t: Vec<Vec<f64>>, dims: Vec<usize>) -> Outcomes {
        let ns = t[0].len();
        Outcomes {
            tau: 0.1,
            problems: dims.into_iter().enumerate().map(|(i, n)| (format!("p{i}"), n)).collect(),
            solvers: (0..ns).map(|s| format!("s{s}")).collect(),
            t,
        }
    }

    #[test]
    fn performance_profile_of_two_solvers() {
        let c = performance_profile(&outcomes(vec![vec![10.0, 20.0]], vec![2]));
        assert_eq!(c.alphas, vec![1.0, 2.0]);
        assert_eq!(c.fractions[0], vec![1.0, 1.0]);
        assert_eq!(c.fractions[1], vec![0.0, 1.0]);
        assert_eq!(c.value_at(1, 1.999), 0.0);
    }

    #[test]
    fn single_solver_profile_is_flat() {
        let c = performance_profile(&outcomes(vec![vec![5.0], vec![f64::INFINITY]], vec![2, 2]));
        assert_eq!(c.fractions[0], vec![0.5]);
    }

    #[test]
    fn data_profile_counts_simplex_gradients() {
        let c = data_profile(&outcomes(vec![vec![25.0]], vec![4]));
        assert_eq!(c.alphas, vec![0.0, 5.0]);
        assert_eq!(c.fractions[0], vec![0.0, 1.0]);
        assert_eq!(c.value_at(0, 4.99), 0.0);
    }
}
