//! Composite trust-region step.

use crate::linalg::{Matrix, Vector};
use crate::subsolvers::{normal_subproblem, tcg_bound, tcg_linear, QuadObjective};

/// Fraction of the reduced radius granted to the normal step.
pub const NORMAL_FRACTION: f64 = 0.8;

/// Constraints linearized at the current iterate: `c + Aᵀd ≤ 0` and
/// `c_eq + A_eqᵀd = 0`, one gradient per constraint.
#[derive(Debug, Clone, Default)]
pub struct Linearization {
    pub ub_grads: Vec<Vector>,
    pub ub_values: Vec<f64>,
    pub eq_grads: Vec<Vector>,
    pub eq_values: Vec<f64>,
}

impl Linearization {
    pub fn is_empty(&self) -> bool {
        self.ub_grads.is_empty() && self.eq_grads.is_empty()
    }

    /// Euclidean violation `Φ(d)` of the linearized constraints.
    pub fn violation(&self, d: &Vector) -> f64 {
        let a: f64 = self.ub_grads.iter().zip(&self.ub_values).map(|(g, &c)| (c + g.dot(d)).max(0.0).powi(2)).sum();
        let b: f64 = self.eq_grads.iter().zip(&self.eq_values).map(|(g, &c)| (c + g.dot(d)).powi(2)).sum();
        (a + b).sqrt()
    }

    /// Largest violation of the linearized constraints at `d`.
    pub fn max_violation(&self, d: &Vector) -> f64 {
        let a = self.ub_grads.iter().zip(&self.ub_values).map(|(g, &c)| c + g.dot(d)).fold(0.0, f64::max);
        self.eq_grads.iter().zip(&self.eq_values).map(|(g, &c)| (c + g.dot(d)).abs()).fold(a, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct CompositeStep {
    pub normal: Vector,
    pub tangential: Vector,
    pub step: Vector,
    /// Gradients of the constraints in the final working set of the
    /// tangential solver, equality gradients included.
    pub active_rows: Vec<Vector>,
}

fn rows_to_matrix(rows: &[Vector], n: usize) -> Matrix {
    let mut a = Matrix::zeros(rows.len(), n);
    for (i, r) in rows.iter().enumerate() {
        a.set_row(i, &r.transpose());
    }
    a
}

/// Byrd-Omojokun composite step for the SQP subproblem at the current
/// iterate. `lower` and `upper` are the bounds shifted by the iterate;
/// `feasible` skips the normal step.
pub fn trust_region_step(
    grad: &Vector,
    hess: &dyn Fn(&Vector) -> Vector,
    lin: &Linearization,
    lower: &Vector,
    upper: &Vector,
    delta: f64,
    feasible: bool,
) -> CompositeStep {
    let n = grad.len();
    if lin.is_empty() {
        let q = QuadObjective::new(grad.clone(), hess);
        let out = tcg_bound(&q, lower, upper, delta);
        let active_rows = out
            .working_set
            .iter()
            .map(|&i| {
                let mut e = Vector::zeros(n);
                e[i] = if out.step[i] >= 0.0 { 1.0 } else { -1.0 };
                e
            })
            .collect();
        return CompositeStep { normal: Vector::zeros(n), tangential: out.step.clone(), step: out.step, active_rows };
    }
    let reduced = delta / std::f64::consts::SQRT_2;
    let normal = if feasible {
        Vector::zeros(n)
    } else {
        let a_ub = rows_to_matrix(&lin.ub_grads, n);
        let b_ub = Vector::from_iterator(lin.ub_values.len(), lin.ub_values.iter().map(|c| -c));
        let a_eq = rows_to_matrix(&lin.eq_grads, n);
        let b_eq = Vector::from_iterator(lin.eq_values.len(), lin.eq_values.iter().map(|c| -c));
        normal_subproblem(&a_ub, &b_ub, &a_eq, &b_eq, lower, upper, NORMAL_FRACTION * reduced)
    };
    let radius_sq = reduced * reduced - normal.norm_squared();
    let tangential = if radius_sq > 0.0 {
        let mut rows = lin.ub_grads.clone();
        let mut rhs: Vec<f64> = lin.ub_grads.iter().zip(&lin.ub_values).map(|(g, &c)| (-c - g.dot(&normal)).max(0.0)).collect();
        for i in 0..n {
            if upper[i].is_finite() {
                let mut e = Vector::zeros(n);
                e[i] = 1.0;
                rows.push(e);
                rhs.push((upper[i] - normal[i]).max(0.0));
            }
            if lower[i].is_finite() {
                let mut e = Vector::zeros(n);
                e[i] = -1.0;
                rows.push(e);
                rhs.push((normal[i] - lower[i]).max(0.0));
            }
        }
        let q = QuadObjective::new(grad + hess(&normal), hess);
        let a = rows_to_matrix(&rows, n);
        let c = rows_to_matrix(&lin.eq_grads, n);
        let out = tcg_linear(&q, &a, &Vector::from_vec(rhs), &c, radius_sq.sqrt()).expect("right-hand side is nonnegative");
        let mut active: Vec<Vector> = out.working_set.iter().map(|&j| rows[j].clone()).collect();
        active.extend(lin.eq_grads.iter().cloned());
        (out.step, active)
    } else {
        (Vector::zeros(n), lin.eq_grads.clone())
    };
    let (tangential, active_rows) = tangential;
    let mut step = &normal + &tangential;
    for i in 0..n {
        step[i] = step[i].max(lower[i]).min(upper[i]);
    }
    CompositeStep { normal, tangential, step, active_rows }
}
