use super::nnls::nnls;
use super::{QuadObjective, TcgOutcome, TcgStatus, SMALL_REDUCTION};
use crate::error::{Error, Result};
use crate::linalg::{masked_norm, step_to_boundary, Matrix, RowSpace, Vector};

/// Constraints whose residual is within this fraction of the radius (scaled
/// by the row norm) count as nearly active.
pub const NEAR_ACTIVE_FACTOR: f64 = 0.2;

/// Closest vector to `g` in the cone `{s : a_jᵀs ≤ 0, C s = 0}`, together
/// with the multipliers of the rows `a_j`.
pub fn project_polar(g: &Vector, rows: &[Vector], eq_rows: &[Vector]) -> (Vector, Vector) {
    let n = g.len();
    let k = rows.len() + eq_rows.len();
    if k == 0 {
        return (g.clone(), Vector::zeros(0));
    }
    let mut a = Matrix::zeros(n, k);
    for (j, r) in rows.iter().chain(eq_rows).enumerate() {
        a.set_column(j, r);
    }
    let lam = nnls(&a, g, rows.len());
    let p = g - &a * &lam;
    (p, lam.rows(0, rows.len()).into_owned())
}

struct LinearTcg<'a> {
    q: &'a QuadObjective<'a>,
    rows: Vec<Vector>,
    b: Vector,
    eq_rows: Vec<Vector>,
    delta: f64,
    mask: Option<&'a [bool]>,
}

impl LinearTcg<'_> {
    /// Search direction and working set from the nearly active constraints at `s`.
    fn restart(&self, s: &Vector, grad: &Vector) -> (Vector, Vec<usize>, RowSpace) {
        let near: Vec<usize> = (0..self.rows.len())
            .filter(|&j| {
                let resid = self.b[j] - self.rows[j].dot(s);
                resid <= NEAR_ACTIVE_FACTOR * self.delta * masked_norm(&self.rows[j], self.mask)
            })
            .collect();
        let near_rows: Vec<Vector> = near.iter().map(|&j| self.rows[j].clone()).collect();
        let (p, lam) = project_polar(&(-grad), &near_rows, &self.eq_rows);
        let pn = p.norm();
        let working: Vec<usize> = near
            .iter()
            .enumerate()
            .filter(|(k, &j)| lam[*k] > 0.0 || self.rows[j].dot(&p).abs() <= 1e-10 * self.rows[j].norm() * pn)
            .map(|(_, &j)| j)
            .collect();
        let space = RowSpace::new(s.len(), working.iter().map(|&j| &self.rows[j]).chain(self.eq_rows.iter()));
        (p, working, space)
    }

    fn solve(&self, s0: Vector) -> TcgOutcome {
        let q = self.q;
        let mut s = s0;
        let mut grad = &q.grad + (q.hess)(&s);
        let q0 = q.value(&s);
        let mut qval = q0;
        let gnorm0 = grad.norm();
        let mut iterates = vec![s.clone()];
        let (mut p, mut working, mut space) = self.restart(&s, &grad);
        let mut pgsq = space.project_out(&grad).norm_squared();
        let cap = 10 * (s.len() + self.rows.len() + 1);
        let mut status = TcgStatus::Converged;
        let mut iter = 0;
        loop {
            let gp = grad.dot(&p);
            if gp >= 0.0 || p.norm() <= 1e-10 * gnorm0 {
                break;
            }
            if iter >= cap {
                status = TcgStatus::Budget;
                break;
            }
            iter += 1;
            let a_delta = step_to_boundary(&s, &p, self.delta, self.mask);
            if a_delta * gp.abs() <= SMALL_REDUCTION * (q0 - qval) {
                break;
            }
            let hp = (q.hess)(&p);
            let curv = p.dot(&hp);
            let a_q = if curv > 0.0 { -gp / curv } else { f64::INFINITY };
            let mut a_l = f64::INFINITY;
            for j in (0..self.rows.len()).filter(|j| !working.contains(j)) {
                let ap = self.rows[j].dot(&p);
                if ap > 0.0 {
                    a_l = a_l.min(((self.b[j] - self.rows[j].dot(&s)).max(0.0)) / ap);
                }
            }
            let alpha = a_q.min(a_delta).min(a_l);
            if !alpha.is_finite() {
                break;
            }
            s.axpy(alpha, &p, 1.0);
            grad.axpy(alpha, &hp, 1.0);
            let qnew = qval + alpha * gp + 0.5 * alpha * alpha * curv;
            iterates.push(s.clone());
            if alpha >= a_delta {
                qval = qnew;
                status = TcgStatus::Boundary;
                break;
            }
            let small = qval - qnew <= SMALL_REDUCTION * (q0 - qnew);
            qval = qnew;
            if small {
                break;
            }
            if alpha < a_l {
                let pg = space.project_out(&grad);
                let pgsq_new = pg.norm_squared();
                p = -pg + (pgsq_new / pgsq) * p;
                pgsq = pgsq_new;
            } else {
                (p, working, space) = self.restart(&s, &grad);
                pgsq = space.project_out(&grad).norm_squared();
            }
        }
        TcgOutcome { step: s, working_set: working, status, reduction: q0 - qval, iterates }
    }
}

fn rows_of(a: &Matrix) -> Vec<Vector> {
    a.row_iter().map(|r| r.transpose()).collect()
}

/// Truncated conjugate gradient method for `min Q(s)` subject to
/// `A s ≤ b`, `C s = 0` and `‖s‖ ≤ delta`, with `b ≥ 0`.
pub fn tcg_linear(q: &QuadObjective, a: &Matrix, b: &Vector, c: &Matrix, delta: f64) -> Result<TcgOutcome> {
    if b.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::Internal("linear TCG requires a feasible origin".into()));
    }
    let solver = LinearTcg { q, rows: rows_of(a), b: b.clone(), eq_rows: rows_of(c), delta, mask: None };
    Ok(solver.solve(Vector::zeros(q.n())))
}

/// Approximate minimizer of `‖[Â z − b̂]₊‖² + ‖Ǎ z − b̌‖²` subject to
/// `l ≤ z ≤ u` and `‖z‖ ≤ delta`, through a smooth reformulation with one
/// slack variable per inequality.
pub fn normal_subproblem(a_ub: &Matrix, b_ub: &Vector, a_eq: &Matrix, b_eq: &Vector, lower: &Vector, upper: &Vector, delta: f64) -> Vector {
    let n = lower.len();
    let m1 = a_ub.nrows();
    let dim = n + m1;
    let objective_at_zero = b_ub.iter().map(|&v| v.min(0.0).powi(2)).sum::<f64>() + b_eq.norm_squared();
    if objective_at_zero == 0.0 || delta <= 0.0 {
        return Vector::zeros(n);
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for j in 0..m1 {
        let mut r = Vector::zeros(dim);
        r.rows_mut(0, n).copy_from(&a_ub.row(j).transpose());
        r[n + j] = -1.0;
        rows.push(r);
        rhs.push(b_ub[j]);
    }
    for j in 0..m1 {
        let mut r = Vector::zeros(dim);
        r[n + j] = -1.0;
        rows.push(r);
        rhs.push(0.0);
    }
    for i in 0..n {
        if upper[i].is_finite() {
            let mut r = Vector::zeros(dim);
            r[i] = 1.0;
            rows.push(r);
            rhs.push(upper[i]);
        }
        if lower[i].is_finite() {
            let mut r = Vector::zeros(dim);
            r[i] = -1.0;
            rows.push(r);
            rhs.push(-lower[i]);
        }
    }
    let mut grad = Vector::zeros(dim);
    grad.rows_mut(0, n).copy_from(&(a_eq.tr_mul(b_eq) * -2.0));
    let hess = |v: &Vector| {
        let mut out = v * 2.0;
        let z = v.rows(0, n).into_owned();
        out.rows_mut(0, n).copy_from(&(a_eq.tr_mul(&(a_eq * z)) * 2.0));
        out
    };
    let q = QuadObjective::new(grad, &hess);
    let mask: Vec<bool> = (0..dim).map(|i| i < n).collect();
    let mut s0 = Vector::zeros(dim);
    for j in 0..m1 {
        s0[n + j] = (-b_ub[j]).max(0.0);
    }
    let solver = LinearTcg { q: &q, rows, b: Vector::from_vec(rhs), eq_rows: Vec::new(), delta, mask: Some(&mask) };
    let out = solver.solve(s0);
    let mut z = out.step.rows(0, n).into_owned();
    for i in 0..n {
        z[i] = z[i].max(lower[i]).min(upper[i]);
    }
    z
}
