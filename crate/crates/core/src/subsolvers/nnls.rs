use crate::linalg::{lstsq_min_norm, Matrix, Vector};

#[derive(Debug, Clone)]
pub struct NnlsOutcome {
    pub x: Vector,
    /// False when the iteration cap stopped the method.
    pub converged: bool,
}

/// Least-squares solution of `A x ≈ b` restricted to the columns in `passive`.
fn solve_passive(a: &Matrix, b: &Vector, passive: &[bool]) -> Vector {
    let cols: Vec<usize> = (0..a.ncols()).filter(|&i| passive[i]).collect();
    let mut z = Vector::zeros(a.ncols());
    if cols.is_empty() {
        return z;
    }
    let sub = a.select_columns(&cols);
    let sol = lstsq_min_norm(&sub, b);
    for (k, &i) in cols.iter().enumerate() {
        z[i] = sol[k];
    }
    z
}

/// Minimizes `½‖A x − b‖²` subject to `x_i ≥ 0` for `i < n0`.
pub fn nnls(a: &Matrix, b: &Vector, n0: usize) -> Vector {
    nnls_with_status(a, b, n0).x
}

/// Active-set method of Lawson and Hanson, extended to free variables.
pub fn nnls_with_status(a: &Matrix, b: &Vector, n0: usize) -> NnlsOutcome {
    let n = a.ncols();
    assert!(n0 <= n && a.nrows() == b.len());
    let mut passive: Vec<bool> = (0..n).map(|i| i >= n0).collect();
    let mut x = solve_passive(a, b, &passive);
    let tol = 10.0 * f64::EPSILON * a.norm() * b.norm().max(1.0) * (n.max(1) as f64);
    let mut excluded = vec![false; n];
    let cap = 3 * n.max(1);
    for _ in 0..cap {
        let w = a.tr_mul(&(b - a * &x));
        let mut enter = None;
        let mut best = tol;
        for i in 0..n0 {
            if !passive[i] && !excluded[i] && w[i] > best {
                best = w[i];
                enter = Some(i);
            }
        }
        let Some(j) = enter else {
            return NnlsOutcome { x, converged: true };
        };
        passive[j] = true;
        let mut z = solve_passive(a, b, &passive);
        if z[j] <= 0.0 {
            // Roundoff made the entering variable useless; skip it until
            // the iterate changes.
            passive[j] = false;
            excluded[j] = true;
            continue;
        }
        loop {
            let blocking: Vec<usize> = (0..n0).filter(|&i| passive[i] && z[i] <= 0.0).collect();
            if blocking.is_empty() {
                break;
            }
            let (mut alpha, mut leave) = (f64::INFINITY, blocking[0]);
            for &i in &blocking {
                let t = x[i] / (x[i] - z[i]);
                if t < alpha {
                    alpha = t;
                    leave = i;
                }
            }
            x += (&z - &x) * alpha;
            x[leave] = 0.0;
            for i in 0..n0 {
                if passive[i] && x[i] <= 0.0 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            z = solve_passive(a, b, &passive);
        }
        x = z;
        excluded.iter_mut().for_each(|e| *e = false);
    }
    NnlsOutcome { x, converged: false }
}

/// Least-squares Lagrange multipliers `λ` minimizing
/// `‖∇f + Σ λ_i ∇c_i‖`. Inequalities with a negative value get a zero
/// multiplier, the other inequality multipliers are nonnegative and the
/// equality multipliers are free. Returns the inequality then the equality
/// multipliers.
pub fn lsq_multipliers(grad_f: &Vector, ineq_grads: &[Vector], ineq_values: &[f64], eq_grads: &[Vector]) -> (Vector, Vector) {
    let n = grad_f.len();
    let active: Vec<usize> = (0..ineq_grads.len()).filter(|&i| !(ineq_values[i] < 0.0)).collect();
    let k = active.len() + eq_grads.len();
    let mut lam_ub = Vector::zeros(ineq_grads.len());
    let mut lam_eq = Vector::zeros(eq_grads.len());
    if k == 0 {
        return (lam_ub, lam_eq);
    }
    let mut a = Matrix::zeros(n, k);
    for (j, g) in active.iter().map(|&i| &ineq_grads[i]).chain(eq_grads).enumerate() {
        a.set_column(j, g);
    }
    let sol = nnls(&a, &(-grad_f), active.len());
    for (j, &i) in active.iter().enumerate() {
        lam_ub[i] = sol[j];
    }
    for j in 0..eq_grads.len() {
        lam_eq[j] = sol[active.len() + j];
    }
    (lam_ub, lam_eq)
}
