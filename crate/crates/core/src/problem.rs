//! Problem definition, input preprocessing and counted evaluations.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

pub type Objective = Box<dyn FnMut(&[f64]) -> f64>;
pub type ConstraintFn = Box<dyn FnMut(&[f64]) -> Vec<f64>>;

/// One counted evaluation of the objective and nonlinear constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub x: Vec<f64>,
    pub f: f64,
    /// Inequality values: linear residuals `A_I x - b_I` then `c_ineq(x)`.
    pub cub: Vec<f64>,
    /// Equality values: linear residuals `A_E x - b_E` then `c_eq(x)`.
    pub ceq: Vec<f64>,
    pub maxcv: f64,
    /// One-based evaluation counter at the time of the call.
    pub index: usize,
}

pub struct Problem {
    n: usize,
    objective: Objective,
    lower: Vec<f64>,
    upper: Vec<f64>,
    a_ub: Matrix,
    b_ub: Vector,
    a_eq: Matrix,
    b_eq: Vector,
    nl_ineq: Option<ConstraintFn>,
    nl_eq: Option<ConstraintFn>,
    n_nl_ineq: Option<usize>,
    n_nl_eq: Option<usize>,
    history: Vec<EvalRecord>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("n", &self.n)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("n_lin_ineq", &self.a_ub.nrows())
            .field("n_lin_eq", &self.a_eq.nrows())
            .field("nfev", &self.history.len())
            .finish()
    }
}

/// User-facing description of a problem, validated by [`ProblemBuilder::build`].
pub struct ProblemBuilder {
    n: usize,
    objective: Objective,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
    a_ub: Vec<Vec<f64>>,
    b_ub: Vec<f64>,
    a_eq: Vec<Vec<f64>>,
    b_eq: Vec<f64>,
    nl_ineq: Option<ConstraintFn>,
    nl_eq: Option<ConstraintFn>,
}

impl ProblemBuilder {
    pub fn bounds(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        self.lower = Some(lower);
        self.upper = Some(upper);
        self
    }

    /// Linear inequalities `a_ub x <= b_ub`, one row per constraint.
    pub fn linear_ineq(mut self, a_ub: Vec<Vec<f64>>, b_ub: Vec<f64>) -> Self {
        self.a_ub = a_ub;
        self.b_ub = b_ub;
        self
    }

    /// Linear equalities `a_eq x = b_eq`.
    pub fn linear_eq(mut self, a_eq: Vec<Vec<f64>>, b_eq: Vec<f64>) -> Self {
        self.a_eq = a_eq;
        self.b_eq = b_eq;
        self
    }

    /// Nonlinear inequalities `c(x) <= 0`.
    pub fn nonlinear_ineq<F>(mut self, c: F) -> Self
    where
        F: FnMut(&[f64]) -> Vec<f64> + 'static,
    {
        self.nl_ineq = Some(Box::new(c));
        self
    }

    /// Nonlinear equalities `c(x) = 0`.
    pub fn nonlinear_eq<F>(mut self, c: F) -> Self
    where
        F: FnMut(&[f64]) -> Vec<f64> + 'static,
    {
        self.nl_eq = Some(Box::new(c));
        self
    }

    pub fn build(self) -> Result<Problem> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Config("problem dimension must be positive".into()));
        }
        let lower = self.lower.unwrap_or_else(|| vec![f64::NEG_INFINITY; n]);
        let upper = self.upper.unwrap_or_else(|| vec![f64::INFINITY; n]);
        if lower.len() != n || upper.len() != n {
            return Err(Error::Config(format!(
                "bounds have lengths {} and {}, expected {n}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.iter().chain(&upper).any(|v| v.is_nan()) {
            return Err(Error::Config("bounds must not be NaN".into()));
        }
        if let Some(i) = (0..n).find(|&i| lower[i] > upper[i]) {
            return Err(Error::InfeasibleBounds(i));
        }
        let (a_ub, b_ub) = dense_rows(n, self.a_ub, self.b_ub, "inequality")?;
        let (a_eq, b_eq) = dense_rows(n, self.a_eq, self.b_eq, "equality")?;
        Ok(Problem {
            n,
            objective: self.objective,
            lower,
            upper,
            a_ub,
            b_ub,
            a_eq,
            b_eq,
            nl_ineq: self.nl_ineq,
            nl_eq: self.nl_eq,
            n_nl_ineq: None,
            n_nl_eq: None,
            history: Vec::new(),
        })
    }
}

fn dense_rows(n: usize, rows: Vec<Vec<f64>>, rhs: Vec<f64>, what: &str) -> Result<(Matrix, Vector)> {
    if rows.len() != rhs.len() {
        return Err(Error::Config(format!(
            "linear {what} constraints: {} rows but {} right-hand sides",
            rows.len(),
            rhs.len()
        )));
    }
    let mut a = Matrix::zeros(rows.len(), n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Config(format!(
                "linear {what} constraints: row {i} has length {}, expected {n}",
                row.len()
            )));
        }
        for (j, v) in row.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    if a.iter().chain(&rhs).any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("linear {what} data must be finite")));
    }
    Ok((a, Vector::from_vec(rhs)))
}

impl Problem {
    pub fn builder<F>(n: usize, objective: F) -> ProblemBuilder
    where
        F: FnMut(&[f64]) -> f64 + 'static,
    {
        ProblemBuilder {
            n,
            objective: Box::new(objective),
            lower: None,
            upper: None,
            a_ub: Vec::new(),
            b_ub: Vec::new(),
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            nl_ineq: None,
            nl_eq: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn a_ub(&self) -> &Matrix {
        &self.a_ub
    }

    pub fn b_ub(&self) -> &Vector {
        &self.b_ub
    }

    pub fn a_eq(&self) -> &Matrix {
        &self.a_eq
    }

    pub fn b_eq(&self) -> &Vector {
        &self.b_eq
    }

    pub fn has_nonlinear(&self) -> bool {
        self.nl_ineq.is_some() || self.nl_eq.is_some()
    }

    /// Number of nonlinear inequality and equality constraints, known after
    /// the first evaluation.
    pub fn nonlinear_counts(&self) -> (usize, usize) {
        (self.n_nl_ineq.unwrap_or(0), self.n_nl_eq.unwrap_or(0))
    }

    pub fn nfev(&self) -> usize {
        self.history.len()
    }

    pub fn history(&self) -> &[EvalRecord] {
        &self.history
    }

    /// Counted evaluation of the objective and all nonlinear constraints.
    /// The point must satisfy the bounds exactly.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<&EvalRecord> {
        if x.len() != self.n {
            return Err(Error::Internal(format!("point of length {} passed to evaluate", x.len())));
        }
        if let Some(i) = (0..self.n).find(|&i| !(x[i] >= self.lower[i] && x[i] <= self.upper[i])) {
            return Err(Error::Internal(format!("bound violated at index {i} during evaluation")));
        }
        let f = (self.objective)(x);
        let f = if f.is_finite() { f } else { f64::INFINITY };
        let (c_ineq, c_eq) = self.nonlinear_values(x)?;
        let xv = Vector::from_column_slice(x);
        let mut cub: Vec<f64> = (&self.a_ub * &xv - &self.b_ub).iter().copied().collect();
        cub.extend(c_ineq);
        let mut ceq: Vec<f64> = (&self.a_eq * &xv - &self.b_eq).iter().copied().collect();
        ceq.extend(c_eq);
        let maxcv = violation(&cub, &ceq);
        let index = self.history.len() + 1;
        self.history.push(EvalRecord { x: x.to_vec(), f, cub, ceq, maxcv, index });
        Ok(self.history.last().expect("record just pushed"))
    }

    fn nonlinear_values(&mut self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let ci = match self.nl_ineq.as_mut() {
            Some(c) => sanitize(c(x), &mut self.n_nl_ineq, "inequality")?,
            None => Vec::new(),
        };
        let ce = match self.nl_eq.as_mut() {
            Some(c) => sanitize(c(x), &mut self.n_nl_eq, "equality")?,
            None => Vec::new(),
        };
        Ok((ci, ce))
    }

    /// Maximum constraint violation at `x`, bounds included. Nonlinear
    /// constraints are evaluated without being counted or recorded.
    pub fn maxcv(&mut self, x: &[f64]) -> f64 {
        let xv = Vector::from_column_slice(x);
        let (ci, ce) = self.nonlinear_values(x).unwrap_or((vec![f64::INFINITY], vec![]));
        let mut cub: Vec<f64> = (&self.a_ub * &xv - &self.b_ub).iter().copied().collect();
        cub.extend(ci);
        let mut ceq: Vec<f64> = (&self.a_eq * &xv - &self.b_eq).iter().copied().collect();
        ceq.extend(ce);
        let mut v = violation(&cub, &ceq);
        for i in 0..self.n {
            v = v.max(self.lower[i] - x[i]).max(x[i] - self.upper[i]);
        }
        v
    }
}

fn sanitize(values: Vec<f64>, count: &mut Option<usize>, what: &str) -> Result<Vec<f64>> {
    match *count {
        None => *count = Some(values.len()),
        Some(k) if k != values.len() => {
            return Err(Error::Config(format!(
                "nonlinear {what} callback returned {} values, previously {k}",
                values.len()
            )))
        }
        _ => {}
    }
    Ok(values.into_iter().map(|v| if v.is_finite() { v } else { f64::INFINITY }).collect())
}

/// Largest violation of `cub <= 0` and `ceq = 0`.
pub fn violation(cub: &[f64], ceq: &[f64]) -> f64 {
    let a = cub.iter().fold(0.0_f64, |m, &c| m.max(c));
    ceq.iter().fold(a, |m, &c| m.max(c.abs()))
}

/// Euclidean norm of the violations of `cub <= 0` and `ceq = 0`.
pub fn violation_l2(cub: &[f64], ceq: &[f64]) -> f64 {
    let s: f64 = cub.iter().map(|&c| c.max(0.0).powi(2)).sum::<f64>()
        + ceq.iter().map(|&c| c * c).sum::<f64>();
    s.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessReport {
    pub fixed_indices: Vec<usize>,
    pub reduced_n: usize,
    /// Starting point over the free variables.
    pub adjusted_x0: Vec<f64>,
    pub adjusted_delta0: f64,
    /// Full-space point holding the fixed values and the adjusted free values.
    pub full_x0: Vec<f64>,
}

impl PreprocessReport {
    /// True when every variable is fixed by its bounds.
    pub fn is_degenerate(&self) -> bool {
        self.reduced_n == 0
    }
}

/// Fixes variables with equal bounds, clamps the initial radius so that the
/// free ranges hold two radii, and moves each free component of `x0` either
/// onto a bound or at least one radius away from both bounds.
pub fn preprocess_bounds(lower: &[f64], upper: &[f64], x0: &[f64], delta0: f64) -> Result<PreprocessReport> {
    let n = lower.len();
    if upper.len() != n || x0.len() != n {
        return Err(Error::Config(format!(
            "x0 has length {}, bounds have lengths {} and {}",
            x0.len(),
            n,
            upper.len()
        )));
    }
    if !(delta0.is_finite() && delta0 > 0.0) {
        return Err(Error::Config("initial radius must be positive and finite".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("x0 must be finite".into()));
    }
    if let Some(i) = (0..n).find(|&i| lower[i] > upper[i]) {
        return Err(Error::InfeasibleBounds(i));
    }
    let fixed_indices: Vec<usize> = (0..n).filter(|&i| lower[i] == upper[i]).collect();
    let free: Vec<usize> = (0..n).filter(|&i| lower[i] < upper[i]).collect();
    let min_range = free.iter().map(|&i| upper[i] - lower[i]).fold(f64::INFINITY, f64::min);
    let delta = delta0.min(0.5 * min_range);
    let mut full_x0 = x0.to_vec();
    for &i in &fixed_indices {
        full_x0[i] = lower[i];
    }
    for &i in &free {
        full_x0[i] = place_component(x0[i], lower[i], upper[i], delta);
    }
    Ok(PreprocessReport {
        reduced_n: free.len(),
        adjusted_x0: free.iter().map(|&i| full_x0[i]).collect(),
        adjusted_delta0: delta,
        fixed_indices,
        full_x0,
    })
}

fn place_component(x: f64, l: f64, u: f64, delta: f64) -> f64 {
    let x = x.max(l).min(u);
    let lo_snap = l + delta;
    let hi_snap = (u - delta).max(lo_snap);
    if x > l && x < lo_snap {
        if x - l <= lo_snap - x {
            l
        } else {
            lo_snap
        }
    } else if x < u && x > hi_snap {
        if u - x <= x - hi_snap {
            u
        } else {
            hi_snap
        }
    } else {
        x
    }
}

/// Problem data restricted to the free variables.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub free: Vec<usize>,
    /// Full-space point carrying the fixed values.
    pub template: Vec<f64>,
    pub lower: Vector,
    pub upper: Vector,
    pub a_ub: Matrix,
    pub b_ub: Vector,
    pub a_eq: Matrix,
    pub b_eq: Vector,
}

impl Reduction {
    pub fn n(&self) -> usize {
        self.free.len()
    }

    /// Full-space point for reduced coordinates `xr`.
    pub fn expand(&self, xr: &Vector) -> Vec<f64> {
        let mut x = self.template.clone();
        for (k, &i) in self.free.iter().enumerate() {
            x[i] = xr[k];
        }
        x
    }
}

/// Validates the inputs and restricts the problem to its free variables.
pub fn preprocess(problem: &Problem, x0: &[f64], delta0: f64) -> Result<(PreprocessReport, Reduction)> {
    let report = preprocess_bounds(&problem.lower, &problem.upper, x0, delta0)?;
    let free: Vec<usize> = (0..problem.n).filter(|i| !report.fixed_indices.contains(i)).collect();
    let fixed_x = Vector::from_vec(
        (0..problem.n)
            .map(|i| if report.fixed_indices.contains(&i) { problem.lower[i] } else { 0.0 })
            .collect(),
    );
    let select = |a: &Matrix| a.select_columns(free.iter());
    let reduction = Reduction {
        lower: Vector::from_iterator(free.len(), free.iter().map(|&i| problem.lower[i])),
        upper: Vector::from_iterator(free.len(), free.iter().map(|&i| problem.upper[i])),
        a_ub: select(&problem.a_ub),
        b_ub: &problem.b_ub - &problem.a_ub * &fixed_x,
        a_eq: select(&problem.a_eq),
        b_eq: &problem.b_eq - &problem.a_eq * &fixed_x,
        template: report.full_x0.clone(),
        free,
    };
    Ok((report, reduction))
}
