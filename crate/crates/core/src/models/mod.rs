//! Quadratic interpolation models maintained by the derivative-free
//! symmetric Broyden update.
//!
//! Points are stored relative to a base point `x̄` as the columns of an
//! `n × m` matrix. The inverse of the interpolation KKT matrix is kept in
//! block form with its leading `m × m` block factored as `Z D Zᵀ`.

mod inverse;
pub mod poisedness;

pub use inverse::InverseKkt;
pub use poisedness::{lagrange_zm_value, lambda_poisedness_zm};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Denominators below this magnitude abort a point replacement.
pub const DENOMINATOR_TOL: f64 = 1e-12;

/// Quadratic `α + gᵀs + ½ sᵀHs` in the displacement `s = x − x̄`, with
/// `H = Γ + Σ γᵢ (yⁱ−x̄)(yⁱ−x̄)ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    pub intercept: f64,
    pub gradient: Vector,
    pub explicit_hess: Matrix,
    pub implicit: Vector,
}

impl QuadraticModel {
    pub fn zero(n: usize, m: usize) -> Self {
        QuadraticModel {
            intercept: 0.0,
            gradient: Vector::zeros(n),
            explicit_hess: Matrix::zeros(n, n),
            implicit: Vector::zeros(m),
        }
    }

    /// Hessian-vector product without forming the implicit part.
    pub fn hess_vec(&self, xpt: &Matrix, v: &Vector) -> Vector {
        let mut w = xpt.tr_mul(v);
        w.component_mul_assign(&self.implicit);
        &self.explicit_hess * v + xpt * w
    }

    pub fn value(&self, xpt: &Matrix, s: &Vector) -> f64 {
        self.intercept + self.gradient.dot(s) + 0.5 * s.dot(&self.hess_vec(xpt, s))
    }

    pub fn gradient_at(&self, xpt: &Matrix, s: &Vector) -> Vector {
        &self.gradient + self.hess_vec(xpt, s)
    }

    pub fn hessian(&self, xpt: &Matrix) -> Matrix {
        let mut scaled = xpt.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.implicit[k];
        }
        &self.explicit_hess + scaled * xpt.transpose()
    }

    /// Moves the implicit term of point `k` into the explicit Hessian.
    fn fold_point(&mut self, xpt: &Matrix, k: usize) {
        let g = self.implicit[k];
        if g != 0.0 {
            let y = xpt.column(k);
            self.explicit_hess.ger(g, &y, &y, 1.0);
            self.implicit[k] = 0.0;
        }
    }
}

/// Objective model plus one model per nonlinear constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub f: QuadraticModel,
    pub c: Vec<QuadraticModel>,
}

#[derive(Debug, Clone)]
pub struct InterpolationState {
    pub base: Vector,
    /// Columns are `yⁱ − x̄`.
    pub xpt: Matrix,
    pub fvals: Vector,
    /// Row `i` holds the nonlinear constraint values at `yⁱ`.
    pub cvals: Matrix,
    pub inv: InverseKkt,
    pub current_index: usize,
}

impl InterpolationState {
    /// Builds a state from absolute points (columns of `points`) and factors
    /// the interpolation system.
    pub fn from_points(base: Vector, points: &Matrix) -> Result<Self> {
        let (n, m) = points.shape();
        if m < n + 2 || m > (n + 1) * (n + 2) / 2 {
            return Err(Error::Config(format!("number of points {m} out of range for n = {n}")));
        }
        let mut xpt = points.clone();
        for mut col in xpt.column_iter_mut() {
            col -= &base;
        }
        let inv = InverseKkt::factorize(&xpt)?;
        Ok(InterpolationState {
            base,
            xpt,
            fvals: Vector::zeros(m),
            cvals: Matrix::zeros(m, 0),
            inv,
            current_index: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.xpt.nrows()
    }

    pub fn m(&self) -> usize {
        self.xpt.ncols()
    }

    /// Absolute coordinates of point `i`.
    pub fn point(&self, i: usize) -> Vector {
        &self.base + self.xpt.column(i)
    }

    /// Displacement of point `i` from the base.
    pub fn rel(&self, i: usize) -> Vector {
        self.xpt.column(i).into_owned()
    }

    /// Model value at the absolute point `x`.
    pub fn model_value(&self, model: &QuadraticModel, x: &Vector) -> f64 {
        model.value(&self.xpt, &(x - &self.base))
    }

    pub fn model_gradient(&self, model: &QuadraticModel, x: &Vector) -> Vector {
        model.gradient_at(&self.xpt, &(x - &self.base))
    }

    pub fn model_hess_vec(&self, model: &QuadraticModel, v: &Vector) -> Vector {
        model.hess_vec(&self.xpt, v)
    }

    /// Rebuilds the inverse KKT matrix from scratch.
    pub fn refactor(&mut self) -> Result<()> {
        self.inv = InverseKkt::factorize(&self.xpt)?;
        Ok(())
    }

    /// Vector `w` of the update formulas for the displacement `s = x⁺ − x̄`.
    fn w_vector(&self, s: &Vector) -> Vector {
        let (n, m) = self.xpt.shape();
        let ys = self.xpt.tr_mul(s);
        let mut w = Vector::zeros(m + n + 1);
        for i in 0..m {
            w[i] = 0.5 * ys[i] * ys[i];
        }
        w[m] = 1.0;
        w.rows_mut(m + 1, n).copy_from(s);
        w
    }

    /// Denominators `σ_t` and Lagrange values `L_t(x⁺)` for every `t`.
    pub fn denominators(&self, x_plus: &Vector) -> (Vector, Vector) {
        let s = x_plus - &self.base;
        let w = self.w_vector(&s);
        let hw = self.inv.mul(&w);
        let beta = 0.5 * s.norm_squared().powi(2) - w.dot(&hw);
        let alpha = self.inv.omega_diag();
        let m = self.m();
        let tau = hw.rows(0, m).into_owned();
        let sigma = Vector::from_iterator(m, (0..m).map(|t| alpha[t] * beta + tau[t] * tau[t]));
        (sigma, tau)
    }

    /// Denominator of the rank-2 update replacing point `t` by `x_plus`.
    pub fn denominator(&self, t: usize, x_plus: &Vector) -> f64 {
        self.denominators(x_plus).0[t]
    }
}

/// Initial interpolation set around `x0` with step `delta`, flipping or
/// doubling steps at active bounds. Values are left at zero.
pub fn initial_interpolation_set(x0: &Vector, delta: f64, m: usize, lower: &Vector, upper: &Vector) -> Result<InterpolationState> {
    let n = x0.len();
    if m < n + 2 || m > (n + 1) * (n + 2) / 2 {
        return Err(Error::Config(format!("npt = {m} must lie in [{}, {}]", n + 2, (n + 1) * (n + 2) / 2)));
    }
    let mut pts = Matrix::zeros(n, m);
    for i in 0..m {
        pts.set_column(i, x0);
    }
    for j in 0..n {
        let step = if x0[j] == upper[j] { -delta } else { delta };
        pts[(j, j + 1)] += step;
    }
    for j in 0..n.min(m - n - 1) {
        let step = if x0[j] == lower[j] {
            2.0 * delta
        } else if x0[j] == upper[j] {
            -2.0 * delta
        } else {
            -delta
        };
        pts[(j, n + 1 + j)] += step;
    }
    // Remaining points combine two first-batch points (one-based indices).
    for i in (2 * n + 2)..=m {
        let kappa = (i - n - 2) / n;
        let p = i - n - 1 - n * kappa;
        let q = if p + kappa <= n { p + kappa } else { p + kappa - n };
        let col = pts.column(p) + pts.column(q) - x0;
        pts.set_column(i - 1, &col);
    }
    for mut col in pts.column_iter_mut() {
        for j in 0..n {
            col[j] = col[j].max(lower[j]).min(upper[j]);
        }
    }
    InterpolationState::from_points(x0.clone(), &pts)
}

/// Coefficient matrix of the interpolation KKT system.
pub fn build_kkt(state: &InterpolationState) -> Matrix {
    kkt_matrix(&state.xpt)
}

pub(crate) fn kkt_matrix(xpt: &Matrix) -> Matrix {
    let (n, m) = xpt.shape();
    let g = xpt.tr_mul(xpt);
    let mut w = Matrix::zeros(m + n + 1, m + n + 1);
    for i in 0..m {
        for j in 0..m {
            w[(i, j)] = 0.5 * g[(i, j)] * g[(i, j)];
        }
        w[(i, m)] = 1.0;
        w[(m, i)] = 1.0;
        for k in 0..n {
            w[(i, m + 1 + k)] = xpt[(k, i)];
            w[(m + 1 + k, i)] = xpt[(k, i)];
        }
    }
    w
}

/// Symmetric Broyden update: the model closest to `old` in Hessian
/// Frobenius norm that interpolates `values`.
pub fn solve_broyden(state: &InterpolationState, values: &Vector, old: &QuadraticModel) -> QuadraticModel {
    let m = state.m();
    let resid = Vector::from_iterator(m, (0..m).map(|i| values[i] - old.value(&state.xpt, &state.xpt.column(i).into_owned())));
    let mut model = old.clone();
    apply_correction(state, &mut model, &resid);
    model
}

/// Minimum Frobenius norm model interpolating `values`.
pub fn min_frobenius(state: &InterpolationState, values: &Vector) -> QuadraticModel {
    let mut model = QuadraticModel::zero(state.n(), state.m());
    apply_correction(state, &mut model, values);
    model
}

fn apply_correction(state: &InterpolationState, model: &mut QuadraticModel, resid: &Vector) {
    let n = state.n();
    let lambda = state.inv.omega_mul(resid);
    let lin = &state.inv.xi * resid;
    model.intercept += lin[0];
    model.gradient += lin.rows(1, n);
    model.implicit += lambda;
}

/// Minimum Frobenius norm Lagrange polynomial of point `i`.
pub fn lagrange_polynomial(state: &InterpolationState, i: usize) -> QuadraticModel {
    let n = state.n();
    QuadraticModel {
        intercept: state.inv.xi[(0, i)],
        gradient: state.inv.xi.column(i).rows(1, n).into_owned(),
        explicit_hess: Matrix::zeros(n, n),
        implicit: state.inv.omega_col(i),
    }
}

/// Replaces point `t` by `x_plus` with the given values, updating the
/// inverse KKT matrix and all models. With `broyden` false the models are
/// rebuilt as minimum Frobenius norm models. Returns the denominator.
pub fn replace_point(
    state: &mut InterpolationState,
    models: &mut ModelBundle,
    t: usize,
    x_plus: &Vector,
    fval: f64,
    cvals: &[f64],
    broyden: bool,
) -> Result<f64> {
    let s = x_plus - &state.base;
    let w = state.w_vector(&s);
    let hw = state.inv.mul(&w);
    let beta = 0.5 * s.norm_squared().powi(2) - w.dot(&hw);
    let alpha = state.inv.omega_diag()[t];
    let tau = hw[t];
    let sigma = alpha * beta + tau * tau;
    if !(sigma.abs() > DENOMINATOR_TOL) {
        return Err(Error::ZeroDenominator);
    }
    for model in std::iter::once(&mut models.f).chain(models.c.iter_mut()) {
        model.fold_point(&state.xpt, t);
    }
    state.inv.rank_two_update(t, &hw, alpha, beta, tau, sigma);
    state.xpt.set_column(t, &s);
    state.fvals[t] = fval;
    for (k, &c) in cvals.iter().enumerate() {
        state.cvals[(t, k)] = c;
    }
    refresh_models(state, models, broyden);
    Ok(sigma)
}

/// Re-interpolates every model on the current values, either as a
/// Broyden correction of the existing model or from scratch.
pub fn refresh_models(state: &InterpolationState, models: &mut ModelBundle, broyden: bool) {
    let fvals = state.fvals.clone();
    models.f = if broyden { solve_broyden(state, &fvals, &models.f) } else { min_frobenius(state, &fvals) };
    for k in 0..models.c.len() {
        let vals = state.cvals.column(k).into_owned();
        models.c[k] = if broyden { solve_broyden(state, &vals, &models.c[k]) } else { min_frobenius(state, &vals) };
    }
}

/// Moves the base point by `shift`, folding all implicit Hessian terms into
/// the explicit parts and refactoring the inverse KKT matrix.
pub fn shift_base(state: &mut InterpolationState, models: &mut ModelBundle, shift: &Vector) -> Result<()> {
    for model in std::iter::once(&mut models.f).chain(models.c.iter_mut()) {
        let h = model.hessian(&state.xpt);
        model.intercept = model.value(&state.xpt, shift);
        model.gradient = &model.gradient + &h * shift;
        model.explicit_hess = h;
        model.implicit.fill(0.0);
    }
    for mut col in state.xpt.column_iter_mut() {
        col -= shift;
    }
    state.base += shift;
    state.refactor()
}
