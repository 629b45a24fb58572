//! Trust-region subproblem solvers, nonnegative least squares and
//! geometry-improving steps.

mod bound;
mod geometry;
mod linear;
mod nnls;
mod tcg;

pub use bound::{boundary_refine, tcg_bound};
pub use geometry::{geometry_bobyqa, geometry_lincoa, GeometryInput};
pub use linear::{normal_subproblem, project_polar, tcg_linear, NEAR_ACTIVE_FACTOR};
pub use nnls::{lsq_multipliers, nnls, nnls_with_status, NnlsOutcome};
pub use tcg::tcg;

use crate::linalg::Vector;

/// Relative size of the reductions that stop the truncated CG methods early.
pub const SMALL_REDUCTION: f64 = 0.01;

/// Quadratic `Q(s) = gᵀs + ½ sᵀHs` with `H` given through products.
pub struct QuadObjective<'a> {
    pub grad: Vector,
    pub hess: &'a dyn Fn(&Vector) -> Vector,
}

impl<'a> QuadObjective<'a> {
    pub fn new(grad: Vector, hess: &'a dyn Fn(&Vector) -> Vector) -> Self {
        QuadObjective { grad, hess }
    }

    pub fn value(&self, s: &Vector) -> f64 {
        self.grad.dot(s) + 0.5 * s.dot(&(self.hess)(s))
    }

    pub fn n(&self) -> usize {
        self.grad.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcgStatus {
    Converged,
    Boundary,
    Budget,
}

#[derive(Debug, Clone)]
pub struct TcgOutcome {
    pub step: Vector,
    pub working_set: Vec<usize>,
    pub status: TcgStatus,
    /// `Q(start) − Q(step)`.
    pub reduction: f64,
    /// Every iterate, starting point included.
    pub iterates: Vec<Vector>,
}
