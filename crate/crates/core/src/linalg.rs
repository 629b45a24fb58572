//! Small dense linear-algebra helpers shared by the subsolvers.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Orthonormal basis of the span of a set of vectors, computed by modified
/// Gram-Schmidt with one reorthogonalization pass. Vectors whose remaining
/// component is below `rtol` times their original norm are dropped.
#[derive(Debug, Clone)]
pub struct RowSpace {
    basis: Vec<Vector>,
    dim: usize,
}

impl RowSpace {
    pub fn new<'a, I>(dim: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = &'a Vector>,
    {
        let mut space = RowSpace { basis: Vec::new(), dim };
        for r in rows {
            space.push(r);
        }
        space
    }

    /// Adds `v` to the span; returns false when it is numerically dependent.
    pub fn push(&mut self, v: &Vector) -> bool {
        let norm0 = v.norm();
        if norm0 == 0.0 || self.basis.len() >= self.dim {
            return false;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &self.basis {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let nw = w.norm();
        if nw <= 1e-10 * norm0 {
            return false;
        }
        self.basis.push(w / nw);
        true
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projection of `v` onto the complement of the span.
    pub fn project_out(&self, v: &Vector) -> Vector {
        let mut w = v.clone();
        for q in &self.basis {
            let c = q.dot(&w);
            w.axpy(-c, q, 1.0);
        }
        w
    }
}

/// Least-norm least-squares solution of `a x = b` by SVD with a relative
/// singular-value cutoff.
pub fn lstsq_min_norm(a: &Matrix, b: &Vector) -> Vector {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Vector::zeros(0);
    }
    if rows == 0 {
        return Vector::zeros(cols);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = smax * (rows.max(cols) as f64) * f64::EPSILON;
    match svd.solve(b, eps) {
        Ok(x) => x,
        Err(_) => Vector::zeros(cols),
    }
}

/// Euclidean distance between two columns-as-vectors.
pub fn dist(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm()
}

/// Componentwise clamp of `x` into `[lower, upper]`.
pub fn clamp_into(x: &mut Vector, lower: &Vector, upper: &Vector) {
    for i in 0..x.len() {
        x[i] = x[i].max(lower[i]).min(upper[i]);
    }
}

/// Largest step `t ≥ 0` with `‖s + t p‖_D ≤ radius`, where the seminorm only
/// counts the coordinates flagged in `mask` (all of them when `mask` is None).
/// Returns infinity when `p` has no component in the norm.
pub fn step_to_boundary(s: &Vector, p: &Vector, radius: f64, mask: Option<&[bool]>) -> f64 {
    let (mut ss, mut sp, mut pp) = (0.0, 0.0, 0.0);
    for i in 0..s.len() {
        if mask.is_none_or(|m| m[i]) {
            ss += s[i] * s[i];
            sp += s[i] * p[i];
            pp += p[i] * p[i];
        }
    }
    if pp <= 0.0 {
        return f64::INFINITY;
    }
    let rem = (radius * radius - ss).max(0.0);
    let disc = (sp * sp + pp * rem).sqrt();
    // Avoid cancellation when sp > 0.
    if sp > 0.0 {
        rem / (disc + sp)
    } else {
        (disc - sp) / pp
    }
}

/// Seminorm `‖s‖_D` restricted to flagged coordinates.
pub fn masked_norm(s: &Vector, mask: Option<&[bool]>) -> f64 {
    match mask {
        None => s.norm(),
        Some(m) => s
            .iter()
            .zip(m)
            .filter(|(_, &k)| k)
            .map(|(v, _)| v * v)
            .sum::<f64>()
            .sqrt(),
    }
}
