use crate::linalg::{RowSpace, Vector};

/// Lagrange polynomial `L(d) = value + gradᵀd + ½ dᵀ hess d` centred at the
/// current iterate, with the bounds shifted so that `lower ≤ 0 ≤ upper`.
pub struct GeometryInput<'a> {
    pub value: f64,
    pub grad: Vector,
    pub hess: &'a dyn Fn(&Vector) -> Vector,
    pub lower: Vector,
    pub upper: Vector,
    pub radius: f64,
}

impl GeometryInput<'_> {
    /// Value of the polynomial at the step `d`.
    pub fn eval(&self, d: &Vector) -> f64 {
        self.value + self.grad.dot(d) + 0.5 * d.dot(&(self.hess)(d))
    }

    /// Interval of `t` keeping `t v` within the radius and the bounds.
    fn line_interval(&self, v: &Vector) -> (f64, f64) {
        let vn = v.norm();
        let (mut lo, mut hi) = (-self.radius / vn, self.radius / vn);
        for i in 0..v.len() {
            if v[i] > 0.0 {
                hi = hi.min(self.upper[i] / v[i]);
                lo = lo.max(self.lower[i] / v[i]);
            } else if v[i] < 0.0 {
                hi = hi.min(self.lower[i] / v[i]);
                lo = lo.max(self.upper[i] / v[i]);
            }
        }
        (lo.min(0.0), hi.max(0.0))
    }

    /// Maximizer of `|L(t v)|` over `t ∈ [lo, hi]`, with the attained value.
    fn line_max(&self, v: &Vector, lo: f64, hi: f64) -> (f64, f64) {
        let a = self.grad.dot(v);
        let c = v.dot(&(self.hess)(v));
        let at = |t: f64| (self.value + a * t + 0.5 * c * t * t).abs();
        let mut best = (0.0, at(0.0));
        let mut cands = vec![lo, hi];
        if c != 0.0 {
            let t = -a / c;
            if t > lo && t < hi {
                cands.push(t);
            }
        }
        for t in cands {
            let val = at(t);
            if val > best.1 {
                best = (t, val);
            }
        }
        best
    }

    /// Minimizer of `sign · gradᵀd` over the box intersected with the ball.
    fn linear_box_ball(&self, sign: f64) -> Vector {
        let n = self.grad.len();
        let mut d = Vector::zeros(n);
        let mut fixed = vec![false; n];
        loop {
            let free_sq: f64 = (0..n).filter(|&i| !fixed[i]).map(|i| self.grad[i] * self.grad[i]).sum();
            let used: f64 = (0..n).filter(|&i| fixed[i]).map(|i| d[i] * d[i]).sum();
            let rem = (self.radius * self.radius - used).max(0.0).sqrt();
            if free_sq == 0.0 || rem == 0.0 {
                for i in (0..n).filter(|&i| !fixed[i]) {
                    d[i] = 0.0;
                }
                return d;
            }
            let scale = -sign * rem / free_sq.sqrt();
            let mut changed = false;
            let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
            for i in free {
                d[i] = scale * self.grad[i];
                if d[i] < self.lower[i] {
                    d[i] = self.lower[i];
                    fixed[i] = true;
                    changed = true;
                } else if d[i] > self.upper[i] {
                    d[i] = self.upper[i];
                    fixed[i] = true;
                    changed = true;
                }
            }
            if !changed {
                return d;
            }
        }
    }
}

/// Step improving the geometry of the interpolation set: the best of the
/// constrained Cauchy steps for `±L` and the steps along the lines through
/// the current iterate and the other points (`directions`), each judged by
/// `|L|`. The two families are then compared through `score`, ties going
/// to the Cauchy step.
pub fn geometry_bobyqa(input: &GeometryInput, directions: &[Vector], score: &dyn Fn(&Vector) -> f64) -> Vector {
    let n = input.grad.len();
    let mut cauchy = (Vector::zeros(n), input.value.abs());
    for sign in [1.0, -1.0] {
        let d = input.linear_box_ball(sign);
        if d.norm() == 0.0 {
            continue;
        }
        let (t, val) = input.line_max(&d, 0.0, 1.0);
        if val > cauchy.1 {
            cauchy = (d * t, val);
        }
    }
    let mut line = (Vector::zeros(n), input.value.abs());
    for v in directions {
        if v.norm() == 0.0 {
            continue;
        }
        let (lo, hi) = input.line_interval(v);
        let (t, val) = input.line_max(v, lo, hi);
        if val > line.1 {
            line = (v * t, val);
        }
    }
    if line.0.norm() == 0.0 {
        return cauchy.0;
    }
    if cauchy.0.norm() == 0.0 {
        return line.0;
    }
    if score(&line.0) > score(&cauchy.0) {
        line.0
    } else {
        cauchy.0
    }
}

/// Cauchy step for `|L|` in the null space of `active_rows`, within the
/// radius and the bounds. Zero when the projected gradient vanishes.
pub fn geometry_lincoa(input: &GeometryInput, active_rows: &[Vector]) -> Vector {
    let n = input.grad.len();
    let space = RowSpace::new(n, active_rows.iter());
    let p = space.project_out(&input.grad);
    let pn = p.norm();
    if pn <= 1e-10 * input.grad.norm() || pn == 0.0 {
        return Vector::zeros(n);
    }
    let (lo, hi) = input.line_interval(&p);
    let (t, _) = input.line_max(&p, lo, hi);
    p * t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_input(grad: Vec<f64>, hess: &dyn Fn(&Vector) -> Vector) -> GeometryInput<'_> {
        let n = grad.len();
        GeometryInput {
            value: 0.0,
            grad: Vector::from_vec(grad),
            hess,
            lower: Vector::from_element(n, f64::NEG_INFINITY),
            upper: Vector::from_element(n, f64::INFINITY),
            radius: 0.5,
        }
    }

    #[test]
    fn linear_polynomial_moves_along_gradient() {
        let hess = |v: &Vector| v * 0.0;
        let input = free_input(vec![3.0, 4.0], &hess);
        let r = geometry_bobyqa(&input, &[], &|d| input.eval(d).abs());
        assert!((r.norm() - 0.5).abs() < 1e-12);
        assert!((input.eval(&r).abs() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn constant_polynomial_gives_zero_step() {
        let hess = |v: &Vector| v * 0.0;
        let mut input = free_input(vec![0.0, 0.0], &hess);
        input.value = 1.0;
        let r = geometry_bobyqa(&input, &[Vector::from_vec(vec![1.0, 0.0])], &|_| 1.0);
        assert_eq!(r.norm(), 0.0);
    }

    #[test]
    fn lincoa_null_space() {
        let hess = |v: &Vector| v * 0.0;
        let input = free_input(vec![1.0, 0.0], &hess);
        let r = geometry_lincoa(&input, &[Vector::from_vec(vec![0.0, 1.0])]);
        assert!((r[0].abs() - 0.5).abs() < 1e-12 && r[1] == 0.0);
        let full = [Vector::from_vec(vec![1.0, 0.0]), Vector::from_vec(vec![0.0, 1.0])];
        assert_eq!(geometry_lincoa(&input, &full).norm(), 0.0);
    }
}
