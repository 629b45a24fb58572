use super::{QuadObjective, TcgOutcome, TcgStatus};
use crate::linalg::{step_to_boundary, Vector};

/// Steihaug-Toint truncated conjugate gradient method for
/// `min Q(s)` subject to `‖s‖ ≤ delta`.
pub fn tcg(q: &QuadObjective, delta: f64) -> TcgOutcome {
    let n = q.n();
    let mut s = Vector::zeros(n);
    let mut grad = q.grad.clone();
    let gnorm0 = grad.norm();
    let mut p = -&grad;
    let mut gsq = grad.norm_squared();
    let mut qval = 0.0;
    let mut iterates = vec![s.clone()];
    let mut status = TcgStatus::Converged;
    let mut iter = 0;
    loop {
        let gp = grad.dot(&p);
        if gp >= 0.0 || p.norm() <= 1e-10 * gnorm0 {
            break;
        }
        if iter >= n {
            break;
        }
        iter += 1;
        let hp = (q.hess)(&p);
        let curv = p.dot(&hp);
        let a_delta = step_to_boundary(&s, &p, delta, None);
        let a_q = if curv > 0.0 { -gp / curv } else { f64::INFINITY };
        let alpha = a_q.min(a_delta);
        s.axpy(alpha, &p, 1.0);
        grad.axpy(alpha, &hp, 1.0);
        qval += alpha * gp + 0.5 * alpha * alpha * curv;
        iterates.push(s.clone());
        if alpha >= a_delta {
            status = TcgStatus::Boundary;
            break;
        }
        let gsq_new = grad.norm_squared();
        let beta = gsq_new / gsq;
        gsq = gsq_new;
        p = -&grad + beta * p;
    }
    TcgOutcome { step: s, working_set: Vec::new(), status, reduction: -qval, iterates }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_point_inside_region() {
        let hess = |v: &Vector| v.clone();
        let g = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        let q = QuadObjective::new(-&g, &hess);
        let out = tcg(&q, 10.0);
        assert!((&out.step - &g).norm() < 1e-12);
        assert_eq!(out.status, TcgStatus::Converged);
    }

    #[test]
    fn zero_gradient_gives_zero_step() {
        let hess = |v: &Vector| v * 2.0;
        let q = QuadObjective::new(Vector::zeros(3), &hess);
        assert_eq!(tcg(&q, 1.0).step.norm(), 0.0);
    }

    #[test]
    fn linear_model_is_truncated_at_the_boundary() {
        let hess = |v: &Vector| v * 0.0;
        let g = Vector::from_vec(vec![3.0, 4.0]);
        let q = QuadObjective::new(g.clone(), &hess);
        let out = tcg(&q, 2.0);
        assert!((&out.step + &g * 0.4).norm() < 1e-12);
        assert_eq!(out.status, TcgStatus::Boundary);
    }
}
