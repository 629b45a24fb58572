use std::f64::consts::FRAC_PI_2;

use super::{QuadObjective, TcgOutcome, TcgStatus, SMALL_REDUCTION};
use crate::linalg::{step_to_boundary, Vector};

/// Threshold on the angle between the projected step and gradient below
/// which moving around the trust-region boundary is not attempted.
const REFINE_TRIGGER: f64 = 1e-4;
const GOLDEN_ITERATIONS: usize = 20;

fn project(v: &Vector, fixed: &[bool]) -> Vector {
    Vector::from_iterator(v.len(), v.iter().zip(fixed).map(|(x, &f)| if f { 0.0 } else { *x }))
}

/// Truncated conjugate gradient method for `min Q(s)` subject to
/// `l ≤ s ≤ u` and `‖s‖ ≤ delta`. Bounds that are hit join the working set
/// for good; the search restarts along the projected steepest descent.
pub fn tcg_bound(q: &QuadObjective, lower: &Vector, upper: &Vector, delta: f64) -> TcgOutcome {
    let n = q.n();
    let mut s = Vector::zeros(n);
    let mut grad = q.grad.clone();
    let gnorm0 = grad.norm();
    let mut fixed: Vec<bool> = (0..n)
        .map(|i| (lower[i] >= 0.0 && grad[i] >= 0.0) || (upper[i] <= 0.0 && grad[i] <= 0.0))
        .collect();
    let mut pg = project(&grad, &fixed);
    let mut p = -&pg;
    let mut pgsq = pg.norm_squared();
    let mut qval = 0.0;
    let mut iterates = vec![s.clone()];
    let mut status = TcgStatus::Converged;
    let mut restart_iters = 0;
    loop {
        let gp = grad.dot(&p);
        if gp >= 0.0 || p.norm() <= 1e-10 * gnorm0 {
            break;
        }
        if pg.norm() * delta <= SMALL_REDUCTION * (-qval) {
            break;
        }
        let n_free = fixed.iter().filter(|f| !**f).count();
        if restart_iters >= n_free {
            break;
        }
        restart_iters += 1;
        let hp = (q.hess)(&p);
        let curv = p.dot(&hp);
        let a_delta = step_to_boundary(&s, &p, delta, None);
        let a_q = if curv > 0.0 { -gp / curv } else { f64::INFINITY };
        let (mut a_b, mut hit) = (f64::INFINITY, None);
        for i in (0..n).filter(|&i| !fixed[i]) {
            let t = if p[i] > 0.0 {
                (upper[i] - s[i]) / p[i]
            } else if p[i] < 0.0 {
                (lower[i] - s[i]) / p[i]
            } else {
                continue;
            };
            let t = t.max(0.0);
            if t < a_b {
                a_b = t;
                hit = Some(i);
            }
        }
        let alpha = a_q.min(a_delta).min(a_b);
        s.axpy(alpha, &p, 1.0);
        grad.axpy(alpha, &hp, 1.0);
        let qnew = qval + alpha * gp + 0.5 * alpha * alpha * curv;
        if alpha == a_b {
            if let Some(i) = hit {
                s[i] = if p[i] > 0.0 { upper[i] } else { lower[i] };
            }
        }
        for i in 0..n {
            s[i] = s[i].max(lower[i]).min(upper[i]);
        }
        iterates.push(s.clone());
        if alpha >= a_delta {
            qval = qnew;
            status = TcgStatus::Boundary;
            break;
        }
        let small = qval - qnew <= SMALL_REDUCTION * (-qnew);
        qval = qnew;
        if small {
            break;
        }
        if alpha < a_b {
            let pg_new = project(&grad, &fixed);
            let pgsq_new = pg_new.norm_squared();
            p = -&pg_new + (pgsq_new / pgsq) * p;
            pg = pg_new;
            pgsq = pgsq_new;
        } else {
            if let Some(i) = hit {
                fixed[i] = true;
            }
            pg = project(&grad, &fixed);
            pgsq = pg.norm_squared();
            p = -&pg;
            restart_iters = 0;
        }
    }
    if status == TcgStatus::Boundary {
        s = boundary_refine_with(q, &s, lower, upper, delta, &mut fixed);
        qval = q.value(&s);
        iterates.push(s.clone());
    }
    let working_set = (0..n).filter(|&i| fixed[i]).collect();
    TcgOutcome { step: s, working_set, status, reduction: -qval, iterates }
}

/// Moves a step lying on the trust-region boundary around the boundary
/// within the span of its projection and the projected gradient, keeping
/// the coordinates in `working_set` fixed.
pub fn boundary_refine(q: &QuadObjective, s: &Vector, lower: &Vector, upper: &Vector, delta: f64, working_set: &[usize]) -> Vector {
    let mut fixed = vec![false; q.n()];
    for &i in working_set {
        fixed[i] = true;
    }
    boundary_refine_with(q, s, lower, upper, delta, &mut fixed)
}

fn boundary_refine_with(q: &QuadObjective, s0: &Vector, lower: &Vector, upper: &Vector, _delta: f64, fixed: &mut [bool]) -> Vector {
    let n = q.n();
    let mut s = s0.clone();
    let mut grad = &q.grad + (q.hess)(&s);
    let mut qval = q.value(&s);
    for _ in 0..n {
        if fixed.iter().all(|f| *f) {
            break;
        }
        let ps = project(&s, fixed);
        let pg = project(&grad, fixed);
        let ssq = ps.norm_squared();
        let gsq = pg.norm_squared();
        let sg = ps.dot(&pg);
        let disc = ssq * gsq - sg * sg;
        if ssq == 0.0 || !(disc > REFINE_TRIGGER * qval * qval) {
            break;
        }
        let w = (&ps * (sg / ssq) - &pg) * (ssq / disc.sqrt());
        let (theta_max, hit) = feasible_angle(&s, &w, lower, upper, fixed);
        let hps = (q.hess)(&ps);
        let hw = (q.hess)(&w);
        let (g_s, g_w) = (grad.dot(&ps), grad.dot(&w));
        let (s_hs, s_hw, w_hw) = (ps.dot(&hps), ps.dot(&hw), w.dot(&hw));
        let change = |th: f64| {
            let (c, sn) = (th.cos() - 1.0, th.sin());
            c * g_s + sn * g_w + 0.5 * (c * c * s_hs + 2.0 * c * sn * s_hw + sn * sn * w_hw)
        };
        let mut theta = golden_section(&change, 0.0, theta_max);
        if change(theta_max) <= change(theta) {
            theta = theta_max;
        }
        let dq = change(theta);
        if theta_max > 0.0 && !(dq < 0.0) {
            break;
        }
        if dq < 0.0 {
            let (c, sn) = (theta.cos() - 1.0, theta.sin());
            s += &ps * c + &w * sn;
            grad += &hps * c + &hw * sn;
            qval += dq;
        }
        match hit {
            Some((i, b)) if theta == theta_max => {
                fixed[i] = true;
                s[i] = b;
            }
            _ => break,
        }
    }
    for i in 0..n {
        s[i] = s[i].max(lower[i]).min(upper[i]);
    }
    s
}

/// Largest angle in `[0, π/2]` keeping `s cos θ + w sin θ` within the bounds
/// on the free coordinates, with the bound reached first.
fn feasible_angle(s: &Vector, w: &Vector, lower: &Vector, upper: &Vector, fixed: &[bool]) -> (f64, Option<(usize, f64)>) {
    let mut theta_max = FRAC_PI_2;
    let mut hit = None;
    for i in (0..s.len()).filter(|&i| !fixed[i]) {
        for (b, sign) in [(upper[i], 1.0), (lower[i], -1.0)] {
            if !b.is_finite() {
                continue;
            }
            // Crossing of sign*(s_i cos θ + w_i sin θ) through sign*b.
            let (a, c, target) = (sign * s[i], sign * w[i], sign * b);
            let th = if a >= target && c > 0.0 {
                0.0
            } else {
                first_crossing(a, c, target)
            };
            if th < theta_max {
                theta_max = th;
                hit = Some((i, b));
            }
        }
    }
    (theta_max, hit)
}

/// Smallest θ in `(0, π/2]` with `a cos θ + c sin θ = target`, or infinity.
fn first_crossing(a: f64, c: f64, target: f64) -> f64 {
    let r = a.hypot(c);
    if r <= target || r == 0.0 {
        return f64::INFINITY;
    }
    let phi = c.atan2(a);
    let spread = (target / r).acos();
    let mut best = f64::INFINITY;
    for cand in [phi - spread, phi + spread] {
        let t = cand.rem_euclid(2.0 * std::f64::consts::PI);
        // Roots at the starting angle belong to a component leaving the bound.
        if t > 1e-12 && t <= FRAC_PI_2 && t < best {
            best = t;
        }
    }
    best
}

fn golden_section(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return a;
    }
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}
