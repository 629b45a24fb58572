//! Reference computations written independently of the library, and one
//! check per acceptance criterion. Each check returns a short summary on
//! success and a description of the first mismatch on failure.
#![allow(dead_code)]

use std::time::{Duration, Instant};

use cobyqa::linalg::{Matrix, Vector};
use cobyqa::models::{
    initial_interpolation_set, lagrange_polynomial, lagrange_zm_value, min_frobenius, replace_point, solve_broyden,
    InterpolationState, ModelBundle, QuadraticModel,
};
use cobyqa::subsolvers::{nnls, tcg, tcg_bound, tcg_linear, QuadObjective, TcgOutcome};
use cobyqa::{minimize, Options, Problem};
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| rng.gen_range(lo..hi)))
}

pub fn uniform_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn sym_mat(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let b = uniform_mat(rng, n, n);
    (&b + b.transpose()) * 0.5
}

/// Runs `f` and appends the elapsed time to its summary; fails when the
/// budget is exceeded.
pub fn timed(budget: Duration, f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let out = out.map(|s| format!("{s} [{:.2}s]", took.as_secs_f64())).map_err(|s| format!("{s} [{:.2}s]", took.as_secs_f64()));
    if took > budget && out.is_ok() {
        return Err(format!("took {:.2}s, budget {:.0}s", took.as_secs_f64(), budget.as_secs_f64()));
    }
    out
}

// ---------------------------------------------------------------------------
// Oracles

/// Interpolation KKT matrix built entry by entry from the displacements.
pub fn kkt(xpt: &Matrix) -> Matrix {
    let (n, m) = xpt.shape();
    let mut w = Matrix::zeros(m + n + 1, m + n + 1);
    for i in 0..m {
        for j in 0..m {
            let ip: f64 = (0..n).map(|k| xpt[(k, i)] * xpt[(k, j)]).sum();
            w[(i, j)] = 0.5 * ip * ip;
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

pub fn quad_value(c: f64, g: &Vector, h: &Matrix, s: &Vector) -> f64 {
    c + g.dot(s) + 0.5 * s.dot(&(h * s))
}

/// Full Hessian of a model with implicit terms expanded point by point.
pub fn expand_hessian(model: &QuadraticModel, xpt: &Matrix) -> Matrix {
    let mut h = model.explicit_hess.clone();
    for i in 0..xpt.ncols() {
        let y = xpt.column(i);
        h += &y * y.transpose() * model.implicit[i];
    }
    h
}

/// Hessian correction of least Frobenius norm whose quadratic interpolates
/// `resid`, obtained from the first-order conditions in the monomial
/// coefficients `(c, g, H_ij for i ≤ j)`.
pub fn min_norm_correction(xpt: &Matrix, resid: &Vector) -> Option<Matrix> {
    let (n, m) = xpt.shape();
    let nh = n * (n + 1) / 2;
    let p = 1 + n + nh;
    let mut a = Matrix::zeros(m, p);
    let mut weight = Vector::zeros(p);
    for k in 0..m {
        a[(k, 0)] = 1.0;
        for i in 0..n {
            a[(k, 1 + i)] = xpt[(i, k)];
        }
        let mut col = 1 + n;
        for i in 0..n {
            for j in i..n {
                a[(k, col)] = if i == j { 0.5 * xpt[(i, k)].powi(2) } else { xpt[(i, k)] * xpt[(j, k)] };
                weight[col] = if i == j { 1.0 } else { 2.0 };
                col += 1;
            }
        }
    }
    let dim = p + m;
    let mut sys = Matrix::zeros(dim, dim);
    for i in 0..p {
        sys[(i, i)] = 2.0 * weight[i];
    }
    sys.view_mut((0, p), (p, m)).copy_from(&a.transpose());
    sys.view_mut((p, 0), (m, p)).copy_from(&a);
    let mut rhs = Vector::zeros(dim);
    rhs.rows_mut(p, m).copy_from(resid);
    let sol = sys.lu().solve(&rhs)?;
    let mut h = Matrix::zeros(n, n);
    let mut col = 1 + n;
    for i in 0..n {
        for j in i..n {
            h[(i, j)] = sol[col];
            h[(j, i)] = sol[col];
            col += 1;
        }
    }
    Some(h)
}

/// Coefficients `(λ, c, g)` of the `t`-th Lagrange function from a dense
/// solve, evaluated at the displacement `s`.
pub fn lagrange_dense(xpt: &Matrix, t: usize, s: &Vector) -> f64 {
    let (n, m) = xpt.shape();
    let mut e = Vector::zeros(m + n + 1);
    e[t] = 1.0;
    let v = kkt(xpt).lu().solve(&e).expect("nonsingular KKT matrix");
    let mut val = v[m];
    for k in 0..n {
        val += v[m + 1 + k] * s[k];
    }
    for i in 0..m {
        let ys: f64 = (0..n).map(|k| xpt[(k, i)] * s[k]).sum();
        val += 0.5 * v[i] * ys * ys;
    }
    val
}

/// Global minimizer of `gᵀs + ½ sᵀHs` over `‖s‖ ≤ Δ` from the spectral
/// decomposition of `H`, with bisection on the secular equation and the
/// hard case handled explicitly.
pub fn trust_region_exact(h: &Matrix, g: &Vector, delta: f64) -> Vector {
    let n = g.len();
    let eig = SymmetricEigen::new(h.clone());
    let lam = &eig.eigenvalues;
    let q = &eig.eigenvectors;
    let gh = q.tr_mul(g);
    let lmin = lam.min();
    let gscale = g.norm().max(1e-300);
    let step = |mu: f64, skip_min: bool| {
        let mut c = Vector::zeros(n);
        for i in 0..n {
            if skip_min && lam[i] - lmin <= 1e-12 * lam.amax().max(1.0) {
                continue;
            }
            c[i] = -gh[i] / (lam[i] + mu);
        }
        c
    };
    if lmin > 0.0 {
        let c = step(0.0, false);
        if c.norm() <= delta {
            return q * c;
        }
    }
    let floor = (-lmin).max(0.0);
    let min_space: Vec<usize> = (0..n).filter(|&i| lam[i] - lmin <= 1e-12 * lam.amax().max(1.0)).collect();
    let orth = min_space.iter().all(|&i| gh[i].abs() <= 1e-12 * gscale);
    if orth && lmin <= 0.0 {
        let c = step(floor, true);
        if c.norm() <= delta {
            let mut c = c;
            let tau = (delta * delta - c.norm_squared()).max(0.0).sqrt();
            c[min_space[0]] = tau;
            return q * c;
        }
    }
    let mut lo = floor;
    let mut hi = floor + g.norm() / delta + 1.0;
    while step(hi, false).norm() > delta {
        hi *= 2.0;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if step(mid, false).norm() > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    q * step(hi, false)
}

/// Least value of `‖A x − b‖²` with `x_i ≥ 0` for `i < n0`, found by
/// trying every subset of the sign-constrained variables as the free set.
pub fn nnls_exhaustive(a: &Matrix, b: &Vector, n0: usize) -> f64 {
    let n = a.ncols();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n0) {
        let cols: Vec<usize> = (0..n).filter(|&i| i >= n0 || mask & (1 << i) != 0).collect();
        let r = if cols.is_empty() {
            b.norm_squared()
        } else {
            let sub = a.select_columns(&cols);
            let x = sub.clone().svd(true, true).solve(b, 1e-13).expect("svd solve");
            let feasible = cols.iter().enumerate().all(|(k, &i)| i >= n0 || x[k] >= -1e-14);
            if !feasible {
                continue;
            }
            (&sub * x - b).norm_squared()
        };
        best = best.min(r);
    }
    best
}

// ---------------------------------------------------------------------------
// Criteria

fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum()
}

pub fn check_golden_rosenbrock() -> Check {
    let mut p = Problem::builder(5, rosenbrock).build().map_err(|e| e.to_string())?;
    let res = minimize(&mut p, &[1.3, 0.7, 0.8, 1.9, 1.2], &Options::default()).map_err(|e| e.to_string())?;
    let err = res.x.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    let msg = format!("‖x − 1‖∞ = {err:.2e}, nfev = {}, status = {}", res.nfev, res.status);
    if err <= 1e-4 && res.nfev <= 2500 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

pub fn check_golden_qp() -> Check {
    let mut p = Problem::builder(2, |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] - 2.5).powi(2))
        .linear_ineq(vec![vec![-1.0, 2.0], vec![1.0, 2.0], vec![1.0, -2.0]], vec![2.0, 6.0, 2.0])
        .bounds(vec![0.0, 0.0], vec![f64::INFINITY; 2])
        .build()
        .map_err(|e| e.to_string())?;
    let res = minimize(&mut p, &[2.0, 0.0], &Options::default()).map_err(|e| e.to_string())?;
    let err = (res.x[0] - 1.4).abs().max((res.x[1] - 1.7).abs());
    let msg = format!("error {err:.2e}, maxcv {:.1e}, nfev = {}", res.maxcv, res.nfev);
    if err <= 1e-5 && res.maxcv <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

pub fn check_golden_nonlinear() -> Check {
    let mut p = Problem::builder(3, |x: &[f64]| x[2])
        .linear_ineq(vec![vec![-5.0, 1.0, -1.0], vec![5.0, 1.0, -1.0]], vec![0.0, 0.0])
        .nonlinear_ineq(|x: &[f64]| vec![x[0].powi(2) + x[1].powi(2) + 4.0 * x[1] - x[2]])
        .build()
        .map_err(|e| e.to_string())?;
    let res = minimize(&mut p, &[1.0, 1.0, 1.0], &Options::default()).map_err(|e| e.to_string())?;
    let err = res.x.iter().zip([0.0, -3.0, -3.0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let msg = format!("error {err:.2e}, maxcv {:.1e}, nfev = {}", res.maxcv, res.nfev);
    if err <= 1e-3 && res.maxcv <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn coordinate_set(n: usize, m: usize) -> InterpolationState {
    let mut pts = Matrix::zeros(n, m);
    for j in 0..n {
        pts[(j, j + 1)] = 1.0;
    }
    for j in 0..m - n - 1 {
        pts[(j, n + 1 + j)] = -1.0;
    }
    InterpolationState::from_points(Vector::zeros(n), &pts).expect("coordinate set is poised")
}

pub fn check_poisedness() -> Check {
    let mut rng = rng(11);
    let mut worst_const = 0.0f64;
    let mut worst_value = 0.0f64;
    let mut cases = 0;
    for n in [2usize, 3, 5] {
        for m in n + 2..=2 * n + 1 {
            cases += 1;
            let state = coordinate_set(n, m);
            let l1 = lagrange_polynomial(&state, 0);
            let h = expand_hessian(&l1, &state.xpt);
            let g = l1.gradient.clone();
            let c = l1.intercept;
            let lo = trust_region_exact(&h, &g, 1.0);
            let hi = trust_region_exact(&(-&h), &(-&g), 1.0);
            let max_abs = quad_value(c, &g, &h, &lo).abs().max(quad_value(c, &g, &h, &hi).abs());
            let expected = 1.0 + ((2 * n + 1 - m) as f64).sqrt();
            let err = (max_abs - expected).abs();
            if err > 1e-4 {
                return Err(format!("n = {n}, m = {m}: max |L₁| = {max_abs}, expected {expected}"));
            }
            worst_const = worst_const.max(err);
            for _ in 0..50 {
                let x = uniform_vec(&mut rng, n, -1.5, 1.5);
                for i in 0..m {
                    let li = lagrange_polynomial(&state, i);
                    let a = state.model_value(&li, &x);
                    let b = lagrange_zm_value(n, m, 1.0, i + 1, x.as_slice());
                    let e = (a - b).abs();
                    if e > 1e-8 {
                        return Err(format!("n = {n}, m = {m}, L_{}: {a} vs {b}", i + 1));
                    }
                    worst_value = worst_value.max(e);
                }
            }
        }
    }
    Ok(format!("{cases} sets, constant error {worst_const:.1e}, closed-form error {worst_value:.1e}"))
}

/// Random interpolation set in the unit cube whose KKT matrix has condition
/// number at most 1e4.
pub fn random_state(rng: &mut ChaCha8Rng, n: usize, m: usize) -> InterpolationState {
    loop {
        let pts = uniform_mat(rng, n, m);
        let base = pts.column(0).into_owned();
        let Ok(state) = InterpolationState::from_points(base, &pts) else { continue };
        let sv = kkt(&state.xpt).singular_values();
        if sv.min() * 1e4 >= sv.max() {
            return state;
        }
    }
}

fn random_model(rng: &mut ChaCha8Rng, n: usize, m: usize) -> QuadraticModel {
    QuadraticModel {
        intercept: rng.gen_range(-1.0..1.0),
        gradient: uniform_vec(rng, n, -1.0, 1.0),
        explicit_hess: sym_mat(rng, n),
        implicit: uniform_vec(rng, m, -1.0, 1.0),
    }
}

pub fn check_broyden() -> Check {
    let mut rng = rng(23);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(n + 2..=(n + 1) * (n + 2) / 2);
        let state = random_state(&mut rng, n, m);
        let old = random_model(&mut rng, n, m);
        let values = uniform_vec(&mut rng, m, -2.0, 2.0);
        let h_old = expand_hessian(&old, &state.xpt);
        let resid = Vector::from_iterator(
            m,
            (0..m).map(|i| values[i] - quad_value(old.intercept, &old.gradient, &h_old, &state.rel(i))),
        );
        let Some(dh) = min_norm_correction(&state.xpt, &resid) else {
            return Err(format!("instance {k}: oracle system singular"));
        };
        let new = solve_broyden(&state, &values, &old);
        let err = (expand_hessian(&new, &state.xpt) - (&h_old + &dh)).norm();
        if !(err <= 1e-8) {
            let sv = kkt(&state.xpt).singular_values();
            return Err(format!("instance {k} (n = {n}, m = {m}): Hessian error {err:.2e}, ‖H‖ = {:.2e}, cond = {:.1e}", dh.norm(), sv.max() / sv.min()));
        }
        worst = worst.max(err);
    }
    Ok(format!("200 instances, worst Frobenius error {worst:.1e}"))
}

pub fn check_inverse_update() -> Check {
    let mut rng = rng(37);
    let mut worst_inv = 0.0f64;
    let mut worst_sigma = 0.0f64;
    let mut worst_bound = f64::INFINITY;
    let mut candidates = 0;
    for case in 0..25 {
        let n = rng.gen_range(2..=5);
        let m = rng.gen_range(n + 2..=2 * n + 1);
        let inf = Vector::from_element(n, f64::INFINITY);
        let mut state = initial_interpolation_set(&Vector::zeros(n), 1.0, m, &(-&inf), &inf).map_err(|e| e.to_string())?;
        let mut models = ModelBundle { f: QuadraticModel::zero(n, m), c: Vec::new() };
        let mut done = 0;
        while done < 20 {
            let t = rng.gen_range(0..m);
            let x = uniform_vec(&mut rng, n, -1.5, 1.5);
            if state.denominator(t, &x).abs() < 0.05 {
                continue;
            }
            let f = rng.gen_range(-1.0..1.0);
            replace_point(&mut state, &mut models, t, &x, f, &[], true).map_err(|e| format!("case {case}: {e}"))?;
            done += 1;
        }
        let w = kkt(&state.xpt);
        let err = (state.inv.assemble() * &w - Matrix::identity(m + n + 1, m + n + 1)).amax();
        if !(err <= 1e-8) {
            return Err(format!("case {case}: ‖HW − I‖ = {err:.2e}"));
        }
        worst_inv = worst_inv.max(err);
        let det_w = w.clone().lu().determinant();
        for _ in 0..20 {
            candidates += 1;
            let x = uniform_vec(&mut rng, n, -2.0, 2.0);
            let s = &x - &state.base;
            let (sigma, _) = state.denominators(&x);
            let t = rng.gen_range(0..m);
            let mut moved = state.xpt.clone();
            moved.set_column(t, &s);
            let ratio = kkt(&moved).lu().determinant() / det_w;
            let rel = (sigma[t] - ratio).abs() / ratio.abs().max(f64::MIN_POSITIVE);
            if !(rel <= 1e-8) {
                return Err(format!("case {case}, t = {t}: σ = {} vs det ratio {ratio}", sigma[t]));
            }
            worst_sigma = worst_sigma.max(rel);
            let lt = lagrange_dense(&state.xpt, t, &s);
            let slack = sigma[t] - lt * lt;
            if !(slack >= -1e-10) {
                return Err(format!("case {case}, t = {t}: σ = {} < L² = {}", sigma[t], lt * lt));
            }
            worst_bound = worst_bound.min(slack);
        }
    }
    Ok(format!(
        "25 sets × 20 replacements, ‖HW − I‖ ≤ {worst_inv:.1e}; {candidates} candidates, σ rel error ≤ {worst_sigma:.1e}, min σ − L² = {worst_bound:.1e}"
    ))
}

fn monotone_and_feasible(
    out: &TcgOutcome,
    q: &QuadObjective,
    delta: f64,
    inside: &dyn Fn(&Vector) -> f64,
) -> Result<(), String> {
    let mut prev = f64::INFINITY;
    for (k, s) in out.iterates.iter().enumerate() {
        if s.norm() > delta * (1.0 + 1e-10) {
            return Err(format!("iterate {k} outside the ball: {} > {delta}", s.norm()));
        }
        let v = inside(s);
        if v > 1e-10 {
            return Err(format!("iterate {k} violates a constraint by {v:.2e}"));
        }
        let val = q.value(s);
        if val > prev + 1e-12 * prev.abs().max(1.0) {
            return Err(format!("iterate {k} increases the model: {val} > {prev}"));
        }
        prev = val;
    }
    Ok(())
}

pub fn check_tcg() -> Check {
    let mut rng = rng(41);
    let mut worst_ratio = f64::INFINITY;
    for k in 0..200 {
        let n = rng.gen_range(1..=6);
        let b = uniform_mat(&mut rng, n, n);
        let h = b.transpose() * &b + Matrix::identity(n, n) * 1e-3;
        let g = uniform_vec(&mut rng, n, -1.0, 1.0);
        let delta = rng.gen_range(0.05..3.0);
        let hv = |v: &Vector| &h * v;
        let q = QuadObjective::new(g.clone(), &hv);
        let out = tcg(&q, delta);
        let exact = trust_region_exact(&h, &g, delta);
        let best = -q.value(&exact);
        let got = -q.value(&out.step);
        if !(got >= 0.5 * best) {
            return Err(format!("instance {k}: reduction {got} < half of {best}"));
        }
        worst_ratio = worst_ratio.min(got / best);
    }
    let mut variant_counts = [0usize; 3];
    for k in 0..1000 {
        let n = rng.gen_range(1..=6);
        let h = sym_mat(&mut rng, n) * 2.0;
        let g = uniform_vec(&mut rng, n, -1.0, 1.0);
        let delta = rng.gen_range(0.05..3.0);
        let hv = |v: &Vector| &h * v;
        let q = QuadObjective::new(g, &hv);
        let res = match k % 3 {
            0 => {
                let out = tcg(&q, delta);
                monotone_and_feasible(&out, &q, delta, &|_| 0.0)
            }
            1 => {
                let lower = uniform_vec(&mut rng, n, -1.0, 0.0);
                let upper = uniform_vec(&mut rng, n, 0.0, 1.0);
                let out = tcg_bound(&q, &lower, &upper, delta);
                monotone_and_feasible(&out, &q, delta, &|s: &Vector| {
                    (0..n).map(|i| (lower[i] - s[i]).max(s[i] - upper[i])).fold(0.0, f64::max)
                })
            }
            _ => {
                let rows = rng.gen_range(0..=2 * n);
                let a = uniform_mat(&mut rng, rows, n);
                let bvec = Vector::from_iterator(
                    rows,
                    (0..rows).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) }),
                );
                let me = rng.gen_range(0..n);
                let c = uniform_mat(&mut rng, me, n);
                let out = tcg_linear(&q, &a, &bvec, &c, delta).map_err(|e| format!("instance {k}: {e}"))?;
                monotone_and_feasible(&out, &q, delta, &|s: &Vector| {
                    let ub = (&a * s - &bvec).iter().copied().fold(0.0, f64::max);
                    (&c * s).iter().map(|v| v.abs()).fold(ub, f64::max)
                })
            }
        };
        res.map_err(|e| format!("instance {k} (variant {}): {e}", k % 3))?;
        variant_counts[k % 3] += 1;
    }
    Ok(format!(
        "200 convex instances, worst reduction ratio {worst_ratio:.3}; {}/{}/{} plain/bound/linear runs feasible and monotone",
        variant_counts[0], variant_counts[1], variant_counts[2]
    ))
}

pub fn check_nnls() -> Check {
    let mut rng = rng(53);
    let mut worst = 0.0f64;
    for k in 0..500 {
        let n0 = rng.gen_range(0..=10);
        let nfree = rng.gen_range(0..=2);
        let n = n0 + nfree;
        let rows = n + rng.gen_range(0..=4);
        let a = uniform_mat(&mut rng, rows, n.max(1)).columns(0, n).into_owned();
        let b = uniform_vec(&mut rng, rows, -1.0, 1.0);
        let x = nnls(&a, &b, n0);
        if (0..n0).any(|i| x[i] < 0.0) {
            return Err(format!("instance {k}: negative component"));
        }
        let got = (&a * &x - &b).norm_squared();
        let want = nnls_exhaustive(&a, &b, n0);
        let err = (got - want).abs();
        if !(err <= 1e-10) {
            return Err(format!("instance {k} (n0 = {n0}, n = {n}): {got} vs {want}"));
        }
        worst = worst.max(err);
    }
    Ok(format!("500 instances, worst objective gap {worst:.1e}"))
}

pub fn check_bound_respect() -> Check {
    let mut rng = rng(67);
    let mut evaluations = 0;
    for k in 0..200 {
        let n = rng.gen_range(1..=4);
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for _ in 0..n {
            let l = rng.gen_range(-2.0..1.0);
            let width = match rng.gen_range(0..4) {
                0 => 0.0,
                1 => rng.gen_range(1e-3..0.5),
                _ => rng.gen_range(0.5..3.0),
            };
            lower.push(if rng.gen_bool(0.1) { f64::NEG_INFINITY } else { l });
            upper.push(l + width);
        }
        let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let scale: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let rosen = rng.gen_bool(0.3);
        let obj = move |x: &[f64]| {
            let q: f64 = (0..x.len()).map(|i| scale[i] * (x[i] - center[i]).powi(2)).sum();
            if rosen {
                q + rosenbrock(x)
            } else {
                q
            }
        };
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let mut p = Problem::builder(n, obj).bounds(lower.clone(), upper.clone()).build().map_err(|e| e.to_string())?;
        let opts = Options { rhoend: 1e-5, maxfev: Some(150 * n), ..Options::default() };
        minimize(&mut p, &x0, &opts).map_err(|e| format!("solve {k}: {e}"))?;
        for rec in p.history() {
            evaluations += 1;
            for i in 0..n {
                if !(lower[i] <= rec.x[i] && rec.x[i] <= upper[i]) {
                    return Err(format!("solve {k}, evaluation {}: x[{i}] = {} outside [{}, {}]", rec.index, rec.x[i], lower[i], upper[i]));
                }
            }
        }
    }
    Ok(format!("200 solves, {evaluations} evaluations inside the bounds"))
}

/// Least Frobenius norm model for values sampled from a quadratic, used by
/// the property tests.
pub fn exact_model_error(state: &InterpolationState, h: &Matrix, g: &Vector) -> f64 {
    let m = state.m();
    let vals = Vector::from_iterator(m, (0..m).map(|i| quad_value(0.0, g, h, &state.rel(i))));
    let model = min_frobenius(state, &vals);
    (0..m).map(|i| (state.model_value(&model, &state.point(i)) - vals[i]).abs()).fold(0.0, f64::max)
}

pub const BUDGETS: [(&str, u64); 9] = [
    ("golden-rosenbrock", 5),
    ("golden-qp", 1),
    ("golden-nonlinear", 2),
    ("poisedness", 10),
    ("broyden", 10),
    ("inverse-update", 10),
    ("tcg", 30),
    ("nnls", 10),
    ("bound-respect", 60),
];

pub fn budget(name: &str) -> Duration {
    let secs = BUDGETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s).expect("known criterion");
    Duration::from_secs(secs)
}
