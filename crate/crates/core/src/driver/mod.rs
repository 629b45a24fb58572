//! Derivative-free trust-region SQP loop.

pub mod rules;
pub mod step;

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{dist, Vector};
use crate::models::{
    initial_interpolation_set, lagrange_polynomial, min_frobenius, refresh_models, replace_point, shift_base, InterpolationState,
    ModelBundle, QuadraticModel, DENOMINATOR_TOL,
};
use crate::problem::{preprocess, violation, Problem, Reduction};
use crate::subsolvers::{geometry_bobyqa, geometry_lincoa, lsq_multipliers, GeometryInput};

pub use rules::{
    clamp_to_resolution, merit_actual, merit_model, penalty_increase, penalty_reduce, penalty_threshold, reduce_resolution, select_best,
    select_removal, update_radius, SwapTracker,
};
pub use step::{trust_region_step, CompositeStep, Linearization};

/// Violation accepted by the target stopping test.
pub const TARGET_FEASIBILITY: f64 = 1e-8;
const FEASIBLE_RTOL: f64 = 1e-12;
const GEOMETRY_FEASIBILITY: f64 = 1e-8;
/// Base point is moved to the iterate once it lies this many radii away.
const SHIFT_FACTOR: f64 = 10.0;

/// How the quadratic models are refreshed after each point replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelPolicy {
    /// Symmetric Broyden updates, swapped for least Frobenius norm models
    /// after a streak of poor steps at the final resolution of the radius.
    #[default]
    Default,
    AlwaysBroyden,
    AlwaysMinFrobenius,
}

#[derive(Debug, Clone)]
pub struct Options {
    pub rhobeg: f64,
    pub rhoend: f64,
    /// Number of interpolation points, `2n + 1` when unset.
    pub npt: Option<usize>,
    /// Evaluation budget, `500n` when unset.
    pub maxfev: Option<usize>,
    /// Iteration budget, `1000n` when unset.
    pub maxiter: Option<usize>,
    pub target: f64,
    pub disp: bool,
    pub debug: bool,
    pub model_policy: ModelPolicy,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            rhobeg: 1.0,
            rhoend: 1e-6,
            npt: None,
            maxfev: None,
            maxiter: None,
            target: f64::NEG_INFINITY,
            disp: false,
            debug: false,
            model_policy: ModelPolicy::Default,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    RadiusTarget,
    MaxFev,
    MaxIter,
    TargetReached,
    RoundingStop,
    AllFixed,
}

impl Status {
    pub fn message(self) -> &'static str {
        match self {
            Status::RadiusTarget => "the lower bound for the trust-region radius has been reached",
            Status::MaxFev => "the maximum number of function evaluations has been exceeded",
            Status::MaxIter => "the maximum number of iterations has been exceeded",
            Status::TargetReached => "the target objective function value has been reached",
            Status::RoundingStop => "computer rounding errors prevent further progress",
            Status::AllFixed => "all variables are fixed by the bound constraints",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::RadiusTarget => "radius-target",
            Status::MaxFev => "maxfev",
            Status::MaxIter => "maxiter",
            Status::TargetReached => "target-reached",
            Status::RoundingStop => "rounding-stop",
            Status::AllFixed => "all-fixed",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vec<f64>,
    pub status: Status,
    pub message: String,
    pub fun: f64,
    /// Gradient of the final objective model at `x`, NaN for fixed variables.
    pub jac: Vec<f64>,
    pub nfev: usize,
    pub nit: usize,
    pub maxcv: f64,
}

impl SolveResult {
    pub fn success(&self) -> bool {
        matches!(self.status, Status::RadiusTarget | Status::TargetReached | Status::AllFixed)
    }
}

/// Evaluated values of one interpolation point.
#[derive(Debug, Clone)]
struct PointValues {
    f: f64,
    cub: Vec<f64>,
    ceq: Vec<f64>,
}

enum Stop {
    Done(Status),
    Fail(Error),
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        match e {
            Error::ZeroDenominator | Error::DegenerateGeometry => Stop::Done(Status::RoundingStop),
            other => Stop::Fail(other),
        }
    }
}

struct Solver<'p> {
    problem: &'p mut Problem,
    red: Reduction,
    opts: Options,
    maxfev: usize,
    /// Number of evaluations recorded before this solve started.
    nfev0: usize,
    state: InterpolationState,
    models: ModelBundle,
    values: Vec<PointValues>,
    n_lin_ub: usize,
    n_lin_eq: usize,
    n_nl_ub: usize,
    delta: f64,
    resolution: f64,
    final_resolution: f64,
    gamma: f64,
    lam_ub: Vector,
    lam_eq: Vector,
    nit: usize,
    short_half: usize,
    short_tenth: usize,
    swap: SwapTracker,
    active_rows: Vec<Vector>,
    /// True once every initial point has been evaluated and modelled.
    ready: bool,
}

/// Minimizes the problem from `x0`. Points passed to the callbacks always
/// satisfy the bounds.
pub fn minimize(problem: &mut Problem, x0: &[f64], opts: &Options) -> Result<SolveResult> {
    if x0.len() != problem.n() {
        return Err(Error::Config(format!("x0 has length {}, expected {}", x0.len(), problem.n())));
    }
    if !(opts.rhoend > 0.0 && opts.rhoend <= opts.rhobeg) {
        return Err(Error::Config("options require 0 < rhoend <= rhobeg".into()));
    }
    let (report, red) = preprocess(problem, x0, opts.rhobeg)?;
    let nfev0 = problem.nfev();
    let n_full = problem.n();
    let maxfev = opts.maxfev.unwrap_or(500 * n_full.max(1));
    if report.is_degenerate() {
        let mut status = Status::AllFixed;
        if maxfev == 0 {
            status = Status::MaxFev;
        } else {
            problem.evaluate(&report.full_x0)?;
        }
        return Ok(finish(problem, nfev0, &red, None, 0.0, status, 0));
    }
    let n = red.n();
    let m = opts.npt.unwrap_or(2 * n + 1);
    if m < n + 2 || m > (n + 1) * (n + 2) / 2 {
        return Err(Error::Config(format!("npt = {m} must lie in [{}, {}]", n + 2, (n + 1) * (n + 2) / 2)));
    }
    let delta = report.adjusted_delta0;
    let x0r = Vector::from_vec(report.adjusted_x0.clone());
    let state = initial_interpolation_set(&x0r, delta, m, &red.lower, &red.upper)?;
    let mut solver = Solver {
        n_lin_ub: red.a_ub.nrows(),
        n_lin_eq: red.a_eq.nrows(),
        n_nl_ub: 0,
        models: ModelBundle { f: QuadraticModel::zero(n, m), c: Vec::new() },
        values: Vec::with_capacity(m),
        problem,
        red,
        opts: opts.clone(),
        maxfev,
        nfev0,
        state,
        delta,
        resolution: delta,
        final_resolution: opts.rhoend.min(delta),
        gamma: 0.0,
        lam_ub: Vector::zeros(0),
        lam_eq: Vector::zeros(0),
        nit: 0,
        short_half: 0,
        short_tenth: 0,
        swap: SwapTracker::default(),
        active_rows: Vec::new(),
        ready: false,
    };
    let status = match solver.run() {
        Ok(()) => unreachable!("the loop only exits through a stop"),
        Err(Stop::Done(status)) => status,
        Err(Stop::Fail(e)) => return Err(e),
    };
    if solver.opts.disp {
        println!("{}", status.message());
    }
    let Solver { problem, red, models, state, gamma, nit, ready, .. } = solver;
    let model = if ready { Some((state, models.f)) } else { None };
    Ok(finish(problem, nfev0, &red, model, gamma, status, nit))
}

fn finish(
    problem: &Problem,
    nfev0: usize,
    red: &Reduction,
    model: Option<(InterpolationState, QuadraticModel)>,
    gamma: f64,
    status: Status,
    nit: usize,
) -> SolveResult {
    let records = &problem.history()[nfev0..];
    let nfev = records.len();
    if records.is_empty() {
        return SolveResult {
            x: red.template.clone(),
            status,
            message: status.message().to_string(),
            fun: f64::NAN,
            jac: vec![f64::NAN; problem.n()],
            nfev,
            nit,
            maxcv: f64::NAN,
        };
    }
    let best = &records[select_best(records, gamma)];
    let mut jac = vec![f64::NAN; problem.n()];
    if let Some((state, f)) = model {
        let xr = Vector::from_iterator(red.n(), red.free.iter().map(|&i| best.x[i]));
        let g = state.model_gradient(&f, &xr);
        for (k, &i) in red.free.iter().enumerate() {
            jac[i] = g[k];
        }
    }
    SolveResult {
        x: best.x.clone(),
        status,
        message: status.message().to_string(),
        fun: best.f,
        jac,
        nfev,
        nit,
        maxcv: best.maxcv,
    }
}

fn total_cmp_nan_last(a: f64, b: f64) -> Ordering {
    let a = if a.is_nan() { f64::INFINITY } else { a };
    let b = if b.is_nan() { f64::INFINITY } else { b };
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

impl Solver<'_> {
    fn used(&self) -> usize {
        self.problem.nfev() - self.nfev0
    }

    /// Counted evaluation at the reduced point `x`, which is clamped to the
    /// bounds first. Returns the clamped point with its values.
    fn evaluate(&mut self, x: &Vector) -> std::result::Result<(Vector, PointValues), Stop> {
        if self.used() >= self.maxfev {
            return Err(Stop::Done(Status::MaxFev));
        }
        let mut x = x.clone();
        for i in 0..x.len() {
            x[i] = x[i].max(self.red.lower[i]).min(self.red.upper[i]);
        }
        let full = self.red.expand(&x);
        let rec = self.problem.evaluate(&full)?;
        let vals = PointValues { f: rec.f, cub: rec.cub.clone(), ceq: rec.ceq.clone() };
        let reached = rec.f <= self.opts.target && rec.maxcv <= TARGET_FEASIBILITY;
        if reached {
            return Err(Stop::Done(Status::TargetReached));
        }
        Ok((x, vals))
    }

    /// Objective and nonlinear constraint values fed to the models, with
    /// non-finite entries replaced by the largest finite value in the set.
    fn model_values(&self, vals: &PointValues) -> (f64, Vec<f64>) {
        let cap = |v: f64, col: &dyn Fn(usize) -> f64| -> f64 {
            if v.is_finite() {
                return v;
            }
            let m = (0..self.values.len()).map(col).filter(|c| c.is_finite()).fold(f64::NEG_INFINITY, f64::max);
            if m.is_finite() {
                m
            } else {
                0.0
            }
        };
        let f = cap(vals.f, &|i| self.state.fvals[i]);
        let mut c = Vec::new();
        for j in 0..self.n_nl_ub {
            c.push(cap(vals.cub[self.n_lin_ub + j], &|i| self.state.cvals[(i, j)]));
        }
        let n_nl_eq = vals.ceq.len() - self.n_lin_eq;
        for j in 0..n_nl_eq {
            let k = self.n_nl_ub + j;
            c.push(cap(vals.ceq[self.n_lin_eq + j], &|i| self.state.cvals[(i, k)]));
        }
        (f, c)
    }

    fn merit(&self, i: usize) -> f64 {
        let v = &self.values[i];
        merit_actual(v.f, &v.cub, &v.ceq, self.gamma)
    }

    fn broyden(&self) -> bool {
        self.opts.model_policy != ModelPolicy::AlwaysMinFrobenius
    }

    fn initialize(&mut self) -> std::result::Result<(), Stop> {
        let m = self.state.m();
        for i in 0..m {
            let (x, vals) = self.evaluate(&self.state.point(i))?;
            debug_assert!(dist(&x, &self.state.point(i)) == 0.0);
            if i == 0 {
                self.n_nl_ub = vals.cub.len() - self.n_lin_ub;
                let k = self.n_nl_ub + vals.ceq.len() - self.n_lin_eq;
                self.state.cvals = crate::linalg::Matrix::zeros(m, k);
            }
            self.values.push(vals.clone());
            let (f, c) = self.model_values(&vals);
            self.state.fvals[i] = f;
            for (j, v) in c.into_iter().enumerate() {
                self.state.cvals[(i, j)] = v;
            }
        }
        let ncon = self.state.cvals.ncols();
        self.models = ModelBundle { f: QuadraticModel::zero(self.state.n(), m), c: vec![QuadraticModel::zero(self.state.n(), m); ncon] };
        refresh_models(&self.state, &mut self.models, false);
        let k = (0..m)
            .min_by(|&a, &b| total_cmp_nan_last(self.values[a].f, self.values[b].f))
            .expect("nonempty set");
        self.state.current_index = k;
        self.update_multipliers();
        self.ready = true;
        Ok(())
    }

    fn current(&self) -> Vector {
        self.state.point(self.state.current_index)
    }

    fn linearization(&self) -> Linearization {
        let k = self.state.current_index;
        let x = self.current();
        let vals = &self.values[k];
        let mut lin = Linearization::default();
        for j in 0..self.n_lin_ub {
            lin.ub_grads.push(self.red.a_ub.row(j).transpose());
            lin.ub_values.push(vals.cub[j]);
        }
        for j in 0..self.n_nl_ub {
            lin.ub_grads.push(self.state.model_gradient(&self.models.c[j], &x));
            lin.ub_values.push(self.state.cvals[(k, j)]);
        }
        for j in 0..self.n_lin_eq {
            lin.eq_grads.push(self.red.a_eq.row(j).transpose());
            lin.eq_values.push(vals.ceq[j]);
        }
        for j in self.n_nl_ub..self.models.c.len() {
            lin.eq_grads.push(self.state.model_gradient(&self.models.c[j], &x));
            lin.eq_values.push(self.state.cvals[(k, j)]);
        }
        lin
    }

    fn update_multipliers(&mut self) {
        let lin = self.linearization();
        let g = self.state.model_gradient(&self.models.f, &self.current());
        let (ub, eq) = lsq_multipliers(&g, &lin.ub_grads, &lin.ub_values, &lin.eq_grads);
        self.lam_ub = ub;
        self.lam_eq = eq;
    }

    fn lagrangian_hess(&self, v: &Vector) -> Vector {
        let mut h = self.state.model_hess_vec(&self.models.f, v);
        for j in 0..self.n_nl_ub {
            let l = self.lam_ub[self.n_lin_ub + j];
            if l != 0.0 {
                h += self.state.model_hess_vec(&self.models.c[j], v) * l;
            }
        }
        for j in self.n_nl_ub..self.models.c.len() {
            let l = self.lam_eq[self.n_lin_eq + j - self.n_nl_ub];
            if l != 0.0 {
                h += self.state.model_hess_vec(&self.models.c[j], v) * l;
            }
        }
        h
    }

    fn max_distance(&self) -> (usize, f64) {
        let x = self.current();
        let mut best = (0, f64::NEG_INFINITY);
        for i in 0..self.state.m() {
            let d = dist(&self.state.point(i), &x);
            if d > best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Merit minimizer of the set, ties going to the current iterate and
    /// then to the lowest index.
    fn best_by_merit(&self) -> usize {
        let k = self.state.current_index;
        let mut best = k;
        let mut best_val = self.merit(k);
        for i in 0..self.state.m() {
            let v = self.merit(i);
            if total_cmp_nan_last(v, best_val) == Ordering::Less {
                best = i;
                best_val = v;
            }
        }
        best
    }

    /// Merit minimizer used as the reference for the removal choice, ties
    /// going to the point nearest the iterate, then the lowest index.
    fn removal_reference(&self) -> usize {
        let x = self.current();
        let mut best = 0;
        for i in 1..self.state.m() {
            match total_cmp_nan_last(self.merit(i), self.merit(best)) {
                Ordering::Less => best = i,
                Ordering::Equal if dist(&self.state.point(i), &x) < dist(&self.state.point(best), &x) => best = i,
                _ => {}
            }
        }
        best
    }

    /// Replaces point `t` by the evaluated point `x`.
    fn replace(&mut self, t: usize, x: &Vector, vals: PointValues) -> std::result::Result<(), Stop> {
        let (f, c) = self.model_values(&vals);
        let broyden = self.broyden();
        replace_point(&mut self.state, &mut self.models, t, x, f, &c, broyden)?;
        self.values[t] = vals;
        Ok(())
    }

    fn maybe_shift_base(&mut self) -> std::result::Result<(), Stop> {
        let x = self.current();
        let shift = &x - &self.state.base;
        if shift.norm() >= SHIFT_FACTOR * self.delta {
            // A set spread over very different scales can make the fresh
            // factorization singular; the current one stays valid, so the
            // shift is simply skipped then.
            let mut state = self.state.clone();
            let mut models = self.models.clone();
            match shift_base(&mut state, &mut models, &shift) {
                Ok(()) => {
                    self.state = state;
                    self.models = models;
                }
                Err(Error::DegenerateGeometry) => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(())
    }

    fn reduce_resolution(&mut self) -> std::result::Result<(), Stop> {
        match reduce_resolution(self.resolution, self.delta, self.final_resolution) {
            None => Err(Stop::Done(Status::RadiusTarget)),
            Some((res, delta)) => {
                self.resolution = res;
                self.delta = delta;
                let fvals: Vec<f64> = self.values.iter().map(|v| v.f).collect();
                let cub: Vec<Vec<f64>> = self.values.iter().map(|v| v.cub.clone()).collect();
                let ceq: Vec<Vec<f64>> = self.values.iter().map(|v| v.ceq.clone()).collect();
                self.gamma = penalty_reduce(&fvals, &cub, &ceq, self.gamma);
                if self.opts.disp {
                    let k = self.state.current_index;
                    println!(
                        "resolution {:.3e}  nfev {}  f {:.10e}  maxcv {:.3e}",
                        self.resolution,
                        self.used(),
                        self.values[k].f,
                        violation(&self.values[k].cub, &self.values[k].ceq)
                    );
                }
                Ok(())
            }
        }
    }

    fn run(&mut self) -> std::result::Result<(), Stop> {
        self.initialize()?;
        let maxiter = self.opts.maxiter.unwrap_or(1000 * self.problem.n().max(1));
        loop {
            if self.nit >= maxiter {
                return Err(Stop::Done(Status::MaxIter));
            }
            self.nit += 1;
            self.maybe_shift_base()?;
            if self.opts.debug {
                self.check_invariants();
            }
            let k = self.state.current_index;
            let x = self.current();
            let lin = self.linearization();
            let grad = self.state.model_gradient(&self.models.f, &x);
            let fk = self.values[k].f;
            let scale = 1.0 + if fk.is_finite() { fk.abs() } else { 0.0 };
            let feasible = lin.max_violation(&Vector::zeros(x.len())) <= FEASIBLE_RTOL * scale;
            let lower = &self.red.lower - &x;
            let upper = &self.red.upper - &x;
            let step = {
                let hess = |v: &Vector| self.lagrangian_hess(v);
                trust_region_step(&grad, &hess, &lin, &lower, &upper, self.delta, feasible)
            };
            self.active_rows = step.active_rows.clone();
            let d = step.step;
            let dnorm = d.norm();
            if dnorm < 0.5 * self.delta {
                self.short_half += 1;
                if dnorm < 0.1 * self.delta {
                    self.short_tenth += 1;
                } else {
                    self.short_tenth = 0;
                }
                self.delta = clamp_to_resolution(0.5 * self.delta, self.resolution);
                if self.short_half >= 5 || self.short_tenth >= 3 {
                    self.short_half = 0;
                    self.short_tenth = 0;
                    self.reduce_resolution()?;
                } else if self.max_distance().1 >= self.delta {
                    self.geometry_phase()?;
                }
                continue;
            }
            self.short_half = 0;
            self.short_tenth = 0;
            let hd = self.lagrangian_hess(&d);
            let quad = grad.dot(&d) + 0.5 * d.dot(&hd);
            let phi0 = lin.violation(&Vector::zeros(d.len()));
            let phid = lin.violation(&d);
            let lam_norm = (self.lam_ub.norm_squared() + self.lam_eq.norm_squared()).sqrt();
            self.gamma = penalty_increase(self.gamma, penalty_threshold(quad, phi0, phid), lam_norm);
            let predicted = merit_model(0.0, phi0, self.gamma) - merit_model(quad, phid, self.gamma);
            let (x_plus, vals) = self.evaluate(&(&x + &d))?;
            let d = &x_plus - &x;
            let actual = self.merit(k) - merit_actual(vals.f, &vals.cub, &vals.ceq, self.gamma);
            let ratio = if predicted > 0.0 && !actual.is_nan() { actual / predicted } else { f64::NEG_INFINITY };
            let reference = self.state.point(self.removal_reference());
            let (mut sigma, _) = self.state.denominators(&x_plus);
            // Pivots too small to update with must never win on distance.
            sigma.iter_mut().filter(|v| !(v.abs() > DENOMINATOR_TOL)).for_each(|v| *v = 0.0);
            let distances: Vec<f64> = (0..self.state.m()).map(|i| dist(&self.state.point(i), &reference)).collect();
            let exclude = if ratio > 0.0 { None } else { Some(k) };
            let t = select_removal(&sigma, &distances, exclude);
            self.replace(t, &x_plus, vals)?;
            let new_k = self.best_by_merit();
            self.state.current_index = new_k;
            self.update_multipliers();
            let delta_prev = self.delta;
            self.delta = update_radius(self.delta, self.resolution, ratio, d.norm());
            if self.opts.model_policy == ModelPolicy::Default {
                let xk = self.current();
                let gnorm = self.state.model_gradient(&self.models.f, &xk).norm();
                let tilde = min_frobenius(&self.state, &self.state.fvals);
                let tnorm = self.state.model_gradient(&tilde, &xk).norm();
                if self.swap.observe(delta_prev == self.resolution, ratio, gnorm, tnorm) {
                    refresh_models(&self.state, &mut self.models, false);
                    self.update_multipliers();
                }
            }
            let far = self.max_distance().1;
            if delta_prev <= self.resolution && ratio <= 0.1 && far <= 2.0 * self.resolution {
                self.reduce_resolution()?;
            } else if ratio <= 0.1 && far > self.delta.max(2.0 * self.resolution) {
                self.geometry_phase()?;
            }
        }
    }

    fn geometry_phase(&mut self) -> std::result::Result<(), Stop> {
        let k = self.state.current_index;
        let x = self.current();
        let (ybar, _) = self.max_distance();
        if ybar == k {
            return Ok(());
        }
        let radius = (0.1 * self.delta).max(self.resolution);
        let lag = lagrange_polynomial(&self.state, ybar);
        let xpt = self.state.xpt.clone();
        let hess = |v: &Vector| lag.hess_vec(&xpt, v);
        let input = GeometryInput {
            value: self.state.model_value(&lag, &x),
            grad: self.state.model_gradient(&lag, &x),
            hess: &hess,
            lower: &self.red.lower - &x,
            upper: &self.red.upper - &x,
            radius,
        };
        let directions: Vec<Vector> = (0..self.state.m()).filter(|&i| i != k).map(|i| self.state.point(i) - &x).collect();
        let score = |d: &Vector| self.state.denominator(ybar, &(&x + d)).abs();
        let r_b = geometry_bobyqa(&input, &directions, &score);
        let r_l = geometry_lincoa(&input, &self.active_rows);
        let lin = self.linearization();
        let r_l_ok = r_l.norm() > 0.0
            && (0..x.len()).all(|i| r_l[i] >= input.lower[i] && r_l[i] <= input.upper[i])
            && lin.ub_grads.iter().zip(&lin.ub_values).all(|(g, &c)| c + g.dot(&r_l) <= GEOMETRY_FEASIBILITY * (1.0 + g.norm() * radius))
            && lin.eq_grads.iter().zip(&lin.eq_values).all(|(g, &c)| (c + g.dot(&r_l)).abs() <= GEOMETRY_FEASIBILITY * (1.0 + g.norm() * radius))
            && score(&r_l) >= 0.1 * score(&r_b);
        let r = if r_l_ok { r_l } else { r_b };
        if r.norm() == 0.0 {
            return Ok(());
        }
        let (x_new, vals) = self.evaluate(&(&x + &r))?;
        self.replace(ybar, &x_new, vals)?;
        let new_k = self.best_by_merit();
        if new_k != k {
            self.state.current_index = new_k;
            self.update_multipliers();
        }
        Ok(())
    }

    fn check_invariants(&self) {
        assert!(self.delta >= self.resolution, "radius below its lower bound");
        let scale = self.state.fvals.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for i in 0..self.state.m() {
            let r = self.state.rel(i);
            let err = (self.models.f.value(&self.state.xpt, &r) - self.state.fvals[i]).abs();
            assert!(err <= 1e-6 * scale, "objective model does not interpolate point {i}: error {err:e}");
        }
    }
}
