//! Built-in test problems.

use std::sync::Arc;

use cobyqa::Problem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub struct TestProblem {
    pub id: String,
    pub n: usize,
    pub x0: Vec<f64>,
    pub objective: ScalarFn,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub nl_ineq: Option<VectorFn>,
    pub nl_eq: Option<VectorFn>,
    /// Known optimal value, for reference only.
    pub f_opt: f64,
}

impl std::fmt::Debug for TestProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestProblem").field("id", &self.id).field("n", &self.n).finish()
    }
}

impl TestProblem {
    pub fn new(id: &str, x0: Vec<f64>, f_opt: f64, objective: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        TestProblem {
            id: id.to_string(),
            n: x0.len(),
            x0,
            objective: Arc::new(objective),
            lower: None,
            upper: None,
            a_ub: Vec::new(),
            b_ub: Vec::new(),
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            nl_ineq: None,
            nl_eq: None,
            f_opt,
        }
    }

    pub fn bounds(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        self.lower = Some(lower);
        self.upper = Some(upper);
        self
    }

    pub fn linear_ineq(mut self, a: Vec<Vec<f64>>, b: Vec<f64>) -> Self {
        self.a_ub = a;
        self.b_ub = b;
        self
    }

    pub fn linear_eq(mut self, a: Vec<Vec<f64>>, b: Vec<f64>) -> Self {
        self.a_eq = a;
        self.b_eq = b;
        self
    }

    pub fn nonlinear_ineq(mut self, c: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.nl_ineq = Some(Arc::new(c));
        self
    }

    pub fn nonlinear_eq(mut self, c: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.nl_eq = Some(Arc::new(c));
        self
    }

    /// Solver-facing problem with the exact objective.
    pub fn build(&self) -> Problem {
        let f = self.objective.clone();
        self.build_with(move |x: &[f64]| f(x))
    }

    fn build_with(&self, objective: impl FnMut(&[f64]) -> f64 + 'static) -> Problem {
        let mut b = Problem::builder(self.n, objective);
        if let (Some(l), Some(u)) = (&self.lower, &self.upper) {
            b = b.bounds(l.clone(), u.clone());
        }
        if !self.a_ub.is_empty() {
            b = b.linear_ineq(self.a_ub.clone(), self.b_ub.clone());
        }
        if !self.a_eq.is_empty() {
            b = b.linear_eq(self.a_eq.clone(), self.b_eq.clone());
        }
        if let Some(c) = &self.nl_ineq {
            let c = c.clone();
            b = b.nonlinear_ineq(move |x: &[f64]| c(x));
        }
        if let Some(c) = &self.nl_eq {
            let c = c.clone();
            b = b.nonlinear_eq(move |x: &[f64]| c(x));
        }
        b.build().expect("registry problems are well formed")
    }
}

/// Problem whose objective is `(1 + ε) f(x)` with `ε ~ N(0, σ²)` drawn
/// afresh at every evaluation from a generator seeded by `seed`.
pub fn noisy_wrap(problem: &TestProblem, sigma: f64, seed: u64) -> Problem {
    assert!(sigma >= 0.0, "noise level must be nonnegative");
    if sigma == 0.0 {
        return problem.build();
    }
    let f = problem.objective.clone();
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    problem.build_with(move |x: &[f64]| (1.0 + normal.sample(&mut rng)) * f(x))
}

pub fn chained_rosenbrock(n: usize) -> TestProblem {
    let x0 = if n == 5 { vec![1.3, 0.7, 0.8, 1.9, 1.2] } else { (0..n).map(|i| if i % 2 == 0 { -1.2 } else { 1.0 }).collect() };
    let id = if n == 5 { "rosenbrock".to_string() } else { format!("rosenbrock:{n}") };
    let mut p = TestProblem::new("", x0, 0.0, |x: &[f64]| {
        x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum()
    });
    p.id = id;
    p
}

pub fn registry() -> Vec<TestProblem> {
    let inf = f64::INFINITY;
    vec![
        chained_rosenbrock(5),
        TestProblem::new("qp-listing", vec![2.0, 0.0], 0.8, |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] - 2.5).powi(2))
            .linear_ineq(vec![vec![-1.0, 2.0], vec![1.0, 2.0], vec![1.0, -2.0]], vec![2.0, 6.0, 2.0])
            .bounds(vec![0.0, 0.0], vec![inf, inf]),
        TestProblem::new("paraboloid-cone", vec![1.0, 1.0, 1.0], -3.0, |x: &[f64]| x[2])
            .linear_ineq(vec![vec![-5.0, 1.0, -1.0], vec![5.0, 1.0, -1.0]], vec![0.0, 0.0])
            .nonlinear_ineq(|x: &[f64]| vec![x[0].powi(2) + x[1].powi(2) + 4.0 * x[1] - x[2]]),
        TestProblem::new("sphere", vec![1.0, -2.0, 3.0, -4.0], 0.0, |x: &[f64]| x.iter().map(|v| v * v).sum()),
        TestProblem::new("quartic", vec![0.0; 4], 0.0, |x: &[f64]| {
            x.iter().enumerate().map(|(i, v)| (v - (i + 1) as f64 * 0.5).powi(4) + 0.1 * (v - (i + 1) as f64 * 0.5).powi(2)).sum()
        }),
        TestProblem::new("ill-quadratic", vec![1.0; 4], 0.0, |x: &[f64]| {
            x.iter().enumerate().map(|(i, v)| 10f64.powi(i as i32) * v * v).sum()
        }),
        TestProblem::new("beale", vec![1.0, 1.0], 0.0, |x: &[f64]| {
            (1.5 - x[0] + x[0] * x[1]).powi(2) + (2.25 - x[0] + x[0] * x[1].powi(2)).powi(2) + (2.625 - x[0] + x[0] * x[1].powi(3)).powi(2)
        }),
        TestProblem::new("powell-singular", vec![3.0, -1.0, 0.0, 1.0], 0.0, |x: &[f64]| {
            (x[0] + 10.0 * x[1]).powi(2) + 5.0 * (x[2] - x[3]).powi(2) + (x[1] - 2.0 * x[2]).powi(4) + 10.0 * (x[0] - x[3]).powi(4)
        }),
        TestProblem::new("trid", vec![0.0; 5], -30.0, |x: &[f64]| {
            x.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>() - x.windows(2).map(|w| w[0] * w[1]).sum::<f64>()
        }),
        TestProblem::new("box-sphere", vec![0.5; 3], 2.0, |x: &[f64]| {
            (x[0] - 2.0).powi(2) + (x[1] + 1.0).powi(2) + (x[2] - 0.5).powi(2)
        })
        .bounds(vec![0.0; 3], vec![1.0; 3]),
        TestProblem::new("hs21", vec![-1.0, -1.0], -99.96, |x: &[f64]| 0.01 * x[0] * x[0] + x[1] * x[1] - 100.0)
            .linear_ineq(vec![vec![-10.0, 1.0]], vec![-10.0])
            .bounds(vec![2.0, -50.0], vec![50.0, 50.0]),
        TestProblem::new("hs35", vec![0.5; 3], 1.0 / 9.0, |x: &[f64]| {
            9.0 - 8.0 * x[0] - 6.0 * x[1] - 4.0 * x[2] + 2.0 * x[0] * x[0] + 2.0 * x[1] * x[1] + x[2] * x[2] + 2.0 * x[0] * x[1] + 2.0 * x[0] * x[2]
        })
        .linear_ineq(vec![vec![1.0, 1.0, 2.0]], vec![3.0])
        .bounds(vec![0.0; 3], vec![inf; 3]),
        TestProblem::new("hs28", vec![-4.0, 1.0, 1.0], 0.0, |x: &[f64]| (x[0] + x[1]).powi(2) + (x[1] + x[2]).powi(2))
            .linear_eq(vec![vec![1.0, 2.0, 3.0]], vec![1.0]),
        TestProblem::new("hs6", vec![-1.2, 1.0], 0.0, |x: &[f64]| (1.0 - x[0]).powi(2))
            .nonlinear_eq(|x: &[f64]| vec![10.0 * (x[1] - x[0] * x[0])]),
        TestProblem::new("rosen-suzuki", vec![0.0; 4], -44.0, |x: &[f64]| {
            x[0] * x[0] + x[1] * x[1] + 2.0 * x[2] * x[2] + x[3] * x[3] - 5.0 * x[0] - 5.0 * x[1] - 21.0 * x[2] + 7.0 * x[3]
        })
        .nonlinear_ineq(|x: &[f64]| {
            let s: Vec<f64> = x.iter().map(|v| v * v).collect();
            vec![
                s[0] + s[1] + s[2] + s[3] + x[0] - x[1] + x[2] - x[3] - 8.0,
                s[0] + 2.0 * s[1] + s[2] + 2.0 * s[3] - x[0] - x[3] - 10.0,
                2.0 * s[0] + s[1] + s[2] + 2.0 * x[0] - x[1] - x[3] - 5.0,
            ]
        }),
        TestProblem::new("circle-linear", vec![1.5, 0.5], -2.0, |x: &[f64]| x[0] + x[1])
            .nonlinear_eq(|x: &[f64]| vec![x[0] * x[0] + x[1] * x[1] - 2.0]),
    ]
}

/// Looks up a registry problem; `rosenbrock:<n>` selects the chained
/// Rosenbrock function in dimension `n`.
pub fn find(id: &str) -> Option<TestProblem> {
    if let Some(n) = id.strip_prefix("rosenbrock:") {
        return n.parse().ok().filter(|&n: &usize| n >= 2).map(chained_rosenbrock);
    }
    registry().into_iter().find(|p| p.id == id)
}
