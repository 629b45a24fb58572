//! Runs solver configurations over the registry and writes the CSV files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use cobyqa::{minimize, ModelPolicy, Options};

use crate::problems::{noisy_wrap, TestProblem};
use crate::profiles::{benchmark_merit, converged_at, data_profile, performance_profile, Outcomes, ProfileCurve};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub id: String,
    pub policy: ModelPolicy,
}

pub const SOLVER_IDS: [&str; 3] = ["cobyqa", "cobyqa-broyden", "cobyqa-frobenius"];

pub fn solver_config(id: &str) -> Option<SolverConfig> {
    let policy = match id {
        "cobyqa" => ModelPolicy::Default,
        "cobyqa-broyden" => ModelPolicy::AlwaysBroyden,
        "cobyqa-frobenius" => ModelPolicy::AlwaysMinFrobenius,
        _ => return None,
    };
    Some(SolverConfig { id: id.to_string(), policy })
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub taus: Vec<f64>,
    pub sigma: f64,
    pub seeds: u64,
    pub maxfev_mult: usize,
    pub rhobeg: f64,
    pub rhoend: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { taus: vec![1e-1, 1e-3, 1e-5, 1e-7], sigma: 0.0, seeds: 1, maxfev_mult: 500, rhobeg: 1.0, rhoend: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub n: usize,
    pub solver: String,
    pub seed: u64,
    pub nfev: usize,
    pub status: String,
    pub best_f: f64,
    pub best_maxcv: f64,
    /// Benchmark merit of every evaluation, computed with the exact objective.
    pub merits: Vec<f64>,
    /// Evaluations to converge for each tolerance, `∞` when never.
    pub t: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub taus: Vec<f64>,
    pub records: Vec<RunRecord>,
    /// Noise-free runs that only contribute to `φ*` when σ > 0.
    pub references: Vec<RunRecord>,
    pub outcomes: Vec<Outcomes>,
}

impl SuiteResult {
    pub fn profiles(&self) -> Vec<(ProfileCurve, ProfileCurve)> {
        self.outcomes.iter().map(|o| (performance_profile(o), data_profile(o))).collect()
    }
}

pub fn run_one(problem: &TestProblem, solver: &SolverConfig, seed: u64, opts: &SuiteOptions, sigma: f64) -> Result<RunRecord> {
    let mut p = noisy_wrap(problem, sigma, seed);
    let options = Options {
        rhobeg: opts.rhobeg,
        rhoend: opts.rhoend,
        maxfev: Some(opts.maxfev_mult * problem.n),
        model_policy: solver.policy,
        ..Options::default()
    };
    let res = minimize(&mut p, &problem.x0, &options).with_context(|| format!("{} on {}", solver.id, problem.id))?;
    let merits = p.history().iter().map(|r| benchmark_merit((problem.objective)(&r.x), &r.cub, &r.ceq)).collect();
    let best_f = if sigma == 0.0 { res.fun } else { (problem.objective)(&res.x) };
    Ok(RunRecord {
        problem: problem.id.clone(),
        n: problem.n,
        solver: solver.id.clone(),
        seed,
        nfev: res.nfev,
        status: res.status.to_string(),
        best_f,
        best_maxcv: res.maxcv,
        merits,
        t: Vec::new(),
    })
}

/// Least merit reached on each problem over all the given runs.
pub fn phi_stars<'a>(runs: impl IntoIterator<Item = &'a RunRecord>) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for r in runs {
        let best = r.merits.iter().copied().fold(f64::INFINITY, f64::min);
        let e = out.entry(r.problem.clone()).or_insert(f64::INFINITY);
        *e = e.min(best);
    }
    out
}

/// Fills `t` of every record for each tolerance.
pub fn assign_t(records: &mut [RunRecord], taus: &[f64], phi_star: &BTreeMap<String, f64>) {
    for r in records.iter_mut() {
        let star = phi_star.get(&r.problem).copied().unwrap_or(f64::INFINITY);
        let phi0 = r.merits.first().copied().unwrap_or(f64::INFINITY);
        r.t = taus
            .iter()
            .map(|&tau| converged_at(&r.merits, phi0, star, tau).map_or(f64::INFINITY, |k| k as f64))
            .collect();
    }
}

/// Averages `t` over seeds, in the order the problems and solvers first
/// appear in `records`. An unsolved run makes the average infinite.
pub fn outcomes(records: &[RunRecord], taus: &[f64]) -> Vec<Outcomes> {
    let mut problems: Vec<(String, usize)> = Vec::new();
    let mut solvers: Vec<String> = Vec::new();
    for r in records {
        if !problems.iter().any(|(p, _)| *p == r.problem) {
            problems.push((r.problem.clone(), r.n));
        }
        if !solvers.contains(&r.solver) {
            solvers.push(r.solver.clone());
        }
    }
    taus.iter()
        .enumerate()
        .map(|(k, &tau)| {
            let t = problems
                .iter()
                .map(|(p, _)| {
                    solvers
                        .iter()
                        .map(|s| {
                            let runs: Vec<f64> = records.iter().filter(|r| r.problem == *p && r.solver == *s).map(|r| r.t[k]).collect();
                            if runs.is_empty() {
                                f64::INFINITY
                            } else {
                                runs.iter().sum::<f64>() / runs.len() as f64
                            }
                        })
                        .collect()
                })
                .collect();
            Outcomes { tau, problems: problems.clone(), solvers: solvers.clone(), t }
        })
        .collect()
}

pub fn run_suite(solvers: &[SolverConfig], problems: &[TestProblem], opts: &SuiteOptions) -> Result<SuiteResult> {
    if solvers.is_empty() || problems.is_empty() {
        bail!("at least one solver and one problem are required");
    }
    let seeds: Vec<u64> = if opts.sigma > 0.0 { (0..opts.seeds.max(1)).collect() } else { vec![0] };
    let mut records = Vec::new();
    let mut references = Vec::new();
    for problem in problems {
        for solver in solvers {
            for &seed in &seeds {
                records.push(run_one(problem, solver, seed, opts, opts.sigma)?);
            }
            if opts.sigma > 0.0 {
                references.push(run_one(problem, solver, 0, opts, 0.0)?);
            }
        }
    }
    let stars = phi_stars(records.iter().chain(&references));
    assign_t(&mut records, &opts.taus, &stars);
    let outcomes = outcomes(&records, &opts.taus);
    Ok(SuiteResult { taus: opts.taus.clone(), records, references, outcomes })
}

/// Tolerance as it appears in file names and column headers, e.g. `1e-5`.
pub fn tau_label(tau: f64) -> String {
    format!("{tau:e}")
}

/// Shortest round-trip decimal, in exponent form for very small or very
/// large magnitudes.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e16).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn write_curve(path: &Path, curve: &ProfileCurve) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["alpha".to_string()];
    header.extend(curve.solvers.iter().cloned());
    w.write_record(&header)?;
    for (k, a) in curve.alphas.iter().enumerate() {
        let mut row = vec![format_float(*a)];
        row.extend(curve.fractions.iter().map(|f| format_float(f[k])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `runs.csv`, `perf_<tau>.csv` and `data_<tau>.csv` into `dir`.
pub fn write_csv(result: &SuiteResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut w = csv::Writer::from_path(dir.join("runs.csv"))?;
    let mut header: Vec<String> = ["problem", "n", "solver", "seed", "nfev", "status", "best_f", "best_maxcv"].map(String::from).to_vec();
    header.extend(result.taus.iter().map(|&t| format!("t_tau_{}", tau_label(t))));
    w.write_record(&header)?;
    for r in &result.records {
        let mut row = vec![
            r.problem.clone(),
            r.n.to_string(),
            r.solver.clone(),
            r.seed.to_string(),
            r.nfev.to_string(),
            r.status.clone(),
            format_float(r.best_f),
            format_float(r.best_maxcv),
        ];
        row.extend(r.t.iter().map(|&t| format_float(t)));
        w.write_record(&row)?;
    }
    w.flush()?;
    for (tau, (perf, data)) in result.taus.iter().zip(result.profiles()) {
        let label = tau_label(*tau);
        write_curve(&dir.join(format!("perf_{label}.csv")), &perf)?;
        write_curve(&dir.join(format!("data_{label}.csv")), &data)?;
    }
    Ok(())
}
