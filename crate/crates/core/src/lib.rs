//! Derivative-free trust-region SQP solver built on quadratic interpolation
//! models updated by the derivative-free symmetric Broyden formula.
//!
//! The solver handles bound, linear and nonlinear constraints. Bounds are
//! never violated: every point passed to the user callbacks lies within them.
//!
//! ```
//! use cobyqa::{minimize, Options, Problem};
//!
//! let mut problem = Problem::builder(2, |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] - 2.5).powi(2))
//!     .linear_ineq(
//!         vec![vec![-1.0, 2.0], vec![1.0, 2.0], vec![1.0, -2.0]],
//!         vec![2.0, 6.0, 2.0],
//!     )
//!     .bounds(vec![0.0, 0.0], vec![f64::INFINITY, f64::INFINITY])
//!     .build()
//!     .unwrap();
//! let res = minimize(&mut problem, &[2.0, 0.0], &Options::default()).unwrap();
//! assert!((res.x[0] - 1.4).abs() < 1e-5 && (res.x[1] - 1.7).abs() < 1e-5);
//! ```

pub mod driver;
pub mod error;
pub mod linalg;
pub mod models;
pub mod problem;
pub mod subsolvers;

pub use driver::{minimize, ModelPolicy, Options, SolveResult, Status};
pub use error::Error;
pub use problem::{EvalRecord, PreprocessReport, Problem, ProblemBuilder};
