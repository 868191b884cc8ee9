//! Maximum likelihood estimation for multinomial logit choice models.
//!
//! The crate couples an analytic log-likelihood evaluator (value, gradient and
//! Hessian over arbitrary observation batches) with a catalog of fifteen
//! optimizers: the classic deterministic line-search and trust-region methods
//! (`GD`, `BFGS`, `BFGS-INV`, `TR-BFGS`, `NM`, `TR`), their stochastic
//! adaptive-batch-size counterparts (`*-ABS`), and three hybrids that run a
//! second-order method while batches are small and hand over to a quasi-Newton
//! method once the batch crosses a size threshold (`H-NM-ABS`, `H-TR-ABS`,
//! `HAMABS`).
//!
//! On top of the estimation engine sit a benchmark harness that computes
//! Dolan–Moré performance profiles over algorithm × problem suites, CSV
//! dataset ingestion, a small text format for model specifications, and a
//! synthetic data generator with known ground-truth parameters. Everything is
//! reachable from the `mnlfit` command-line tool.
//!
//! ```
//! use mnlfit::data::{generate_synthetic, synthetic_model_spec, SyntheticSpec};
//! use mnlfit::optim::{run, Algorithm, OptimizerConfig};
//! use mnlfit::LogLikelihood;
//!
//! let recipe = r#"
//! n_obs = 2000
//! alternatives = ["car", "bus"]
//! seed = 1
//!
//! [[params]]
//! name = "b_cost"
//! kind = "generic"
//! true_value = -0.8
//!
//! [[params]]
//! name = "asc_bus"
//! kind = "constant"
//! true_value = 0.3
//! alternative = "bus"
//! "#;
//! let spec = SyntheticSpec::from_toml(recipe)?;
//! let (data, truth) = generate_synthetic(&spec)?;
//! let model = synthetic_model_spec(&spec);
//! let ll = LogLikelihood::bind(&model, &data)?;
//!
//! let fit = run(&ll, &OptimizerConfig::new(Algorithm::Hamabs))?;
//! assert!(fit.converged);
//! assert!((fit.theta[0] - truth[0]).abs() < 0.15);
//! # Ok::<(), mnlfit::Error>(())
//! ```

pub mod amabs;
pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod linalg;
pub mod model;
pub mod optim;
pub mod step;

pub use error::{Error, Result};
pub use model::{Batch, Dataset, EvalOrder, Evaluation, LogLikelihood, ModelSpec};
pub use optim::{Algorithm, OptimizerConfig, RunResult};
