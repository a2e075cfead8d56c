//! Solvers for stochastic variational inequalities VI(X, F) with
//! F(x) = E[G(x, ξ)], built around variable sample-size mini-batching.
//!
//! The crate provides:
//!
//! - [`sets`] and [`maps`]: feasible sets with exact Euclidean projections and
//!   monotone maps carrying their (μ, L) metadata.
//! - [`oracle`]: the stochastic first-order oracle, seeded sample streams and
//!   budget accounting.
//! - [`problems`]: the stochastic bimatrix game and synthetic strongly
//!   monotone affine problems, with certified reference solutions.
//! - [`vs_ave`], [`ppawss`], [`extragradient`]: the averaging scheme for
//!   strongly monotone maps, the proximal-point outer loop for monotone maps,
//!   and the variance-reduced extragradient baseline.
//! - [`metrics`]: natural residual, gap function, Yosida residual, saddle gap.

pub mod error;
pub mod extragradient;
pub mod fixture;
pub mod linalg;
pub mod maps;
pub mod metrics;
pub mod oracle;
pub mod ppawss;
pub mod problems;
pub mod sets;
pub mod trace;
pub mod vs_ave;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use maps::MonotoneMap;
pub use metrics::MetricReport;
pub use oracle::{BudgetCounter, NoiseModel, SampleStream, SamplingContext, StochasticOracle};
pub use problems::{BimatrixSpec, ProblemInstance};
pub use sets::FeasibleSet;
pub use trace::{RunTrace, TraceOptions, TraceRow};

pub use extragradient::{ExtragradientConfig, ExtragradientOutcome};
pub use ppawss::{PpawssConfig, PpawssOutcome};
pub use vs_ave::{QRule, VsAveConfig, VsAveOutcome};
