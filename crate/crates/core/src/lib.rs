//! Geographically weighted regression with gradient boosting.
//!
//! The crate fits ordinary least squares, GWR and boosted GWR on point data,
//! computes fit diagnostics, and runs seeded Monte-Carlo comparisons.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boost;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod gwr;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod result;
pub mod simulation;

pub use boost::{
    boosted_hat_matrix, boosted_scheme, exact_boosted_operator, fit_gwrboost, fit_gwrboost_with, BoostConfig,
    BoostTrace, EarlyStop, GwrBoostModel, StageRecord, TraceMethod,
};
pub use dataset::{CoefficientField, Dataset};
pub use error::{Error, Result};
pub use geometry::{weight_vector, Bandwidth, Coordinates, Kernel, SpatialWeightScheme};
pub use gwr::{
    fit_gwr, fit_gwr_with, fit_ols, search_bandwidth, BandwidthSearch, Criterion, GwrModel, ModelKind,
    SearchMode, SearchOptions,
};
pub use io::{load_csv, zscore, DatasetSchema, StandardizationRecord};
pub use linalg::{wls_solve, DesignMatrix, HatMatrix, LocalSmoother, SolveOptions};
pub use metrics::{Diagnostics, Likelihood, MoranScheme, MoranWeights};
pub use result::FitResult;
pub use simulation::{
    generate_dataset, run_replications, ReplicationConfig, ReplicationReport, SimulationConfig, SurfaceKind,
};
