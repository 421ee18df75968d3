use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::boost::{BoostConfig, GwrBoostModel};
use crate::dataset::{CoefficientField, Dataset};
use crate::error::Result;
use crate::geometry::SpatialWeightScheme;
use crate::gwr::{GwrModel, ModelKind};
use crate::metrics::{Diagnostics, Likelihood, MoranWeights};

/// Boosting settings echoed alongside a boosted fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostSummary {
    pub config: BoostConfig,
    pub stopped_at: usize,
    pub early_stopped: bool,
    pub stages_run: usize,
}

/// Model-agnostic view of one fit: coefficients, fitted values, residuals
/// and diagnostics.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: ModelKind,
    pub coefficients: CoefficientField,
    pub fitted: Array1<f64>,
    pub residuals: Array1<f64>,
    pub diagnostics: Diagnostics,
    pub scheme: Option<SpatialWeightScheme>,
    pub boost: Option<BoostSummary>,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn from_gwr(
        data: &Dataset,
        model: &GwrModel,
        likelihood: Likelihood,
        moran: Option<&MoranWeights>,
    ) -> Result<Self> {
        let diagnostics = Diagnostics::compute(
            data.response().as_slice().expect("contiguous response"),
            model.fitted().as_slice().expect("contiguous"),
            model.hat_trace(),
            likelihood,
            moran,
        )?;
        Ok(Self {
            model: model.kind(),
            coefficients: model.coefficients().clone(),
            fitted: model.fitted().clone(),
            residuals: model.residuals().clone(),
            diagnostics,
            scheme: model.scheme().copied(),
            boost: None,
            warnings: Vec::new(),
        })
    }

    pub fn from_boost(data: &Dataset, model: &GwrBoostModel, moran: Option<&MoranWeights>) -> Result<Self> {
        let diagnostics = Diagnostics::compute(
            data.response().as_slice().expect("contiguous response"),
            model.fitted().as_slice().expect("contiguous"),
            model.hat_trace(),
            model.config().likelihood,
            moran,
        )?;
        Ok(Self {
            model: ModelKind::Gwrboost,
            coefficients: model.coefficients().clone(),
            fitted: model.fitted().clone(),
            residuals: model.residuals().clone(),
            diagnostics,
            scheme: Some(*model.scheme()),
            boost: Some(BoostSummary {
                config: *model.config(),
                stopped_at: model.stopped_at(),
                early_stopped: model.trace().early_stopped,
                stages_run: model.trace().records.len(),
            }),
            warnings: model.warnings().to_vec(),
        })
    }
}
