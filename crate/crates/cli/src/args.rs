use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use gwrboost::gwr::{Criterion, SearchMode, SearchOptions};
use gwrboost::{BoostConfig, DatasetSchema, EarlyStop, Kernel, Likelihood, MoranScheme, TraceMethod};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelArg {
    Bisquare,
    Gaussian,
}

impl From<KernelArg> for Kernel {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Bisquare => Kernel::Bisquare,
            KernelArg::Gaussian => Kernel::Gaussian,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CriterionArg {
    Aicc,
    Loocv,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Aicc => Criterion::Aicc,
            CriterionArg::Loocv => Criterion::Loocv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SearchModeArg {
    Adaptive,
    Fixed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EarlyStopArg {
    Aicc,
    R2,
    None,
}

impl From<EarlyStopArg> for EarlyStop {
    fn from(e: EarlyStopArg) -> Self {
        match e {
            EarlyStopArg::Aicc => EarlyStop::Aicc,
            EarlyStopArg::R2 => EarlyStop::R2,
            EarlyStopArg::None => EarlyStop::None,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TraceArg {
    /// Series form of the boosted smoother.
    Boosted,
    /// Operator actually applied by the stage loop.
    Exact,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LikelihoodArg {
    Profile,
    Precision,
}

impl From<LikelihoodArg> for Likelihood {
    fn from(l: LikelihoodArg) -> Self {
        match l {
            LikelihoodArg::Profile => Likelihood::Profile,
            LikelihoodArg::Precision => Likelihood::Precision,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MoranArg {
    Auto,
    Rook,
    Knn,
}

impl From<MoranArg> for MoranScheme {
    fn from(m: MoranArg) -> Self {
        match m {
            MoranArg::Auto => MoranScheme::Auto,
            MoranArg::Rook => MoranScheme::Rook,
            MoranArg::Knn => MoranScheme::Knn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Ols,
    Gwr,
    Gwrboost,
}

impl From<ModelArg> for gwrboost::ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Ols => Self::Ols,
            ModelArg::Gwr => Self::Gwr,
            ModelArg::Gwrboost => Self::Gwrboost,
        }
    }
}

/// Where outputs go.
#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output directory (created if missing).
    #[arg(long, short = 'o', env = "GWRBOOST_OUT_DIR", default_value = "gwrboost-out")]
    pub out_dir: PathBuf,
    /// Suppress the progress counter on stderr.
    #[arg(long)]
    pub quiet: bool,
}

/// Column mapping of the input file.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Identifier column; row numbers are used when omitted.
    #[arg(long)]
    pub id_col: Option<String>,
    #[arg(long, default_value = "u")]
    pub u_col: String,
    #[arg(long, default_value = "v")]
    pub v_col: String,
    /// Response column.
    #[arg(long, default_value = "y")]
    pub response: String,
    /// Covariate columns, comma separated, in model order.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    /// Fit on the raw columns instead of z-scores.
    #[arg(long)]
    pub no_standardize: bool,
}

impl InputArgs {
    pub fn schema(&self) -> DatasetSchema {
        DatasetSchema {
            id: self.id_col.clone(),
            u: self.u_col.clone(),
            v: self.v_col.clone(),
            response: self.response.clone(),
            covariates: self.covariates.clone(),
        }
    }
}

/// Kernel and bandwidth selection.
#[derive(Debug, Clone, Args)]
pub struct BandwidthArgs {
    #[arg(long, value_enum, default_value = "bisquare")]
    pub kernel: KernelArg,
    /// Fixed distance bandwidth.
    #[arg(long, conflicts_with = "adaptive")]
    pub bandwidth: Option<f64>,
    /// Adaptive bandwidth as a neighbor count.
    #[arg(long)]
    pub adaptive: Option<usize>,
    /// Criterion for the bandwidth search used when no bandwidth is given.
    #[arg(long, value_enum, default_value = "aicc")]
    pub bw_search: CriterionArg,
    /// Search over neighbor counts or distances.
    #[arg(long, value_enum, default_value = "adaptive")]
    pub search_mode: SearchModeArg,
    /// Score every neighbor count instead of golden-section search.
    #[arg(long)]
    pub exhaustive: bool,
}

impl BandwidthArgs {
    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                bail!("--bandwidth must be a positive finite number, got {h}");
            }
        }
        if self.adaptive == Some(0) {
            bail!("--adaptive must be at least 1");
        }
        if self.exhaustive && matches!(self.search_mode, SearchModeArg::Fixed) {
            bail!("--exhaustive applies to adaptive search only");
        }
        Ok(())
    }

    pub fn search_options(&self, likelihood: Likelihood) -> SearchOptions {
        SearchOptions {
            kernel: self.kernel.into(),
            mode: match self.search_mode {
                SearchModeArg::Adaptive => SearchMode::Adaptive,
                SearchModeArg::Fixed => SearchMode::Fixed,
            },
            criterion: self.bw_search.into(),
            likelihood,
            exhaustive: self.exhaustive,
            ..Default::default()
        }
    }

    pub fn given(&self) -> Option<gwrboost::Bandwidth> {
        match (self.bandwidth, self.adaptive) {
            (Some(h), _) => Some(gwrboost::Bandwidth::Fixed(h)),
            (None, Some(k)) => Some(gwrboost::Bandwidth::Adaptive(k)),
            (None, None) => None,
        }
    }
}

/// Boosting controls.
#[derive(Debug, Clone, Args)]
pub struct BoostArgs {
    /// Multiplier on the reference bandwidth for boosting stages.
    #[arg(long, default_value_t = BoostConfig::default().bandwidth_factor)]
    pub bw_factor: f64,
    #[arg(long, default_value_t = BoostConfig::default().learning_rate)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = BoostConfig::default().max_stages)]
    pub max_stages: usize,
    #[arg(long, value_enum, default_value = "aicc")]
    pub early_stop: EarlyStopArg,
    /// How the effective number of parameters is computed.
    #[arg(long, value_enum, default_value = "boosted")]
    pub trace_method: TraceArg,
}

impl BoostArgs {
    pub fn config(&self, likelihood: Likelihood) -> Result<BoostConfig> {
        let cfg = BoostConfig {
            max_stages: self.max_stages,
            learning_rate: self.learning_rate,
            bandwidth_factor: self.bw_factor,
            early_stop: self.early_stop.into(),
            trace_method: match self.trace_method {
                TraceArg::Boosted => TraceMethod::Boosted,
                TraceArg::Exact => TraceMethod::Exact,
            },
            likelihood,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Likelihood convention and Moran weights.
#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    #[arg(long, value_enum, default_value = "profile")]
    pub likelihood: LikelihoodArg,
    /// Neighbor structure for residual Moran's I.
    #[arg(long, value_enum, default_value = "auto")]
    pub moran: MoranArg,
}
