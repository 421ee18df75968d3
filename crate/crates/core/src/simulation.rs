//! Synthetic experiment: four coefficient surfaces on a regular grid, a
//! response built from random covariates plus Gaussian noise, and a
//! replication runner comparing OLS, GWR and boosted GWR.
//!
//! Each replication draws from its own ChaCha8 stream: the generator is
//! seeded with `base_seed` and switched to stream `rep`, so a replication's
//! data depend only on `(base_seed, rep)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boost::{boosted_scheme, fit_gwrboost, BoostConfig};
use crate::dataset::{CoefficientField, Dataset};
use crate::error::{Error, Result};
use crate::geometry::{Bandwidth, Coordinates, SpatialWeightScheme};
use crate::gwr::{fit_gwr, fit_ols, search_bandwidth, ModelKind, SearchOptions};
use crate::metrics::{coefficient_rmse_all, MoranScheme, MoranWeights};
use crate::result::FitResult;

/// Description of the random generator, recorded in report headers.
pub const GENERATOR: &str = "ChaCha8Rng::seed_from_u64(base_seed), stream = rep";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Stationary,
    Low,
    Medium,
    High,
}

impl SurfaceKind {
    /// Surfaces of the intercept and the three slopes, in order.
    pub const ALL: [SurfaceKind; 4] = [
        SurfaceKind::Stationary,
        SurfaceKind::Low,
        SurfaceKind::Medium,
        SurfaceKind::High,
    ];
}

pub fn surface_value(kind: SurfaceKind, u: f64, v: f64) -> f64 {
    match kind {
        SurfaceKind::Stationary => 2.0,
        SurfaceKind::Low => (u + v) / 8.0 - 2.0,
        SurfaceKind::Medium => 3.0 * (PI * (u / 25.0).exp()).cos() * (PI * (v / 25.0).exp()).sin() + 1.0,
        SurfaceKind::High => {
            (36.0 - (6.0 - u / 2.0).powi(2)) * (36.0 - (6.0 - v / 2.0).powi(2)) / 216.0 - 2.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariateDistribution {
    /// Uniform on `[0, 1)`.
    #[default]
    Uniform,
    /// Standard normal.
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Grid cells along `u`.
    pub width: usize,
    /// Grid cells along `v`.
    pub height: usize,
    pub noise_sd: f64,
    pub covariates: CovariateDistribution,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            width: 25,
            height: 25,
            noise_sd: 0.25,
            covariates: CovariateDistribution::Uniform,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(Error::InvalidConfig(format!(
                "grid must be at least 2×2, got {}×{}",
                self.width, self.height
            )));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise sd must be finite and nonnegative, got {}",
                self.noise_sd
            )));
        }
        Ok(())
    }

    pub fn n_obs(&self) -> usize {
        self.width * self.height
    }

    /// Cell centers at integer positions `1..=width` × `1..=height`, `u` outermost.
    pub fn grid(&self) -> Vec<Coordinates> {
        (1..=self.width)
            .flat_map(|u| (1..=self.height).map(move |v| Coordinates::new(u as f64, v as f64)))
            .collect()
    }

    /// True coefficients at every grid cell, intercept first.
    pub fn true_field(&self) -> CoefficientField {
        let coords = self.grid();
        let mut f = Array2::zeros((coords.len(), 4));
        for (i, c) in coords.iter().enumerate() {
            for (j, kind) in SurfaceKind::ALL.iter().enumerate() {
                f[[i, j]] = surface_value(*kind, c.u, c.v);
            }
        }
        CoefficientField::new(f)
    }
}

#[derive(Debug, Clone)]
pub struct SimulatedDataset {
    pub dataset: Dataset,
    pub truth: CoefficientField,
    pub noise: Array1<f64>,
    pub base_seed: u64,
    pub rep: usize,
}

/// Draws replication `rep`: the covariates row by row, then the noise.
pub fn generate_dataset(config: &SimulationConfig, base_seed: u64, rep: usize) -> Result<SimulatedDataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(rep as u64);
    let coords = config.grid();
    let n = coords.len();
    let mut x = Array2::zeros((n, 3));
    for v in x.iter_mut() {
        *v = match config.covariates {
            CovariateDistribution::Uniform => rng.random::<f64>(),
            CovariateDistribution::Normal => rng.sample(StandardNormal),
        };
    }
    let noise = Array1::from_iter((0..n).map(|_| config.noise_sd * rng.sample::<f64, _>(StandardNormal)));
    let truth = config.true_field();
    let t = truth.values();
    let y = Array1::from_iter((0..n).map(|i| {
        t[[i, 0]] + t[[i, 1]] * x[[i, 0]] + t[[i, 2]] * x[[i, 1]] + t[[i, 3]] * x[[i, 2]] + noise[i]
    }));
    let dataset = Dataset::new(
        None,
        coords,
        x,
        y,
        vec!["x1".into(), "x2".into(), "x3".into()],
    )?;
    Ok(SimulatedDataset {
        dataset,
        truth,
        noise,
        base_seed,
        rep,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationConfig {
    pub reps: usize,
    pub base_seed: u64,
    pub models: Vec<ModelKind>,
    pub simulation: SimulationConfig,
    /// Bandwidth search for the GWR reference fit.
    pub search: SearchOptions,
    /// Fixed GWR bandwidth used instead of the search.
    #[serde(default)]
    pub gwr_bandwidth: Option<Bandwidth>,
    pub boost: BoostConfig,
    pub moran: MoranScheme,
}

impl Default for ReplicationConfig {
    fn default() -> Self {
        Self {
            reps: 100,
            base_seed: 42,
            models: vec![ModelKind::Ols, ModelKind::Gwr, ModelKind::Gwrboost],
            simulation: SimulationConfig::default(),
            search: SearchOptions::default(),
            gwr_bandwidth: None,
            boost: BoostConfig::default(),
            moran: MoranScheme::Auto,
        }
    }
}

impl ReplicationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidConfig("reps must be at least 1".into()));
        }
        if self.models.is_empty() {
            return Err(Error::InvalidConfig("no models requested".into()));
        }
        self.simulation.validate()?;
        if let Some(b) = self.gwr_bandwidth {
            SpatialWeightScheme::new(self.search.kernel, b).validate(self.simulation.n_obs())?;
        }
        self.boost.validate()
    }
}

/// The metrics reported for every model, in table order.
pub const REPORTED_METRICS: [&str; 7] = ["rmse", "rss", "aic", "aicc", "r2", "adjusted_r2", "moran_i"];

/// Everything measured on one replication.
#[derive(Debug, Clone)]
pub struct RepOutcome {
    pub rep: usize,
    /// GWR bandwidth chosen by the search (the boosting reference).
    pub gwr_bandwidth: Option<Bandwidth>,
    pub boost_bandwidth: Option<Bandwidth>,
    pub fits: Vec<FitResult>,
    /// Per-coefficient RMSE for each fit, intercept first.
    pub coefficient_rmse: Vec<Vec<f64>>,
}

impl RepOutcome {
    pub fn fit(&self, model: ModelKind) -> Option<&FitResult> {
        self.fits.iter().find(|f| f.model == model)
    }

    /// Reported and auxiliary metrics of one model by name.
    pub fn metrics(&self, model: ModelKind) -> Option<BTreeMap<String, f64>> {
        let idx = self.fits.iter().position(|f| f.model == model)?;
        let fit = &self.fits[idx];
        let rmse = &self.coefficient_rmse[idx];
        let d = &fit.diagnostics;
        let mut m = BTreeMap::new();
        m.insert("rmse".to_string(), rmse.iter().sum::<f64>() / rmse.len() as f64);
        m.insert("rss".to_string(), d.rss);
        m.insert("r2".to_string(), d.r2);
        for (k, v) in [
            ("aic", d.aic),
            ("aicc", d.aicc),
            ("adjusted_r2", d.adjusted_r2),
            ("moran_i", d.moran_i),
            ("log_likelihood", d.log_likelihood),
        ] {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        }
        m.insert("effective_params".to_string(), d.effective_params);
        for (j, r) in rmse.iter().enumerate() {
            m.insert(format!("rmse_b{j}"), *r);
        }
        let bw = match model {
            ModelKind::Ols => None,
            ModelKind::Gwr => self.gwr_bandwidth,
            ModelKind::Gwrboost => self.boost_bandwidth,
        };
        if let Some(bw) = bw {
            m.insert("bandwidth".to_string(), bw.value());
        }
        if let Some(b) = &fit.boost {
            m.insert("stopped_at".to_string(), b.stopped_at as f64);
        }
        Some(m)
    }
}

/// Runs one replication of the comparison.
pub fn run_replication(config: &ReplicationConfig, rep: usize) -> Result<RepOutcome> {
    let wrap = |e: Error| Error::Replication {
        rep,
        source: Box::new(e),
    };
    let sim = generate_dataset(&config.simulation, config.base_seed, rep).map_err(wrap)?;
    run_on_dataset(config, &sim).map_err(wrap)
}

/// Fits the requested models to an already generated replication.
pub fn run_on_dataset(config: &ReplicationConfig, sim: &SimulatedDataset) -> Result<RepOutcome> {
    let data = &sim.dataset;
    let moran = MoranWeights::build(data.coords(), config.moran)?;
    let likelihood = config.boost.likelihood;
    let wants = |m: ModelKind| config.models.contains(&m);

    let mut fits = Vec::new();
    if wants(ModelKind::Ols) {
        fits.push(FitResult::from_gwr(data, &fit_ols(data)?, likelihood, Some(&moran))?);
    }
    let mut gwr_bandwidth = None;
    let mut boost_bandwidth = None;
    if wants(ModelKind::Gwr) || wants(ModelKind::Gwrboost) {
        let search = SearchOptions {
            likelihood,
            ..config.search
        };
        let bandwidth = match config.gwr_bandwidth {
            Some(b) => b,
            None => search_bandwidth(data, &search)?.bandwidth,
        };
        let reference = SpatialWeightScheme::new(search.kernel, bandwidth);
        gwr_bandwidth = Some(bandwidth);
        if wants(ModelKind::Gwr) {
            fits.push(FitResult::from_gwr(data, &fit_gwr(data, &reference)?, likelihood, Some(&moran))?);
        }
        if wants(ModelKind::Gwrboost) {
            let scheme = boosted_scheme(data, &reference, config.boost.bandwidth_factor)?;
            boost_bandwidth = Some(scheme.bandwidth);
            let model = fit_gwrboost(data, &scheme, &config.boost)?;
            fits.push(FitResult::from_boost(data, &model, Some(&moran))?);
        }
    }
    let coefficient_rmse = fits
        .iter()
        .map(|f| coefficient_rmse_all(&sim.truth, &f.coefficients))
        .collect::<Result<Vec<_>>>()?;
    Ok(RepOutcome {
        rep: sim.rep,
        gwr_bandwidth,
        boost_bandwidth,
        fits,
        coefficient_rmse,
    })
}

/// Mean, sample standard deviation and range of one metric across reps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl MetricSummary {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self {
            mean,
            sd,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            n,
        })
    }
}

/// One tidy row: `(rep, model, metric, value)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub rep: usize,
    pub model: ModelKind,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub generator: String,
    pub base_seed: u64,
    pub reps: usize,
    pub config: ReplicationConfig,
}

/// Aggregate view: per model, the reported metrics and the auxiliary ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub header: ReportHeader,
    pub models: BTreeMap<String, BTreeMap<String, MetricSummary>>,
    pub auxiliary: BTreeMap<String, BTreeMap<String, MetricSummary>>,
}

#[derive(Debug, Clone)]
pub struct ReplicationReport {
    pub header: ReportHeader,
    pub outcomes: Vec<RepOutcome>,
}

impl ReplicationReport {
    /// Long-format rows ordered by rep, then model (request order), then metric name.
    pub fn rows(&self) -> Vec<ReplicationRow> {
        let mut rows = Vec::new();
        for o in &self.outcomes {
            for model in &self.header.config.models {
                if let Some(metrics) = o.metrics(*model) {
                    for (metric, value) in metrics {
                        rows.push(ReplicationRow {
                            rep: o.rep,
                            model: *model,
                            metric,
                            value,
                        });
                    }
                }
            }
        }
        rows
    }

    pub fn values(&self, model: ModelKind, metric: &str) -> Vec<f64> {
        self.outcomes
            .iter()
            .filter_map(|o| o.metrics(model).and_then(|m| m.get(metric).copied()))
            .collect()
    }

    pub fn summary(&self, model: ModelKind, metric: &str) -> Option<MetricSummary> {
        MetricSummary::from_values(&self.values(model, metric))
    }

    pub fn aggregate(&self) -> AggregateReport {
        let mut models = BTreeMap::new();
        let mut auxiliary = BTreeMap::new();
        for model in &self.header.config.models {
            let mut names: Vec<String> = Vec::new();
            for o in &self.outcomes {
                if let Some(m) = o.metrics(*model) {
                    for k in m.keys() {
                        if !names.contains(k) {
                            names.push(k.clone());
                        }
                    }
                }
            }
            let mut main = BTreeMap::new();
            let mut aux = BTreeMap::new();
            for name in names {
                if let Some(s) = self.summary(*model, &name) {
                    if REPORTED_METRICS.contains(&name.as_str()) {
                        main.insert(name, s);
                    } else {
                        aux.insert(name, s);
                    }
                }
            }
            models.insert(model.to_string(), main);
            auxiliary.insert(model.to_string(), aux);
        }
        AggregateReport {
            header: self.header.clone(),
            models,
            auxiliary,
        }
    }
}

/// Runs every replication. Replications run in parallel; the report is
/// assembled in rep order, so results do not depend on scheduling. The first
/// failing replication aborts the run.
pub fn run_replications(config: &ReplicationConfig) -> Result<ReplicationReport> {
    run_replications_with(config, |_| {})
}

/// Like [`run_replications`], calling `progress(rep)` as each one finishes.
pub fn run_replications_with(
    config: &ReplicationConfig,
    progress: impl Fn(usize) + Sync,
) -> Result<ReplicationReport> {
    config.validate()?;
    let results: Vec<Result<RepOutcome>> = (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let r = run_replication(config, rep);
            progress(rep);
            r
        })
        .collect();
    let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ReplicationReport {
        header: ReportHeader {
            generator: GENERATOR.to_string(),
            base_seed: config.base_seed,
            reps: config.reps,
            config: config.clone(),
        },
        outcomes,
    })
}
