//! Global OLS and geographically weighted regression, with bandwidth
//! selection by AICc or leave-one-out cross-validation.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{CoefficientField, Dataset};
use crate::error::{Error, Result};
use crate::geometry::{pairwise_distance, weight_vector, Bandwidth, Kernel, SpatialWeightScheme};
use crate::linalg::{local_operator, HatMatrix, LocalSmoother, SolveOptions};
use crate::metrics::{aicc_from_rss, rss, Likelihood};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ols,
    Gwr,
    Gwrboost,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Ols => "ols",
            ModelKind::Gwr => "gwr",
            ModelKind::Gwrboost => "gwrboost",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ols" => Ok(ModelKind::Ols),
            "gwr" => Ok(ModelKind::Gwr),
            "gwrboost" => Ok(ModelKind::Gwrboost),
            other => Err(Error::InvalidConfig(format!("unknown model '{other}'"))),
        }
    }
}

/// A fitted OLS or GWR model. OLS is the degenerate case with unit weights.
#[derive(Debug, Clone)]
pub struct GwrModel {
    kind: ModelKind,
    scheme: Option<SpatialWeightScheme>,
    coefficients: CoefficientField,
    fitted: Array1<f64>,
    residuals: Array1<f64>,
    hat_trace: f64,
    hat_matrix: HatMatrix,
}

impl GwrModel {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Weighting scheme; `None` for OLS.
    pub fn scheme(&self) -> Option<&SpatialWeightScheme> {
        self.scheme.as_ref()
    }

    pub fn coefficients(&self) -> &CoefficientField {
        &self.coefficients
    }

    pub fn fitted(&self) -> &Array1<f64> {
        &self.fitted
    }

    pub fn residuals(&self) -> &Array1<f64> {
        &self.residuals
    }

    /// `tr(H)`, the effective number of parameters.
    pub fn hat_trace(&self) -> f64 {
        self.hat_trace
    }

    pub fn hat_matrix(&self) -> &HatMatrix {
        &self.hat_matrix
    }

    fn assemble(
        data: &Dataset,
        kind: ModelKind,
        scheme: Option<SpatialWeightScheme>,
        coefficients: CoefficientField,
        hat_matrix: HatMatrix,
        hat_trace: f64,
    ) -> Result<Self> {
        let fitted = coefficients.fitted(data.design())?;
        let residuals = data.response() - &fitted;
        Ok(Self {
            kind,
            scheme,
            coefficients,
            fitted,
            residuals,
            hat_trace,
            hat_matrix,
        })
    }
}

/// GWR fit under `scheme`.
pub fn fit_gwr(data: &Dataset, scheme: &SpatialWeightScheme) -> Result<GwrModel> {
    fit_gwr_with(data, scheme, &SolveOptions::default())
}

pub fn fit_gwr_with(
    data: &Dataset,
    scheme: &SpatialWeightScheme,
    opts: &SolveOptions,
) -> Result<GwrModel> {
    let smoother = LocalSmoother::build(data.design(), data.coords(), scheme, opts)?;
    fit_gwr_smoother(data, *scheme, &smoother)
}

/// GWR fit reusing an already factorized smoother.
pub fn fit_gwr_smoother(
    data: &Dataset,
    scheme: SpatialWeightScheme,
    smoother: &LocalSmoother,
) -> Result<GwrModel> {
    let y = data.response().as_slice().expect("contiguous response");
    let coefficients = smoother.coefficients(y);
    GwrModel::assemble(
        data,
        ModelKind::Gwr,
        Some(scheme),
        coefficients,
        smoother.hat_matrix(),
        smoother.hat_trace(),
    )
}

/// Ordinary least squares, reported in the same shape as a GWR fit.
pub fn fit_ols(data: &Dataset) -> Result<GwrModel> {
    let n = data.len();
    let design = data.design();
    let op = local_operator(design, &vec![1.0; n], 0, &SolveOptions::default())?;
    let beta = Array1::from(op.beta(data.response().as_slice().expect("contiguous response")));
    let coefficients = CoefficientField::constant(n, beta.view());
    // H = X C with C the shared coefficient operator
    let c = op.n_params();
    let mut coef_op = Array2::zeros((c, n));
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = op.beta(&e);
        for a in 0..c {
            coef_op[[a, j]] = col[a];
        }
    }
    let hat = design.matrix().dot(&coef_op);
    let trace = hat.diag().sum();
    GwrModel::assemble(
        data,
        ModelKind::Ols,
        None,
        coefficients,
        HatMatrix::from_dense(&hat)?,
        trace,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Aicc,
    Loocv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    #[default]
    Adaptive,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub kernel: Kernel,
    pub mode: SearchMode,
    pub criterion: Criterion,
    pub likelihood: Likelihood,
    /// Evaluate every neighbor count instead of golden-section (adaptive only).
    pub exhaustive: bool,
    /// Optional `(lower, upper)` override of the search interval.
    pub bounds: Option<(f64, f64)>,
    #[serde(skip)]
    pub solve: SolveOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            kernel: Kernel::Bisquare,
            mode: SearchMode::Adaptive,
            criterion: Criterion::Aicc,
            likelihood: Likelihood::Profile,
            exhaustive: false,
            bounds: None,
            solve: SolveOptions::default(),
        }
    }
}

/// Outcome of a bandwidth search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSearch {
    pub bandwidth: Bandwidth,
    pub score: f64,
    /// Every evaluated `(bandwidth, score)` in evaluation order. Unsolvable
    /// bandwidths score `+∞`.
    pub evaluations: Vec<(Bandwidth, f64)>,
}

/// Criterion value of a GWR fit under `scheme`; `+∞` when some local system
/// is singular or the criterion is undefined.
pub fn bandwidth_score(
    data: &Dataset,
    scheme: &SpatialWeightScheme,
    criterion: Criterion,
    likelihood: Likelihood,
    opts: &SolveOptions,
) -> Result<f64> {
    let y = data.response().as_slice().expect("contiguous response");
    let score = match criterion {
        Criterion::Aicc => {
            let smoother = match LocalSmoother::build(data.design(), data.coords(), scheme, opts) {
                Ok(s) => s,
                Err(Error::SingularSystem { .. }) => return Ok(f64::INFINITY),
                Err(e) => return Err(e),
            };
            let fitted = smoother.coefficients(y).fitted(data.design())?;
            let rss = rss(y, fitted.as_slice().expect("contiguous"))?;
            aicc_from_rss(rss, smoother.hat_trace(), data.len(), likelihood)?
                .unwrap_or(f64::INFINITY)
        }
        Criterion::Loocv => {
            scheme.validate(data.len())?;
            let errs: Vec<Result<f64>> = (0..data.len())
                .into_par_iter()
                .map(|i| {
                    let mut w = weight_vector(i, data.coords(), scheme)?;
                    w[i] = 0.0;
                    match local_operator(data.design(), &w, i, opts) {
                        Ok(op) => {
                            let pred: f64 =
                                op.support().iter().zip(op.hat_row()).map(|(&j, h)| h * y[j]).sum();
                            Ok((y[i] - pred).powi(2))
                        }
                        Err(Error::SingularSystem { .. }) => Ok(f64::INFINITY),
                        Err(e) => Err(e),
                    }
                })
                .collect();
            errs.into_iter().sum::<Result<f64>>()?
        }
    };
    Ok(if score.is_nan() { f64::INFINITY } else { score })
}

/// Default search interval for `mode`.
pub fn search_bounds(data: &Dataset, mode: SearchMode) -> Result<(f64, f64)> {
    let n = data.len();
    let params = data.design().n_params();
    match mode {
        SearchMode::Adaptive => {
            let lo = params + 1;
            if n < 2 || lo > n - 1 {
                return Err(Error::SearchFailed(format!(
                    "{n} observations are too few for adaptive bandwidths with {params} parameters"
                )));
            }
            Ok((lo as f64, (n - 1) as f64))
        }
        SearchMode::Fixed => {
            let coords = data.coords();
            // smallest h that leaves every location at least `params` positively
            // weighted neighbors besides itself
            let per_point: Vec<(f64, f64)> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut d: Vec<f64> = (0..n)
                        .filter(|&j| j != i)
                        .map(|j| pairwise_distance(coords[i], coords[j]))
                        .collect();
                    d.sort_by(f64::total_cmp);
                    let need = d.get(params.min(d.len().saturating_sub(1))).copied().unwrap_or(0.0);
                    (need, d.last().copied().unwrap_or(0.0))
                })
                .collect();
            let lo = per_point.iter().map(|p| p.0).fold(0.0, f64::max);
            let hi = per_point.iter().map(|p| p.1).fold(0.0, f64::max);
            if !(lo > 0.0) || !(hi >= lo) {
                return Err(Error::SearchFailed(
                    "no positive distance interval to search".into(),
                ));
            }
            Ok((lo, hi))
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Searches the bandwidth minimizing the chosen criterion.
///
/// Fixed bandwidths use golden-section search on `ln h`, stopping once the
/// bracket is narrower than 1% of the interval. Adaptive neighbor counts use
/// golden-section on integers followed by a scan of the final bracket, or an
/// exhaustive scan. The result is the best evaluated point, ties going to the
/// larger bandwidth.
pub fn search_bandwidth(data: &Dataset, opts: &SearchOptions) -> Result<BandwidthSearch> {
    let (lo, hi) = match opts.bounds {
        Some(b) => b,
        None => search_bounds(data, opts.mode)?,
    };
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::SearchFailed(format!("invalid search interval [{lo}, {hi}]")));
    }
    let mut memo: BTreeMap<u64, f64> = BTreeMap::new();
    let mut evaluations = Vec::new();
    let mut eval = |bw: Bandwidth| -> Result<f64> {
        let key = bw.value().to_bits();
        if let Some(&s) = memo.get(&key) {
            return Ok(s);
        }
        let scheme = SpatialWeightScheme::new(opts.kernel, bw);
        let s = bandwidth_score(data, &scheme, opts.criterion, opts.likelihood, &opts.solve)?;
        memo.insert(key, s);
        evaluations.push((bw, s));
        Ok(s)
    };

    match opts.mode {
        SearchMode::Fixed => {
            let (mut a, mut b) = (lo.ln(), hi.ln());
            let tol = 0.01 * (hi - lo);
            let f = |x: f64, eval: &mut dyn FnMut(Bandwidth) -> Result<f64>| {
                eval(Bandwidth::Fixed(x.exp()))
            };
            let mut c = b - INV_PHI * (b - a);
            let mut d = a + INV_PHI * (b - a);
            let mut fc = f(c, &mut eval)?;
            let mut fd = f(d, &mut eval)?;
            f(a, &mut eval)?;
            f(b, &mut eval)?;
            while b.exp() - a.exp() > tol {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - INV_PHI * (b - a);
                    fc = f(c, &mut eval)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + INV_PHI * (b - a);
                    fd = f(d, &mut eval)?;
                }
            }
        }
        SearchMode::Adaptive => {
            let (lo, hi) = (lo.round() as usize, hi.round() as usize);
            if opts.exhaustive || hi - lo <= 4 {
                for k in lo..=hi {
                    eval(Bandwidth::Adaptive(k))?;
                }
            } else {
                let (mut a, mut b) = (lo, hi);
                let probe = |a: usize, b: usize| {
                    let span = (b - a) as f64;
                    let c = a + ((1.0 - INV_PHI) * span).round() as usize;
                    let d = (a + (INV_PHI * span).round() as usize).max(c + 1);
                    (c, d)
                };
                while b - a > 3 {
                    let (c, d) = probe(a, b);
                    let fc = eval(Bandwidth::Adaptive(c))?;
                    let fd = eval(Bandwidth::Adaptive(d))?;
                    if fc < fd {
                        b = d;
                    } else {
                        a = c;
                    }
                }
                for k in a..=b {
                    eval(Bandwidth::Adaptive(k))?;
                }
            }
        }
    }

    let best = evaluations
        .iter()
        .filter(|(_, s)| s.is_finite())
        .fold(None::<(Bandwidth, f64)>, |best, &(bw, s)| match best {
            Some((bb, bs)) if bs < s || (bs == s && bb.value() > bw.value()) => Some((bb, bs)),
            _ => Some((bw, s)),
        });
    match best {
        Some((bandwidth, score)) => Ok(BandwidthSearch {
            bandwidth,
            score,
            evaluations,
        }),
        None => Err(Error::SearchFailed(format!(
            "no solvable bandwidth in [{lo}, {hi}]"
        ))),
    }
}
