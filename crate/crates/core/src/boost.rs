//! Geographically weighted gradient boosting.
//!
//! Stage 1 is a plain GWR fit to `y`. Every later stage fits the same
//! smoother to the scaled residual `λ(y − F)` and adds the resulting local
//! coefficients to the running total, so the final model is still one linear
//! predictor per location. Because the weights and design never change, the
//! per-location factorizations are computed once and reused by every stage.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::dataset::{CoefficientField, Dataset};
use crate::error::{Error, Result};
use crate::geometry::SpatialWeightScheme;
use crate::linalg::{HatMatrix, LocalSmoother, SolveOptions};
use crate::metrics::{aic_aicc, gaussian_log_likelihood, r2_and_adjusted, rss, Likelihood};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EarlyStop {
    #[default]
    Aicc,
    R2,
    None,
}

/// How the effective number of parameters of a boosted fit is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMethod {
    /// `tr(H Σ_{m=1..M} [λ(I−H)]^{m−1})`, the series form of the boosted
    /// smoother. It coincides with the operator of the fitting loop when
    /// `λ = 1` and is the convention used for reporting AICc.
    #[default]
    Boosted,
    /// Trace of the operator the fitting loop actually applies,
    /// `I − (I − λH)^{M−1}(I − H)`.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub max_stages: usize,
    pub learning_rate: f64,
    /// Multiplier applied to a reference (GWR-optimal) bandwidth.
    pub bandwidth_factor: f64,
    pub early_stop: EarlyStop,
    pub trace_method: TraceMethod,
    pub likelihood: Likelihood,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            max_stages: 100,
            learning_rate: 0.2,
            bandwidth_factor: 2.0,
            early_stop: EarlyStop::Aicc,
            trace_method: TraceMethod::Boosted,
            likelihood: Likelihood::Profile,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_stages == 0 {
            return Err(Error::InvalidConfig("max_stages must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must lie in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if !(self.bandwidth_factor > 0.0 && self.bandwidth_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "bandwidth_factor must be positive, got {}",
                self.bandwidth_factor
            )));
        }
        Ok(())
    }
}

/// Snapshot after one boosting stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    /// 1-based stage index.
    pub stage: usize,
    pub rss: f64,
    pub r2: f64,
    pub aic: Option<f64>,
    pub aicc: Option<f64>,
    /// Effective number of parameters after this stage.
    pub hat_trace: f64,
    /// Cumulative coefficients after this stage.
    pub coefficients: CoefficientField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostTrace {
    pub records: Vec<StageRecord>,
    /// Stage whose snapshot is the returned model.
    pub stopped_at: usize,
    /// True when early stopping ended the run before `max_stages`.
    pub early_stopped: bool,
}

impl BoostTrace {
    pub fn record(&self, stage: usize) -> Option<&StageRecord> {
        stage.checked_sub(1).and_then(|i| self.records.get(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    /// Stop and return the snapshot of this 1-based stage.
    Stop { return_stage: usize },
}

/// Patience-one early stopping on a score sequence. The last entry is the
/// newest stage; if it is worse than the one before, the previous stage is
/// returned. Undefined scores count as worse.
pub fn early_stop_on_scores(scores: &[Option<f64>], lower_is_better: bool) -> StopDecision {
    let m = scores.len();
    if m < 2 {
        return StopDecision::Continue;
    }
    let worse = match (scores[m - 2], scores[m - 1]) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(prev), Some(cur)) => {
            if lower_is_better {
                cur > prev
            } else {
                cur < prev
            }
        }
    };
    if worse {
        StopDecision::Stop { return_stage: m - 1 }
    } else {
        StopDecision::Continue
    }
}

pub fn early_stop_check(records: &[StageRecord], criterion: EarlyStop) -> StopDecision {
    match criterion {
        EarlyStop::None => StopDecision::Continue,
        EarlyStop::Aicc => {
            let s: Vec<Option<f64>> = records.iter().map(|r| r.aicc).collect();
            early_stop_on_scores(&s, true)
        }
        EarlyStop::R2 => {
            let s: Vec<Option<f64>> = records.iter().map(|r| Some(r.r2)).collect();
            early_stop_on_scores(&s, false)
        }
    }
}

/// Elementwise sum of per-stage coefficient fields.
pub fn aggregate_stage_fields(fields: &[CoefficientField]) -> Result<CoefficientField> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidInput("no stage fields to aggregate".into()))?;
    let mut total = first.clone();
    for f in &fields[1..] {
        total.accumulate(f)?;
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct GwrBoostModel {
    config: BoostConfig,
    scheme: SpatialWeightScheme,
    coefficients: CoefficientField,
    fitted: Array1<f64>,
    residuals: Array1<f64>,
    hat_trace: f64,
    trace: BoostTrace,
    warnings: Vec<String>,
}

impl GwrBoostModel {
    pub fn config(&self) -> &BoostConfig {
        &self.config
    }

    /// The weighting scheme used by every stage.
    pub fn scheme(&self) -> &SpatialWeightScheme {
        &self.scheme
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

    /// Effective number of parameters at the returned stage.
    pub fn hat_trace(&self) -> f64 {
        self.hat_trace
    }

    pub fn trace(&self) -> &BoostTrace {
        &self.trace
    }

    pub fn stopped_at(&self) -> usize {
        self.trace.stopped_at
    }

    /// Non-fatal diagnostics, such as a decreasing effective-parameter count.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Boosted fit with `scheme` used as is.
pub fn fit_gwrboost(
    data: &Dataset,
    scheme: &SpatialWeightScheme,
    config: &BoostConfig,
) -> Result<GwrBoostModel> {
    fit_gwrboost_with(data, scheme, config, &SolveOptions::default())
}

pub fn fit_gwrboost_with(
    data: &Dataset,
    scheme: &SpatialWeightScheme,
    config: &BoostConfig,
    opts: &SolveOptions,
) -> Result<GwrBoostModel> {
    config.validate()?;
    let smoother = LocalSmoother::build(data.design(), data.coords(), scheme, opts).map_err(|e| match e {
        Error::SingularSystem {
            location, condition, ..
        } => Error::SingularSystem {
            location,
            condition,
            stage: Some(1),
        },
        other => other,
    })?;
    fit_gwrboost_smoother(data, *scheme, &smoother, config)
}

/// Boosted fit whose bandwidth is `reference` scaled by the configured factor.
pub fn fit_gwrboost_from_reference(
    data: &Dataset,
    reference: &SpatialWeightScheme,
    config: &BoostConfig,
) -> Result<GwrBoostModel> {
    config.validate()?;
    let scheme = boosted_scheme(data, reference, config.bandwidth_factor)?;
    fit_gwrboost(data, &scheme, config)
}

/// `reference` with its bandwidth multiplied by `factor`. Adaptive neighbor
/// counts are rounded and capped at `n − 1`.
pub fn boosted_scheme(
    data: &Dataset,
    reference: &SpatialWeightScheme,
    factor: f64,
) -> Result<SpatialWeightScheme> {
    let n = data.len();
    let scheme = SpatialWeightScheme::new(
        reference.kernel,
        reference.bandwidth.scaled(factor, n.saturating_sub(1).max(1)),
    );
    scheme.validate_for_regression(n, data.design().n_params())?;
    Ok(scheme)
}

/// Runs the stage loop on a prebuilt smoother.
pub fn fit_gwrboost_smoother(
    data: &Dataset,
    scheme: SpatialWeightScheme,
    smoother: &LocalSmoother,
    config: &BoostConfig,
) -> Result<GwrBoostModel> {
    config.validate()?;
    let n = data.len();
    if smoother.n_obs() != n {
        return Err(Error::DimensionMismatch(format!(
            "smoother built for {} observations, dataset has {n}",
            smoother.n_obs()
        )));
    }
    let y = data.response().as_slice().expect("contiguous response");
    let design = data.design();
    let lambda = config.learning_rate;
    let hat = smoother.hat_matrix();
    let mut tracer = TraceAccumulator::new(&hat, lambda, config.trace_method);

    let mut cumulative = CoefficientField::zeros(n, design.n_params());
    let mut fitted = Array1::<f64>::zeros(n);
    let mut records: Vec<StageRecord> = Vec::new();
    let mut warnings = Vec::new();
    let mut stopped_at = config.max_stages;
    let mut early_stopped = false;

    for stage in 1..=config.max_stages {
        let target: Vec<f64> = if stage == 1 {
            y.to_vec()
        } else {
            y.iter().zip(fitted.iter()).map(|(yi, fi)| lambda * (yi - fi)).collect()
        };
        cumulative.accumulate(&smoother.coefficients(&target))?;
        fitted = cumulative.fitted(design)?;
        let k = tracer.next_trace();

        let f = fitted.as_slice().expect("contiguous");
        let rss = rss(y, f)?;
        let (r2, _) = r2_and_adjusted(y, f, k)?;
        let ll = gaussian_log_likelihood(rss, n, config.likelihood)?;
        let (aic, aicc) = aic_aicc(ll, k, n);
        if let Some(prev) = records.last() {
            if k < prev.hat_trace - 1e-9 * prev.hat_trace.abs().max(1.0) {
                warnings.push(format!(
                    "effective parameters decreased from {} to {} at stage {stage}",
                    prev.hat_trace, k
                ));
            }
        }
        records.push(StageRecord {
            stage,
            rss,
            r2,
            aic: aic.is_finite().then_some(aic),
            aicc: aicc.filter(|v| v.is_finite()),
            hat_trace: k,
            coefficients: cumulative.clone(),
        });
        if let StopDecision::Stop { return_stage } = early_stop_check(&records, config.early_stop) {
            stopped_at = return_stage;
            early_stopped = true;
            break;
        }
    }

    let chosen = &records[stopped_at - 1];
    let coefficients = chosen.coefficients.clone();
    let fitted = coefficients.fitted(design)?;
    let residuals = data.response() - &fitted;
    Ok(GwrBoostModel {
        config: *config,
        scheme,
        hat_trace: chosen.hat_trace,
        coefficients,
        fitted,
        residuals,
        trace: BoostTrace {
            records,
            stopped_at,
            early_stopped,
        },
        warnings,
    })
}

/// Incremental effective-parameter count, one call per stage.
struct TraceAccumulator<'a> {
    hat: &'a HatMatrix,
    lambda: f64,
    method: TraceMethod,
    stage: usize,
    total: f64,
    /// Boosted: current series term `[λ(I−H)]^{m−1}`. Exact: residual operator.
    state: Option<Array2<f64>>,
    hat_norm: f64,
    prev_norm: f64,
    converged: bool,
}

impl<'a> TraceAccumulator<'a> {
    fn new(hat: &'a HatMatrix, lambda: f64, method: TraceMethod) -> Self {
        Self {
            hat,
            lambda,
            method,
            stage: 0,
            total: 0.0,
            state: None,
            hat_norm: hat.frobenius_norm(),
            prev_norm: f64::INFINITY,
            converged: false,
        }
    }

    fn next_trace(&mut self) -> f64 {
        self.stage += 1;
        let n = self.hat.n();
        if self.stage == 1 {
            self.total = self.hat.trace();
            return self.total;
        }
        if self.converged {
            return self.total;
        }
        match self.method {
            TraceMethod::Boosted => {
                // G_m = λ(G_{m−1} − H G_{m−1}), G_1 = I
                let g = self.state.take().unwrap_or_else(|| Array2::eye(n));
                let hg = self.hat.mul_dense(&g);
                let mut next = g;
                next.zip_mut_with(&hg, |a, b| *a = self.lambda * (*a - *b));
                let term = self.hat.trace_of_product(&next);
                self.total += term;
                let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
                let bound = self.hat_norm * norm;
                if bound <= 1e-15 * self.total.abs().max(1.0) && norm <= 0.5 * self.prev_norm {
                    self.converged = true;
                } else {
                    self.prev_norm = norm;
                    self.state = Some(next);
                }
            }
            TraceMethod::Exact => {
                // R_m = R_{m−1} − λ H R_{m−1}, R_1 = I − H, k = N − tr(R)
                let r = self.state.take().unwrap_or_else(|| {
                    let mut r = -self.hat.to_dense();
                    for i in 0..n {
                        r[[i, i]] += 1.0;
                    }
                    r
                });
                let hr = self.hat.mul_dense(&r);
                let step_norm = self.lambda * hr.iter().map(|v| v * v).sum::<f64>().sqrt();
                let mut next = r;
                next.zip_mut_with(&hr, |a, b| *a -= self.lambda * b);
                self.total = n as f64 - next.diag().sum();
                if step_norm * (n as f64).sqrt() <= 1e-15 * self.total.abs().max(1.0)
                    && step_norm <= 0.5 * self.prev_norm
                {
                    self.converged = true;
                } else {
                    self.prev_norm = step_norm;
                    self.state = Some(next);
                }
            }
        }
        self.total
    }
}

fn check_square(h: &Array2<f64>, stages: usize) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "hat matrix must be square, got {}×{}",
            h.nrows(),
            h.ncols()
        )));
    }
    if stages == 0 {
        return Err(Error::InvalidConfig("stage count must be at least 1".into()));
    }
    Ok(())
}

/// `H Σ_{m=1..M} [λ(I−H)]^{m−1}`, accumulated term by term.
pub fn boosted_hat_matrix(h: &Array2<f64>, learning_rate: f64, stages: usize) -> Result<Array2<f64>> {
    check_square(h, stages)?;
    let hs = HatMatrix::from_dense(h)?;
    let n = h.nrows();
    let mut term = Array2::<f64>::eye(n);
    let mut sum = term.clone();
    for _ in 1..stages {
        let ht = hs.mul_dense(&term);
        term.zip_mut_with(&ht, |a, b| *a = learning_rate * (*a - *b));
        sum += &term;
    }
    Ok(hs.mul_dense(&sum))
}

/// The operator mapping `y` to the fitted values of an `M`-stage boosting
/// run: `I − (I − λH)^{M−1}(I − H)`.
pub fn exact_boosted_operator(h: &Array2<f64>, learning_rate: f64, stages: usize) -> Result<Array2<f64>> {
    check_square(h, stages)?;
    let hs = HatMatrix::from_dense(h)?;
    let n = h.nrows();
    let mut r = Array2::<f64>::eye(n) - h;
    for _ in 1..stages {
        let hr = hs.mul_dense(&r);
        r.zip_mut_with(&hr, |a, b| *a -= learning_rate * b);
    }
    Ok(Array2::<f64>::eye(n) - r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Coordinates, Kernel};
    use crate::gwr::fit_gwr;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn heterogeneous(n_side: usize, noise: f64) -> Dataset {
        let mut coords = Vec::new();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n_side {
            for j in 0..n_side {
                let t = (i * n_side + j) as f64;
                let (u, v) = (i as f64, j as f64);
                coords.push(Coordinates::new(u, v));
                let a = (t * 0.913).sin();
                x.push(a);
                let b1 = 1.0 + 0.3 * u - 0.2 * v + 0.05 * u * v;
                y.push(0.5 + 0.1 * v + b1 * a + noise * (t * 7.77).cos());
            }
        }
        let n = n_side * n_side;
        Dataset::new(
            None,
            coords,
            Array2::from_shape_vec((n, 1), x).unwrap(),
            Array1::from(y),
            vec!["a".into()],
        )
        .unwrap()
    }

    fn cfg(m: usize, lambda: f64, early_stop: EarlyStop) -> BoostConfig {
        BoostConfig {
            max_stages: m,
            learning_rate: lambda,
            early_stop,
            ..BoostConfig::default()
        }
    }

    #[test]
    fn single_stage_is_gwr() {
        let data = heterogeneous(7, 0.2);
        let scheme = SpatialWeightScheme::adaptive(Kernel::Bisquare, 12);
        let gwr = fit_gwr(&data, &scheme).unwrap();
        let boost = fit_gwrboost(&data, &scheme, &cfg(1, 0.3, EarlyStop::Aicc)).unwrap();
        assert_eq!(boost.coefficients(), gwr.coefficients());
        assert_eq!(boost.fitted(), gwr.fitted());
        assert_eq!(boost.hat_trace(), gwr.hat_trace());
        assert_eq!(boost.stopped_at(), 1);
    }

    #[test]
    fn stage_one_record_matches_gwr() {
        let data = heterogeneous(7, 0.2);
        let scheme = SpatialWeightScheme::fixed(Kernel::Gaussian, 2.0);
        let gwr = fit_gwr(&data, &scheme).unwrap();
        let boost = fit_gwrboost(&data, &scheme, &cfg(5, 0.5, EarlyStop::None)).unwrap();
        let first = boost.trace().record(1).unwrap();
        for (a, b) in first.coefficients.values().iter().zip(gwr.coefficients().values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert_eq!(boost.trace().records.len(), 5);
        assert_eq!(boost.stopped_at(), 5);
    }

    #[test]
    fn residual_norm_nonincreasing_with_unit_rate() {
        let data = heterogeneous(7, 0.0);
        let scheme = SpatialWeightScheme::adaptive(Kernel::Bisquare, 15);
        let boost = fit_gwrboost(&data, &scheme, &cfg(15, 1.0, EarlyStop::None)).unwrap();
        for w in boost.trace().records.windows(2) {
            assert!(w[1].rss <= w[0].rss * (1.0 + 1e-12), "{} > {}", w[1].rss, w[0].rss);
        }
    }

    #[test]
    fn aggregated_model_is_linear_predictor() {
        let data = heterogeneous(6, 0.3);
        let scheme = SpatialWeightScheme::adaptive(Kernel::Bisquare, 10);
        let boost = fit_gwrboost(&data, &scheme, &cfg(20, 0.4, EarlyStop::Aicc)).unwrap();
        let x = data.design().matrix();
        for i in 0..data.len() {
            let direct = boost.coefficients().row(i).dot(&x.row(i));
            assert!((boost.fitted()[i] - direct).abs() < 1e-8);
            assert_abs_diff_eq!(boost.fitted()[i] + boost.residuals()[i], data.response()[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn early_stop_examples() {
        let s = |v: &[f64]| v.iter().map(|x| Some(*x)).collect::<Vec<_>>();
        assert_eq!(early_stop_on_scores(&s(&[500.0, 450.0]), true), StopDecision::Continue);
        assert_eq!(
            early_stop_on_scores(&s(&[500.0, 450.0, 470.0]), true),
            StopDecision::Stop { return_stage: 2 }
        );
        assert_eq!(early_stop_on_scores(&s(&[0.5, 0.6, 0.55]), false), StopDecision::Stop { return_stage: 2 });
        assert_eq!(early_stop_on_scores(&[Some(3.0), None], true), StopDecision::Stop { return_stage: 1 });
        let improving = s(&[5.0, 4.0, 3.0, 2.0]);
        for m in 1..=improving.len() {
            assert_eq!(early_stop_on_scores(&improving[..m], true), StopDecision::Continue);
        }
    }

    #[test]
    fn early_stopped_model_is_previous_snapshot() {
        let data = heterogeneous(7, 0.4);
        let scheme = SpatialWeightScheme::adaptive(Kernel::Bisquare, 8);
        let full = fit_gwrboost(&data, &scheme, &cfg(60, 0.5, EarlyStop::None)).unwrap();
        let stopped = fit_gwrboost(&data, &scheme, &cfg(60, 0.5, EarlyStop::Aicc)).unwrap();
        let m = stopped.stopped_at();
        if stopped.trace().early_stopped {
            assert_eq!(stopped.trace().records.len(), m + 1);
            let a = stopped.trace().records[m].aicc;
            let b = stopped.trace().records[m - 1].aicc;
            assert!(a.is_none() || a > b);
        }
        assert_eq!(stopped.coefficients(), &full.trace().record(m).unwrap().coefficients);
    }

    #[test]
    fn aggregation_examples() {
        let a = CoefficientField::new(array![[1.0, -2.0], [0.5, 3.0]]);
        assert_eq!(aggregate_stage_fields(std::slice::from_ref(&a)).unwrap(), a);
        let neg = CoefficientField::new(-a.values().clone());
        let z = aggregate_stage_fields(&[a.clone(), neg]).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        assert!(aggregate_stage_fields(&[a, CoefficientField::zeros(3, 2)]).is_err());
        assert!(aggregate_stage_fields(&[]).is_err());
    }

    #[test]
    fn boosted_hat_small_cases() {
        let h = array![[0.6, 0.3, 0.1], [0.2, 0.5, 0.3], [0.0, 0.4, 0.6]];
        assert_eq!(boosted_hat_matrix(&h, 0.3, 1).unwrap(), h);
        // projection with unit rate stays put
        let p = array![[0.5, 0.5], [0.5, 0.5]];
        let b = boosted_hat_matrix(&p, 1.0, 6).unwrap();
        for (x, y) in b.iter().zip(p.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-15);
        }
        // two stages by hand: H + λH(I−H)
        let lam = 0.4;
        let i3 = Array2::<f64>::eye(3);
        let want = h.dot(&(&i3 + &((&i3 - &h) * lam)));
        let got = boosted_hat_matrix(&h, lam, 2).unwrap();
        for (x, y) in got.iter().zip(want.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-15);
        }
        // both forms agree at unit rate
        let a = boosted_hat_matrix(&h, 1.0, 5).unwrap();
        let e = exact_boosted_operator(&h, 1.0, 5).unwrap();
        for (x, y) in a.iter().zip(e.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-13);
        }
        assert!(boosted_hat_matrix(&Array2::zeros((2, 3)), 0.5, 2).is_err());
    }

    #[test]
    fn stage_trace_matches_operator_trace() {
        let data = heterogeneous(6, 0.3);
        let scheme = SpatialWeightScheme::adaptive(Kernel::Bisquare, 10);
        let h = fit_gwr(&data, &scheme).unwrap().hat_matrix().to_dense();
        for method in [TraceMethod::Boosted, TraceMethod::Exact] {
            let config = BoostConfig {
                trace_method: method,
                ..cfg(12, 0.3, EarlyStop::None)
            };
            let boost = fit_gwrboost(&data, &scheme, &config).unwrap();
            for rec in &boost.trace().records {
                let op = match method {
                    TraceMethod::Boosted => boosted_hat_matrix(&h, 0.3, rec.stage).unwrap(),
                    TraceMethod::Exact => exact_boosted_operator(&h, 0.3, rec.stage).unwrap(),
                };
                assert_abs_diff_eq!(rec.hat_trace, op.diag().sum(), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn fitted_values_follow_exact_operator() {
        let data = heterogeneous(6, 0.3);
        let scheme = SpatialWeightScheme::adaptive(Kernel::Bisquare, 10);
        let h = fit_gwr(&data, &scheme).unwrap().hat_matrix().to_dense();
        let boost = fit_gwrboost(&data, &scheme, &cfg(9, 0.25, EarlyStop::None)).unwrap();
        let s = exact_boosted_operator(&h, 0.25, 9).unwrap();
        let want = s.dot(data.response());
        for (a, b) in boost.fitted().iter().zip(want.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0, 0.1, EarlyStop::None).validate().is_err());
        assert!(cfg(5, 0.0, EarlyStop::None).validate().is_err());
        assert!(cfg(5, 1.5, EarlyStop::None).validate().is_err());
        let bad = BoostConfig {
            bandwidth_factor: -1.0,
            ..BoostConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        assert!(BoostConfig::default().validate().is_ok());
    }

    #[test]
    fn reference_bandwidth_is_scaled() {
        let data = heterogeneous(6, 0.3);
        let reference = SpatialWeightScheme::adaptive(Kernel::Bisquare, 10);
        let s = boosted_scheme(&data, &reference, 1.25).unwrap();
        assert_eq!(s.bandwidth, crate::geometry::Bandwidth::Adaptive(13));
        let capped = boosted_scheme(&data, &reference, 100.0).unwrap();
        assert_eq!(capped.bandwidth, crate::geometry::Bandwidth::Adaptive(35));
    }
}
