//! Goodness-of-fit, information criteria, residual autocorrelation and
//! coefficient accuracy. Every function consumes observed/fitted vectors and an
//! effective parameter count only, so all model families are scored alike.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::CoefficientField;
use crate::error::{Error, Result};
use crate::geometry::{pairwise_distance, Coordinates};

/// Which Gaussian log-likelihood convention feeds AIC and AICc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Likelihood {
    /// `−(n/2) ln(RSS/n) − (n/2)(1 + ln 2π)`.
    #[default]
    Profile,
    /// `(n/2) ln σ − (n/2) ln 2π − σ·RSS` maximized at `σ = n/(2·RSS)`.
    Precision,
}

impl std::fmt::Display for Likelihood {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Likelihood::Profile => "profile",
            Likelihood::Precision => "precision",
        })
    }
}

pub fn rss(y: &[f64], fitted: &[f64]) -> Result<f64> {
    check_len(y, fitted)?;
    Ok(y.iter().zip(fitted).map(|(a, b)| (a - b) * (a - b)).sum())
}

fn check_len(y: &[f64], fitted: &[f64]) -> Result<()> {
    if y.len() != fitted.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} observations vs {} fitted values",
            y.len(),
            fitted.len()
        )));
    }
    Ok(())
}

/// Total sum of squares about the mean.
pub fn tss(y: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - mean) * (v - mean)).sum()
}

/// `R²` and adjusted `R²` with `k` effective parameters. The adjusted value is
/// `None` when `n ≤ k + 1`.
pub fn r2_and_adjusted(y: &[f64], fitted: &[f64], k: f64) -> Result<(f64, Option<f64>)> {
    let rss = rss(y, fitted)?;
    let tss = tss(y);
    if !(tss > 0.0) {
        return Err(Error::ZeroVariance("response has zero total variance".into()));
    }
    let n = y.len() as f64;
    let r2 = 1.0 - rss / tss;
    let denom = n - k - 1.0;
    let adjusted = (denom > 0.0).then(|| 1.0 - (n - 1.0) * (1.0 - r2) / denom);
    Ok((r2, adjusted))
}

/// Maximized Gaussian log-likelihood. A perfect fit (`rss = 0`) returns `+∞`.
pub fn gaussian_log_likelihood(rss: f64, n: usize, convention: Likelihood) -> Result<f64> {
    if !(rss >= 0.0) || !rss.is_finite() {
        return Err(Error::InvalidInput(format!("rss must be finite and nonnegative, got {rss}")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("log-likelihood needs at least one observation".into()));
    }
    if rss == 0.0 {
        return Ok(f64::INFINITY);
    }
    let n = n as f64;
    Ok(match convention {
        Likelihood::Profile => -0.5 * n * (rss / n).ln() - 0.5 * n * (1.0 + (2.0 * PI).ln()),
        Likelihood::Precision => {
            let sigma = n / (2.0 * rss);
            0.5 * n * sigma.ln() - 0.5 * n * (2.0 * PI).ln() - sigma * rss
        }
    })
}

/// AIC and AICc. AICc is `None` when `n ≤ k + 1`.
pub fn aic_aicc(log_likelihood: f64, k: f64, n: usize) -> (f64, Option<f64>) {
    let aic = -2.0 * log_likelihood + 2.0 * k;
    let denom = n as f64 - k - 1.0;
    let aicc = (denom > 0.0).then(|| aic + 2.0 * k * (k + 1.0) / denom);
    (aic, aicc)
}

/// Convenience: AICc straight from a residual sum of squares.
pub fn aicc_from_rss(rss: f64, k: f64, n: usize, convention: Likelihood) -> Result<Option<f64>> {
    let ll = gaussian_log_likelihood(rss, n, convention)?;
    Ok(aic_aicc(ll, k, n).1.filter(|v| v.is_finite()))
}

/// Sparse spatial weights for Moran's I, stored by rows with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct MoranWeights {
    n: usize,
    neighbors: Vec<Vec<(usize, f64)>>,
    row_standardized: bool,
    scheme: String,
}

/// How to build Moran weights for a set of locations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoranScheme {
    /// Rook contiguity on complete regular grids, otherwise k-nearest neighbors.
    #[default]
    Auto,
    Rook,
    Knn,
}

/// Neighbor count used for irregular point data.
pub const DEFAULT_MORAN_NEIGHBORS: usize = 8;

impl MoranWeights {
    /// Binary (or arbitrary nonnegative) weights from neighbor lists. Self
    /// links are dropped.
    pub fn from_neighbors(
        neighbors: Vec<Vec<(usize, f64)>>,
        row_standardize: bool,
        scheme: impl Into<String>,
    ) -> Result<Self> {
        let n = neighbors.len();
        let mut cleaned = Vec::with_capacity(n);
        for (i, row) in neighbors.into_iter().enumerate() {
            let mut row: Vec<(usize, f64)> = row.into_iter().filter(|&(j, _)| j != i).collect();
            if let Some(&(j, w)) = row.iter().find(|&&(j, w)| j >= n || !(w >= 0.0) || !w.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "invalid Moran weight {w} from {i} to {j}"
                )));
            }
            row.sort_by_key(|&(j, _)| j);
            if row_standardize {
                let s: f64 = row.iter().map(|&(_, w)| w).sum();
                if s > 0.0 {
                    for e in &mut row {
                        e.1 /= s;
                    }
                }
            }
            cleaned.push(row);
        }
        Ok(Self {
            n,
            neighbors: cleaned,
            row_standardized: row_standardize,
            scheme: scheme.into(),
        })
    }

    /// Rook contiguity on a complete regular lattice. Returns `None` when the
    /// coordinates do not form one.
    pub fn rook_grid(coords: &[Coordinates], row_standardize: bool) -> Option<Self> {
        let (us, vs) = (lattice_axis(coords.iter().map(|c| c.u))?, lattice_axis(coords.iter().map(|c| c.v))?);
        if us.len() * vs.len() != coords.len() || coords.len() < 2 {
            return None;
        }
        let index = |x: f64, axis: &[f64]| axis.binary_search_by(|a| a.total_cmp(&x)).ok();
        let mut cell = vec![usize::MAX; coords.len()];
        let mut pos = Vec::with_capacity(coords.len());
        for (obs, c) in coords.iter().enumerate() {
            let (a, b) = (index(c.u, &us)?, index(c.v, &vs)?);
            let slot = &mut cell[a * vs.len() + b];
            if *slot != usize::MAX {
                return None;
            }
            *slot = obs;
            pos.push((a, b));
        }
        let neighbors = pos
            .iter()
            .map(|&(a, b)| {
                let mut row = Vec::with_capacity(4);
                let cand = [
                    (a.wrapping_sub(1), b),
                    (a + 1, b),
                    (a, b.wrapping_sub(1)),
                    (a, b + 1),
                ];
                for (x, y) in cand {
                    if x < us.len() && y < vs.len() {
                        row.push((cell[x * vs.len() + y], 1.0));
                    }
                }
                row
            })
            .collect();
        Self::from_neighbors(neighbors, row_standardize, "rook").ok()
    }

    /// Each observation linked to its `k` nearest others (ties by index).
    pub fn knn(coords: &[Coordinates], k: usize, row_standardize: bool) -> Result<Self> {
        let n = coords.len();
        if k == 0 || k >= n {
            return Err(Error::InvalidInput(format!(
                "knn Moran weights need 1 <= k < n, got k={k}, n={n}"
            )));
        }
        let neighbors = (0..n)
            .map(|i| {
                let mut d: Vec<(f64, usize)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (pairwise_distance(coords[i], coords[j]), j))
                    .collect();
                d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                d.into_iter().take(k).map(|(_, j)| (j, 1.0)).collect()
            })
            .collect();
        Self::from_neighbors(neighbors, row_standardize, format!("knn{k}"))
    }

    /// Row-standardized weights chosen by `scheme`.
    pub fn build(coords: &[Coordinates], scheme: MoranScheme) -> Result<Self> {
        let knn = || Self::knn(coords, DEFAULT_MORAN_NEIGHBORS.min(coords.len().saturating_sub(1)), true);
        match scheme {
            MoranScheme::Rook => Self::rook_grid(coords, true).ok_or_else(|| {
                Error::InvalidInput("rook Moran weights need a complete regular grid".into())
            }),
            MoranScheme::Knn => knn(),
            MoranScheme::Auto => match Self::rook_grid(coords, true) {
                Some(w) => Ok(w),
                None => knn(),
            },
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row_standardized(&self) -> bool {
        self.row_standardized
    }

    /// Short description such as `rook` or `knn8`.
    pub fn scheme(&self) -> &str {
        &self.scheme
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    /// Sum of all weights.
    pub fn total(&self) -> f64 {
        self.neighbors.iter().flatten().map(|&(_, w)| w).sum()
    }
}

/// Sorted distinct values if they are equally spaced, else `None`.
fn lattice_axis(values: impl Iterator<Item = f64>) -> Option<Vec<f64>> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if v.len() < 2 {
        return Some(v);
    }
    let step = v[1] - v[0];
    let ok = v
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs().max(1.0));
    ok.then_some(v)
}

/// Global Moran's I of `values` under `weights`.
pub fn morans_i(values: &[f64], weights: &MoranWeights) -> Result<f64> {
    let n = values.len();
    if n != weights.n {
        return Err(Error::DimensionMismatch(format!(
            "{n} values for {} Moran weight rows",
            weights.n
        )));
    }
    if n < 2 {
        return Err(Error::InvalidInput("Moran's I needs at least two values".into()));
    }
    let total = weights.total();
    if !(total > 0.0) {
        return Err(Error::InvalidInput("Moran weights sum to zero".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let z: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let var: f64 = z.iter().map(|v| v * v).sum();
    if !(var > 0.0) {
        return Err(Error::ZeroVariance("Moran's I of a constant vector".into()));
    }
    let cross: f64 = (0..n)
        .map(|i| z[i] * weights.neighbors[i].iter().map(|&(j, w)| w * z[j]).sum::<f64>())
        .sum();
    Ok(n as f64 * cross / (total * var))
}

/// Moran's I with a permutation reference distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoranTest {
    pub observed: f64,
    /// `−1/(n−1)`.
    pub expected: f64,
    pub permutation_mean: f64,
    pub permutation_sd: f64,
    pub z_score: f64,
    /// Two-sided pseudo p-value `(1 + #{|I_perm − E| ≥ |I − E|}) / (1 + permutations)`.
    pub p_value: f64,
    pub permutations: usize,
}

pub fn moran_permutation_test(
    values: &[f64],
    weights: &MoranWeights,
    permutations: usize,
    seed: u64,
) -> Result<MoranTest> {
    if permutations == 0 {
        return Err(Error::InvalidInput("permutation count must be positive".into()));
    }
    let observed = morans_i(values, weights)?;
    let expected = -1.0 / (values.len() as f64 - 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = values.to_vec();
    let mut draws = Vec::with_capacity(permutations);
    for _ in 0..permutations {
        shuffled.shuffle(&mut rng);
        draws.push(morans_i(&shuffled, weights)?);
    }
    let m = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / m;
    let sd = (draws.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (m - 1.0).max(1.0)).sqrt();
    let extreme = draws
        .iter()
        .filter(|d| (*d - expected).abs() >= (observed - expected).abs())
        .count();
    Ok(MoranTest {
        observed,
        expected,
        permutation_mean: mean,
        permutation_sd: sd,
        z_score: if sd > 0.0 { (observed - mean) / sd } else { f64::NAN },
        p_value: (1.0 + extreme as f64) / (1.0 + m),
        permutations,
    })
}

/// Root-mean-square difference of coefficient column `j` between two fields.
pub fn coefficient_rmse(truth: &CoefficientField, estimate: &CoefficientField, j: usize) -> Result<f64> {
    truth.check_same_shape(estimate)?;
    if j >= truth.n_params() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient index {j} out of range for {} parameters",
            truth.n_params()
        )));
    }
    let (a, b) = (truth.column(j), estimate.column(j));
    let n = a.len() as f64;
    Ok((a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n).sqrt())
}

/// Per-coefficient RMSE for every column, intercept first.
pub fn coefficient_rmse_all(truth: &CoefficientField, estimate: &CoefficientField) -> Result<Vec<f64>> {
    (0..truth.n_params())
        .map(|j| coefficient_rmse(truth, estimate, j))
        .collect()
}

/// The full evaluation record of one fitted model.
///
/// Quantities that are undefined for the fit (overparameterized AICc, perfect
/// fit log-likelihood, constant residuals for Moran's I) are `None` and named
/// in `flags`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub n: usize,
    pub effective_params: f64,
    pub rss: f64,
    pub r2: f64,
    pub adjusted_r2: Option<f64>,
    pub log_likelihood: Option<f64>,
    pub aic: Option<f64>,
    pub aicc: Option<f64>,
    pub moran_i: Option<f64>,
    pub likelihood: Likelihood,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl Diagnostics {
    pub fn compute(
        y: &[f64],
        fitted: &[f64],
        effective_params: f64,
        likelihood: Likelihood,
        moran: Option<&MoranWeights>,
    ) -> Result<Self> {
        let n = y.len();
        let rss = rss(y, fitted)?;
        let (r2, adjusted_r2) = r2_and_adjusted(y, fitted, effective_params)?;
        let ll = gaussian_log_likelihood(rss, n, likelihood)?;
        let (aic, aicc) = aic_aicc(ll, effective_params, n);
        let mut flags = Vec::new();
        if adjusted_r2.is_none() {
            flags.push("adjusted_r2_undefined".to_string());
        }
        if !ll.is_finite() {
            flags.push("perfect_fit".to_string());
        }
        let aicc = aicc.filter(|v| v.is_finite());
        if aicc.is_none() {
            flags.push("aicc_undefined".to_string());
        }
        let moran_i = match moran {
            None => None,
            Some(w) => {
                let resid: Vec<f64> = y.iter().zip(fitted).map(|(a, b)| a - b).collect();
                match morans_i(&resid, w) {
                    Ok(v) => Some(v),
                    Err(Error::ZeroVariance(_)) => {
                        flags.push("moran_undefined".to_string());
                        None
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        Ok(Self {
            n,
            effective_params,
            rss,
            r2,
            adjusted_r2,
            log_likelihood: ll.is_finite().then_some(ll),
            aic: aic.is_finite().then_some(aic),
            aicc,
            moran_i,
            likelihood,
            flags,
        })
    }

    /// The reported metrics by name; undefined values are omitted.
    pub fn metric_map(&self) -> BTreeMap<&'static str, f64> {
        let mut m = BTreeMap::new();
        m.insert("rss", self.rss);
        m.insert("r2", self.r2);
        m.insert("effective_params", self.effective_params);
        for (k, v) in [
            ("adjusted_r2", self.adjusted_r2),
            ("aic", self.aic),
            ("aicc", self.aicc),
            ("moran_i", self.moran_i),
            ("log_likelihood", self.log_likelihood),
        ] {
            if let Some(v) = v {
                m.insert(k, v);
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    fn grid(n: usize) -> Vec<Coordinates> {
        (0..n)
            .flat_map(|i| (0..n).map(move |j| Coordinates::new(i as f64, j as f64)))
            .collect()
    }

    #[test]
    fn rss_examples() {
        assert_eq!(rss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rss(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 5.0);
        assert!(rss(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn r2_examples() {
        let y = [1.0, 2.0, 4.0, 7.0];
        assert_eq!(r2_and_adjusted(&y, &y, 1.0).unwrap(), (1.0, Some(1.0)));
        let mean = [3.5; 4];
        assert_eq!(r2_and_adjusted(&y, &mean, 1.0).unwrap().0, 0.0);
        assert!(matches!(
            r2_and_adjusted(&[2.0, 2.0], &[2.0, 2.0], 0.0),
            Err(Error::ZeroVariance(_))
        ));
        // n <= k + 1 leaves the adjusted value undefined
        assert_eq!(r2_and_adjusted(&y, &mean, 3.0).unwrap().1, None);
    }

    #[test]
    fn log_likelihood_examples() {
        let ll = gaussian_log_likelihood(0.5, 1, Likelihood::Precision).unwrap();
        assert_abs_diff_eq!(ll, -0.5 * (2.0 * PI).ln() - 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ll, -1.418_938_533_204_672_7, epsilon = 1e-12);
        for conv in [Likelihood::Precision, Likelihood::Profile] {
            assert_eq!(gaussian_log_likelihood(0.0, 5, conv).unwrap(), f64::INFINITY);
            let a = gaussian_log_likelihood(3.0, 10, conv).unwrap();
            let b = gaussian_log_likelihood(6.0, 10, conv).unwrap();
            assert!(b < a);
            assert!(gaussian_log_likelihood(-1.0, 10, conv).is_err());
        }
        // the two conventions differ by the constant (n/2) ln 2
        let p = gaussian_log_likelihood(7.3, 40, Likelihood::Profile).unwrap();
        let q = gaussian_log_likelihood(7.3, 40, Likelihood::Precision).unwrap();
        assert_abs_diff_eq!(p - q, 20.0 * 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn aic_examples() {
        assert_eq!(aic_aicc(0.0, 0.0, 10), (0.0, Some(0.0)));
        let (_, aicc) = aic_aicc(-3.0, 9.0, 10);
        assert_eq!(aicc, None);
        let (aic, aicc) = aic_aicc(-3.0, 2.0, 10);
        assert_eq!(aic, 10.0);
        assert_abs_diff_eq!(aicc.unwrap(), 10.0 + 12.0 / 7.0, epsilon = 1e-14);
    }

    #[test]
    fn checkerboard_is_minus_one() {
        let coords = grid(4);
        let values: Vec<f64> = coords
            .iter()
            .map(|c| if (c.u + c.v) as i64 % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        for standardize in [false, true] {
            let w = MoranWeights::rook_grid(&coords, standardize).unwrap();
            assert_abs_diff_eq!(morans_i(&values, &w).unwrap(), -1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn checkerboard_matches_brute_force_double_sum() {
        let coords = grid(4);
        let values: Vec<f64> = (0..16).map(|i| ((i * 7) % 5) as f64).collect();
        let w = MoranWeights::rook_grid(&coords, false).unwrap();
        let n = 16.0;
        let mean = values.iter().sum::<f64>() / n;
        let (mut num, mut total, mut den) = (0.0, 0.0, 0.0);
        for i in 0..16 {
            den += (values[i] - mean).powi(2);
            for j in 0..16 {
                let d = pairwise_distance(coords[i], coords[j]);
                if (d - 1.0).abs() < 1e-12 {
                    num += (values[i] - mean) * (values[j] - mean);
                    total += 1.0;
                }
            }
        }
        assert_abs_diff_eq!(morans_i(&values, &w).unwrap(), n * num / (total * den), epsilon = 1e-12);
    }

    #[test]
    fn constant_values_error() {
        let w = MoranWeights::rook_grid(&grid(3), true).unwrap();
        assert!(matches!(morans_i(&[2.0; 9], &w), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn weights_construction() {
        let coords = grid(5);
        let w = MoranWeights::build(&coords, MoranScheme::Auto).unwrap();
        assert_eq!(w.scheme(), "rook");
        assert_eq!(w.neighbors(0).len(), 2);
        assert_eq!(w.neighbors(12).len(), 4);
        for i in 0..25 {
            assert!(w.neighbors(i).iter().all(|&(j, _)| j != i));
            assert_abs_diff_eq!(w.neighbors(i).iter().map(|e| e.1).sum::<f64>(), 1.0, epsilon = 1e-15);
        }
        let mut irregular = coords.clone();
        irregular.pop();
        assert!(MoranWeights::rook_grid(&irregular, true).is_none());
        let w = MoranWeights::build(&irregular, MoranScheme::Auto).unwrap();
        assert_eq!(w.scheme(), "knn8");
        assert!(MoranWeights::build(&irregular, MoranScheme::Rook).is_err());
    }

    #[test]
    fn rmse_examples() {
        let a = CoefficientField::new(array![[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(coefficient_rmse(&a, &a, 1).unwrap(), 0.0);
        let b = CoefficientField::new(a.values() - 0.75);
        assert_abs_diff_eq!(coefficient_rmse(&a, &b, 0).unwrap(), 0.75, epsilon = 1e-15);
        assert!(coefficient_rmse(&a, &CoefficientField::zeros(3, 2), 0).is_err());
        assert!(coefficient_rmse(&a, &b, 2).is_err());
    }

    #[test]
    fn diagnostics_flags() {
        let y = [1.0, 2.0, 3.0];
        let d = Diagnostics::compute(&y, &y, 3.0, Likelihood::Profile, None).unwrap();
        assert_eq!(d.aicc, None);
        assert_eq!(d.log_likelihood, None);
        assert!(d.flags.contains(&"perfect_fit".to_string()));
        assert!(d.flags.contains(&"aicc_undefined".to_string()));
        let json = serde_json::to_string(&d).unwrap();
        let back: Diagnostics = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn iid_noise_within_permutation_band() {
        let coords = grid(12);
        let w = MoranWeights::build(&coords, MoranScheme::Auto).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..144).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
        let t = moran_permutation_test(&values, &w, 999, 5).unwrap();
        assert!((t.observed - t.expected).abs() < 4.0 * t.permutation_sd);
        assert!((t.permutation_mean - t.expected).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn aicc_exceeds_aic(ll in -1e3..1e3f64, k in 0.01..20.0f64, extra in 2usize..200) {
            let n = k.ceil() as usize + extra;
            let (aic, aicc) = aic_aicc(ll, k, n);
            prop_assert!(aicc.unwrap() > aic);
        }

        #[test]
        fn adjusted_not_above_r2(y in prop::collection::vec(-10.0..10.0f64, 6..30),
                                 noise in prop::collection::vec(-1.0..1.0f64, 30),
                                 k in 1.0..3.0f64) {
            let fitted: Vec<f64> = y.iter().zip(&noise).map(|(a, b)| a + b).collect();
            if let Ok((r2, Some(adj))) = r2_and_adjusted(&y, &fitted, k) {
                prop_assert!(r2 <= 1.0);
                prop_assert!(adj <= r2 + 1e-12);
            }
        }

        #[test]
        fn moran_affine_invariant(values in prop::collection::vec(-5.0..5.0f64, 16),
                                  a in prop_oneof![-10.0..-0.1f64, 0.1..10.0f64], b in -100.0..100.0f64) {
            let w = MoranWeights::rook_grid(&grid(4), true).unwrap();
            let base = match morans_i(&values, &w) { Ok(v) => v, Err(_) => return Ok(()) };
            let t: Vec<f64> = values.iter().map(|v| a * v + b).collect();
            prop_assert!((morans_i(&t, &w).unwrap() - base).abs() < 1e-9);
        }

        #[test]
        fn rmse_symmetric_and_triangle(a in prop::collection::vec(-5.0..5.0f64, 12),
                                       b in prop::collection::vec(-5.0..5.0f64, 12),
                                       c in prop::collection::vec(-5.0..5.0f64, 12)) {
            let f = |v: Vec<f64>| CoefficientField::new(Array2::from_shape_vec((6, 2), v).unwrap());
            let (fa, fb, fc) = (f(a), f(b), f(c));
            for j in 0..2 {
                let ab = coefficient_rmse(&fa, &fb, j).unwrap();
                prop_assert_eq!(ab, coefficient_rmse(&fb, &fa, j).unwrap());
                let ac = coefficient_rmse(&fa, &fc, j).unwrap();
                let cb = coefficient_rmse(&fc, &fb, j).unwrap();
                prop_assert!(ab <= ac + cb + 1e-12);
            }
        }
    }
}
