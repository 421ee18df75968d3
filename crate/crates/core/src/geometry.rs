//! Distances and geographic kernel weights.
//!
//! Every local regression is weighted by a kernel of the Euclidean distance
//! between the target location and each observation. The kernel scale is
//! either a fixed distance or, in adaptive mode, the distance to the k-th
//! nearest *other* observation of the target.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar location of an observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coordinates {
    pub u: f64,
    pub v: f64,
}

impl Coordinates {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

/// Euclidean distance between two locations.
#[inline]
pub fn pairwise_distance(a: Coordinates, b: Coordinates) -> f64 {
    (a.u - b.u).hypot(a.v - b.v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// `(1 - (d/h)^2)^2` for `d < h`, zero otherwise.
    #[default]
    Bisquare,
    /// `exp(-(d/h)^2 / 2)`.
    Gaussian,
}

impl Kernel {
    /// Kernel value at the scaled distance `d / h`.
    #[inline]
    pub(crate) fn at_ratio(self, ratio: f64) -> f64 {
        match self {
            Kernel::Bisquare => {
                if ratio < 1.0 {
                    let t = 1.0 - ratio * ratio;
                    t * t
                } else {
                    0.0
                }
            }
            Kernel::Gaussian => (-0.5 * ratio * ratio).exp(),
        }
    }

    /// True when the kernel assigns zero weight beyond the bandwidth.
    pub fn has_compact_support(self) -> bool {
        matches!(self, Kernel::Bisquare)
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Bisquare => f.write_str("bisquare"),
            Kernel::Gaussian => f.write_str("gaussian"),
        }
    }
}

/// Kernel weight for distance `d` under bandwidth `h`.
pub fn kernel_weight(d: f64, h: f64, kernel: Kernel) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidBandwidth(format!(
            "kernel bandwidth must be positive and finite, got {h}"
        )));
    }
    if !(d >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "distance must be nonnegative, got {d}"
        )));
    }
    Ok(kernel.at_ratio(d / h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum Bandwidth {
    /// Fixed kernel distance shared by every target.
    Fixed(f64),
    /// Neighbor count; the per-target distance is that of the k-th nearest other observation.
    Adaptive(usize),
}

impl Bandwidth {
    /// Scales the bandwidth by `factor`. Adaptive counts are rounded to the
    /// nearest integer and clamped to `[1, max_neighbors]`.
    pub fn scaled(self, factor: f64, max_neighbors: usize) -> Self {
        match self {
            Bandwidth::Fixed(h) => Bandwidth::Fixed(h * factor),
            Bandwidth::Adaptive(k) => {
                let scaled = (k as f64 * factor).round().max(1.0) as usize;
                Bandwidth::Adaptive(scaled.min(max_neighbors.max(1)))
            }
        }
    }

    /// Numeric value of the bandwidth (distance or neighbor count).
    pub fn value(self) -> f64 {
        match self {
            Bandwidth::Fixed(h) => h,
            Bandwidth::Adaptive(k) => k as f64,
        }
    }

    pub fn mode_name(self) -> &'static str {
        match self {
            Bandwidth::Fixed(_) => "fixed",
            Bandwidth::Adaptive(_) => "adaptive",
        }
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bandwidth::Fixed(h) => write!(f, "fixed({h})"),
            Bandwidth::Adaptive(k) => write!(f, "adaptive({k})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialWeightScheme {
    pub kernel: Kernel,
    pub bandwidth: Bandwidth,
}

impl SpatialWeightScheme {
    pub fn new(kernel: Kernel, bandwidth: Bandwidth) -> Self {
        Self { kernel, bandwidth }
    }

    pub fn fixed(kernel: Kernel, h: f64) -> Self {
        Self::new(kernel, Bandwidth::Fixed(h))
    }

    pub fn adaptive(kernel: Kernel, k: usize) -> Self {
        Self::new(kernel, Bandwidth::Adaptive(k))
    }

    /// Checks the bandwidth against a dataset of `n` observations.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self.bandwidth {
            Bandwidth::Fixed(h) => {
                if !(h > 0.0) || !h.is_finite() {
                    return Err(Error::InvalidBandwidth(format!(
                        "fixed bandwidth must be positive and finite, got {h}"
                    )));
                }
            }
            Bandwidth::Adaptive(k) => {
                if k == 0 {
                    return Err(Error::InvalidBandwidth(
                        "adaptive neighbor count must be at least 1".into(),
                    ));
                }
                if k + 1 > n {
                    return Err(Error::InvalidBandwidth(format!(
                        "adaptive neighbor count {k} exceeds the {} other observations",
                        n.saturating_sub(1)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Like [`validate`](Self::validate), additionally requiring enough
    /// neighbors to identify a local regression with `params` coefficients.
    pub fn validate_for_regression(&self, n: usize, params: usize) -> Result<()> {
        self.validate(n)?;
        if let Bandwidth::Adaptive(k) = self.bandwidth {
            if k < params + 1 {
                return Err(Error::InvalidBandwidth(format!(
                    "adaptive neighbor count {k} is below the minimum {} for {params} coefficients",
                    params + 1
                )));
            }
        }
        Ok(())
    }

    /// Kernel distance used for observation `target`.
    pub fn bandwidth_at(&self, target: usize, coords: &[Coordinates]) -> Result<f64> {
        self.validate(coords.len())?;
        let origin = coords[target];
        match self.bandwidth {
            Bandwidth::Fixed(h) => Ok(h),
            Bandwidth::Adaptive(k) => {
                let mut others: Vec<f64> = coords
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != target)
                    .map(|(_, &c)| pairwise_distance(origin, c))
                    .collect();
                // Only the k-th order statistic is needed; its value does not
                // depend on how ties are ordered.
                let (_, kth, _) = others.select_nth_unstable_by(k - 1, f64::total_cmp);
                let h = *kth;
                if !(h > 0.0) {
                    return Err(Error::InvalidBandwidth(format!(
                        "the {k} nearest neighbors of observation {target} coincide with it"
                    )));
                }
                Ok(h)
            }
        }
    }
}

/// Kernel weights of every observation for the local fit at observation `target`.
///
/// The target always receives weight 1.
pub fn weight_vector(
    target: usize,
    coords: &[Coordinates],
    scheme: &SpatialWeightScheme,
) -> Result<Vec<f64>> {
    if target >= coords.len() {
        return Err(Error::InvalidInput(format!(
            "target index {target} out of range for {} observations",
            coords.len()
        )));
    }
    let h = scheme.bandwidth_at(target, coords)?;
    let origin = coords[target];
    Ok(coords
        .iter()
        .map(|&c| scheme.kernel.at_ratio(pairwise_distance(origin, c) / h))
        .collect())
}

/// Kernel weights for an arbitrary location that need not be an observation.
/// In adaptive mode no observation is excluded from the neighbor count.
pub fn weight_vector_at_point(
    point: Coordinates,
    coords: &[Coordinates],
    scheme: &SpatialWeightScheme,
) -> Result<Vec<f64>> {
    let h = match scheme.bandwidth {
        Bandwidth::Fixed(h) => {
            scheme.validate(coords.len().max(1))?;
            h
        }
        Bandwidth::Adaptive(k) => {
            if k == 0 || k > coords.len() {
                return Err(Error::InvalidBandwidth(format!(
                    "adaptive neighbor count {k} not in [1, {}]",
                    coords.len()
                )));
            }
            let mut d: Vec<f64> = coords.iter().map(|&c| pairwise_distance(point, c)).collect();
            let (_, kth, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
            if !(*kth > 0.0) {
                return Err(Error::InvalidBandwidth(
                    "nearest neighbors coincide with the prediction point".into(),
                ));
            }
            *kth
        }
    };
    Ok(coords
        .iter()
        .map(|&c| scheme.kernel.at_ratio(pairwise_distance(point, c) / h))
        .collect())
}
