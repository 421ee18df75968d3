use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::Coordinates;
use crate::linalg::DesignMatrix;

/// Located observations: coordinates, an intercept-augmented design matrix
/// and a response vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    ids: Vec<String>,
    coords: Vec<Coordinates>,
    design: DesignMatrix,
    response: Array1<f64>,
    covariate_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from raw covariates (`n × p`, no intercept column).
    /// Ids default to the row index when `ids` is `None`.
    pub fn new(
        ids: Option<Vec<String>>,
        coords: Vec<Coordinates>,
        covariates: Array2<f64>,
        response: Array1<f64>,
        covariate_names: Vec<String>,
    ) -> Result<Self> {
        let n = coords.len();
        if n == 0 {
            return Err(Error::InvalidInput("dataset has no observations".into()));
        }
        if covariates.nrows() != n || response.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} coordinates, {} covariate rows, {} responses",
                covariates.nrows(),
                response.len()
            )));
        }
        if covariate_names.len() != covariates.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} covariate names for {} covariate columns",
                covariate_names.len(),
                covariates.ncols()
            )));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coordinates at row {i}")));
        }
        if let Some(i) = response.iter().position(|y| !y.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite response at row {i}")));
        }
        let ids = match ids {
            Some(ids) => {
                if ids.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "{} ids for {n} observations",
                        ids.len()
                    )));
                }
                ids
            }
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        let design = DesignMatrix::from_covariates(covariates.view())?;
        Ok(Self {
            ids,
            coords,
            design,
            response,
            covariate_names,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Number of covariates, excluding the intercept.
    pub fn n_covariates(&self) -> usize {
        self.covariate_names.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn coords(&self) -> &[Coordinates] {
        &self.coords
    }

    pub fn design(&self) -> &DesignMatrix {
        &self.design
    }

    pub fn response(&self) -> &Array1<f64> {
        &self.response
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    /// Covariate columns without the intercept.
    pub fn covariates(&self) -> Array2<f64> {
        self.design.matrix().slice(ndarray::s![.., 1..]).to_owned()
    }

    /// Coefficient labels, intercept first.
    pub fn coefficient_names(&self) -> Vec<String> {
        std::iter::once("intercept".to_string())
            .chain(self.covariate_names.iter().cloned())
            .collect()
    }

    /// Copy of this dataset with a different response vector.
    pub fn with_response(&self, response: Array1<f64>) -> Result<Self> {
        if response.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "replacement response has length {}, expected {}",
                response.len(),
                self.len()
            )));
        }
        Ok(Self {
            response,
            ..self.clone()
        })
    }

    /// Copy of this dataset with different covariates (same names).
    pub fn with_covariates(&self, covariates: Array2<f64>) -> Result<Self> {
        Self::new(
            Some(self.ids.clone()),
            self.coords.clone(),
            covariates,
            self.response.clone(),
            self.covariate_names.clone(),
        )
    }

    /// SHA-256 over the exact bit patterns of coordinates, covariates and
    /// response. Used to detect diagnostics files produced from different data.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.len() as u64).to_le_bytes());
        hasher.update((self.n_covariates() as u64).to_le_bytes());
        for c in &self.coords {
            hasher.update(c.u.to_le_bytes());
            hasher.update(c.v.to_le_bytes());
        }
        for x in self.design.matrix().iter() {
            hasher.update(x.to_le_bytes());
        }
        for y in &self.response {
            hasher.update(y.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Local coefficient estimates: one row per observation, intercept first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField(Array2<f64>);

impl CoefficientField {
    pub fn new(values: Array2<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n_obs: usize, n_params: usize) -> Self {
        Self(Array2::zeros((n_obs, n_params)))
    }

    /// Field whose every row equals `beta`.
    pub fn constant(n_obs: usize, beta: ArrayView1<'_, f64>) -> Self {
        let mut values = Array2::zeros((n_obs, beta.len()));
        for mut row in values.rows_mut() {
            row.assign(&beta);
        }
        Self(values)
    }

    pub fn n_obs(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_params(&self) -> usize {
        self.0.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.0.row(i)
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.0.column(j)
    }

    /// Adds `other` elementwise.
    pub fn accumulate(&mut self, other: &CoefficientField) -> Result<()> {
        self.check_same_shape(other)?;
        self.0 += &other.0;
        Ok(())
    }

    /// Evaluates each location's linear model at its own covariates.
    pub fn fitted(&self, design: &DesignMatrix) -> Result<Array1<f64>> {
        let x = design.matrix();
        if x.dim() != self.0.dim() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient field {:?} vs design {:?}",
                self.0.dim(),
                x.dim()
            )));
        }
        Ok((&self.0 * x).sum_axis(Axis(1)))
    }

    pub(crate) fn check_same_shape(&self, other: &CoefficientField) -> Result<()> {
        if self.0.dim() != other.0.dim() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient fields {:?} and {:?}",
                self.0.dim(),
                other.0.dim()
            )));
        }
        Ok(())
    }
}
