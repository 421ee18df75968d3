//! Weighted least squares on the √w-scaled design, and the smoother (hat)
//! matrix assembled from per-location fits.
//!
//! Each local fit is solved by a Householder QR factorization of `√W X`
//! restricted to the observations with positive weight. The normal matrix
//! `XᵀWX` is never formed. Besides the coefficients, a fit yields its
//! coefficient operator `C = (XᵀWX)⁻¹XᵀW` on the support, so refitting the
//! same location to a new response is a small matrix-vector product.

use ndarray::{Array1, Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{weight_vector, Coordinates, SpatialWeightScheme};

/// Default ceiling on the 1-norm condition estimate of the triangular factor.
pub const DEFAULT_CONDITION_THRESHOLD: f64 = 1e12;

/// Ridge added to the normal-matrix diagonal when jitter is enabled.
pub const DEFAULT_JITTER: f64 = 1e-8;

/// Regression design with a leading intercept column of ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix(Array2<f64>);

impl DesignMatrix {
    pub fn new(matrix: Array2<f64>) -> Result<Self> {
        if matrix.ncols() == 0 {
            return Err(Error::InvalidInput("design matrix has no columns".into()));
        }
        if matrix.column(0).iter().any(|&x| x != 1.0) {
            return Err(Error::InvalidInput(
                "first design column must be the intercept (all ones)".into(),
            ));
        }
        if let Some(((i, j), _)) = matrix.indexed_iter().find(|(_, x)| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite design entry at row {i}, column {j}"
            )));
        }
        Ok(Self(matrix))
    }

    /// Prepends the intercept column to `covariates`.
    pub fn from_covariates(covariates: ArrayView2<'_, f64>) -> Result<Self> {
        let (n, p) = covariates.dim();
        let mut m = Array2::ones((n, p + 1));
        m.slice_mut(ndarray::s![.., 1..]).assign(&covariates);
        Self::new(m)
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn n_obs(&self) -> usize {
        self.0.nrows()
    }

    /// Number of coefficients including the intercept.
    pub fn n_params(&self) -> usize {
        self.0.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Fits whose condition estimate exceeds this are rejected as singular.
    pub condition_threshold: f64,
    /// Optional ridge `ε` added to the diagonal of `XᵀWX`.
    pub jitter: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            condition_threshold: DEFAULT_CONDITION_THRESHOLD,
            jitter: None,
        }
    }
}

impl SolveOptions {
    pub fn with_jitter(mut self) -> Self {
        self.jitter = Some(DEFAULT_JITTER);
        self
    }
}

/// Result of one weighted least-squares fit evaluated at a target row.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSolution {
    pub beta: Array1<f64>,
    /// Row of the smoother: `fitted(target) = hat_row · y` for every `y`.
    pub hat_row: Array1<f64>,
    pub condition_estimate: f64,
}

/// Linear map from a response vector to the local coefficients at one target.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    target: usize,
    support: Vec<usize>,
    /// `n_params × support.len()`, row-major.
    coef_op: Vec<f64>,
    hat_row: Vec<f64>,
    condition: f64,
}

impl LocalOperator {
    pub fn target(&self) -> usize {
        self.target
    }

    /// Observations with strictly positive weight, in ascending order.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Smoother row entries aligned with [`support`](Self::support).
    pub fn hat_row(&self) -> &[f64] {
        &self.hat_row
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn n_params(&self) -> usize {
        self.coef_op.len() / self.support.len().max(1)
    }

    /// Local coefficients for response `y` (full length-N vector).
    pub fn beta_into(&self, y: &[f64], out: &mut [f64]) {
        let s = self.support.len();
        for (a, o) in out.iter_mut().enumerate() {
            let row = &self.coef_op[a * s..(a + 1) * s];
            *o = row
                .iter()
                .zip(&self.support)
                .map(|(c, &j)| c * y[j])
                .sum();
        }
    }

    pub fn beta(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_params()];
        self.beta_into(y, &mut out);
        out
    }

    /// Smoother row expanded to length `n`.
    pub fn dense_hat_row(&self, n: usize) -> Array1<f64> {
        let mut row = Array1::zeros(n);
        for (&j, &h) in self.support.iter().zip(&self.hat_row) {
            row[j] = h;
        }
        row
    }
}

/// Factorizes the weighted local system at `target`.
///
/// Rows with zero weight are dropped; their smoother entries are exactly zero.
pub fn local_operator(
    design: &DesignMatrix,
    weights: &[f64],
    target: usize,
    opts: &SolveOptions,
) -> Result<LocalOperator> {
    let x = design.matrix();
    let (n, c) = x.dim();
    if weights.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {n} observations",
            weights.len()
        )));
    }
    if target >= n {
        return Err(Error::InvalidInput(format!(
            "target row {target} out of range for {n} observations"
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "weights must be finite and nonnegative, got {w}"
        )));
    }
    let singular = |condition: f64| Error::SingularSystem {
        location: target,
        condition,
        stage: None,
    };

    let support: Vec<usize> = (0..n).filter(|&j| weights[j] > 0.0).collect();
    let s = support.len();
    let ridge = opts.jitter.filter(|&e| e > 0.0);
    let rows = s + if ridge.is_some() { c } else { 0 };
    if rows < c {
        return Err(singular(f64::INFINITY));
    }
    let sqrt_w: Vec<f64> = support.iter().map(|&j| weights[j].sqrt()).collect();

    // column-major copy of √W X, with √ε·I appended for the ridge
    let mut a = vec![0.0; rows * c];
    for k in 0..c {
        let col = &mut a[k * rows..(k + 1) * rows];
        for (r, (&j, &sw)) in support.iter().zip(&sqrt_w).enumerate() {
            col[r] = sw * x[[j, k]];
        }
        if let Some(eps) = ridge {
            col[s + k] = eps.sqrt();
        }
    }

    let reflectors = householder_in_place(&mut a, rows, c);
    let mut r = vec![0.0; c * c];
    for j in 0..c {
        for i in 0..=j {
            r[i * c + j] = a[j * rows + i];
        }
    }
    let r_inv = match upper_triangular_inverse(&r, c) {
        Some(inv) => inv,
        None => return Err(singular(f64::INFINITY)),
    };
    let condition = one_norm(&r, c) * one_norm(&r_inv, c);
    if !condition.is_finite() || condition > opts.condition_threshold {
        return Err(singular(condition));
    }

    // thin Q, column-major rows × c
    let mut q = vec![0.0; rows * c];
    for k in 0..c {
        q[k * rows + k] = 1.0;
    }
    for (k, (v, vnorm2)) in reflectors.iter().enumerate().rev() {
        if *vnorm2 == 0.0 {
            continue;
        }
        for col in 0..c {
            let qc = &mut q[col * rows + k..(col + 1) * rows];
            let dot: f64 = v.iter().zip(qc.iter()).map(|(a, b)| a * b).sum();
            let scale = 2.0 * dot / vnorm2;
            for (qi, vi) in qc.iter_mut().zip(v) {
                *qi -= scale * vi;
            }
        }
    }

    // C = R⁻¹ Qᵀ √W over the data rows
    let mut coef_op = vec![0.0; c * s];
    for aidx in 0..c {
        let out = &mut coef_op[aidx * s..(aidx + 1) * s];
        for b in aidx..c {
            let rib = r_inv[aidx * c + b];
            if rib == 0.0 {
                continue;
            }
            let qb = &q[b * rows..b * rows + s];
            for (o, qv) in out.iter_mut().zip(qb) {
                *o += rib * qv;
            }
        }
        for (o, sw) in out.iter_mut().zip(&sqrt_w) {
            *o *= sw;
        }
    }

    let xt = x.row(target);
    let mut hat_row = vec![0.0; s];
    for aidx in 0..c {
        let xa = xt[aidx];
        for (h, cv) in hat_row.iter_mut().zip(&coef_op[aidx * s..(aidx + 1) * s]) {
            *h += xa * cv;
        }
    }

    Ok(LocalOperator {
        target,
        support,
        coef_op,
        hat_row,
        condition,
    })
}

/// Weighted least squares `β = (XᵀWX)⁻¹XᵀWy` with the smoother row at `target`.
pub fn wls_solve(
    design: &DesignMatrix,
    y: &[f64],
    weights: &[f64],
    target: usize,
) -> Result<LocalSolution> {
    wls_solve_with(design, y, weights, target, &SolveOptions::default())
}

pub fn wls_solve_with(
    design: &DesignMatrix,
    y: &[f64],
    weights: &[f64],
    target: usize,
    opts: &SolveOptions,
) -> Result<LocalSolution> {
    if y.len() != design.n_obs() {
        return Err(Error::DimensionMismatch(format!(
            "response length {} for {} observations",
            y.len(),
            design.n_obs()
        )));
    }
    let op = local_operator(design, weights, target, opts)?;
    Ok(LocalSolution {
        beta: Array1::from(op.beta(y)),
        hat_row: op.dense_hat_row(design.n_obs()),
        condition_estimate: op.condition,
    })
}

/// Householder QR of a column-major `rows × cols` buffer. On return the upper
/// triangle holds R; the reflectors are returned with their squared norms.
fn householder_in_place(a: &mut [f64], rows: usize, cols: usize) -> Vec<(Vec<f64>, f64)> {
    let mut reflectors = Vec::with_capacity(cols);
    for k in 0..cols {
        let (head, tail) = a.split_at_mut((k + 1) * rows);
        let col = &mut head[k * rows..];
        let x = &col[k..];
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            reflectors.push((vec![0.0; rows - k], 0.0));
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        col[k] = alpha;
        for t in &mut col[k + 1..] {
            *t = 0.0;
        }
        if vnorm2 > 0.0 {
            for j in 0..cols - k - 1 {
                let cj = &mut tail[j * rows + k..(j + 1) * rows];
                let dot: f64 = v.iter().zip(cj.iter()).map(|(a, b)| a * b).sum();
                let scale = 2.0 * dot / vnorm2;
                for (cv, vi) in cj.iter_mut().zip(&v) {
                    *cv -= scale * vi;
                }
            }
        }
        reflectors.push((v, vnorm2));
    }
    reflectors
}

/// Inverse of a row-major upper-triangular matrix; `None` on a zero pivot.
fn upper_triangular_inverse(r: &[f64], c: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; c * c];
    for i in (0..c).rev() {
        let d = r[i * c + i];
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        inv[i * c + i] = 1.0 / d;
        for j in i + 1..c {
            let mut acc = 0.0;
            for k in i + 1..=j {
                acc += r[i * c + k] * inv[k * c + j];
            }
            inv[i * c + j] = -acc / d;
        }
    }
    Some(inv)
}

fn one_norm(m: &[f64], c: usize) -> f64 {
    (0..c)
        .map(|j| (0..c).map(|i| m[i * c + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Square smoother matrix stored by rows, keeping only structural nonzeros.
#[derive(Debug, Clone, PartialEq)]
pub struct HatMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl HatMatrix {
    pub fn from_operators(n: usize, operators: &[LocalOperator]) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let nnz = operators.iter().map(|op| op.support.len()).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for op in operators {
            cols.extend_from_slice(&op.support);
            vals.extend_from_slice(&op.hat_row);
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_dense(m: &Array2<f64>) -> Result<Self> {
        let (r, c) = m.dim();
        if r != c {
            return Err(Error::DimensionMismatch(format!(
                "hat matrix must be square, got {r}×{c}"
            )));
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for row in m.rows() {
            for (j, &h) in row.iter().enumerate() {
                if h != 0.0 {
                    cols.push(j);
                    vals.push(h);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            n: r,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &h) in c.iter().zip(v) {
                m[[i, j]] = h;
            }
        }
        m
    }

    pub fn diagonal(&self) -> Array1<f64> {
        Array1::from_iter((0..self.n).map(|i| {
            let (c, v) = self.row(i);
            c.iter().position(|&j| j == i).map_or(0.0, |p| v[p])
        }))
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().sum()
    }

    pub fn mul_vec(&self, y: &[f64]) -> Array1<f64> {
        Array1::from_iter((0..self.n).map(|i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(|(&j, &h)| h * y[j]).sum::<f64>()
        }))
    }

    /// `H · G` for a dense square `G`.
    pub fn mul_dense(&self, g: &Array2<f64>) -> Array2<f64> {
        let n = self.n;
        assert_eq!(g.dim(), (n, n), "dense operand must be {n}×{n}");
        let g = g.as_standard_layout();
        let gs = g.as_slice().expect("standard layout");
        let mut out = Array2::<f64>::zeros((n, n));
        out.as_slice_mut()
            .expect("fresh array is contiguous")
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, orow)| {
                let (c, v) = self.row(i);
                for (&j, &h) in c.iter().zip(v) {
                    let grow = &gs[j * n..(j + 1) * n];
                    for (o, gv) in orow.iter_mut().zip(grow) {
                        *o += h * gv;
                    }
                }
            });
        out
    }

    /// `tr(H · G)` without forming the product.
    pub fn trace_of_product(&self, g: &Array2<f64>) -> f64 {
        (0..self.n)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, &h)| h * g[[j, i]]).sum::<f64>()
            })
            .sum()
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// The per-location weighted fits of one design under one weighting scheme.
#[derive(Debug, Clone)]
pub struct LocalSmoother {
    n_obs: usize,
    n_params: usize,
    operators: Vec<LocalOperator>,
}

impl LocalSmoother {
    /// Factorizes the local system at every observation. Fails with the
    /// lowest-indexed singular location.
    pub fn build(
        design: &DesignMatrix,
        coords: &[Coordinates],
        scheme: &SpatialWeightScheme,
        opts: &SolveOptions,
    ) -> Result<Self> {
        let n = design.n_obs();
        if coords.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for {n} observations",
                coords.len()
            )));
        }
        scheme.validate(n)?;
        let results: Vec<Result<LocalOperator>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let w = weight_vector(i, coords, scheme)?;
                local_operator(design, &w, i, opts)
            })
            .collect();
        let operators = results.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_obs: n,
            n_params: design.n_params(),
            operators,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn operators(&self) -> &[LocalOperator] {
        &self.operators
    }

    /// Local coefficients at every location for response `y`.
    pub fn coefficients(&self, y: &[f64]) -> crate::dataset::CoefficientField {
        let mut field = Array2::zeros((self.n_obs, self.n_params));
        field
            .as_slice_mut()
            .expect("fresh array is contiguous")
            .par_chunks_mut(self.n_params)
            .zip(self.operators.par_iter())
            .for_each(|(row, op)| op.beta_into(y, row));
        crate::dataset::CoefficientField::new(field)
    }

    pub fn hat_matrix(&self) -> HatMatrix {
        HatMatrix::from_operators(self.n_obs, &self.operators)
    }

    pub fn hat_trace(&self) -> f64 {
        self.operators
            .iter()
            .map(|op| {
                op.support
                    .iter()
                    .position(|&j| j == op.target)
                    .map_or(0.0, |p| op.hat_row[p])
            })
            .sum()
    }

    pub fn max_condition(&self) -> f64 {
        self.operators.iter().map(|op| op.condition).fold(0.0, f64::max)
    }
}

/// Smoother matrix of the geographically weighted fits: row `i` is the hat row
/// of the local fit at observation `i`.
pub fn global_hat_matrix(
    design: &DesignMatrix,
    coords: &[Coordinates],
    scheme: &SpatialWeightScheme,
) -> Result<HatMatrix> {
    Ok(LocalSmoother::build(design, coords, scheme, &SolveOptions::default())?.hat_matrix())
}
