//! CSV ingestion, z-score standardization and result serialization.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`, so every writer is byte-for-byte deterministic and lossless.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::dataset::{CoefficientField, Dataset};
use crate::error::{Error, Result};
use crate::geometry::Coordinates;
use crate::result::FitResult;

/// Formats a float so that parsing the text yields exactly the same value.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Column mapping of an input CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSchema {
    /// Identifier column; row numbers are used when absent.
    pub id: Option<String>,
    pub u: String,
    pub v: String,
    pub response: String,
    pub covariates: Vec<String>,
}

impl DatasetSchema {
    pub fn validate(&self) -> Result<()> {
        if self.covariates.is_empty() {
            return Err(Error::Schema("at least one covariate column is required".into()));
        }
        let mut seen = HashSet::new();
        let all = self
            .id
            .iter()
            .chain([&self.u, &self.v, &self.response])
            .chain(self.covariates.iter());
        for name in all {
            if name.is_empty() {
                return Err(Error::Schema("empty column name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("column '{name}' is named more than once")));
            }
        }
        Ok(())
    }
}

/// Reads a dataset. Row numbers in errors count data rows from 1.
pub fn load_csv(path: impl AsRef<Path>, schema: &DatasetSchema) -> Result<Dataset> {
    let path = path.as_ref();
    schema.validate()?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("missing column '{name}'")))
    };
    let id_col = schema.id.as_deref().map(column).transpose()?;
    let (u_col, v_col, y_col) = (column(&schema.u)?, column(&schema.v)?, column(&schema.response)?);
    let x_cols = schema
        .covariates
        .iter()
        .map(|c| column(c))
        .collect::<Result<Vec<_>>>()?;

    let mut ids = Vec::new();
    let mut coords = Vec::new();
    let mut y = Vec::new();
    let mut x = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let cell = |col: usize, name: &str| -> Result<f64> {
            let raw = record.get(col).unwrap_or("").trim();
            let parse_err = |message: String| Error::Parse {
                row,
                column: name.to_string(),
                message,
            };
            if raw.is_empty() {
                return Err(parse_err("missing value".into()));
            }
            let v: f64 = raw.parse().map_err(|_| parse_err(format!("cannot parse '{raw}' as a number")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("non-finite value '{raw}'")));
            }
            Ok(v)
        };
        if let (Some(col), Some(name)) = (id_col, &schema.id) {
            let id = record.get(col).unwrap_or("").trim().to_string();
            if id.is_empty() {
                return Err(Error::Parse {
                    row,
                    column: name.clone(),
                    message: "missing id".into(),
                });
            }
            if !seen.insert(id.clone()) {
                return Err(Error::InvalidInput(format!("duplicate id '{id}' at row {row}")));
            }
            ids.push(id);
        }
        coords.push(Coordinates::new(cell(u_col, &schema.u)?, cell(v_col, &schema.v)?));
        y.push(cell(y_col, &schema.response)?);
        for (&c, name) in x_cols.iter().zip(&schema.covariates) {
            x.push(cell(c, name)?);
        }
    }
    let n = coords.len();
    if n == 0 {
        return Err(Error::InvalidInput(format!("{} has no data rows", path.display())));
    }
    let covariates = Array2::from_shape_vec((n, x_cols.len()), x).expect("row-major fill");
    Dataset::new(
        id_col.map(|_| ids),
        coords,
        covariates,
        Array1::from(y),
        schema.covariates.clone(),
    )
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file)))
}

/// Writes `id,u,v,<response>,<covariates...>` plus any extra columns.
pub fn write_dataset_csv(
    path: impl AsRef<Path>,
    data: &Dataset,
    response_name: &str,
    extra: &[(String, Vec<f64>)],
) -> Result<()> {
    let path = path.as_ref();
    let n = data.len();
    if let Some((name, _)) = extra.iter().find(|(_, v)| v.len() != n) {
        return Err(Error::DimensionMismatch(format!("extra column '{name}' has wrong length")));
    }
    let mut w = csv_writer(path)?;
    let mut header = vec!["id".to_string(), "u".into(), "v".into(), response_name.to_string()];
    header.extend(data.covariate_names().iter().cloned());
    header.extend(extra.iter().map(|(name, _)| name.clone()));
    w.write_record(&header)?;
    let x = data.design().matrix();
    for i in 0..n {
        let c = data.coords()[i];
        let mut rec = vec![data.ids()[i].clone(), fmt_f64(c.u), fmt_f64(c.v), fmt_f64(data.response()[i])];
        rec.extend((1..x.ncols()).map(|j| fmt_f64(x[[i, j]])));
        rec.extend(extra.iter().map(|(_, v)| fmt_f64(v[i])));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Mean and population standard deviation of one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
}

impl ColumnScale {
    fn of(name: &str, values: impl Iterator<Item = f64> + Clone) -> Result<Self> {
        let n = values.clone().count() as f64;
        let mean = values.clone().sum::<f64>() / n;
        let sd = (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        if !(sd > 0.0) || sd <= 1e-14 * mean.abs() {
            return Err(Error::ZeroVariance(format!("column '{name}' is constant")));
        }
        Ok(Self {
            name: name.to_string(),
            mean,
            sd,
        })
    }
}

/// Scales used by [`zscore`], kept so results can be mapped back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationRecord {
    pub covariates: Vec<ColumnScale>,
    pub response: Option<ColumnScale>,
    /// Standard deviations use divisor `n`.
    pub divisor: String,
}

/// Standardizes every covariate and the response to mean 0 and sd 1.
pub fn zscore(data: &Dataset) -> Result<(Dataset, StandardizationRecord)> {
    let x = data.covariates();
    let mut out = x.clone();
    let mut scales = Vec::with_capacity(x.ncols());
    for (j, name) in data.covariate_names().iter().enumerate() {
        let s = ColumnScale::of(name, x.column(j).iter().copied())?;
        out.column_mut(j).mapv_inplace(|v| (v - s.mean) / s.sd);
        scales.push(s);
    }
    let ys = ColumnScale::of("response", data.response().iter().copied())?;
    let y = data.response().mapv(|v| (v - ys.mean) / ys.sd);
    let standardized = data.with_covariates(out)?.with_response(y)?;
    Ok((
        standardized,
        StandardizationRecord {
            covariates: scales,
            response: Some(ys),
            divisor: "n".into(),
        },
    ))
}

impl StandardizationRecord {
    /// Inverse of [`zscore`].
    pub fn restore(&self, data: &Dataset) -> Result<Dataset> {
        if data.n_covariates() != self.covariates.len() {
            return Err(Error::DimensionMismatch(format!(
                "record has {} covariates, dataset has {}",
                self.covariates.len(),
                data.n_covariates()
            )));
        }
        let mut x = data.covariates();
        for (j, s) in self.covariates.iter().enumerate() {
            x.column_mut(j).mapv_inplace(|v| v * s.sd + s.mean);
        }
        let y = match &self.response {
            Some(s) => data.response().mapv(|v| v * s.sd + s.mean),
            None => data.response().clone(),
        };
        data.with_covariates(x)?.with_response(y)
    }

    /// Maps standardized coefficients to original units: slopes scale by
    /// `sd_y / sd_x`, and the intercept absorbs the means.
    pub fn coefficients_to_original(&self, field: &CoefficientField) -> Result<CoefficientField> {
        if field.n_params() != self.covariates.len() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "field has {} parameters, record expects {}",
                field.n_params(),
                self.covariates.len() + 1
            )));
        }
        let (my, sy) = self.response.as_ref().map_or((0.0, 1.0), |s| (s.mean, s.sd));
        let mut out = field.values().clone();
        for mut row in out.rows_mut() {
            let mut intercept = my + sy * row[0];
            for (j, s) in self.covariates.iter().enumerate() {
                let slope = row[j + 1] * sy / s.sd;
                intercept -= slope * s.mean;
                row[j + 1] = slope;
            }
            row[0] = intercept;
        }
        Ok(CoefficientField::new(out))
    }

    /// Maps standardized fitted values or residuals back to response units.
    /// Residuals only scale; fitted values also shift by the mean.
    pub fn response_to_original(&self, values: &Array1<f64>, shift: bool) -> Array1<f64> {
        match &self.response {
            Some(s) => values.mapv(|v| v * s.sd + if shift { s.mean } else { 0.0 }),
            None => values.clone(),
        }
    }
}

/// Writes one row per observation: `id,u,v,<coefficients>,fitted,residual`.
pub fn write_coefficients(
    path: impl AsRef<Path>,
    data: &Dataset,
    coefficients: &CoefficientField,
    fitted: &Array1<f64>,
    residuals: &Array1<f64>,
) -> Result<()> {
    let path = path.as_ref();
    let names = data.coefficient_names();
    if coefficients.n_params() != names.len() || coefficients.n_obs() != data.len() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient field {}×{} for {} observations and {} coefficients",
            coefficients.n_obs(),
            coefficients.n_params(),
            data.len(),
            names.len()
        )));
    }
    let mut w = csv_writer(path)?;
    let mut header = vec!["id".to_string(), "u".into(), "v".into()];
    header.extend(names);
    header.extend(["fitted".to_string(), "residual".into()]);
    w.write_record(&header)?;
    for i in 0..data.len() {
        let c = data.coords()[i];
        let mut rec = vec![data.ids()[i].clone(), fmt_f64(c.u), fmt_f64(c.v)];
        rec.extend(coefficients.row(i).iter().map(|&b| fmt_f64(b)));
        rec.push(fmt_f64(fitted[i]));
        rec.push(fmt_f64(residuals[i]));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Contents of a coefficients file.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub ids: Vec<String>,
    pub coords: Vec<Coordinates>,
    pub names: Vec<String>,
    pub coefficients: CoefficientField,
    pub fitted: Array1<f64>,
    pub residuals: Array1<f64>,
}

pub fn read_coefficients(path: impl AsRef<Path>) -> Result<CoefficientTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.len() < 6 || headers[..3] != ["id", "u", "v"] || headers[headers.len() - 2..] != ["fitted", "residual"] {
        return Err(Error::Schema(format!(
            "{} is not a coefficients file",
            path.display()
        )));
    }
    let names = headers[3..headers.len() - 2].to_vec();
    let (mut ids, mut coords, mut vals, mut fitted, mut resid) = (vec![], vec![], vec![], vec![], vec![]);
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let num = |c: usize| -> Result<f64> {
            rec.get(c).unwrap_or("").trim().parse().map_err(|_| Error::Parse {
                row: i + 1,
                column: headers[c].clone(),
                message: "not a number".into(),
            })
        };
        ids.push(rec.get(0).unwrap_or("").to_string());
        coords.push(Coordinates::new(num(1)?, num(2)?));
        for c in 3..headers.len() - 2 {
            vals.push(num(c)?);
        }
        fitted.push(num(headers.len() - 2)?);
        resid.push(num(headers.len() - 1)?);
    }
    let n = ids.len();
    Ok(CoefficientTable {
        ids,
        coords,
        coefficients: CoefficientField::new(
            Array2::from_shape_vec((n, names.len()), vals).expect("row-major fill"),
        ),
        names,
        fitted: Array1::from(fitted),
        residuals: Array1::from(resid),
    })
}

/// Per-coefficient descriptive statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSummary {
    pub name: String,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Sample standard deviation (divisor `n − 1`).
    pub std: f64,
}

pub fn coefficient_summary(field: &CoefficientField, names: &[String]) -> Result<Vec<CoefficientSummary>> {
    if names.len() != field.n_params() {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {} coefficients",
            names.len(),
            field.n_params()
        )));
    }
    Ok(names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let col = field.column(j);
            let n = col.len() as f64;
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
            CoefficientSummary {
                name: name.clone(),
                mean,
                min: col.iter().copied().fold(f64::INFINITY, f64::min),
                max: col.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                std: var.sqrt(),
            }
        })
        .collect())
}

/// Writes the summary as `variable,Mean,Min,Max,Std`.
pub fn write_summary_csv(path: impl AsRef<Path>, rows: &[CoefficientSummary]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    w.write_record(["variable", "Mean", "Min", "Max", "Std"])?;
    for r in rows {
        w.write_record([r.name.clone(), fmt_f64(r.mean), fmt_f64(r.min), fmt_f64(r.max), fmt_f64(r.std)])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Flat diagnostics record plus the settings that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub model: String,
    pub dataset_hash: String,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    pub config: serde_json::Value,
}

impl DiagnosticsRecord {
    pub fn from_fit(data: &Dataset, fit: &FitResult, config: serde_json::Value) -> Self {
        let mut metrics: BTreeMap<String, f64> = fit
            .diagnostics
            .metric_map()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        metrics.insert("n".into(), fit.diagnostics.n as f64);
        Self {
            model: fit.model.to_string(),
            dataset_hash: data.content_hash(),
            metrics,
            flags: fit.diagnostics.flags.clone(),
            config,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_diagnostics(path: impl AsRef<Path>, record: &DiagnosticsRecord) -> Result<()> {
    write_json(path, record)
}

pub fn read_diagnostics(path: impl AsRef<Path>) -> Result<DiagnosticsRecord> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes any serializable rows as CSV with a header.
pub fn write_rows<I, R>(path: impl AsRef<Path>, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use std::fs;

    fn schema() -> DatasetSchema {
        DatasetSchema {
            id: Some("id".into()),
            u: "x".into(),
            v: "y".into(),
            response: "z".into(),
            covariates: vec!["a".into(), "b".into()],
        }
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.0, -2.5, 0.1 + 0.2, 1e-7, -3.3e-300, 6.02e23, 1e16, 12345.678, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(1e-7), "1e-7");
        assert_eq!(fmt_f64(0.5), "0.5");
    }

    #[test]
    fn loads_well_formed_file_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        fs::write(&p, "id,x,y,z,a,b\nr1,0,0,1.5,1,2\nr2,1,0,2.5,3,1\nr3,0,1,0.5,2,2\n").unwrap();
        let d = load_csv(&p, &schema()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.ids(), ["r1", "r2", "r3"]);
        assert_eq!(d.response(), &array![1.5, 2.5, 0.5]);
        assert_eq!(d.covariates(), array![[1.0, 2.0], [3.0, 1.0], [2.0, 2.0]]);
    }

    #[test]
    fn load_errors_name_the_problem() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        fs::write(&p, "id,x,y,a,b\nr1,0,0,1,2\n").unwrap();
        match load_csv(&p, &schema()) {
            Err(Error::Schema(m)) => assert!(m.contains("'z'")),
            other => panic!("{other:?}"),
        }
        fs::write(&p, "id,x,y,z,a,b\nr1,0,0,1,2,2\nr2,1,0,oops,1,1\n").unwrap();
        match load_csv(&p, &schema()) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column.as_str()), (2, "z")),
            other => panic!("{other:?}"),
        }
        fs::write(&p, "id,x,y,z,a,b\nr1,0,0,1,2,2\nr2,1,0,,1,1\n").unwrap();
        assert!(matches!(load_csv(&p, &schema()), Err(Error::Parse { row: 2, .. })));
        fs::write(&p, "id,x,y,z,a,b\nr1,0,0,1,2,2\nr2,1,0,NaN,1,1\n").unwrap();
        assert!(matches!(load_csv(&p, &schema()), Err(Error::Parse { row: 2, .. })));
        fs::write(&p, "id,x,y,z,a,b\nr1,0,0,1,2,2\nr1,1,0,3,1,1\n").unwrap();
        assert!(matches!(load_csv(&p, &schema()), Err(Error::InvalidInput(_))));
        let mut dup = schema();
        dup.covariates.push("a".into());
        assert!(matches!(dup.validate(), Err(Error::Schema(_))));
    }

    fn sample() -> Dataset {
        Dataset::new(
            Some(vec!["a".into(), "b".into(), "c".into(), "d".into()]),
            vec![
                Coordinates::new(0.0, 0.0),
                Coordinates::new(1.5, 0.25),
                Coordinates::new(-2.0, 1.0 / 3.0),
                Coordinates::new(7.0, 1e-9),
            ],
            array![[1.0, 10.0], [2.0, 0.1], [3.0, -4.0], [4.5, 2.0 / 7.0]],
            array![0.3, -1.2, 2.2, 9.9],
            vec!["p".into(), "q".into()],
        )
        .unwrap()
    }

    #[test]
    fn dataset_write_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        let d = sample();
        write_dataset_csv(&p, &d, "y", &[]).unwrap();
        let s = DatasetSchema {
            id: Some("id".into()),
            u: "u".into(),
            v: "v".into(),
            response: "y".into(),
            covariates: vec!["p".into(), "q".into()],
        };
        assert_eq!(load_csv(&p, &s).unwrap(), d);
    }

    #[test]
    fn zscore_examples() {
        let d = Dataset::new(
            None,
            vec![Coordinates::new(0.0, 0.0), Coordinates::new(1.0, 0.0), Coordinates::new(2.0, 0.0)],
            array![[1.0], [2.0], [3.0]],
            array![4.0, 0.0, 5.0],
            vec!["x".into()],
        )
        .unwrap();
        let (z, rec) = zscore(&d).unwrap();
        let col = z.covariates();
        assert_abs_diff_eq!(col[[0, 0]], -1.224_744_871_391_589, epsilon = 1e-12);
        assert_abs_diff_eq!(col[[1, 0]], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(col[[2, 0]], 1.224_744_871_391_589, epsilon = 1e-12);
        assert_abs_diff_eq!(rec.covariates[0].sd, 0.816_496_580_927_726, epsilon = 1e-12);
        // idempotent on standardized input
        let (zz, _) = zscore(&z).unwrap();
        for (a, b) in zz.covariates().iter().zip(z.covariates().iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let constant = d.with_covariates(array![[1.0], [1.0], [1.0]]).unwrap();
        match zscore(&constant) {
            Err(Error::ZeroVariance(m)) => assert!(m.contains("'x'")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coefficient_back_transform_preserves_predictions() {
        let d = sample();
        let (z, rec) = zscore(&d).unwrap();
        let field = CoefficientField::new(array![[0.1, 0.5, -0.2], [0.0, 1.0, 0.3], [0.2, -0.4, 0.1], [-0.1, 0.2, 0.2]]);
        let fz = field.fitted(z.design()).unwrap();
        let orig = rec.coefficients_to_original(&field).unwrap();
        let fo = orig.fitted(d.design()).unwrap();
        let back = rec.response_to_original(&fz, true);
        for (a, b) in fo.iter().zip(back.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn coefficients_round_trip_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        let d = sample();
        let field = CoefficientField::new(array![[0.1, 0.5, -0.2], [1e-12, 1.0, 0.3], [0.2, -0.4, 1.0 / 3.0], [-0.1, 2e20, 0.2]]);
        let fitted = field.fitted(d.design()).unwrap();
        let resid = d.response() - &fitted;
        write_coefficients(&p, &d, &field, &fitted, &resid).unwrap();
        let t = read_coefficients(&p).unwrap();
        assert_eq!(t.coefficients, field);
        assert_eq!(t.fitted, fitted);
        assert_eq!(t.residuals, resid);
        assert_eq!(t.names, ["intercept", "p", "q"]);
        assert_eq!(t.coords, d.coords());
        let s = coefficient_summary(&t.coefficients, &t.names).unwrap();
        assert_eq!(s[2].max, 1.0 / 3.0);
        assert_eq!(s[0].min, -0.1);
        assert_abs_diff_eq!(s[2].mean, (0.1 + 1.0 / 3.0 + 0.2) / 4.0, epsilon = 1e-15);
        let out = dir.path().join("s.csv");
        write_summary_csv(&out, &s).unwrap();
        let text = fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("variable,Mean,Min,Max,Std\nintercept,"));
    }
}
