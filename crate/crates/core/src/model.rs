//! Data ingestion, standardization and the SVD canonical form.
//!
//! Every downstream computation works in "correlation form": `y` and each
//! column of `X` are centered and rescaled to unit sample variance (divisor
//! `n − 1`). The thin SVD `X = H · Λ^{1/2} · G'` then places the regression
//! in canonical coordinates where the OLS fit separates into `p`
//! uncorrelated components `c = Λ^{-1/2} H' y`.

use std::io::Read;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

/// Minimum number of observations accepted by [`standardize`].
pub const MIN_OBSERVATIONS: usize = 5;
/// Singular values below this fraction of the largest one mark `X` as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-9;
/// `1 − R²` at or below this is treated as an exact fit.
pub const EXACT_FIT_TOLERANCE: f64 = 1e-12;

/// A table of labelled numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Table {
    /// Builds a table from named columns of equal length.
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Dimension {
                expected: names.len(),
                got: columns.len(),
            });
        }
        if let Some(first) = columns.first() {
            for col in &columns {
                if col.len() != first.len() {
                    return Err(Error::Dimension {
                        expected: first.len(),
                        got: col.len(),
                    });
                }
            }
        }
        Ok(Table { names, columns })
    }

    /// Parses a header row plus comma-separated numeric rows.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let mut columns = vec![Vec::new(); names.len()];
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            for (k, field) in record.iter().enumerate() {
                let value = field.parse::<f64>().ok().filter(|v| v.is_finite());
                match value {
                    Some(v) => columns[k].push(v),
                    None => {
                        return Err(Error::NonNumeric {
                            column: names[k].clone(),
                            row: row + 1,
                            value: field.to_owned(),
                        })
                    }
                }
            }
        }
        Table::new(names, columns)
    }

    pub fn from_csv_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.columns[k].as_slice())
            .ok_or_else(|| Error::UnknownColumn(name.to_owned()))
    }
}

/// Centered, unit-variance response and predictors plus what is needed to
/// map coefficients back to original units.
#[derive(Debug, Clone)]
pub struct StandardizedModel {
    pub n: usize,
    pub p: usize,
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    pub y_mean: f64,
    pub y_scale: f64,
    pub x_means: Vec<f64>,
    pub x_scales: Vec<f64>,
    pub y_name: String,
    pub x_names: Vec<String>,
    /// Original-unit predictor columns, kept for scatter plots.
    pub x_raw: DMatrix<f64>,
    pub y_raw: DVector<f64>,
}

fn mean_and_scale(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

/// Centers and rescales `y` and the named `x` columns (sample variance with divisor `n − 1`).
pub fn standardize(table: &Table, y_name: &str, x_names: &[&str]) -> Result<StandardizedModel> {
    let y_raw = table.column(y_name)?;
    let x_cols: Vec<&[f64]> = x_names
        .iter()
        .map(|name| table.column(name))
        .collect::<Result<_>>()?;
    let n = y_raw.len();
    let p = x_names.len();
    if p == 0 {
        return Err(Error::InvalidArgument(
            "at least one predictor column is required".into(),
        ));
    }
    if n < MIN_OBSERVATIONS {
        return Err(Error::TooFewObservations {
            required: MIN_OBSERVATIONS,
            got: n,
        });
    }
    if n <= p {
        return Err(Error::FatData { n, p });
    }
    if is_constant(y_raw) {
        return Err(Error::ZeroVariance(y_name.to_owned()));
    }
    for (name, col) in x_names.iter().zip(&x_cols) {
        if is_constant(col) {
            return Err(Error::ZeroVariance((*name).to_owned()));
        }
    }

    let (y_mean, y_scale) = mean_and_scale(y_raw);
    let y = DVector::from_iterator(n, y_raw.iter().map(|v| (v - y_mean) / y_scale));
    let mut x = DMatrix::zeros(n, p);
    let mut x_raw = DMatrix::zeros(n, p);
    let mut x_means = Vec::with_capacity(p);
    let mut x_scales = Vec::with_capacity(p);
    for (j, col) in x_cols.iter().enumerate() {
        let (m, s) = mean_and_scale(col);
        for (i, v) in col.iter().enumerate() {
            x[(i, j)] = (v - m) / s;
            x_raw[(i, j)] = *v;
        }
        x_means.push(m);
        x_scales.push(s);
    }
    Ok(StandardizedModel {
        n,
        p,
        y,
        x,
        y_mean,
        y_scale,
        x_means,
        x_scales,
        y_name: y_name.to_owned(),
        x_names: x_names.iter().map(|s| (*s).to_owned()).collect(),
        x_raw,
        y_raw: DVector::from_column_slice(y_raw),
    })
}

impl StandardizedModel {
    /// Predictions in original units for original-unit coefficients.
    pub fn predict_original(&self, beta: &[f64], intercept: f64) -> DVector<f64> {
        let b = DVector::from_column_slice(beta);
        (&self.x_raw * b).add_scalar(intercept)
    }
}

/// Canonical (SVD) form of a standardized regression.
#[derive(Debug, Clone, Serialize)]
pub struct CanonicalForm {
    pub n: usize,
    pub p: usize,
    /// Eigenvalues of `X'X`, descending.
    pub lambda: Vec<f64>,
    /// `p × p` rotation; column `j` is the principal axis for `lambda[j]`.
    #[serde(skip)]
    pub g: DMatrix<f64>,
    /// `n × p` semi-orthogonal basis of the column space of `X`.
    #[serde(skip)]
    pub h: DMatrix<f64>,
    /// Uncorrelated components of the OLS solution.
    pub c: Vec<f64>,
    /// Principal correlations between `y` and the columns of `H`.
    pub rho: Vec<f64>,
    pub r2: f64,
    pub yty: f64,
    pub rss: f64,
    pub sigma2_ml: f64,
    /// `rss / (n − p − 1)`; NaN when there are no residual degrees of freedom.
    pub sigma2_unb: f64,
    pub f_ratios: Vec<f64>,
    pub beta_ols: Vec<f64>,
    /// Set when `1 − R²` is at or below [`EXACT_FIT_TOLERANCE`].
    pub exact_fit: bool,
}

/// Computes the canonical form of a standardized model.
pub fn canonicalize(model: &StandardizedModel) -> Result<CanonicalForm> {
    let (n, p) = (model.n, model.p);
    let svd = linalg::thin_svd(&model.x)?;
    let s = &svd.singular_values;
    let s_max = s[0];
    let deficient = s
        .iter()
        .filter(|&&v| v.is_nan() || v <= RANK_TOLERANCE * s_max)
        .count();
    if deficient > 0 {
        return Err(Error::RankDeficient { deficient, p });
    }

    let h = svd.u;
    let g = svd.v;
    let lambda: Vec<f64> = s.iter().map(|v| v * v).collect();
    let hty = h.transpose() * &model.y;
    let c: Vec<f64> = (0..p).map(|j| hty[j] / s[j]).collect();
    let yty = model.y.norm_squared();
    let rho: Vec<f64> = hty.iter().map(|v| v / yty.sqrt()).collect();
    let r2 = rho.iter().map(|r| r * r).sum::<f64>().min(1.0);
    let one_minus = 1.0 - r2;
    let exact_fit = one_minus <= EXACT_FIT_TOLERANCE;
    let rss = (yty * one_minus).max(0.0);
    let dof = n as f64 - p as f64 - 1.0;
    let sigma2_unb = if dof > 0.0 { rss / dof } else { f64::NAN };
    let f_ratios = rho.iter().map(|r| dof * r * r / one_minus).collect();
    let beta_ols = (&g * DVector::from_column_slice(&c)).as_slice().to_vec();

    Ok(CanonicalForm {
        n,
        p,
        lambda,
        g,
        h,
        c,
        rho,
        r2,
        yty,
        rss,
        sigma2_ml: rss / n as f64,
        sigma2_unb,
        f_ratios,
        beta_ols,
        exact_fit,
    })
}

impl CanonicalForm {
    /// Rotates a canonical-coordinate vector into x-space: `G · v`.
    pub fn rotate(&self, v: &[f64]) -> Vec<f64> {
        (&self.g * DVector::from_column_slice(v))
            .as_slice()
            .to_vec()
    }

    /// `diag(G · Λ^{-1} · G')`, the OLS relative variances in β-coordinates.
    pub fn ols_relative_variances(&self) -> Vec<f64> {
        (0..self.p)
            .map(|i| {
                (0..self.p)
                    .map(|j| self.g[(i, j)] * self.g[(i, j)] / self.lambda[j])
                    .sum()
            })
            .collect()
    }
}

/// Maps standardized coefficients to original units, returning `(beta, intercept)`.
pub fn back_transform(model: &StandardizedModel, beta_std: &[f64]) -> Result<(Vec<f64>, f64)> {
    if beta_std.len() != model.p {
        return Err(Error::Dimension {
            expected: model.p,
            got: beta_std.len(),
        });
    }
    let beta: Vec<f64> = beta_std
        .iter()
        .zip(&model.x_scales)
        .map(|(b, s)| b * model.y_scale / s)
        .collect();
    let intercept = model.y_mean
        - beta
            .iter()
            .zip(&model.x_means)
            .map(|(b, m)| b * m)
            .sum::<f64>();
    Ok((beta, intercept))
}
