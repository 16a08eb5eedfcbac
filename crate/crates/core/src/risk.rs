//! Maximum-likelihood and unbiased risk estimators.
//!
//! All risks are relative, i.e. divided by the error variance, and are
//! evaluated in canonical coordinates before rotation by `G`. The bias of a
//! shrunken component `δ_j c_j` is `(δ_j − 1) γ_j`, so with `b = γ / σ` the
//! relative MSE matrix of `diag(δ) c` is
//!
//! ```text
//! M(δ) = Δ Λ⁻¹ Δ + (I − Δ) b b' (I − Δ)
//! ```
//!
//! and the excess-risk matrix against OLS is `Λ⁻¹ − M(δ)`. Using a plug-in
//! `b` keeps the bias term rank one, so at most one excess eigenvalue can be
//! negative.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, largest_magnitude};
use crate::model::CanonicalForm;
use crate::paths::{self, ShrinkagePath};

/// Eigenvalues this close to zero (relative to the largest magnitude) are reported as zero.
pub const EIGEN_SNAP: f64 = 1e-12;

/// q-shape mesh searched by [`q_search`] when none is given: −5 to 5 in steps of ½.
pub fn default_q_mesh() -> Vec<f64> {
    (-10..=10).map(|k| k as f64 * 0.5).collect()
}

/// How the bias vector `b = γ / σ` is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskMode {
    /// `b_j = sign(c_j) · φ̂_j / √λ_j`, the maximum-likelihood plug-in.
    #[default]
    Ml,
    /// `b_j² = max(0, c_j² / σ̂²_unb − 1/λ_j)`: unbiased squared bias, floored so
    /// each component risk is at least its relative variance.
    Unbiased,
}

impl FromStr for RiskMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ml" => Ok(RiskMode::Ml),
            "unbiased" => Ok(RiskMode::Unbiased),
            other => Err(Error::InvalidArgument(format!(
                "unknown risk mode `{other}` (expected ml or unbiased)"
            ))),
        }
    }
}

impl fmt::Display for RiskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiskMode::Ml => "ml",
            RiskMode::Unbiased => "unbiased",
        })
    }
}

/// Plug-in estimates shared by the risk diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct RiskEstimates {
    /// `φ̂_j² = n ρ̂_j² / (1 − R²)`.
    pub phi2_hat: Vec<f64>,
    pub delta_star: Vec<f64>,
    pub gamma_ml: Vec<f64>,
    /// Infinite components mark the exact-fit limit.
    pub bias: Vec<f64>,
    pub mode: RiskMode,
}

pub fn risk_estimates(cf: &CanonicalForm, mode: RiskMode) -> RiskEstimates {
    let one_minus = (1.0 - cf.r2).max(0.0);
    RiskEstimates {
        phi2_hat: cf
            .rho
            .iter()
            .map(|r| cf.n as f64 * r * r / one_minus)
            .collect(),
        delta_star: delta_knot(cf),
        gamma_ml: gamma_ml(cf),
        bias: bias_vector(cf, mode),
        mode,
    }
}

/// ML estimate of the minimum-MSE shrinkage factors, `n ρ̂² / (n ρ̂² + 1 − R²)`.
///
/// An exact fit (`R² = 1`) gives all ones.
pub fn delta_knot(cf: &CanonicalForm) -> Vec<f64> {
    if cf.exact_fit {
        return vec![1.0; cf.p];
    }
    let n = cf.n as f64;
    let one_minus = 1.0 - cf.r2;
    cf.rho
        .iter()
        .map(|r| {
            let a = n * r * r;
            a / (a + one_minus)
        })
        .collect()
}

/// ML estimates of the uncorrelated components most likely to have minimum MSE.
pub fn gamma_ml(cf: &CanonicalForm) -> Vec<f64> {
    let n = cf.n as f64;
    let one_minus = (1.0 - cf.r2).max(0.0);
    cf.rho
        .iter()
        .zip(&cf.lambda)
        .map(|(&r, &l)| {
            if r == 0.0 {
                return 0.0;
            }
            let a = n * r * r;
            n * r * r * r / (a + one_minus) * (cf.yty / l).sqrt()
        })
        .collect()
}

/// Plug-in `b = γ / σ` for the given mode. Exact fits yield `±∞` components.
pub fn bias_vector(cf: &CanonicalForm, mode: RiskMode) -> Vec<f64> {
    let signed = |c: f64, mag: f64| if c < 0.0 { -mag } else { mag };
    match mode {
        RiskMode::Ml => {
            let n = cf.n as f64;
            let one_minus = (1.0 - cf.r2).max(0.0);
            cf.rho
                .iter()
                .zip(&cf.lambda)
                .zip(&cf.c)
                .map(|((&r, &l), &c)| {
                    if r == 0.0 {
                        0.0
                    } else if cf.exact_fit {
                        signed(c, f64::INFINITY)
                    } else {
                        signed(c, (n * r * r / one_minus).sqrt() / l.sqrt())
                    }
                })
                .collect()
        }
        RiskMode::Unbiased => {
            cf.c.iter()
                .zip(&cf.lambda)
                .map(|(&c, &l)| {
                    if c == 0.0 {
                        0.0
                    } else if cf.exact_fit {
                        signed(c, f64::INFINITY)
                    } else {
                        signed(c, (c * c / cf.sigma2_unb - 1.0 / l).max(0.0).sqrt())
                    }
                })
                .collect()
        }
    }
}

/// `(1 − δ_j) b_j`, or, when the bias is infinite, the finite direction of
/// that vector in the limit (proportional to `(1 − δ_j) c_j`).
enum WeightedBias {
    Finite(Vec<f64>),
    Infinite(Vec<f64>),
}

fn weighted_bias(cf: &CanonicalForm, delta: &[f64], mode: RiskMode) -> WeightedBias {
    let b = bias_vector(cf, mode);
    if b.iter().any(|v| v.is_infinite()) {
        WeightedBias::Infinite(
            delta
                .iter()
                .zip(&cf.c)
                .map(|(d, c)| (1.0 - d) * c)
                .collect(),
        )
    } else {
        WeightedBias::Finite(delta.iter().zip(&b).map(|(d, b)| (1.0 - d) * b).collect())
    }
}

/// Diagonal of the relative MSE matrix of `G Δ c`, i.e. per-coefficient
/// `MSE / σ²` in β-coordinates.
pub fn relative_mse_diag(cf: &CanonicalForm, delta: &[f64], mode: RiskMode) -> Result<Vec<f64>> {
    paths::validate_delta(cf.p, delta)?;
    let p = cf.p;
    let w = weighted_bias(cf, delta, mode);
    let out = (0..p)
        .map(|i| {
            let var: f64 = (0..p)
                .map(|j| cf.g[(i, j)] * cf.g[(i, j)] * delta[j] * delta[j] / cf.lambda[j])
                .sum();
            match &w {
                WeightedBias::Finite(w) => {
                    let s: f64 = (0..p).map(|j| cf.g[(i, j)] * w[j]).sum();
                    var + s * s
                }
                WeightedBias::Infinite(w) => {
                    let s: f64 = (0..p).map(|j| cf.g[(i, j)] * w[j]).sum();
                    let norm: f64 = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if s.abs() > 1e-14 * norm.max(f64::MIN_POSITIVE) && norm > 0.0 {
                        f64::INFINITY
                    } else {
                        var
                    }
                }
            }
        })
        .collect();
    Ok(out)
}

/// Eigen-analysis of the excess risk `MSE(OLS) − MSE(δ)`, relative to `σ²`.
#[derive(Debug, Clone, Serialize)]
pub struct ExcessEigen {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Unit direction cosines in x-space, present iff the smallest eigenvalue is negative.
    pub inferior_direction: Option<Vec<f64>>,
}

fn snap(values: &mut [f64]) {
    let top = values
        .iter()
        .filter(|v| v.is_finite())
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    for v in values.iter_mut() {
        if v.abs() <= EIGEN_SNAP * top {
            *v = 0.0;
        }
    }
}

fn fix_sign(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let flip = if largest_magnitude(&v) < 0.0 {
        -1.0
    } else {
        1.0
    };
    for x in v.iter_mut() {
        *x *= flip / norm;
    }
    v
}

/// Excess eigenvalues and (when one is negative) the inferior direction.
pub fn excess_eigen(cf: &CanonicalForm, delta: &[f64], mode: RiskMode) -> Result<ExcessEigen> {
    paths::validate_delta(cf.p, delta)?;
    let p = cf.p;
    let reduction = DVector::from_iterator(
        p,
        delta.iter().zip(&cf.lambda).map(|(d, l)| (1.0 - d * d) / l),
    );
    let diag = DMatrix::from_diagonal(&reduction);

    let (mut values, vectors, negative_col) = match weighted_bias(cf, delta, mode) {
        WeightedBias::Finite(w) => {
            let w = DVector::from_vec(w);
            let e = linalg::symmetric_eigen(&(diag - &w * w.transpose()))?;
            let values: Vec<f64> = e.values.iter().copied().collect();
            (values, e.vectors, p - 1)
        }
        WeightedBias::Infinite(w) => {
            let w = DVector::from_vec(w);
            let norm = w.norm();
            if norm == 0.0 {
                let e = linalg::symmetric_eigen(&diag)?;
                (e.values.iter().copied().collect(), e.vectors, p - 1)
            } else {
                // Limit of D − t² w w' as t → ∞: −∞ along w, and the
                // compression of D onto w⊥ elsewhere.
                let u = &w / norm;
                let proj = DMatrix::identity(p, p) - &u * u.transpose();
                let e = linalg::symmetric_eigen(&(&proj * diag * &proj))?;
                let drop = (0..p)
                    .max_by(|&a, &b| {
                        e.vectors
                            .column(a)
                            .dot(&u)
                            .abs()
                            .total_cmp(&e.vectors.column(b).dot(&u).abs())
                    })
                    .expect("p >= 1");
                let mut values = Vec::with_capacity(p);
                let mut vectors = DMatrix::zeros(p, p);
                for k in (0..p).filter(|&k| k != drop) {
                    vectors.set_column(values.len(), &e.vectors.column(k));
                    values.push(e.values[k]);
                }
                vectors.set_column(p - 1, &u);
                values.push(f64::NEG_INFINITY);
                (values, vectors, p - 1)
            }
        }
    };
    snap(&mut values);
    let smallest = values[negative_col];
    let inferior_direction = (smallest < 0.0).then(|| {
        let v = vectors.column(negative_col).clone_owned();
        fix_sign(cf.rotate(v.as_slice()))
    });
    Ok(ExcessEigen {
        eigenvalues: values,
        inferior_direction,
    })
}

/// `|corr|` between the inferior direction at the path terminus and the OLS
/// coefficient vector. For `p = 1` the direction is just "up and down" and
/// the alignment is 1.
pub fn inferior_terminal_alignment(
    cf: &CanonicalForm,
    path: &ShrinkagePath,
    mode: RiskMode,
) -> Result<f64> {
    let terminal = path
        .deltas
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty path".into()))?;
    let ee = excess_eigen(cf, terminal, mode)?;
    let dir = ee.inferior_direction.ok_or(Error::NoInferiorDirection)?;
    if cf.p == 1 {
        return Ok(1.0);
    }
    Ok(pearson(&dir, &cf.beta_ols).abs())
}

pub(crate) fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// `−2 log(LR)` of the Normal likelihood constrained to make `δ` the
/// minimum-MSE factors, against the unconstrained maximum (χ² scale).
///
/// The constraint fixes `|γ_j| = σ √(δ_j / (λ_j (1 − δ_j)))`; signs follow
/// `c_j` and `σ` is profiled out in closed form. Any `δ_j = 1` makes the
/// constraint unattainable and yields `+∞`.
pub fn neg2_log_lr(cf: &CanonicalForm, delta: &[f64]) -> Result<f64> {
    paths::validate_delta(cf.p, delta)?;
    if cf.exact_fit {
        return Ok(if delta.iter().all(|&d| d == 1.0) {
            0.0
        } else {
            f64::INFINITY
        });
    }
    if delta.iter().any(|&d| d >= 1.0) {
        return Ok(f64::INFINITY);
    }
    let n = cf.n as f64;
    let mut s = 0.0;
    let mut uv = Vec::with_capacity(cf.p);
    for ((&d, &l), &c) in delta.iter().zip(&cf.lambda).zip(&cf.c) {
        let u = l.sqrt() * c.abs();
        let v = (d / (1.0 - d)).sqrt();
        s += u * v;
        uv.push((u, v));
    }
    let sigma = (-s + (s * s + 4.0 * n * cf.yty).sqrt()) / (2.0 * n);
    let sigma2 = sigma * sigma;
    let misfit: f64 = uv.iter().map(|(u, v)| (u - sigma * v).powi(2)).sum();
    Ok(n * (sigma2 / cf.sigma2_ml).ln() + (cf.rss + misfit) / sigma2 - n)
}

/// Outcome of a q-shape mesh search.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QSearch {
    pub q_best: f64,
    pub m_best: f64,
    pub lr_min: f64,
}

/// Builds the q-shape path for every mesh value and keeps the one whose
/// lattice attains the smallest `−2 log(LR)`; ties go to the q nearest 0.
pub fn q_search(cf: &CanonicalForm, mesh: &[f64], steps: usize) -> Result<QSearch> {
    let mut best: Option<QSearch> = None;
    for &q in mesh {
        let path = paths::build_qm_path(cf, q, steps)?;
        let k = path.knot_index.expect("qm paths record their minimiser");
        let lr = neg2_log_lr(cf, &path.deltas[k])?;
        let cand = QSearch {
            q_best: q,
            m_best: path.m_star,
            lr_min: lr,
        };
        best = Some(match best {
            None => cand,
            Some(cur) => {
                let tie = (lr - cur.lr_min).abs() <= 1e-12 * cur.lr_min.abs().max(1.0);
                if (tie && q.abs() < cur.q_best.abs()) || (!tie && lr < cur.lr_min) {
                    cand
                } else {
                    cur
                }
            }
        });
    }
    best.ok_or_else(|| Error::InvalidArgument("empty q mesh".into()))
}

/// Optimal q-shape for a two-predictor model: the q for which the q-shape
/// path passes through the MSE-optimal factors, `q = −ln(c₁²/c₂²) / ln(λ₁/λ₂)`,
/// with the OLS uncorrelated components standing in for `γ`.
pub fn q_best_p2(cf: &CanonicalForm) -> Result<f64> {
    if cf.p != 2 {
        return Err(Error::InvalidArgument(format!(
            "optimal q-shape needs exactly 2 predictors, got {}",
            cf.p
        )));
    }
    let (l1, l2) = (cf.lambda[0], cf.lambda[1]);
    if (l1 - l2).abs() <= 1e-12 * l1.abs() {
        return Err(Error::InvalidArgument(
            "optimal q-shape undefined for equal eigenvalues".into(),
        ));
    }
    let (c1, c2) = (cf.c[0], cf.c[1]);
    if c1 == 0.0 || c2 == 0.0 {
        return Err(Error::InvalidArgument(
            "optimal q-shape undefined when an uncorrelated component is zero".into(),
        ));
    }
    Ok(-((c1 * c1) / (c2 * c2)).ln() / (l1 / l2).ln())
}
