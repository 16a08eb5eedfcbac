//! Unbiased elliptical confidence regions for pairs of coefficients, with
//! the F-distribution machinery they rest on.

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CanonicalForm, StandardizedModel};
use crate::paths::{self, ShrinkagePath};

/// Boundary points per ellipse.
pub const DEFAULT_BOUNDARY_POINTS: usize = 128;
pub const DEFAULT_LEVELS: [f64; 2] = [0.10, 0.90];

/// Natural log of the gamma function (Lanczos, g = 7, n = 9), for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=1000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// CDF of the F distribution with `(df1, df2)` degrees of freedom.
pub fn f_cdf(df1: u32, df2: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let (d1, d2) = (df1 as f64, df2 as f64);
    regularized_beta(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2))
}

/// Inverse CDF of the F distribution.
///
/// Bisects the incomplete-beta variable `z = d1 x / (d1 x + d2)` to machine
/// resolution, then maps back to `x`.
pub fn f_quantile(df1: u32, df2: u32, prob: f64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::ProbabilityOutOfRange(prob));
    }
    if df1 == 0 || df2 == 0 {
        return Err(Error::InvalidArgument(
            "F degrees of freedom must be positive".into(),
        ));
    }
    let (d1, d2) = (df1 as f64, df2 as f64);
    let (a, b) = (0.5 * d1, 0.5 * d2);
    if regularized_beta(a, b, 0.5) >= prob {
        let z = bisect_increasing(0.0, 0.5, |z| regularized_beta(a, b, z) - prob);
        Ok(d2 * z / (d1 * (1.0 - z)))
    } else {
        // upper half: solve for w = 1 − z so large quantiles keep their digits
        let w = bisect_increasing(0.0, 0.5, |w| regularized_beta(b, a, w) - (1.0 - prob));
        Ok(d2 * (1.0 - w) / (d1 * w))
    }
}

fn bisect_increasing(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..1100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Confidence ellipses for one coefficient pair with the efficient-path
/// trajectory overlaid. Coordinates are in standardized units.
#[derive(Debug, Clone, Serialize)]
pub struct EllipseSpec {
    pub pair: (usize, usize),
    pub names: (String, String),
    /// OLS values of the pair.
    pub center: [f64; 2],
    /// `σ̂²_unb · [G Λ⁻¹ G']` restricted to the pair.
    pub cov2: [[f64; 2]; 2],
    pub levels: Vec<f64>,
    /// Squared Mahalanobis radius per level, `2 F(2, n − p − 1; level)`.
    pub radii2: Vec<f64>,
    pub boundaries: Vec<Vec<[f64; 2]>>,
    /// `(β_i(m), β_j(m))` along the path lattice.
    pub overlay: Vec<[f64; 2]>,
    pub overlay_m: Vec<f64>,
    pub knot_index: Option<usize>,
}

/// Builds the confidence regions `{β : (β − b̂)' V⁻¹ (β − b̂) ≤ 2 F(2, n−p−1; level)}`.
pub fn confidence_ellipse(
    cf: &CanonicalForm,
    i: usize,
    j: usize,
    levels: &[f64],
    path: &ShrinkagePath,
    names: (&str, &str),
) -> Result<EllipseSpec> {
    confidence_ellipse_with(cf, i, j, levels, path, names, DEFAULT_BOUNDARY_POINTS)
}

pub fn confidence_ellipse_with(
    cf: &CanonicalForm,
    i: usize,
    j: usize,
    levels: &[f64],
    path: &ShrinkagePath,
    names: (&str, &str),
    points: usize,
) -> Result<EllipseSpec> {
    if i == j {
        return Err(Error::InvalidArgument(
            "ellipse needs two distinct coefficients".into(),
        ));
    }
    if i >= cf.p || j >= cf.p {
        return Err(Error::InvalidArgument(format!(
            "coefficient index out of range for p = {}",
            cf.p
        )));
    }
    let dof = cf.n as i64 - cf.p as i64 - 1;
    if dof < 1 {
        return Err(Error::InvalidArgument(
            "confidence regions need n − p − 1 ≥ 1".into(),
        ));
    }
    let rel = |a: usize, b: usize| -> f64 {
        (0..cf.p)
            .map(|k| cf.g[(a, k)] * cf.g[(b, k)] / cf.lambda[k])
            .sum::<f64>()
            * cf.sigma2_unb
    };
    let cov = Matrix2::new(rel(i, i), rel(i, j), rel(j, i), rel(j, j));
    let chol = cov
        .cholesky()
        .filter(|_| cov.determinant() > 0.0 && cov.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::InvalidArgument("degenerate 2×2 covariance block".into()))?;
    let l = chol.l();
    let center = Vector2::new(cf.beta_ols[i], cf.beta_ols[j]);

    let mut radii2 = Vec::with_capacity(levels.len());
    let mut boundaries = Vec::with_capacity(levels.len());
    for &level in levels {
        let r2 = 2.0 * f_quantile(2, dof as u32, level)?;
        let r = r2.sqrt();
        let ring = (0..points)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
                let pt = center + l * Vector2::new(r * t.cos(), r * t.sin());
                [pt[0], pt[1]]
            })
            .collect();
        radii2.push(r2);
        boundaries.push(ring);
    }

    let overlay = path
        .deltas
        .iter()
        .map(|d| paths::coef_at_delta(cf, d).map(|b| [b[i], b[j]]))
        .collect::<Result<_>>()?;

    Ok(EllipseSpec {
        pair: (i, j),
        names: (names.0.to_owned(), names.1.to_owned()),
        center: [center[0], center[1]],
        cov2: [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]],
        levels: levels.to_vec(),
        radii2,
        boundaries,
        overlay,
        overlay_m: path.lattice.clone(),
        knot_index: path.knot_index,
    })
}

impl EllipseSpec {
    /// `(β − center)' cov2⁻¹ (β − center)`.
    pub fn quad_form(&self, point: [f64; 2]) -> f64 {
        let [[a, b], [_, d]] = self.cov2;
        let det = a * d - b * b;
        let (x, y) = (point[0] - self.center[0], point[1] - self.center[1]);
        (d * x * x - 2.0 * b * x * y + a * y * y) / det
    }

    /// Whether `point` lies inside (or on) the region at `levels[level]`.
    pub fn contains(&self, level: usize, point: [f64; 2]) -> bool {
        self.quad_form(point) <= self.radii2[level]
    }

    /// The same regions expressed in original units (β_j · s_y / s_xj).
    pub fn to_original_units(&self, model: &StandardizedModel) -> EllipseSpec {
        let (i, j) = self.pair;
        let si = model.y_scale / model.x_scales[i];
        let sj = model.y_scale / model.x_scales[j];
        let map = |p: &[f64; 2]| [p[0] * si, p[1] * sj];
        let mut out = self.clone();
        out.center = map(&self.center);
        out.cov2 = [
            [self.cov2[0][0] * si * si, self.cov2[0][1] * si * sj],
            [self.cov2[1][0] * si * sj, self.cov2[1][1] * sj * sj],
        ];
        out.boundaries = self
            .boundaries
            .iter()
            .map(|ring| ring.iter().map(map).collect())
            .collect();
        out.overlay = self.overlay.iter().map(map).collect();
        out
    }
}
