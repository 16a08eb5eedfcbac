//! Shrinkage paths on the m-extent lattice.
//!
//! A generalized ridge estimator applies factors `δ_j ∈ [0, 1]` to the
//! uncorrelated components, `β̂ = G Δ c`. The m-extent `m = p − Σ δ_j` runs
//! from 0 (OLS) to `p` (all coefficients zero) and indexes every path.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{self, CanonicalForm, StandardizedModel};
use crate::risk;

/// Lattice points per unit of m used when none is given.
pub const DEFAULT_STEPS: usize = 8;
/// Agreement required between the m-extent of a q-shape δ and its target.
pub const M_TOLERANCE: f64 = 1e-10;
const KNOT_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Efficient,
    Qm,
    Yonx,
}

/// A shrinkage path evaluated on a lattice of m-extents.
#[derive(Debug, Clone, Serialize)]
pub struct ShrinkagePath {
    pub kind: PathKind,
    pub p: usize,
    pub steps: usize,
    /// Increasing m values from 0 to p.
    pub lattice: Vec<f64>,
    /// `deltas[k]` are the factors at `lattice[k]`.
    pub deltas: Vec<Vec<f64>>,
    /// Knot extent (efficient, yonx) or the lattice minimiser of −2 log(LR) (qm).
    pub m_star: f64,
    pub delta_star: Vec<f64>,
    /// Lattice index of `m_star`.
    pub knot_index: Option<usize>,
    pub q: Option<f64>,
    /// Ridge constant per lattice point (qm only); `+∞` at the terminus.
    pub k_values: Option<Vec<f64>>,
    /// The knot sits at an endpoint and the path is a single straight line.
    pub degenerate_knot: bool,
    /// Original-unit slopes at m ∈ {0, m*, 2m*} (yonx only).
    pub display_slopes: Option<[f64; 3]>,
}

impl ShrinkagePath {
    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }
}

/// Checks length and that every factor lies in `[0, 1]`.
pub fn validate_delta(p: usize, delta: &[f64]) -> Result<()> {
    if delta.len() != p {
        return Err(Error::Dimension {
            expected: p,
            got: delta.len(),
        });
    }
    for (index, &value) in delta.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::DeltaOutOfRange { index, value });
        }
    }
    Ok(())
}

/// m-extent of a vector of shrinkage factors: `p − Σ δ_j`.
pub fn mcal(delta: &[f64]) -> Result<f64> {
    validate_delta(delta.len(), delta)?;
    Ok(delta.len() as f64 - delta.iter().sum::<f64>())
}

fn regular_lattice(p: usize, steps: usize) -> Vec<f64> {
    (0..=p * steps).map(|k| k as f64 / steps as f64).collect()
}

/// Regular lattice with `m_star` included, returning the knot's index.
fn lattice_with_knot(p: usize, steps: usize, m_star: f64) -> (Vec<f64>, usize) {
    let mut lattice = regular_lattice(p, steps);
    if let Some(k) = lattice.iter().position(|m| (m - m_star).abs() <= KNOT_SNAP) {
        lattice[k] = m_star;
        return (lattice, k);
    }
    let k = lattice.partition_point(|&m| m < m_star);
    lattice.insert(k, m_star);
    (lattice, k)
}

/// Factors on the efficient two-piece path through `delta_star` at extent `m`.
///
/// Linear from all ones (m = 0) to `delta_star` (m = m*), then linear to all
/// zeros (m = p).
pub fn efficient_delta(delta_star: &[f64], m: f64) -> Vec<f64> {
    let p = delta_star.len() as f64;
    let m_star = p - delta_star.iter().sum::<f64>();
    if m <= 0.0 {
        return vec![1.0; delta_star.len()];
    }
    if m >= p {
        return vec![0.0; delta_star.len()];
    }
    if m <= m_star && m_star > 0.0 {
        let t = m / m_star;
        delta_star.iter().map(|d| 1.0 - t * (1.0 - d)).collect()
    } else if m_star < p {
        let t = (p - m) / (p - m_star);
        delta_star.iter().map(|d| d * t).collect()
    } else {
        vec![0.0; delta_star.len()]
    }
}

fn is_degenerate(m_star: f64, p: usize) -> bool {
    m_star <= KNOT_SNAP || m_star >= p as f64 - KNOT_SNAP
}

/// The efficient path: the shortest two-piece linear spline from OLS to zero
/// that passes through the ML minimum-MSE factors.
pub fn build_efficient_path(cf: &CanonicalForm, steps: usize) -> Result<ShrinkagePath> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let delta_star = risk::delta_knot(cf);
    let m_star = cf.p as f64 - delta_star.iter().sum::<f64>();
    let (lattice, knot) = lattice_with_knot(cf.p, steps, m_star);
    let deltas = lattice
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            if k == knot {
                delta_star.clone()
            } else {
                efficient_delta(&delta_star, m)
            }
        })
        .collect();
    Ok(ShrinkagePath {
        kind: PathKind::Efficient,
        p: cf.p,
        steps,
        lattice,
        deltas,
        m_star,
        delta_star,
        knot_index: Some(knot),
        q: None,
        k_values: None,
        degenerate_knot: is_degenerate(m_star, cf.p),
        display_slopes: None,
    })
}

/// q-shape factors `δ_j = 1 / (1 + k λ_j^{q−1})`.
///
/// `q = 0` is the classical ridge family `λ_j / (λ_j + k)`; `k = ∞` gives zeros.
pub fn qm_delta(cf: &CanonicalForm, q: f64, k: f64) -> Vec<f64> {
    if k <= 0.0 {
        return vec![1.0; cf.p];
    }
    if k.is_infinite() {
        return vec![0.0; cf.p];
    }
    qm_delta_ln(cf, q, k.ln())
}

fn qm_delta_ln(cf: &CanonicalForm, q: f64, ln_k: f64) -> Vec<f64> {
    cf.lambda
        .iter()
        .map(|l| {
            let f = (ln_k + (q - 1.0) * l.ln()).exp();
            1.0 / (1.0 + f)
        })
        .collect()
}

fn m_of_ln_k(cf: &CanonicalForm, q: f64, ln_k: f64) -> f64 {
    cf.p as f64 - qm_delta_ln(cf, q, ln_k).iter().sum::<f64>()
}

/// Ridge constant `k` whose q-shape factors have m-extent `m_target`.
///
/// Bisection on `ln k`; `m_target = p` returns `+∞`.
pub fn solve_k_for_m(cf: &CanonicalForm, q: f64, m_target: f64) -> Result<f64> {
    let p = cf.p as f64;
    if !(0.0..=p).contains(&m_target) {
        return Err(Error::InvalidArgument(format!(
            "target m-extent {m_target} outside [0, {p}]"
        )));
    }
    if m_target == 0.0 {
        return Ok(0.0);
    }
    if m_target == p {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    while m_of_ln_k(cf, q, lo) > m_target {
        lo *= 2.0;
        if lo < -1e4 {
            break;
        }
    }
    while m_of_ln_k(cf, q, hi) < m_target {
        hi *= 2.0;
        if hi > 1e4 {
            break;
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..400 {
        mid = 0.5 * (lo + hi);
        let m = m_of_ln_k(cf, q, mid);
        if (m - m_target).abs() <= 0.1 * M_TOLERANCE || mid == lo || mid == hi {
            break;
        }
        if m < m_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid.exp())
}

/// The q-shape path on the regular lattice; its `m_star` is the lattice
/// point with the smallest `−2 log(LR)`.
pub fn build_qm_path(cf: &CanonicalForm, q: f64, steps: usize) -> Result<ShrinkagePath> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if !q.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "q-shape must be finite, got {q}"
        )));
    }
    let lattice = regular_lattice(cf.p, steps);
    let mut deltas = Vec::with_capacity(lattice.len());
    let mut k_values = Vec::with_capacity(lattice.len());
    for &m in &lattice {
        let k = solve_k_for_m(cf, q, m)?;
        deltas.push(qm_delta(cf, q, k));
        k_values.push(k);
    }
    let mut best = (0, f64::INFINITY);
    for (idx, d) in deltas.iter().enumerate() {
        let lr = risk::neg2_log_lr(cf, d)?;
        if lr < best.1 {
            best = (idx, lr);
        }
    }
    let knot = best.0;
    Ok(ShrinkagePath {
        kind: PathKind::Qm,
        p: cf.p,
        steps,
        m_star: lattice[knot],
        delta_star: deltas[knot].clone(),
        lattice,
        deltas,
        knot_index: Some(knot),
        q: Some(q),
        k_values: Some(k_values),
        degenerate_knot: false,
        display_slopes: None,
    })
}

/// Shrunken coefficients in standardized units, `β̂ = G Δ c`.
pub fn coef_at_delta(cf: &CanonicalForm, delta: &[f64]) -> Result<Vec<f64>> {
    validate_delta(cf.p, delta)?;
    let shrunk: Vec<f64> = delta.iter().zip(&cf.c).map(|(d, c)| d * c).collect();
    Ok(cf.rotate(&shrunk))
}

/// The efficient path for a single predictor, where it reduces to
/// `δ(m) = 1 − m`, together with the original-unit slopes of the OLS,
/// minimum-MSE and double-shrunk fits.
pub fn build_yonx_path(model: &StandardizedModel, steps: usize) -> Result<ShrinkagePath> {
    if model.p != 1 {
        return Err(Error::InvalidArgument(format!(
            "YonX needs exactly one predictor, got {}",
            model.p
        )));
    }
    let cf = model::canonicalize(model)?;
    let mut path = build_efficient_path(&cf, steps)?;
    path.kind = PathKind::Yonx;
    let knot = path.knot_index.expect("efficient paths carry a knot");
    for (k, (m, d)) in path.lattice.iter().zip(path.deltas.iter_mut()).enumerate() {
        if k != knot {
            d[0] = (1.0 - m).clamp(0.0, 1.0);
        }
    }
    let d_star = path.delta_star[0];
    let mut slopes = [0.0; 3];
    for (slot, d) in slopes
        .iter_mut()
        .zip([1.0, d_star, (2.0 * d_star - 1.0).max(0.0)])
    {
        let beta = coef_at_delta(&cf, &[d])?;
        *slot = model::back_transform(model, &beta)?.0[0];
    }
    path.display_slopes = Some(slopes);
    Ok(path)
}
