//! The five TRACE diagnostic series (plus −2 log LR) evaluated along a path.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::CanonicalForm;
use crate::paths::{self, ShrinkagePath};
use crate::risk::{self, RiskMode};

/// Per-lattice-point diagnostics for one path.
#[derive(Debug, Clone)]
pub struct TraceBundle {
    pub path: ShrinkagePath,
    pub mode: RiskMode,
    pub coef_names: Vec<String>,
    /// Shrunken coefficients (standardized units).
    pub coef: Vec<Vec<f64>>,
    /// Shrinkage factors δ.
    pub spat: Vec<Vec<f64>>,
    /// Relative MSE per coefficient.
    pub rmse: Vec<Vec<f64>>,
    /// Excess eigenvalues, descending.
    pub exev: Vec<Vec<f64>>,
    /// Inferior-direction cosines, where one exists.
    pub infd: Vec<Option<Vec<f64>>>,
    /// −2 log(LR); `+∞` where the constraint is unattainable.
    pub lr: Vec<f64>,
}

impl TraceBundle {
    pub fn lattice(&self) -> &[f64] {
        &self.path.lattice
    }

    pub fn m_star(&self) -> f64 {
        self.path.m_star
    }

    pub fn len(&self) -> usize {
        self.path.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.lattice.is_empty()
    }
}

/// Evaluates every diagnostic at every lattice point of `path`.
///
/// `names` label the coefficients; pass an empty slice for `x1 … xp`.
pub fn assemble_traces(
    cf: &CanonicalForm,
    path: &ShrinkagePath,
    mode: RiskMode,
    names: &[String],
) -> Result<TraceBundle> {
    if path.p != cf.p {
        return Err(Error::Dimension {
            expected: cf.p,
            got: path.p,
        });
    }
    let coef_names = if names.is_empty() {
        (1..=cf.p).map(|j| format!("x{j}")).collect()
    } else if names.len() == cf.p {
        names.to_vec()
    } else {
        return Err(Error::Dimension {
            expected: cf.p,
            got: names.len(),
        });
    };

    let n = path.len();
    let mut bundle = TraceBundle {
        path: path.clone(),
        mode,
        coef_names,
        coef: Vec::with_capacity(n),
        spat: Vec::with_capacity(n),
        rmse: Vec::with_capacity(n),
        exev: Vec::with_capacity(n),
        infd: Vec::with_capacity(n),
        lr: Vec::with_capacity(n),
    };
    for delta in &path.deltas {
        bundle.coef.push(paths::coef_at_delta(cf, delta)?);
        bundle.spat.push(delta.clone());
        bundle.rmse.push(risk::relative_mse_diag(cf, delta, mode)?);
        let ee = risk::excess_eigen(cf, delta, mode)?;
        bundle.exev.push(ee.eigenvalues);
        bundle.infd.push(ee.inferior_direction);
        bundle.lr.push(risk::neg2_log_lr(cf, delta)?);
    }
    Ok(bundle)
}

/// Which series a plot or export refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceType {
    Coef,
    Spat,
    Rmse,
    Exev,
    Infd,
    Lr,
}

impl TraceType {
    pub const ALL: [TraceType; 6] = [
        TraceType::Coef,
        TraceType::Spat,
        TraceType::Rmse,
        TraceType::Exev,
        TraceType::Infd,
        TraceType::Lr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TraceType::Coef => "coef",
            TraceType::Spat => "spat",
            TraceType::Rmse => "rmse",
            TraceType::Exev => "exev",
            TraceType::Infd => "infd",
            TraceType::Lr => "lr",
        }
    }

    /// Column headers (after the leading `m`) for this series.
    pub fn headers(self, bundle: &TraceBundle) -> Vec<String> {
        let p = bundle.path.p;
        match self {
            TraceType::Coef | TraceType::Rmse => bundle.coef_names.clone(),
            TraceType::Spat => (1..=p).map(|j| format!("delta{j}")).collect(),
            TraceType::Exev => (1..=p).map(|j| format!("ev{j}")).collect(),
            TraceType::Infd => (1..=p).map(|j| format!("infd{j}")).collect(),
            TraceType::Lr => vec!["neg2loglr".to_owned()],
        }
    }

    /// Row values for this series; `None` marks an absent entry.
    pub fn rows(self, bundle: &TraceBundle) -> Vec<Option<Vec<f64>>> {
        let some = |v: &Vec<Vec<f64>>| v.iter().cloned().map(Some).collect();
        match self {
            TraceType::Coef => some(&bundle.coef),
            TraceType::Spat => some(&bundle.spat),
            TraceType::Rmse => some(&bundle.rmse),
            TraceType::Exev => some(&bundle.exev),
            TraceType::Infd => bundle.infd.clone(),
            TraceType::Lr => bundle.lr.iter().map(|&v| Some(vec![v])).collect(),
        }
    }
}

impl FromStr for TraceType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TraceType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown trace type `{s}`")))
    }
}

impl fmt::Display for TraceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
