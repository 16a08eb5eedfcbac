//! Generalized ridge regression along efficient shrinkage paths.
//!
//! A regression is reduced to canonical form (principal axes of the
//! standardized predictors), shrunk along a path indexed by the m-extent
//! `m = p − Σδ`, and diagnosed with TRACE displays: coefficients, shrinkage
//! factors, relative MSE, excess eigenvalues, inferior direction and the
//! −2 log likelihood ratio.
//!
//! ```
//! use ridge_trace::{dataset, model, paths, risk};
//!
//! let table = dataset::portland();
//! let m = model::standardize(&table, "heat", &["p3ca", "p3cs", "p4caf", "p2cs"])?;
//! let cf = model::canonicalize(&m)?;
//! let path = paths::build_efficient_path(&cf, 20)?;
//! assert!((path.m_star - 1.848).abs() < 1e-3);
//! assert!(risk::neg2_log_lr(&cf, &path.delta_star)?.abs() < 1e-9);
//! # Ok::<(), ridge_trace::Error>(())
//! ```

pub mod cli;
pub mod dataset;
pub mod error;
pub mod export;
pub mod inference;
pub mod linalg;
pub mod model;
pub mod paths;
pub mod risk;
pub mod svg;
pub mod trace;

pub use error::{Error, Result};
pub use export::ExportFormat;
pub use model::{CanonicalForm, StandardizedModel, Table};
pub use paths::{PathKind, ShrinkagePath};
pub use risk::RiskMode;
pub use trace::{TraceBundle, TraceType};

// The guide's code blocks run as doc-tests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/canonical-form.md")]
    mod canonical_form {}
    #[doc = include_str!("../../../book/src/paths.md")]
    mod paths {}
    #[doc = include_str!("../../../book/src/risk.md")]
    mod risk {}
    #[doc = include_str!("../../../book/src/trace.md")]
    mod trace {}
    #[doc = include_str!("../../../book/src/qshape-yonx.md")]
    mod qshape_yonx {}
    #[doc = include_str!("../../../book/src/ellipses.md")]
    mod ellipses {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
