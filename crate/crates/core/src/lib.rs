//! Corpus-audit toolkit for temporal safety evidence in annotated counseling
//! dialogues.
//!
//! The crate is organised bottom-up:
//!
//! * [`corpus`] ingests MITI-style annotated transcripts and applies the
//!   ordering and exclusion rules.
//! * [`metrics`] computes the per-conversation scores and case diagnostics.
//! * [`audit`] evaluates every included conversation once and keeps the
//!   results keyed by conversation id.
//! * [`stats`] compares quality groups, bootstraps rates and builds ROC/PR
//!   curves.
//! * [`detection`] applies threshold rules, combinations and F1 sweeps.
//! * [`tsni`] searches bounded trajectory spaces for compression collisions
//!   that change safety status.
//! * [`scope`] validates and renders SCOPE reporting cards.
//! * [`report`] and [`svg`] emit tables, markdown and plots.

pub mod audit;
pub mod corpus;
pub mod detection;
mod error;
pub mod metrics;
pub mod report;
pub mod scope;
pub mod stats;
pub mod svg;
pub mod tsni;

pub use error::{Error, ErrorKind, Result};

/// Environment variable naming the default corpus path.
pub const DATA_PATH_ENV: &str = "SCOPEMH_DATA";

/// Tolerance used when comparing rational metric values against decimal
/// thresholds. Metric denominators are bounded by conversation length, so any
/// genuine gap is many orders of magnitude larger than this.
pub(crate) const EPSILON: f64 = 1e-9;

/// `value < threshold`, treating values within [`EPSILON`] of the threshold as
/// equal to it.
#[inline]
pub fn strictly_below(value: f64, threshold: f64) -> bool {
    value < threshold - EPSILON
}
