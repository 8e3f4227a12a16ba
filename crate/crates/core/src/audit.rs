//! One pass of metric evaluation over the included conversations of a corpus.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Corpus, Quality};
use crate::metrics::{self, MetricVector};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub id: String,
    pub quality: Quality,
    pub metrics: MetricVector,
    /// Per-turn score over therapist turns before the client midpoint.
    pub first_half_per_turn: Option<f64>,
}

/// Metric rows for every included conversation, in corpus order.
#[derive(Debug, Clone, Serialize)]
pub struct Audit {
    pub rows: Vec<AuditRow>,
    /// Ids of conversations whose per-turn score is undefined.
    pub undefined_per_turn: Vec<String>,
    pub undefined_first_half_per_turn: Vec<String>,
    fingerprint: u64,
}

/// Scalar views of an audit row used by statistics and detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSelector {
    PerTurn,
    SustainDelta,
    TemporalScore,
    TNorm,
    TDom,
    SMax,
    EarlyWarning,
    FirstHalfPerTurn,
}

/// How censored dominance times enter group comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CensoringMode {
    /// Censored conversations contribute `T_dom = n`, `T_norm = 1`.
    Include,
    /// Censored conversations are dropped from timing metrics.
    EventsOnly,
}

impl CensoringMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CensoringMode::Include => "include",
            CensoringMode::EventsOnly => "events-only",
        }
    }
}

impl std::str::FromStr for CensoringMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "include" => Ok(CensoringMode::Include),
            "events-only" | "events_only" => Ok(CensoringMode::EventsOnly),
            other => Err(format!("unknown censoring mode `{other}`")),
        }
    }
}

impl MetricSelector {
    /// The six comparison metrics, in report order.
    pub const TABLE: [MetricSelector; 6] = [
        MetricSelector::PerTurn,
        MetricSelector::SustainDelta,
        MetricSelector::TemporalScore,
        MetricSelector::TNorm,
        MetricSelector::TDom,
        MetricSelector::SMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricSelector::PerTurn => "per_turn",
            MetricSelector::SustainDelta => "sustain_delta",
            MetricSelector::TemporalScore => "temporal_score",
            MetricSelector::TNorm => "t_norm",
            MetricSelector::TDom => "t_dom",
            MetricSelector::SMax => "s_max",
            MetricSelector::EarlyWarning => "early_warning",
            MetricSelector::FirstHalfPerTurn => "first_half_per_turn",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MetricSelector::PerTurn => "Per-turn process score",
            MetricSelector::SustainDelta => "Sustain-talk delta",
            MetricSelector::TemporalScore => "Temporal score",
            MetricSelector::TNorm => "Dominance normalized (T_norm)",
            MetricSelector::TDom => "First sustain dominance (T_dom)",
            MetricSelector::SMax => "Max sustain streak (S_max)",
            MetricSelector::EarlyWarning => "Early-warning score (EW_delta)",
            MetricSelector::FirstHalfPerTurn => "Midpoint per-turn score",
        }
    }

    pub fn is_timing(self) -> bool {
        matches!(self, MetricSelector::TNorm | MetricSelector::TDom)
    }

    pub fn value(self, row: &AuditRow, censoring: CensoringMode) -> Option<f64> {
        let m = &row.metrics;
        if self.is_timing() && censoring == CensoringMode::EventsOnly && m.t_dom_censored {
            return None;
        }
        match self {
            MetricSelector::PerTurn => m.per_turn,
            MetricSelector::SustainDelta => Some(m.sustain_delta),
            MetricSelector::TemporalScore => Some(m.temporal_score),
            MetricSelector::TNorm => Some(m.t_norm),
            MetricSelector::TDom => Some(m.t_dom as f64),
            MetricSelector::SMax => Some(m.s_max as f64),
            MetricSelector::EarlyWarning => Some(m.ew_delta),
            MetricSelector::FirstHalfPerTurn => row.first_half_per_turn,
        }
    }
}

impl std::str::FromStr for MetricSelector {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [
            MetricSelector::PerTurn,
            MetricSelector::SustainDelta,
            MetricSelector::TemporalScore,
            MetricSelector::TNorm,
            MetricSelector::TDom,
            MetricSelector::SMax,
            MetricSelector::EarlyWarning,
            MetricSelector::FirstHalfPerTurn,
        ]
        .into_iter()
        .find(|m| m.name() == s || m.name().replace('_', "-") == s)
        .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

impl Audit {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let included: Vec<_> = corpus.included().collect();
        let rows: Vec<AuditRow> = included
            .par_iter()
            .map(|c| AuditRow {
                id: c.id.clone(),
                quality: c.quality,
                metrics: metrics::metric_vector(c).expect("included conversations satisfy the metric preconditions"),
                first_half_per_turn: metrics::first_half_per_turn_score(c).ok(),
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn from_rows(rows: Vec<AuditRow>) -> Self {
        let mut hasher = DefaultHasher::new();
        for r in &rows {
            r.id.hash(&mut hasher);
            r.quality.hash(&mut hasher);
        }
        Audit {
            undefined_per_turn: rows.iter().filter(|r| r.metrics.per_turn.is_none()).map(|r| r.id.clone()).collect(),
            undefined_first_half_per_turn: rows
                .iter()
                .filter(|r| r.first_half_per_turn.is_none())
                .map(|r| r.id.clone())
                .collect(),
            rows,
            fingerprint: hasher.finish(),
        }
    }

    /// Identity of the evaluated population (ids and labels).
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn get(&self, id: &str) -> Option<&AuditRow> {
        self.rows.iter().find(|r| r.id == id)
    }

    pub fn count(&self, quality: Quality) -> usize {
        self.rows.iter().filter(|r| r.quality == quality).count()
    }

    /// Defined values of `metric` for one quality group.
    pub fn values(&self, metric: MetricSelector, quality: Quality, censoring: CensoringMode) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.quality == quality)
            .filter_map(|r| metric.value(r, censoring))
            .collect()
    }

    /// Mean half ratios per quality group: `(c̄1, c̄2, s̄1, s̄2)`.
    pub fn mean_half_ratios(&self, quality: Quality) -> Option<[f64; 4]> {
        let rows: Vec<_> = self.rows.iter().filter(|r| r.quality == quality).collect();
        if rows.is_empty() {
            return None;
        }
        let mut acc = [0.0; 4];
        for r in &rows {
            let h = r.metrics.half_ratios;
            acc[0] += h.change_first;
            acc[1] += h.change_second;
            acc[2] += h.sustain_first;
            acc[3] += h.sustain_second;
        }
        Some(acc.map(|v| v / rows.len() as f64))
    }
}
