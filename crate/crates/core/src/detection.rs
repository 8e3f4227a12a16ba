//! Threshold flagging, rule combination and F1 sweeps.
//!
//! Every rule flags a conversation as low quality when its score is strictly
//! below the threshold. Rates are computed against the full included
//! population; conversations with an undefined score are never flagged.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::audit::{Audit, CensoringMode, MetricSelector};
use crate::corpus::Quality;
use crate::stats::{bootstrap_rate_ci, BootstrapCI};
use crate::{strictly_below, Error, Result};

/// Default full-conversation temporal threshold.
pub const DEFAULT_THETA: f64 = -0.10;
/// Default midpoint early-warning threshold.
pub const DEFAULT_THETA_EW: f64 = -0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PerTurn,
    Temporal,
    EarlyWarningTemporal,
    EarlyWarningPerTurn,
    Combined,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::PerTurn => "Per-turn behavior baseline",
            Method::Temporal => "Temporal signal",
            Method::EarlyWarningTemporal => "Temporal signal (midpoint)",
            Method::EarlyWarningPerTurn => "Per-turn behavior baseline (midpoint)",
            Method::Combined => "Combined",
        }
    }

    fn metric(self) -> Option<MetricSelector> {
        match self {
            Method::PerTurn => Some(MetricSelector::PerTurn),
            Method::Temporal => Some(MetricSelector::SustainDelta),
            Method::EarlyWarningTemporal => Some(MetricSelector::EarlyWarning),
            Method::EarlyWarningPerTurn => Some(MetricSelector::FirstHalfPerTurn),
            Method::Combined => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineRule {
    Either,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    pub method: Method,
    /// `None` for combined outcomes.
    pub threshold: Option<f64>,
    pub flagged: BTreeSet<String>,
    pub detected: usize,
    pub false_alarms: usize,
    pub n_low: usize,
    pub n_high: usize,
    pub detection_rate: f64,
    pub false_alarm_rate: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(skip)]
    flagged_low: BTreeSet<String>,
    #[serde(skip)]
    population: u64,
}

/// F1 from counts; 0 when precision and recall are both 0.
pub fn f1_score(detected: usize, false_alarms: usize, n_low: usize) -> f64 {
    let flagged = detected + false_alarms;
    let precision = if flagged == 0 { 0.0 } else { detected as f64 / flagged as f64 };
    let recall = if n_low == 0 { 0.0 } else { detected as f64 / n_low as f64 };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn rate(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl DetectionOutcome {
    fn from_flags(audit: &Audit, method: Method, threshold: Option<f64>, flagged: BTreeSet<String>) -> Self {
        let n_low = audit.count(Quality::Low);
        let n_high = audit.count(Quality::High);
        let flagged_low: BTreeSet<String> = audit
            .rows
            .iter()
            .filter(|r| r.quality == Quality::Low && flagged.contains(&r.id))
            .map(|r| r.id.clone())
            .collect();
        let detected = flagged_low.len();
        let false_alarms = flagged.len() - detected;
        let precision = rate(detected, detected + false_alarms);
        let recall = rate(detected, n_low);
        DetectionOutcome {
            method,
            threshold,
            flagged,
            detected,
            false_alarms,
            n_low,
            n_high,
            detection_rate: recall,
            false_alarm_rate: rate(false_alarms, n_high),
            precision,
            recall,
            f1: f1_score(detected, false_alarms, n_low),
            flagged_low,
            population: audit.fingerprint(),
        }
    }

    /// Whether `id` was flagged.
    pub fn flags(&self, id: &str) -> bool {
        self.flagged.contains(id)
    }
}

/// Flags every conversation whose `method` score is strictly below
/// `threshold`.
pub fn detect(audit: &Audit, method: Method, threshold: f64) -> Result<DetectionOutcome> {
    let metric = method
        .metric()
        .ok_or_else(|| Error::InvalidParameter("combined outcomes are built with `combine`".into()))?;
    if !threshold.is_finite() {
        return Err(Error::InvalidParameter("threshold must be finite".into()));
    }
    let flagged = audit
        .rows
        .iter()
        .filter(|r| metric.value(r, CensoringMode::Include).is_some_and(|v| strictly_below(v, threshold)))
        .map(|r| r.id.clone())
        .collect();
    Ok(DetectionOutcome::from_flags(audit, method, Some(threshold), flagged))
}

/// Full-conversation temporal rule: `Δ_sustain < θ`.
pub fn detect_temporal(audit: &Audit, theta: f64) -> Result<DetectionOutcome> {
    detect(audit, Method::Temporal, theta)
}

/// Per-turn rule: `PT < θ_PT`.
pub fn detect_per_turn(audit: &Audit, theta_pt: f64) -> Result<DetectionOutcome> {
    detect(audit, Method::PerTurn, theta_pt)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EarlyWarning {
    pub temporal: DetectionOutcome,
    pub per_turn: DetectionOutcome,
    pub combined: DetectionOutcome,
}

/// Midpoint rules: `EW_Δ < θ_ew`, first-half `PT < θ_PT`, and their union.
pub fn detect_early_warning(audit: &Audit, theta_ew: f64, theta_pt: f64) -> Result<EarlyWarning> {
    let temporal = detect(audit, Method::EarlyWarningTemporal, theta_ew)?;
    let per_turn = detect(audit, Method::EarlyWarningPerTurn, theta_pt)?;
    let combined = combine(&[&temporal, &per_turn], CombineRule::Either)?;
    Ok(EarlyWarning { temporal, per_turn, combined })
}

/// Union (`Either`) or intersection (`Both`) of flag sets computed on the same
/// population.
pub fn combine(outcomes: &[&DetectionOutcome], rule: CombineRule) -> Result<DetectionOutcome> {
    let first = outcomes.first().ok_or_else(|| Error::EmptyInput("no outcomes to combine".into()))?;
    if outcomes.iter().any(|o| o.population != first.population || o.n_low != first.n_low || o.n_high != first.n_high) {
        return Err(Error::MismatchedCorpora);
    }
    let mut flagged = first.flagged.clone();
    for o in &outcomes[1..] {
        flagged = match rule {
            CombineRule::Either => flagged.union(&o.flagged).cloned().collect(),
            CombineRule::Both => flagged.intersection(&o.flagged).cloned().collect(),
        };
    }
    let method = if outcomes.len() == 1 { first.method } else { Method::Combined };
    let threshold = if outcomes.len() == 1 { first.threshold } else { None };

    // Labels travel with the components' flagged-low sets.
    let flagged_low: BTreeSet<String> = flagged
        .iter()
        .filter(|id| outcomes.iter().any(|o| o.flagged_low.contains(*id)))
        .cloned()
        .collect();
    let detected = flagged_low.len();
    let false_alarms = flagged.len() - detected;
    let (n_low, n_high) = (first.n_low, first.n_high);
    let precision = rate(detected, detected + false_alarms);
    let recall = rate(detected, n_low);
    Ok(DetectionOutcome {
        method,
        threshold,
        flagged,
        detected,
        false_alarms,
        n_low,
        n_high,
        detection_rate: recall,
        false_alarm_rate: rate(false_alarms, n_high),
        precision,
        recall,
        f1: f1_score(detected, false_alarms, n_low),
        flagged_low,
        population: first.population,
    })
}

/// Threshold grid for a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridSpec {
    /// `start, start+step, …` up to and including `stop`. The step's sign is
    /// taken from the direction of travel.
    Range { start: f64, stop: f64, step: f64 },
    /// Midpoints between consecutive distinct observed values.
    DataDriven,
    Explicit(Vec<f64>),
}

impl GridSpec {
    /// Grid used to select the full-conversation temporal threshold.
    pub fn default_temporal() -> Self {
        GridSpec::Range { start: -0.05, stop: -0.50, step: 0.05 }
    }

    pub fn parse(spec: &str) -> Result<Self> {
        if spec.trim() == "data" {
            return Ok(GridSpec::DataDriven);
        }
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || Error::InvalidParameter(format!("sweep `{spec}` is not start:stop:step or `data`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        Ok(GridSpec::Range { start: nums[0], stop: nums[1], step: nums[2] })
    }

    /// Thresholds in sweep order.
    pub fn thresholds(&self, observed: &[f64]) -> Result<Vec<f64>> {
        let grid = match self {
            GridSpec::Range { start, stop, step } => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite()) || *step == 0.0 {
                    return Err(Error::InvalidParameter("sweep range must be finite with a nonzero step".into()));
                }
                let step = step.abs() * if stop >= start { 1.0 } else { -1.0 };
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|k| round12(start + k as f64 * step)).collect()
            }
            GridSpec::DataDriven => {
                let mut values: Vec<f64> = observed.to_vec();
                values.sort_by(f64::total_cmp);
                values.dedup_by(|a, b| (*a - *b).abs() <= crate::EPSILON);
                values.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
            }
            GridSpec::Explicit(v) => v.clone(),
        };
        if grid.is_empty() {
            return Err(Error::EmptyInput("threshold grid is empty".into()));
        }
        Ok(grid)
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub f1: f64,
    pub detected: usize,
    pub false_alarms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub method: Method,
    pub grid: Vec<SweepPoint>,
    pub best_threshold: f64,
    pub best_f1: f64,
}

/// Picks the F1 maximum; ties go to the threshold nearest zero, then to the
/// earliest grid point.
pub fn select_best(grid: &[SweepPoint]) -> Option<&SweepPoint> {
    let mut best: Option<&SweepPoint> = None;
    for p in grid {
        best = match best {
            None => Some(p),
            Some(b) if p.f1 > b.f1 + 1e-12 => Some(p),
            Some(b) if (p.f1 - b.f1).abs() <= 1e-12 && p.threshold.abs() < b.threshold.abs() - 1e-12 => Some(p),
            keep => keep,
        };
    }
    best
}

/// F1 at every threshold of `spec` for `method`.
pub fn sweep_threshold(audit: &Audit, method: Method, spec: &GridSpec) -> Result<SweepResult> {
    let metric = method
        .metric()
        .ok_or_else(|| Error::InvalidParameter("cannot sweep a combined rule".into()))?;
    let observed: Vec<f64> = audit.rows.iter().filter_map(|r| metric.value(r, CensoringMode::Include)).collect();
    let thresholds = spec.thresholds(&observed)?;
    let grid: Vec<SweepPoint> = thresholds
        .into_iter()
        .map(|t| {
            let o = detect(audit, method, t)?;
            Ok(SweepPoint { threshold: t, f1: o.f1, detected: o.detected, false_alarms: o.false_alarms })
        })
        .collect::<Result<_>>()?;
    let best = select_best(&grid).expect("grid is non-empty");
    Ok(SweepResult { method, best_threshold: best.threshold, best_f1: best.f1, grid })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPointCI {
    pub detection: BootstrapCI,
    pub false_alarm: BootstrapCI,
}

/// Bootstrap intervals for an outcome's detection rate (resampling low-quality
/// conversations) and false-alarm rate (resampling high-quality ones). The two
/// groups draw from independent seeds.
pub fn bootstrap_outcome(audit: &Audit, outcome: &DetectionOutcome, resamples: usize, seed: u64) -> Result<OperatingPointCI> {
    let flags = |q: Quality| -> Vec<bool> {
        audit.rows.iter().filter(|r| r.quality == q).map(|r| outcome.flags(&r.id)).collect()
    };
    Ok(OperatingPointCI {
        detection: bootstrap_rate_ci("detection_rate", &flags(Quality::Low), resamples, seed)?,
        false_alarm: bootstrap_rate_ci("false_alarm_rate", &flags(Quality::High), resamples, seed.wrapping_add(FALSE_ALARM_SEED_OFFSET))?,
    })
}

const FALSE_ALARM_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;
