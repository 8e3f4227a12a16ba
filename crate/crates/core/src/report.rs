//! Tabular and markdown report emission.
//!
//! Every emitted file starts with a schema header line. Delimited tables use
//! `# <schema> v<version>`; markdown documents use an HTML comment.

use std::fmt::Write as _;

use crate::audit::{Audit, CensoringMode};
use crate::corpus::{CorpusCounts, Quality, TurnStatistics};
use crate::detection::{DetectionOutcome, SweepResult};
use crate::metrics::CaseTrace;
use crate::stats::{BootstrapCI, CurveKind, CurveResult, GroupComparison};
use crate::{Error, Result};

pub const REPORT_VERSION: u32 = 1;

/// A rectangular table of already-formatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub schema: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: &str, columns: &[&str]) -> Self {
        Table { schema: schema.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn header_line(&self) -> String {
        format!("# {} v{}", self.schema, REPORT_VERSION)
    }

    pub fn to_delimited(&self, delimiter: u8) -> Result<String> {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let body = w.into_inner().map_err(|e| Error::Malformed(e.to_string()))?;
        let body = String::from_utf8(body).map_err(|e| Error::Malformed(e.to_string()))?;
        Ok(format!("{}\n{}", self.header_line(), body))
    }

    /// Reads a table written by [`Table::to_delimited`].
    pub fn parse_delimited(text: &str, delimiter: u8) -> Result<Self> {
        let (first, rest) = text.split_once('\n').ok_or(Error::EmptySource)?;
        let header = first
            .strip_prefix("# ")
            .and_then(|h| h.rsplit_once(" v"))
            .ok_or_else(|| Error::MalformedHeader(first.to_string()))?;
        let mut r = csv::ReaderBuilder::new().delimiter(delimiter).from_reader(rest.as_bytes());
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Table { schema: header.0.to_string(), columns, rows })
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "| {} |", self.columns.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(self.columns.len()));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| c.replace('|', "\\|")).collect();
            let _ = writeln!(out, "| {} |", cells.join(" | "));
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

pub fn fmt3(x: f64) -> String {
    fmt_n(x, 3)
}

/// Fixed decimals without a negative zero.
pub fn fmt_n(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn fmt_p(p: f64) -> String {
    if p < 0.001 {
        "<0.001".into()
    } else {
        fmt3(p)
    }
}

fn opt(x: Option<f64>, decimals: usize) -> String {
    x.map_or_else(String::new, |v| fmt_n(v, decimals))
}

/// Decimals used in the per-conversation metric table.
pub const METRIC_TABLE_DECIMALS: usize = 6;

pub const METRIC_COLUMNS: [&str; 12] = [
    "conversation_id",
    "quality",
    "n_client",
    "per_turn",
    "sustain_delta",
    "temporal_score",
    "t_dom",
    "t_dom_censored",
    "t_norm",
    "s_max",
    "ew_delta",
    "first_half_per_turn",
];

/// One row per included conversation. Undefined scores are empty cells.
pub fn metric_table(audit: &Audit) -> Table {
    let d = METRIC_TABLE_DECIMALS;
    let mut t = Table::new("scopemh.metrics", &METRIC_COLUMNS);
    for r in &audit.rows {
        let m = &r.metrics;
        t.push(vec![
            r.id.clone(),
            r.quality.to_string(),
            m.n.to_string(),
            opt(m.per_turn, d),
            fmt_n(m.sustain_delta, d),
            fmt_n(m.temporal_score, d),
            m.t_dom.to_string(),
            m.t_dom_censored.to_string(),
            fmt_n(m.t_norm, d),
            m.s_max.to_string(),
            fmt_n(m.ew_delta, d),
            opt(r.first_half_per_turn, d),
        ]);
    }
    t
}

/// Comparison table: metric, group means, difference, t-test p, d, U and
/// Mann–Whitney p.
pub fn comparison_table(comparisons: &[GroupComparison], censoring: CensoringMode) -> Table {
    let mut t = Table::new(
        "scopemh.comparison",
        &["metric", "censoring", "n_high", "n_low", "mean_high", "mean_low", "diff", "t", "p_t", "p_t_alt", "cohens_d", "u", "p_mw"],
    );
    for c in comparisons {
        t.push(vec![
            c.metric_name.clone(),
            censoring.as_str().into(),
            c.n_high.to_string(),
            c.n_low.to_string(),
            fmt3(c.mean_high),
            fmt3(c.mean_low),
            fmt3(c.diff),
            fmt3(c.t_statistic),
            fmt3(c.t_p_value),
            fmt3(c.t_p_value_alternate),
            fmt3(c.cohens_d),
            fmt_n(c.mw_u, 1),
            fmt3(c.mw_p_value),
        ]);
    }
    t
}

/// Markdown comparison table with labels and p-values clipped at 0.001.
pub fn comparison_markdown(comparisons: &[(String, GroupComparison)]) -> String {
    let mut t = Table::new("scopemh.comparison", &["Metric", "High", "Low", "Diff", "p (t)", "d", "U", "p (MW)"]);
    for (label, c) in comparisons {
        t.push(vec![
            label.clone(),
            fmt3(c.mean_high),
            fmt3(c.mean_low),
            fmt3(c.diff),
            fmt_p(c.t_p_value),
            fmt3(c.cohens_d),
            fmt_n(c.mw_u, 1),
            fmt_p(c.mw_p_value),
        ]);
    }
    t.to_markdown()
}

/// Detection table: counts and rates per method.
pub fn detection_table(outcomes: &[(String, &DetectionOutcome)]) -> Table {
    let mut t = Table::new(
        "scopemh.detection",
        &["method", "threshold", "detected", "n_low", "detection_rate", "false_alarms", "n_high", "false_alarm_rate", "precision", "f1"],
    );
    for (label, o) in outcomes {
        t.push(vec![
            label.clone(),
            opt(o.threshold, 6),
            o.detected.to_string(),
            o.n_low.to_string(),
            fmt3(o.detection_rate),
            o.false_alarms.to_string(),
            o.n_high.to_string(),
            fmt3(o.false_alarm_rate),
            fmt3(o.precision),
            fmt3(o.f1),
        ]);
    }
    t
}

pub fn detection_markdown(outcomes: &[(String, &DetectionOutcome)]) -> String {
    let mut t = Table::new("scopemh.detection", &["Method", "θ", "Detected", "False alarms", "F1"]);
    for (label, o) in outcomes {
        t.push(vec![
            label.clone(),
            opt(o.threshold, 3),
            format!("{}/{} ({})", o.detected, o.n_low, fmt3(o.detection_rate)),
            format!("{}/{} ({})", o.false_alarms, o.n_high, fmt3(o.false_alarm_rate)),
            fmt3(o.f1),
        ]);
    }
    t.to_markdown()
}

/// Per-conversation flag listing for one or more outcomes.
pub fn flag_listing(audit: &Audit, outcomes: &[(String, &DetectionOutcome)]) -> Table {
    let mut cols = vec!["conversation_id", "quality"];
    cols.extend(outcomes.iter().map(|(l, _)| l.as_str()));
    let mut t = Table::new("scopemh.flags", &cols);
    for r in &audit.rows {
        let mut row = vec![r.id.clone(), r.quality.to_string()];
        row.extend(outcomes.iter().map(|(_, o)| u8::from(o.flags(&r.id)).to_string()));
        t.push(row);
    }
    t
}

pub fn sweep_table(sweep: &SweepResult) -> Table {
    let mut t = Table::new("scopemh.sweep", &["threshold", "f1", "detected", "false_alarms", "best"]);
    for p in &sweep.grid {
        t.push(vec![
            fmt_n(p.threshold, 6),
            fmt_n(p.f1, 6),
            p.detected.to_string(),
            p.false_alarms.to_string(),
            u8::from(p.threshold == sweep.best_threshold).to_string(),
        ]);
    }
    t
}

pub fn curve_table(name: &str, curve: &CurveResult) -> Table {
    let (x, y) = match curve.kind {
        CurveKind::Roc => ("fpr", "tpr"),
        CurveKind::PrecisionRecall => ("recall", "precision"),
    };
    let mut t = Table::new("scopemh.curve", &["curve", x, y]);
    for (a, b) in &curve.points {
        t.push(vec![name.to_string(), fmt_n(*a, 6), fmt_n(*b, 6)]);
    }
    t
}

pub fn bootstrap_line(ci: &BootstrapCI) -> String {
    format!(
        "{}: {} [{}, {}] ({} resamples, seed {})",
        ci.statistic_name,
        fmt3(ci.point),
        fmt3(ci.lo),
        fmt3(ci.hi),
        ci.resamples,
        ci.seed
    )
}

pub fn counts_markdown(counts: &CorpusCounts, stats: Option<&TurnStatistics>) -> String {
    let mut t = Table::new("scopemh.counts", &["Statistic", "Value"]);
    let rows = [
        ("Total conversations", counts.total.to_string()),
        ("High-quality", counts.high_total.to_string()),
        ("Low-quality", counts.low_total.to_string()),
        ("Excluded (fewer than 4 labeled client turns)", counts.excluded.to_string()),
        ("Conversations used in analysis", counts.included().to_string()),
        ("Included high / low", format!("{} / {}", counts.high_included, counts.low_included)),
    ];
    for (k, v) in rows {
        t.push(vec![k.into(), v]);
    }
    if let Some(s) = stats {
        t.push(vec!["Utterances per conversation (mean ± sd)".into(), format!("{} ± {}", fmt_n(s.mean, 1), fmt_n(s.std_dev, 1))]);
        t.push(vec![
            "Utterances per conversation (min / p25 / median / p75 / max)".into(),
            format!("{} / {} / {} / {} / {}", s.min, fmt_n(s.p25, 1), fmt_n(s.median, 1), fmt_n(s.p75, 1), s.max),
        ]);
    }
    t.to_markdown()
}

/// Mean half ratios per quality group.
pub fn half_ratio_markdown(audit: &Audit) -> String {
    let mut t = Table::new("scopemh.halves", &["Group", "Change (1st)", "Change (2nd)", "Sustain (1st)", "Sustain (2nd)"]);
    for q in [Quality::High, Quality::Low] {
        if let Some(m) = audit.mean_half_ratios(q) {
            let mut row = vec![q.to_string()];
            row.extend(m.iter().map(|v| fmt3(*v)));
            t.push(row);
        }
    }
    t.to_markdown()
}

pub fn case_markdown(trace: &CaseTrace, per_turn: Option<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "<!-- scopemh.case v{REPORT_VERSION} -->");
    let _ = writeln!(out, "# Conversation {}\n", trace.conversation_id);
    let _ = writeln!(out, "Timeline: `{}`\n", trace.timeline());
    let mut t = Table::new("scopemh.case", &["Quantity", "First half", "Second half"]);
    let (h1, h2) = trace.half_lengths;
    t.push(vec!["Labeled client turns".into(), h1.to_string(), h2.to_string()]);
    t.push(vec![
        "Change talk".into(),
        format!("{} ({})", trace.change_counts_by_half.0, fmt3(trace.change_ratios_by_half.0)),
        format!("{} ({})", trace.change_counts_by_half.1, fmt3(trace.change_ratios_by_half.1)),
    ]);
    t.push(vec![
        "Sustain talk".into(),
        format!("{} ({})", trace.sustain_counts_by_half.0, fmt3(trace.sustain_ratios_by_half.0)),
        format!("{} ({})", trace.sustain_counts_by_half.1, fmt3(trace.sustain_ratios_by_half.1)),
    ]);
    out.push_str(&t.to_markdown());
    out.push('\n');
    if let Some(pt) = per_turn {
        let _ = writeln!(out, "- Per-turn score: {}", fmt3(pt));
    }
    let _ = writeln!(out, "- Sustain-talk delta: {}", fmt3(trace.sustain_delta));
    let _ = writeln!(out, "- Backslide index: {}", fmt3(trace.backslide_index));
    let _ = writeln!(out, "- Longest sustain streak: {}", trace.s_max);
    let _ = writeln!(out, "- Longest neutral run: {}", trace.longest_neutral_run);
    let runs: Vec<String> = trace.sustain_runs.iter().map(|(s, l)| format!("{s}+{l}")).collect();
    let _ = writeln!(out, "- Sustain runs (start+length): {}", if runs.is_empty() { "none".into() } else { runs.join(", ") });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delimited_round_trip_with_awkward_cells() {
        let mut t = Table::new("scopemh.test", &["a", "b"]);
        t.push(vec!["x,y".into(), "say \"hi\"".into()]);
        t.push(vec!["".into(), "-0.125000".into()]);
        for d in *b",\t" {
            let text = t.to_delimited(d).unwrap();
            assert!(text.starts_with("# scopemh.test v1\n"));
            assert_eq!(Table::parse_delimited(&text, d).unwrap(), t);
        }
    }

    #[test]
    fn no_negative_zero() {
        assert_eq!(fmt3(-0.0001), "0.000");
        assert_eq!(fmt3(-0.0929), "-0.093");
        assert_eq!(fmt_p(0.0004), "<0.001");
    }

    #[test]
    fn header_is_required() {
        assert!(matches!(Table::parse_delimited("a,b\n1,2\n", b','), Err(Error::MalformedHeader(_))));
    }
}
