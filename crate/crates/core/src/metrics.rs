//! Per-conversation scores and case diagnostics.
//!
//! Client-language metrics work over the ordered sequence of labeled client
//! talk types, split at `⌊n/2⌋`. They are available both on raw sequences
//! ([`SequenceMetrics`]) and on conversations, where the exclusion rule
//! (at least four labeled client turns) is enforced.

use serde::{Deserialize, Serialize};

use crate::corpus::{first_half_therapist_turns, split_halves, Conversation, TalkType, TherapistBehavior};
use crate::{Error, Result};

/// Width of the sliding window used for first sustain dominance.
pub const DOMINANCE_WINDOW: usize = 3;
/// Sustain turns needed inside a window for dominance (strict majority of 3).
pub const DOMINANCE_MIN_SUSTAIN: usize = 2;

/// Change and sustain ratios of each half.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfRatios {
    pub change_first: f64,
    pub change_second: f64,
    pub sustain_first: f64,
    pub sustain_second: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dominance {
    /// 1-based index of the final turn of the first dominated window, or `n`
    /// when censored.
    pub t_dom: usize,
    pub censored: bool,
}

/// The per-conversation score vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    /// `None` when the conversation has no coded therapist turns.
    pub per_turn: Option<f64>,
    pub sustain_delta: f64,
    pub temporal_score: f64,
    pub t_dom: usize,
    pub t_dom_censored: bool,
    pub t_norm: f64,
    pub s_max: usize,
    pub ew_delta: f64,
    pub half_ratios: HalfRatios,
    /// Number of labeled client turns.
    pub n: usize,
}

fn count(turns: &[TalkType], kind: TalkType) -> usize {
    turns.iter().filter(|t| **t == kind).count()
}

fn ratio(turns: &[TalkType], kind: TalkType) -> f64 {
    count(turns, kind) as f64 / turns.len() as f64
}

/// Longest run of `kind` in `turns`.
pub fn longest_run(turns: &[TalkType], kind: TalkType) -> usize {
    runs(turns, kind).into_iter().map(|(_, len)| len).max().unwrap_or(0)
}

/// Maximal runs of `kind` as `(start, length)`, start 1-based.
pub fn runs(turns: &[TalkType], kind: TalkType) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, t) in turns.iter().enumerate() {
        match (*t == kind, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s + 1, i - s));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, turns.len() - s));
    }
    out
}

/// First sustain dominance over any sequence. Sequences shorter than the
/// window are censored at `n`.
pub fn first_sustain_dominance_of(turns: &[TalkType]) -> Dominance {
    let hit = turns
        .windows(DOMINANCE_WINDOW)
        .position(|w| count(w, TalkType::Sustain) >= DOMINANCE_MIN_SUSTAIN);
    match hit {
        Some(start) => Dominance { t_dom: start + DOMINANCE_WINDOW, censored: false },
        None => Dominance { t_dom: turns.len(), censored: true },
    }
}

/// Client-language metrics of a talk-type sequence with at least two turns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceMetrics {
    pub half_ratios: HalfRatios,
    pub sustain_delta: f64,
    pub temporal_score: f64,
    pub dominance: Dominance,
    pub t_norm: f64,
    pub s_max: usize,
    pub ew_delta: f64,
}

impl SequenceMetrics {
    pub fn of(turns: &[TalkType]) -> Option<Self> {
        let (first, second) = split_halves(turns)?;
        let half_ratios = HalfRatios {
            change_first: ratio(first, TalkType::Change),
            change_second: ratio(second, TalkType::Change),
            sustain_first: ratio(first, TalkType::Sustain),
            sustain_second: ratio(second, TalkType::Sustain),
        };
        let sustain_delta = half_ratios.sustain_first - half_ratios.sustain_second;
        let dominance = first_sustain_dominance_of(turns);
        Some(SequenceMetrics {
            half_ratios,
            sustain_delta,
            temporal_score: (half_ratios.change_second - half_ratios.change_first) + sustain_delta,
            dominance,
            t_norm: dominance.t_dom as f64 / turns.len() as f64,
            s_max: longest_run(turns, TalkType::Sustain),
            ew_delta: half_ratios.change_first - half_ratios.sustain_first,
        })
    }
}

/// Fraction of behaviors that are reflection or question.
pub fn per_turn_score_of(behaviors: &[TherapistBehavior]) -> Option<f64> {
    if behaviors.is_empty() {
        return None;
    }
    let hits = behaviors.iter().filter(|b| b.is_reflective()).count();
    Some(hits as f64 / behaviors.len() as f64)
}

pub fn per_turn_score(conv: &Conversation) -> Result<f64> {
    per_turn_score_of(&conv.therapist_behaviors()).ok_or_else(|| Error::UndefinedScore(conv.id.clone()))
}

/// Per-turn score over therapist turns before the client midpoint.
pub fn first_half_per_turn_score(conv: &Conversation) -> Result<f64> {
    per_turn_score_of(&first_half_therapist_turns(conv)?).ok_or_else(|| Error::UndefinedScore(conv.id.clone()))
}

fn sequence_metrics(conv: &Conversation) -> Result<(Vec<TalkType>, SequenceMetrics)> {
    let turns = conv.require_included()?;
    let m = SequenceMetrics::of(&turns).expect("included conversations have at least four turns");
    Ok((turns, m))
}

pub fn sustain_delta(conv: &Conversation) -> Result<f64> {
    Ok(sequence_metrics(conv)?.1.sustain_delta)
}

pub fn temporal_score(conv: &Conversation) -> Result<f64> {
    Ok(sequence_metrics(conv)?.1.temporal_score)
}

pub fn first_sustain_dominance(conv: &Conversation) -> Result<Dominance> {
    Ok(sequence_metrics(conv)?.1.dominance)
}

pub fn max_sustain_streak(conv: &Conversation) -> Result<usize> {
    Ok(sequence_metrics(conv)?.1.s_max)
}

pub fn early_warning_score(conv: &Conversation) -> Result<f64> {
    Ok(sequence_metrics(conv)?.1.ew_delta)
}

/// All scores of an included conversation. A missing per-turn score does not
/// fail the vector; it is reported as `None`.
pub fn metric_vector(conv: &Conversation) -> Result<MetricVector> {
    let (turns, m) = sequence_metrics(conv)?;
    Ok(MetricVector {
        per_turn: per_turn_score(conv).ok(),
        sustain_delta: m.sustain_delta,
        temporal_score: m.temporal_score,
        t_dom: m.dominance.t_dom,
        t_dom_censored: m.dominance.censored,
        t_norm: m.t_norm,
        s_max: m.s_max,
        ew_delta: m.ew_delta,
        half_ratios: m.half_ratios,
        n: turns.len(),
    })
}

/// Diagnostic trace used for case analysis: stagnation and backsliding
/// indicators alongside the raw sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseTrace {
    pub conversation_id: String,
    pub talk_type_sequence: Vec<TalkType>,
    /// `(start, length)` with 1-based start.
    pub sustain_runs: Vec<(usize, usize)>,
    pub longest_neutral_run: usize,
    pub change_counts_by_half: (usize, usize),
    pub sustain_counts_by_half: (usize, usize),
    pub half_lengths: (usize, usize),
    pub sustain_ratios_by_half: (f64, f64),
    pub change_ratios_by_half: (f64, f64),
    /// `c̄1 − c̄2`; positive when change talk declines.
    pub backslide_index: f64,
    pub sustain_delta: f64,
    pub s_max: usize,
}

impl CaseTrace {
    /// Compact one-letter rendering, e.g. `NNS|SSC`, with `|` at the midpoint.
    pub fn timeline(&self) -> String {
        let (first, _) = self.half_lengths;
        let mut s = String::with_capacity(self.talk_type_sequence.len() + 1);
        for (i, t) in self.talk_type_sequence.iter().enumerate() {
            if i == first {
                s.push('|');
            }
            s.push(t.symbol());
        }
        s
    }
}

pub fn case_trace(conv: &Conversation) -> Result<CaseTrace> {
    let (turns, m) = sequence_metrics(conv)?;
    let (first, second) = split_halves(&turns).expect("included");
    Ok(CaseTrace {
        conversation_id: conv.id.clone(),
        sustain_runs: runs(&turns, TalkType::Sustain),
        longest_neutral_run: longest_run(&turns, TalkType::Neutral),
        change_counts_by_half: (count(first, TalkType::Change), count(second, TalkType::Change)),
        sustain_counts_by_half: (count(first, TalkType::Sustain), count(second, TalkType::Sustain)),
        half_lengths: (first.len(), second.len()),
        sustain_ratios_by_half: (m.half_ratios.sustain_first, m.half_ratios.sustain_second),
        change_ratios_by_half: (m.half_ratios.change_first, m.half_ratios.change_second),
        backslide_index: m.half_ratios.change_first - m.half_ratios.change_second,
        sustain_delta: m.sustain_delta,
        s_max: m.s_max,
        talk_type_sequence: turns,
    })
}
