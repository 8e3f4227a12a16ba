//! Group comparisons, bootstrap intervals and threshold-free curves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Percentile of an ascending slice with linear interpolation between order
/// statistics (`q` in percent).
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty sample");
    let pos = (q / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Midranks (1-based) of the pooled sample, and the tie-group sizes.
pub fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = rank;
        }
        ties.push(j - i);
        i = j;
    }
    (ranks, ties)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestVariant {
    /// Student's test with pooled variance.
    #[default]
    Pooled,
    Welch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MannWhitneyMethod {
    /// Normal approximation with tie and continuity corrections.
    #[default]
    Asymptotic,
    /// Exact permutation distribution of U, for groups of at most
    /// [`EXACT_U_MAX_GROUP`] observations.
    Exact,
}

pub const EXACT_U_MAX_GROUP: usize = 12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CompareOptions {
    pub t_test: TTestVariant,
    pub mann_whitney: MannWhitneyMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub metric_name: String,
    pub n_high: usize,
    pub n_low: usize,
    pub mean_high: f64,
    pub mean_low: f64,
    pub diff: f64,
    pub t_variant: TTestVariant,
    pub t_statistic: f64,
    pub t_df: f64,
    pub t_p_value: f64,
    /// Two-sided p of the other t-test variant, for sensitivity reporting.
    pub t_p_value_alternate: f64,
    /// `(mean_high − mean_low) / pooled SD`.
    pub cohens_d: f64,
    /// Mann–Whitney U of the high group (pairs with high > low, ties ½).
    pub mw_u: f64,
    pub mw_method: MannWhitneyMethod,
    pub mw_p_value: f64,
}

struct TTest {
    statistic: f64,
    df: f64,
    p_value: f64,
}

fn two_sided_t(statistic: f64, df: f64) -> f64 {
    if statistic.is_nan() {
        return 1.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(statistic.abs())).min(1.0)
}

fn t_test(a: &[f64], b: &[f64], variant: TTestVariant) -> TTest {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (v1, v2) = (sample_variance(a), sample_variance(b));
    let diff = mean(a) - mean(b);
    let (se, df) = match variant {
        TTestVariant::Pooled => {
            let pooled = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0);
            ((pooled * (1.0 / n1 + 1.0 / n2)).sqrt(), n1 + n2 - 2.0)
        }
        TTestVariant::Welch => {
            let (q1, q2) = (v1 / n1, v2 / n2);
            let df = (q1 + q2).powi(2) / (q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0));
            ((q1 + q2).sqrt(), df)
        }
    };
    let statistic = diff / se;
    TTest { statistic, df, p_value: two_sided_t(statistic, df) }
}

/// Pooled standard deviation of two samples.
pub fn pooled_sd(a: &[f64], b: &[f64]) -> f64 {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    (((n1 - 1.0) * sample_variance(a) + (n2 - 1.0) * sample_variance(b)) / (n1 + n2 - 2.0)).sqrt()
}

/// U statistic of `a` against `b`: pairs with `a > b` plus half the ties.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, _) = midranks(&pooled);
    let r_a: f64 = ranks[..a.len()].iter().sum();
    let n1 = a.len() as f64;
    r_a - n1 * (n1 + 1.0) / 2.0
}

fn mann_whitney_asymptotic_p(a: &[f64], b: &[f64], u: f64) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (_, ties) = midranks(&pooled);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let tie_term: f64 = ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum::<f64>() / (n * (n - 1.0));
    let sigma = (n1 * n2 / 12.0 * ((n + 1.0) - tie_term)).sqrt();
    if sigma == 0.0 || !sigma.is_finite() {
        return 1.0;
    }
    let mu = n1 * n2 / 2.0;
    let z = ((u - mu).abs() - 0.5) / sigma;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * normal.sf(z)).min(1.0)
}

/// Exact two-sided p of U under the permutation distribution, ties handled
/// through midranks.
pub fn mann_whitney_exact_p(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() > EXACT_U_MAX_GROUP || b.len() > EXACT_U_MAX_GROUP {
        return Err(Error::InvalidParameter(format!(
            "exact Mann-Whitney supports groups of at most {EXACT_U_MAX_GROUP}"
        )));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, _) = midranks(&pooled);
    // Doubled midranks are integers.
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    let k = a.len();
    // ways[j][s]: subsets of size j with doubled rank sum s.
    let mut ways = vec![vec![0u128; max_sum + 1]; k + 1];
    ways[0][0] = 1;
    for &r in &doubled {
        for j in (1..=k).rev() {
            for s in (r..=max_sum).rev() {
                ways[j][s] += ways[j - 1][s - r];
            }
        }
    }
    let total: u128 = ways[k].iter().sum();
    let observed: usize = doubled[..k].iter().sum();
    let mean2 = doubled.iter().sum::<usize>() as f64 * k as f64 / pooled.len() as f64;
    let dev = (observed as f64 - mean2).abs();
    let extreme: u128 = ways[k]
        .iter()
        .enumerate()
        .filter(|(s, _)| (*s as f64 - mean2).abs() >= dev - 1e-9)
        .map(|(_, w)| *w)
        .sum();
    Ok((extreme as f64 / total as f64).min(1.0))
}

fn check_sample(name: &str, xs: &[f64]) -> Result<()> {
    if xs.len() < 2 {
        return Err(Error::SampleTooSmall(format!("{name} group has {} values, need at least 2", xs.len())));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} group contains non-finite values")));
    }
    Ok(())
}

/// t-test, Cohen's d and Mann–Whitney U between a high- and low-quality
/// sample.
pub fn compare_groups(metric_name: &str, high: &[f64], low: &[f64], options: CompareOptions) -> Result<GroupComparison> {
    check_sample("high", high)?;
    check_sample("low", low)?;
    let sd = pooled_sd(high, low);
    if sd == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let (mean_high, mean_low) = (mean(high), mean(low));
    let alternate = match options.t_test {
        TTestVariant::Pooled => TTestVariant::Welch,
        TTestVariant::Welch => TTestVariant::Pooled,
    };
    let t = t_test(high, low, options.t_test);
    let t_alt = t_test(high, low, alternate);
    let u = mann_whitney_u(high, low);
    let mw_p_value = match options.mann_whitney {
        MannWhitneyMethod::Asymptotic => mann_whitney_asymptotic_p(high, low, u),
        MannWhitneyMethod::Exact => mann_whitney_exact_p(high, low)?,
    };
    Ok(GroupComparison {
        metric_name: metric_name.to_string(),
        n_high: high.len(),
        n_low: low.len(),
        mean_high,
        mean_low,
        diff: mean_high - mean_low,
        t_variant: options.t_test,
        t_statistic: t.statistic,
        t_df: t.df,
        t_p_value: t.p_value,
        t_p_value_alternate: t_alt.p_value,
        cohens_d: (mean_high - mean_low) / sd,
        mw_u: u,
        mw_method: options.mann_whitney,
        mw_p_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCI {
    pub statistic_name: String,
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub resamples: usize,
    pub seed: u64,
}

/// Percentile bootstrap of a success rate. Resample `i` draws from its own
/// ChaCha stream `i` under `seed`, so the result does not depend on how the
/// work is scheduled.
pub fn bootstrap_rate_ci(statistic_name: &str, flags: &[bool], resamples: usize, seed: u64) -> Result<BootstrapCI> {
    if flags.is_empty() {
        return Err(Error::EmptyInput("bootstrap item set is empty".into()));
    }
    if resamples == 0 {
        return Err(Error::InvalidParameter("resamples must be at least 1".into()));
    }
    let n = flags.len();
    let point = flags.iter().filter(|f| **f).count() as f64 / n as f64;
    let mut rates: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let hits = (0..n).filter(|_| flags[rng.gen_range(0..n)]).count();
            hits as f64 / n as f64
        })
        .collect();
    rates.sort_by(f64::total_cmp);
    Ok(BootstrapCI {
        statistic_name: statistic_name.to_string(),
        point,
        lo: percentile_sorted(&rates, 2.5),
        hi: percentile_sorted(&rates, 97.5),
        resamples,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Roc,
    PrecisionRecall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveResult {
    pub kind: CurveKind,
    /// ROC: `(false positive rate, true positive rate)`;
    /// PR: `(recall, precision)`, recall ascending.
    pub points: Vec<(f64, f64)>,
    /// Trapezoidal area under `points`.
    pub auc: f64,
    /// Step-wise average precision (PR curves only).
    pub average_precision: Option<f64>,
}

pub fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum()
}

/// Cumulative `(tp, fp)` after each distinct score, highest score first.
fn cumulative_counts(scores: &[f64], positive: &[bool]) -> Vec<(usize, usize)> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut out = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    for (k, &i) in idx.iter().enumerate() {
        if positive[i] {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_tie = idx.get(k + 1).is_none_or(|&j| scores[j] != scores[i]);
        if last_of_tie {
            out.push((tp, fp));
        }
    }
    out
}

/// ROC or precision–recall curve of risk `scores` (higher means more likely
/// positive) against `positive` labels, swept over every distinct score.
pub fn score_curve(scores: &[f64], positive: &[bool], kind: CurveKind) -> Result<CurveResult> {
    if scores.len() != positive.len() {
        return Err(Error::InvalidParameter("scores and labels differ in length".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter("scores must be finite".into()));
    }
    let p = positive.iter().filter(|x| **x).count();
    let n = positive.len() - p;
    if p == 0 || n == 0 {
        return Err(Error::SingleClass);
    }
    let counts = cumulative_counts(scores, positive);
    match kind {
        CurveKind::Roc => {
            let mut points = vec![(0.0, 0.0)];
            points.extend(counts.iter().map(|&(tp, fp)| (fp as f64 / n as f64, tp as f64 / p as f64)));
            let auc = trapezoid(&points);
            Ok(CurveResult { kind, points, auc, average_precision: None })
        }
        CurveKind::PrecisionRecall => {
            // Thresholds past the first one reaching full recall add nothing.
            let stop = counts.iter().position(|&(tp, _)| tp == p).expect("all positives counted");
            let mut points = vec![(0.0, 1.0)];
            let mut ap = 0.0;
            let mut prev_recall = 0.0;
            for &(tp, fp) in &counts[..=stop] {
                let recall = tp as f64 / p as f64;
                let precision = tp as f64 / (tp + fp) as f64;
                ap += (recall - prev_recall) * precision;
                prev_recall = recall;
                points.push((recall, precision));
            }
            let auc = trapezoid(&points);
            Ok(CurveResult { kind, points, auc, average_precision: Some(ap) })
        }
    }
}
