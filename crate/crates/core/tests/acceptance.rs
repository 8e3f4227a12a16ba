//! Acceptance checks, one line per criterion.
//!
//! Dataset criteria read the corpus named by `SCOPEMH_DATA` and are skipped
//! with a notice when it is unset or missing. Everything else always runs.

mod common;

use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scopemh::audit::{Audit, CensoringMode, MetricSelector};
use scopemh::corpus::{ingest, Corpus, IngestOptions, Quality, TalkType};
use scopemh::detection::{self, combine, CombineRule, DetectionOutcome, GridSpec, Method};
use scopemh::metrics::{self, SequenceMetrics};
use scopemh::scope::{render_card, validate_card, Dimension, DeterminantCatalog, ScopeCard};
use scopemh::stats::{self, compare_groups, score_curve, CompareOptions, CurveKind, GroupComparison};
use scopemh::tsni::{self, catalog, Alphabets, CompressionFn, SafetyPredicate, Space, DEFAULT_SPACE_CAP};
use scopemh::DATA_PATH_ENV;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;
type DataCheck = fn(&Data) -> Check;

fn outcome(r: Check) -> Outcome {
    match r {
        Ok(s) => Outcome::Pass(s),
        Err(s) => Outcome::Fail(s),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{name} = {got:.4}, expected {want} ± {tol}"))
}

struct Data {
    corpus: Corpus,
    audit: Audit,
}

enum Dataset {
    Loaded(Box<Data>),
    Absent(String),
    Broken(String),
}

fn load_dataset() -> Dataset {
    let Some(path) = std::env::var_os(DATA_PATH_ENV) else {
        return Dataset::Absent(format!("{DATA_PATH_ENV} not set"));
    };
    // Tests run from the crate directory; also try the workspace root.
    let path = std::path::PathBuf::from(path);
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let path = if path.is_relative() && !path.exists() { root.join(&path) } else { path };
    let file = match std::fs::File::open(&path) {
        Ok(f) => f,
        Err(e) => return Dataset::Absent(format!("{} unreadable: {e}", path.display())),
    };
    match ingest(file, &IngestOptions::default()) {
        Ok(corpus) => {
            let audit = Audit::from_corpus(&corpus);
            Dataset::Loaded(Box::new(Data { corpus, audit }))
        }
        Err(e) => Dataset::Broken(format!("ingestion failed: {e}")),
    }
}

fn compare(audit: &Audit, metric: MetricSelector, mode: CensoringMode) -> Result<GroupComparison, String> {
    let high = audit.values(metric, Quality::High, mode);
    let low = audit.values(metric, Quality::Low, mode);
    compare_groups(metric.name(), &high, &low, CompareOptions::default()).map_err(|e| format!("{}: {e}", metric.name()))
}

fn counts(o: &DetectionOutcome) -> (usize, usize) {
    (o.detected, o.false_alarms)
}

fn fmt_counts(o: &DetectionOutcome) -> String {
    format!("{}/{} detected, {}/{} false alarms", o.detected, o.n_low, o.false_alarms, o.n_high)
}

/// Data-driven per-turn threshold reproducing the full-conversation per-turn
/// counts.
fn per_turn_threshold(audit: &Audit) -> Result<f64, String> {
    let sweep = detection::sweep_threshold(audit, Method::PerTurn, &GridSpec::DataDriven).map_err(|e| e.to_string())?;
    sweep
        .grid
        .iter()
        .find(|p| (p.detected, p.false_alarms) == (19, 55))
        .map(|p| p.threshold)
        .ok_or_else(|| {
            format!(
                "no data-driven threshold gives 19/21 and 55/110 (F1-best {:.4} gives F1 {:.3})",
                sweep.best_threshold, sweep.best_f1
            )
        })
}

fn corpus_counts(d: &Data) -> Check {
    let c = d.corpus.counts();
    let got = (c.total, c.included(), c.high_included, c.low_included, c.excluded);
    ensure(got == (133, 131, 110, 21, 2), || format!("got total/included/high/low/excluded = {got:?}"))?;
    Ok("133 conversations, 131 included (110/21), 2 excluded".into())
}

fn group_comparison(d: &Data) -> Check {
    let a = &d.audit;
    let inc = CensoringMode::Include;
    let pt = compare(a, MetricSelector::PerTurn, inc)?;
    within("per-turn d", pt.cohens_d, 1.599, 0.005)?;
    ensure(pt.t_p_value < 0.001, || format!("per-turn p = {}", pt.t_p_value))?;
    let sd = compare(a, MetricSelector::SustainDelta, inc)?;
    within("sustain-delta d", sd.cohens_d, 0.462, 0.005)?;
    within("sustain-delta p", sd.t_p_value, 0.037, 0.005)?;
    within("temporal d", compare(a, MetricSelector::TemporalScore, inc)?.cohens_d, 0.353, 0.01)?;
    within("S_max d", compare(a, MetricSelector::SMax, inc)?.cohens_d, -0.274, 0.01)?;
    let mut notes = Vec::new();
    for (metric, want) in [(MetricSelector::TNorm, 0.211), (MetricSelector::TDom, 0.177)] {
        let mut matched = Vec::new();
        let mut seen = Vec::new();
        for mode in [CensoringMode::Include, CensoringMode::EventsOnly] {
            match compare(a, metric, mode) {
                Ok(c) => {
                    seen.push(format!("{}: d={:.3}", mode.as_str(), c.cohens_d));
                    if (c.cohens_d - want).abs() <= 0.02 {
                        matched.push(mode.as_str());
                    }
                }
                Err(e) => seen.push(format!("{}: {e}", mode.as_str())),
            }
        }
        ensure(!matched.is_empty(), || format!("{} d={want} not matched ({})", metric.name(), seen.join(", ")))?;
        notes.push(format!("{} matches under {}", metric.name(), matched.join("+")));
    }
    Ok(format!("d = 1.599/0.462/0.353/-0.274 reproduced; {}", notes.join("; ")))
}

fn rank_tests(d: &Data) -> Check {
    let a = &d.audit;
    let inc = CensoringMode::Include;
    let pt = compare(a, MetricSelector::PerTurn, inc)?;
    let sd = compare(a, MetricSelector::SustainDelta, inc)?;
    ensure(pt.mw_u == 1997.5, || format!("per-turn U = {}", pt.mw_u))?;
    ensure(sd.mw_u == 1405.5, || format!("sustain-delta U = {}", sd.mw_u))?;
    within("sustain-delta MW p", sd.mw_p_value, 0.112, 0.01)?;
    within("temporal MW p", compare(a, MetricSelector::TemporalScore, inc)?.mw_p_value, 0.102, 0.01)?;
    within("S_max MW p", compare(a, MetricSelector::SMax, inc)?.mw_p_value, 0.187, 0.01)?;
    Ok("U = 1997.5 and 1405.5; MW p = 0.112/0.102/0.187 (normal approximation, tie and continuity corrected)".into())
}

fn full_detection(d: &Data) -> Check {
    let a = &d.audit;
    let temporal = detection::detect_temporal(a, -0.10).map_err(|e| e.to_string())?;
    ensure(counts(&temporal) == (7, 13), || format!("temporal: {}", fmt_counts(&temporal)))?;
    let theta_pt = per_turn_threshold(a)?;
    let pt = detection::detect_per_turn(a, theta_pt).map_err(|e| e.to_string())?;
    let either = combine(&[&temporal, &pt], CombineRule::Either).map_err(|e| e.to_string())?;
    ensure(counts(&either) == (19, 55), || format!("combined: {}", fmt_counts(&either)))?;
    Ok(format!("temporal 7/21, 13/110; per-turn at θ_PT={theta_pt:.4} and combined 19/21, 55/110"))
}

fn midpoint_detection(d: &Data) -> Check {
    let a = &d.audit;
    let theta_pt = per_turn_threshold(a)?;
    let ew = detection::detect_early_warning(a, -0.15, theta_pt).map_err(|e| e.to_string())?;
    let got = [counts(&ew.temporal), counts(&ew.per_turn), counts(&ew.combined)];
    ensure(got == [(9, 25), (13, 22), (14, 35)], || {
        format!("temporal/per-turn/combined (detected, false alarms) = {got:?} at θ_PT={theta_pt:.4}")
    })?;
    Ok(format!("9/25, 13/22, 14/35 at θ_ew=-0.15, θ_PT={theta_pt:.4}"))
}

fn sweeps(d: &Data) -> Check {
    let a = &d.audit;
    let grid = GridSpec::default_temporal();
    let t = detection::sweep_threshold(a, Method::Temporal, &grid).map_err(|e| e.to_string())?;
    let e = detection::sweep_threshold(a, Method::EarlyWarningTemporal, &grid).map_err(|e| e.to_string())?;
    within("best θ", t.best_threshold, -0.10, 1e-9)?;
    within("best temporal F1", t.best_f1, 0.381, 0.002)?;
    within("best θ_ew", e.best_threshold, -0.15, 1e-9)?;
    within("best early-warning F1", e.best_f1, 0.327, 0.002)?;
    Ok(format!("θ=-0.10 (F1 {:.3}), θ_ew=-0.15 (F1 {:.3})", t.best_f1, e.best_f1))
}

fn curves(d: &Data) -> Check {
    let mut notes = Vec::new();
    for (metric, roc_want, pr_want) in [(MetricSelector::PerTurn, 0.865, 0.697), (MetricSelector::SustainDelta, 0.608, 0.265)] {
        let (scores, labels): (Vec<f64>, Vec<bool>) = d
            .audit
            .rows
            .iter()
            .filter_map(|r| metric.value(r, CensoringMode::Include).map(|v| (-v, r.quality == Quality::Low)))
            .unzip();
        let roc = score_curve(&scores, &labels, CurveKind::Roc).map_err(|e| e.to_string())?;
        let pr = score_curve(&scores, &labels, CurveKind::PrecisionRecall).map_err(|e| e.to_string())?;
        within(&format!("{} ROC AUC", metric.name()), roc.auc, roc_want, 0.005)?;
        within(&format!("{} PR AUC", metric.name()), pr.auc, pr_want, 0.005)?;
        notes.push(format!("{} {:.3}/{:.3}", metric.name(), roc.auc, pr.auc));
    }
    Ok(format!("ROC/PR AUC: {}", notes.join(", ")))
}

fn bootstrap(d: &Data) -> Check {
    let a = &d.audit;
    let o = detection::detect_temporal(a, -0.10).map_err(|e| e.to_string())?;
    for seed in [1, 7, 42, 2024, 31337] {
        let ci = detection::bootstrap_outcome(a, &o, 1000, seed).map_err(|e| e.to_string())?;
        within(&format!("seed {seed} detection lo"), ci.detection.lo, 0.14, 0.03)?;
        within(&format!("seed {seed} detection hi"), ci.detection.hi, 0.52, 0.03)?;
        within(&format!("seed {seed} false-alarm lo"), ci.false_alarm.lo, 0.05, 0.03)?;
        within(&format!("seed {seed} false-alarm hi"), ci.false_alarm.hi, 0.16, 0.03)?;
    }
    Ok("detection and false-alarm intervals within ±0.03 for 5 seeds".into())
}

fn cases(d: &Data) -> Check {
    let get = |id: &str| {
        let conv = d.corpus.get(id).ok_or_else(|| format!("conversation {id} missing"))?;
        let trace = metrics::case_trace(conv).map_err(|e| e.to_string())?;
        let pt = metrics::per_turn_score(conv).map_err(|e| e.to_string())?;
        Ok::<_, String>((trace, pt))
    };
    let (t27, pt27) = get("27")?;
    within("27 PT", pt27, 0.083, 0.001)?;
    within("27 Δs", t27.sustain_delta, -0.667, 0.001)?;
    ensure(t27.s_max == 4, || format!("27 S_max = {}", t27.s_max))?;
    let (t53, pt53) = get("53")?;
    within("53 PT", pt53, 0.630, 0.001)?;
    within("53 Δs", t53.sustain_delta, 0.0, 0.0005)?;
    ensure(t53.longest_neutral_run == 37, || format!("53 neutral run = {}", t53.longest_neutral_run))?;
    let (t131, _) = get("131")?;
    ensure(t131.change_counts_by_half == (8, 3), || format!("131 change counts = {:?}", t131.change_counts_by_half))?;
    within("131 Δs", t131.sustain_delta, 0.093, 0.002)?;
    Ok("conversations 27, 53 and 131 match".into())
}

fn naive_sustain_delta(seq: &[TalkType]) -> f64 {
    let h = seq.len() / 2;
    let s = |xs: &[TalkType]| xs.iter().filter(|t| **t == TalkType::Sustain).count() as f64 / xs.len() as f64;
    s(&seq[..h]) - s(&seq[h..])
}

fn property_suite() -> Check {
    // Bounds, oracle equivalence and reversal over exhaustive small spaces.
    for n in 2..=8 {
        for seq in common::all_sequences(n) {
            let m = SequenceMetrics::of(&seq).ok_or("metrics undefined")?;
            ensure((-1.0..=1.0).contains(&m.sustain_delta) && (-2.0..=2.0).contains(&m.temporal_score), || format!("bounds {seq:?}"))?;
            ensure(m.t_norm > 0.0 && m.t_norm <= 1.0 && m.s_max <= n, || format!("bounds {seq:?}"))?;
            ensure((m.sustain_delta - naive_sustain_delta(&seq)).abs() < 1e-12, || format!("oracle {seq:?}"))?;
            if n % 2 == 0 {
                let rev: Vec<_> = seq.iter().rev().copied().collect();
                let r = SequenceMetrics::of(&rev).ok_or("metrics undefined")?;
                ensure((m.sustain_delta + r.sustain_delta).abs() < 1e-12, || format!("reversal {seq:?}"))?;
                ensure((m.temporal_score + r.temporal_score).abs() < 1e-12, || format!("reversal {seq:?}"))?;
            }
        }
    }
    // Full six-metric oracle on length 8 lives in the metric property tests;
    // here the dominance and streak definitions are rechecked directly.
    for seq in common::all_sequences(8) {
        let m = SequenceMetrics::of(&seq).ok_or("metrics undefined")?;
        let dom = (0..6).find(|&i| seq[i..i + 3].iter().filter(|t| **t == TalkType::Sustain).count() >= 2);
        ensure(m.dominance.t_dom == dom.map_or(8, |i| i + 3) && m.dominance.censored == dom.is_none(), || format!("T_dom {seq:?}"))?;
        let streak = (0..8).map(|i| seq[i..].iter().take_while(|t| **t == TalkType::Sustain).count()).max().unwrap_or(0);
        ensure(m.s_max == streak, || format!("S_max {seq:?}"))?;
        let h = |k: TalkType, lo: usize, hi: usize| seq[lo..hi].iter().filter(|t| **t == k).count() as f64 / 4.0;
        let temp = (h(TalkType::Change, 4, 8) - h(TalkType::Change, 0, 4)) + (h(TalkType::Sustain, 0, 4) - h(TalkType::Sustain, 4, 8));
        ensure((m.temporal_score - temp).abs() < 1e-12, || format!("TEMP {seq:?}"))?;
        ensure((m.ew_delta - (h(TalkType::Change, 0, 4) - h(TalkType::Sustain, 0, 4))).abs() < 1e-12, || format!("EW {seq:?}"))?;
        ensure((m.t_norm - m.dominance.t_dom as f64 / 8.0).abs() < 1e-12, || format!("T_norm {seq:?}"))?;
    }

    // AUC equals U / (n1 n2).
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..100 {
        let (n1, n2) = (rng.gen_range(1..30), rng.gen_range(1..30));
        let draw = |rng: &mut ChaCha8Rng, shift: f64| -> f64 { ((rng.gen::<f64>() + shift) * 5.0).round() / 5.0 };
        let pos: Vec<f64> = (0..n1).map(|_| draw(&mut rng, 0.2)).collect();
        let neg: Vec<f64> = (0..n2).map(|_| draw(&mut rng, 0.0)).collect();
        let scores: Vec<f64> = pos.iter().chain(&neg).copied().collect();
        let labels: Vec<bool> = (0..n1 + n2).map(|k| k < n1).collect();
        let roc = score_curve(&scores, &labels, CurveKind::Roc).map_err(|e| e.to_string())?;
        let u = stats::mann_whitney_u(&pos, &neg);
        ensure((roc.auc - u / (n1 * n2) as f64).abs() <= 1e-9, || format!("AUC identity sample {i}"))?;
    }

    // Detection monotonicity and sweep optimality on synthetic corpora.
    for seed in 0..10 {
        let audit = Audit::from_corpus(&common::random_corpus(seed, 30));
        let thresholds: Vec<f64> = (0..=20).map(|k| -1.0 + 0.1 * k as f64).collect();
        for method in [Method::PerTurn, Method::Temporal, Method::EarlyWarningTemporal, Method::EarlyWarningPerTurn] {
            let mut prev: Option<DetectionOutcome> = None;
            for &t in &thresholds {
                let o = detection::detect(&audit, method, t).map_err(|e| e.to_string())?;
                if let Some(p) = &prev {
                    ensure(p.flagged.is_subset(&o.flagged), || format!("monotonicity seed {seed}"))?;
                }
                prev = Some(o);
            }
        }
        let sweep = detection::sweep_threshold(&audit, Method::PerTurn, &GridSpec::DataDriven).map_err(|e| e.to_string())?;
        let best = sweep
            .grid
            .iter()
            .map(|p| detection::detect(&audit, Method::PerTurn, p.threshold).map(|o| o.f1))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        ensure((best - sweep.best_f1).abs() < 1e-12, || format!("sweep optimality seed {seed}"))?;
    }

    // Bootstrap determinism.
    let flags: Vec<bool> = (0..21).map(|i| i % 3 == 0).collect();
    for seed in [3, 5, 8] {
        let a = stats::bootstrap_rate_ci("rate", &flags, 1000, seed).map_err(|e| e.to_string())?;
        let b = stats::bootstrap_rate_ci("rate", &flags, 1000, seed).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("bootstrap seed {seed} not reproducible"))?;
    }
    Ok("bounds, reversal, 3^8 oracle, AUC≡U/(n1·n2), monotonicity, sweep optimality, bootstrap determinism".into())
}

fn tsni_suite() -> Check {
    let space = Space::new(Alphabets::default(), 4).map_err(|e| e.to_string())?;
    for s in catalog::builtin_predicates(1, 2, 1).map_err(|e| e.to_string())? {
        let r = tsni::check_identifiability(&space, &CompressionFn::identity(), &s, DEFAULT_SPACE_CAP).map_err(|e| e.to_string())?;
        ensure(r.identifiable && r.max_fiber_size == 1, || format!("identity not identifiable for {}", s.name))?;
    }
    for phi in [CompressionFn::constant(), CompressionFn::event_count("escalate")] {
        let w = tsni::find_witness(&space, &phi, &SafetyPredicate::constant(tsni::SAFE), DEFAULT_SPACE_CAP).map_err(|e| e.to_string())?;
        ensure(w.is_none(), || format!("constant S produced a witness under {}", phi.name))?;
    }
    let binary = Space::new(Alphabets::new(["u"], ["respond", "escalate"], ["0", "1"]), 3).map_err(|e| e.to_string())?;
    let phi = CompressionFn::event_count("escalate");
    let s = catalog::escalation_latency(1);
    let w = tsni::find_witness(&binary, &phi, &s, DEFAULT_SPACE_CAP)
        .map_err(|e| e.to_string())?
        .ok_or("no witness for event-count φ with latency S")?;
    // Independent re-evaluation from rendered symbols.
    let eval = |t: &tsni::Trajectory| {
        let rows = t.render(&binary.alphabets);
        let count = rows.iter().filter(|r| r[1] == "escalate").count();
        let safe = match rows.iter().position(|r| r[2] == "1") {
            None => true,
            Some(c) => rows[c..rows.len().min(c + 2)].iter().any(|r| r[1] == "escalate"),
        };
        (count, safe)
    };
    let (a, b) = (eval(&w.tau), eval(&w.tau_prime));
    ensure(a.0 == b.0 && a.1 != b.1, || "witness failed independent re-evaluation".into())?;
    Ok(format!(
        "identity identifiable for all catalog predicates; constant S has no witness; witness {} / {}",
        w.tau.key(&binary.alphabets),
        w.tau_prime.key(&binary.alphabets)
    ))
}

fn scope_suite() -> Check {
    let catalog = DeterminantCatalog::default();
    let load = |name: &str| -> Result<ScopeCard, String> {
        let text = std::fs::read_to_string(common::fixture_path("cards").join(name)).map_err(|e| e.to_string())?;
        ScopeCard::from_json(&text).map_err(|e| e.to_string())
    };
    let expectations: [(&str, &[Dimension]); 3] = [
        ("timing_endpoint_only.json", &[Dimension::InterventionTiming]),
        ("harm_accumulation_traced.json", &[]),
        ("no_claims.json", &[]),
    ];
    for (name, unsupported) in expectations {
        let card = load(name)?;
        let r = validate_card(&card, &catalog).map_err(|e| e.to_string())?;
        ensure(r.unsupported == unsupported, || format!("{name}: unsupported {:?}", r.unsupported))?;
        let (v, _) = card.clone().validated(&catalog).map_err(|e| e.to_string())?;
        let x = render_card(&v, &catalog).map_err(|e| e.to_string())?;
        let y = render_card(&v, &catalog).map_err(|e| e.to_string())?;
        ensure(x == y, || format!("{name}: render not deterministic"))?;
        // Adding every known determinant never loses support.
        let mut bigger = card.clone();
        for req in catalog.requirements() {
            bigger.preserved_evidence.extend(req.required_determinants);
        }
        let rb = validate_card(&bigger, &catalog).map_err(|e| e.to_string())?;
        ensure(r.supported.iter().all(|d| rb.supported.contains(d)) && rb.unsupported.is_empty(), || format!("{name}: monotonicity"))?;
    }
    Ok("three example cards validated as specified; render determinism; monotone support".into())
}

fn main() -> ExitCode {
    let dataset = load_dataset();
    let data_checks: [(&str, DataCheck); 9] = [
        ("dataset corpus counts", corpus_counts),
        ("dataset group comparison table", group_comparison),
        ("dataset Mann-Whitney table", rank_tests),
        ("dataset full-conversation detection", full_detection),
        ("dataset midpoint detection", midpoint_detection),
        ("dataset threshold sweeps", sweeps),
        ("dataset ROC/PR curves", curves),
        ("dataset bootstrap intervals", bootstrap),
        ("dataset case values", cases),
    ];
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    for (name, check) in data_checks {
        let o = match &dataset {
            Dataset::Loaded(d) => outcome(check(d)),
            Dataset::Absent(why) => Outcome::Skip(format!("{why}; point {DATA_PATH_ENV} at the AnnoMI CSV to run")),
            Dataset::Broken(why) => Outcome::Fail(why.clone()),
        };
        results.push((name, o));
    }
    results.push(("property suite", outcome(property_suite())));
    results.push(("non-identifiability suite", outcome(tsni_suite())));
    results.push(("reporting card suite", outcome(scope_suite())));

    let mut failed = 0;
    for (name, o) in &results {
        match o {
            Outcome::Pass(s) => println!("PASS  {name}: {s}"),
            Outcome::Fail(s) => {
                failed += 1;
                println!("FAIL  {name}: {s}");
            }
            Outcome::Skip(s) => println!("SKIP  {name}: {s}"),
        }
    }
    println!("N/A   population-scale clinical usage claims: out of scope, no check");
    let passed = results.iter().filter(|(_, o)| matches!(o, Outcome::Pass(_))).count();
    let skipped = results.len() - passed - failed;
    println!("acceptance: {passed} passed, {failed} failed, {skipped} skipped");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
