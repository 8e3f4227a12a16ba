mod common;

use std::collections::BTreeSet;

use common::random_corpus;
use proptest::prelude::*;
use scopemh::audit::{Audit, CensoringMode, MetricSelector};
use scopemh::corpus::Quality;
use scopemh::detection::{
    bootstrap_outcome, combine, detect, f1_score, sweep_threshold, CombineRule, GridSpec, Method,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flags_grow_with_threshold(seed in any::<u64>(), a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let audit = Audit::from_corpus(&random_corpus(seed, 24));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for method in [Method::PerTurn, Method::Temporal, Method::EarlyWarningTemporal, Method::EarlyWarningPerTurn] {
            let x = detect(&audit, method, lo).unwrap();
            let y = detect(&audit, method, hi).unwrap();
            prop_assert!(x.flagged.is_subset(&y.flagged));
            prop_assert!(x.detected <= y.detected && x.false_alarms <= y.false_alarms);
        }
    }

    #[test]
    fn sweep_picks_the_best_grid_point(seed in any::<u64>()) {
        let audit = Audit::from_corpus(&random_corpus(seed, 30));
        for (method, metric) in [(Method::PerTurn, MetricSelector::PerTurn), (Method::Temporal, MetricSelector::SustainDelta)] {
            for spec in [GridSpec::DataDriven, GridSpec::default_temporal()] {
                let sweep = sweep_threshold(&audit, method, &spec).unwrap();
                // Exhaustive recomputation straight from the rows.
                let mut best = f64::NEG_INFINITY;
                for p in &sweep.grid {
                    let mut detected = 0;
                    let mut false_alarms = 0;
                    for r in &audit.rows {
                        if let Some(v) = metric.value(r, CensoringMode::Include) {
                            if v < p.threshold - 1e-9 {
                                if r.quality == Quality::Low { detected += 1 } else { false_alarms += 1 }
                            }
                        }
                    }
                    prop_assert_eq!((p.detected, p.false_alarms), (detected, false_alarms));
                    let f1 = f1_score(detected, false_alarms, audit.count(Quality::Low));
                    prop_assert!((f1 - p.f1).abs() < 1e-12);
                    best = best.max(f1);
                }
                prop_assert!((sweep.best_f1 - best).abs() < 1e-12);
                prop_assert!(sweep.grid.iter().any(|p| p.threshold == sweep.best_threshold && (p.f1 - best).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn combination_is_set_union_and_intersection(seed in any::<u64>(), t in -0.6f64..0.0, p in 0.2f64..0.8) {
        let audit = Audit::from_corpus(&random_corpus(seed, 24));
        let a = detect(&audit, Method::EarlyWarningTemporal, t).unwrap();
        let b = detect(&audit, Method::EarlyWarningPerTurn, p).unwrap();
        let either = combine(&[&a, &b], CombineRule::Either).unwrap();
        let both = combine(&[&a, &b], CombineRule::Both).unwrap();
        let union: BTreeSet<String> = a.flagged.union(&b.flagged).cloned().collect();
        let inter: BTreeSet<String> = a.flagged.intersection(&b.flagged).cloned().collect();
        prop_assert_eq!(&either.flagged, &union);
        prop_assert_eq!(&both.flagged, &inter);
        let low = |s: &BTreeSet<String>| s.iter().filter(|id| audit.get(id).unwrap().quality == Quality::Low).count();
        prop_assert_eq!(either.detected, low(&union));
        prop_assert_eq!(both.false_alarms, inter.len() - low(&inter));
    }
}

#[test]
fn combining_different_populations_fails() {
    let a = detect(&Audit::from_corpus(&random_corpus(1, 20)), Method::Temporal, -0.1).unwrap();
    let b = detect(&Audit::from_corpus(&random_corpus(2, 21)), Method::Temporal, -0.1).unwrap();
    assert!(combine(&[&a, &b], CombineRule::Either).is_err());
}

#[test]
fn very_low_threshold_flags_nothing() {
    let audit = Audit::from_corpus(&random_corpus(3, 30));
    let o = detect(&audit, Method::Temporal, -1.5).unwrap();
    assert!(o.flagged.is_empty());
    assert_eq!((o.detected, o.false_alarms, o.f1), (0, 0, 0.0));
}

#[test]
fn operating_point_bootstrap_is_deterministic() {
    let audit = Audit::from_corpus(&random_corpus(9, 40));
    let o = detect(&audit, Method::Temporal, -0.1).unwrap();
    let a = bootstrap_outcome(&audit, &o, 500, 11).unwrap();
    let b = bootstrap_outcome(&audit, &o, 500, 11).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.detection.point, o.detection_rate);
    assert_eq!(a.false_alarm.point, o.false_alarm_rate);
}
