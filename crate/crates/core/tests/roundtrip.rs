mod common;

use proptest::prelude::*;
use scopemh::audit::Audit;
use scopemh::corpus::{
    ingest, ColumnMapping, Conversation, Corpus, IngestOptions, Quality, Speaker, TalkType, Utterance,
};
use scopemh::report::{metric_table, Table, METRIC_TABLE_DECIMALS};

fn utterance() -> impl Strategy<Value = (bool, Option<usize>, Option<String>)> {
    (any::<bool>(), prop::option::weighted(0.8, 0usize..4), prop::option::of("[a-z ,\"']{1,12}[a-z]"))
}

fn conversation(idx: usize) -> impl Strategy<Value = Conversation> {
    (any::<bool>(), prop::collection::vec(utterance(), 0..30)).prop_map(move |(low, us)| {
        let id = format!("conv-{idx}");
        let utterances = us
            .into_iter()
            .enumerate()
            .map(|(i, (client, label, text))| Utterance {
                conversation_id: id.clone(),
                order_index: (i * 2) as u64,
                speaker: if client { Speaker::Client } else { Speaker::Therapist },
                therapist_behavior: label.filter(|_| !client).map(|k| common::BEHAVIORS[k]),
                client_talk_type: label.filter(|k| client && *k < 3).map(|k| TalkType::ALL[k]),
                text,
            })
            .collect();
        Conversation::new(id, if low { Quality::Low } else { Quality::High }, utterances).unwrap()
    })
}

fn corpus() -> impl Strategy<Value = Corpus> {
    (1usize..6)
        .prop_flat_map(|n| (0..n).map(conversation).collect::<Vec<_>>())
        .prop_map(|cs| Corpus::from_conversations(cs.into_iter().filter(|c| !c.utterances.is_empty()).collect()).unwrap())
        .prop_filter("non-empty", |c| !c.conversations().is_empty())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jsonl_round_trip(c in corpus()) {
        let mut buf = Vec::new();
        c.write_jsonl(&mut buf).unwrap();
        let back = Corpus::read_jsonl(buf.as_slice()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn delimited_round_trip(c in corpus(), tab in any::<bool>()) {
        let delimiter = if tab { b'\t' } else { b',' };
        let mapping = ColumnMapping::default();
        let mut buf = Vec::new();
        c.write_delimited(&mut buf, &mapping, delimiter).unwrap();
        let back = ingest(buf.as_slice(), &IngestOptions { mapping, delimiter }).unwrap();
        prop_assert_eq!(back.conversations(), c.conversations());
    }
}

#[test]
fn metric_table_reparses_to_emitted_precision() {
    let audit = Audit::from_corpus(&common::random_corpus(4, 25));
    let table = metric_table(&audit);
    let text = table.to_delimited(b',').unwrap();
    assert!(text.starts_with("# scopemh.metrics v1\n"));
    let back = Table::parse_delimited(&text, b',').unwrap();
    assert_eq!(back, table);
    let tol = 0.5 * 10f64.powi(-(METRIC_TABLE_DECIMALS as i32)) + 1e-15;
    let col = |name: &str| back.column(name).unwrap();
    for (row, r) in back.rows.iter().zip(&audit.rows) {
        assert_eq!(row[col("conversation_id")], r.id);
        let get = |name: &str| row[col(name)].parse::<f64>().unwrap();
        assert!((get("sustain_delta") - r.metrics.sustain_delta).abs() <= tol);
        assert!((get("temporal_score") - r.metrics.temporal_score).abs() <= tol);
        assert!((get("t_norm") - r.metrics.t_norm).abs() <= tol);
        assert!((get("ew_delta") - r.metrics.ew_delta).abs() <= tol);
        assert_eq!(get("t_dom") as usize, r.metrics.t_dom);
        assert_eq!(get("s_max") as usize, r.metrics.s_max);
        match r.metrics.per_turn {
            Some(v) => assert!((get("per_turn") - v).abs() <= tol),
            None => assert!(row[col("per_turn")].is_empty()),
        }
    }
}

#[test]
fn fixture_survives_both_formats() {
    let c = common::fixture_corpus();
    let mut jsonl = Vec::new();
    c.write_jsonl(&mut jsonl).unwrap();
    assert!(String::from_utf8_lossy(&jsonl).lines().next().unwrap().contains("\"schema\":\"scopemh.corpus\""));
    let back = Corpus::read_jsonl(jsonl.as_slice()).unwrap();
    assert_eq!(back.conversations(), c.conversations());
    assert_eq!(Audit::from_corpus(&back).rows, Audit::from_corpus(&c).rows);
}
