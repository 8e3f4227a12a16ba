#![allow(dead_code)]

use std::path::PathBuf;

use scopemh::audit::Audit;
use scopemh::corpus::{ingest, Corpus, IngestOptions, TalkType};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_corpus() -> Corpus {
    let file = std::fs::File::open(fixture_path("sample_corpus.csv")).unwrap();
    ingest(file, &IngestOptions::default()).unwrap()
}

pub fn fixture_audit() -> Audit {
    Audit::from_corpus(&fixture_corpus())
}

pub fn expected() -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(fixture_path("sample_expected.json")).unwrap()).unwrap()
}

pub fn parse_seq(s: &str) -> Vec<TalkType> {
    s.chars()
        .map(|c| match c {
            'C' => TalkType::Change,
            'N' => TalkType::Neutral,
            'S' => TalkType::Sustain,
            other => panic!("bad symbol {other}"),
        })
        .collect()
}

/// All sequences of length `n` over {C, N, S}.
pub fn all_sequences(n: usize) -> impl Iterator<Item = Vec<TalkType>> {
    (0..3usize.pow(n as u32)).map(move |mut code| {
        (0..n)
            .map(|_| {
                let t = TalkType::ALL[code % 3];
                code /= 3;
                t
            })
            .collect()
    })
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

use scopemh::corpus::{Conversation, Quality, Speaker, TherapistBehavior, Utterance};

/// Builds a conversation alternating therapist and client turns.
pub fn synthetic_conversation(id: &str, quality: Quality, client: &[TalkType], therapist: &[TherapistBehavior]) -> Conversation {
    let mut utterances = Vec::new();
    let mut order = 0u64;
    let mut push = |speaker, b, t| {
        utterances.push(Utterance {
            conversation_id: id.to_string(),
            order_index: order,
            speaker,
            therapist_behavior: b,
            client_talk_type: t,
            text: None,
        });
        order += 1;
    };
    for i in 0..client.len().max(therapist.len()) {
        if let Some(b) = therapist.get(i) {
            push(Speaker::Therapist, Some(*b), None);
        }
        if let Some(t) = client.get(i) {
            push(Speaker::Client, None, Some(*t));
        }
    }
    Conversation::new(id, quality, utterances).unwrap()
}

pub const BEHAVIORS: [TherapistBehavior; 4] =
    [TherapistBehavior::Reflection, TherapistBehavior::Question, TherapistBehavior::TherapistInput, TherapistBehavior::Other];

pub fn random_corpus(seed: u64, size: usize) -> Corpus {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let convs = (0..size)
        .map(|i| {
            let quality = if i % 3 == 0 || (i % 2 == 1 && rng.gen_bool(0.2)) { Quality::Low } else { Quality::High };
            let n = rng.gen_range(4..30);
            let client: Vec<TalkType> = (0..n).map(|_| TalkType::ALL[rng.gen_range(0..3)]).collect();
            let therapist: Vec<TherapistBehavior> = (0..n).map(|_| BEHAVIORS[rng.gen_range(0..4)]).collect();
            synthetic_conversation(&format!("c{i:03}"), quality, &client, &therapist)
        })
        .collect();
    Corpus::from_conversations(convs).unwrap()
}
