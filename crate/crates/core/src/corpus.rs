//! Annotated dialogue corpora: ingestion, ordering, exclusion and export.
//!
//! Input is delimiter-separated text with one row per utterance. The default
//! [`ColumnMapping`] targets the public AnnoMI release; every column name can
//! be overridden so other MITI-coded corpora load without code changes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Conversations with fewer labeled client turns than this are excluded.
pub const MIN_LABELED_CLIENT_TURNS: usize = 4;

/// Schema tag written on the first line of a corpus dump.
pub const CORPUS_SCHEMA: &str = "scopemh.corpus";
pub const CORPUS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    Therapist,
    Client,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TherapistBehavior {
    Reflection,
    Question,
    TherapistInput,
    Other,
}

impl TherapistBehavior {
    /// Reflection and questioning are the behaviors counted by the per-turn
    /// baseline.
    pub fn is_reflective(self) -> bool {
        matches!(self, TherapistBehavior::Reflection | TherapistBehavior::Question)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TalkType {
    Change,
    Neutral,
    Sustain,
}

impl TalkType {
    pub const ALL: [TalkType; 3] = [TalkType::Change, TalkType::Neutral, TalkType::Sustain];

    pub fn symbol(self) -> char {
        match self {
            TalkType::Change => 'C',
            TalkType::Neutral => 'N',
            TalkType::Sustain => 'S',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quality {
    High,
    Low,
}

macro_rules! label_str {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $(<$ty>::$variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = ();
            fn from_str(s: &str) -> std::result::Result<Self, ()> {
                let s = s.trim();
                $(if s.eq_ignore_ascii_case($name) { return Ok(<$ty>::$variant); })+
                Err(())
            }
        }
    };
}

label_str!(Speaker { Therapist => "therapist", Client => "client" });
label_str!(TherapistBehavior {
    Reflection => "reflection",
    Question => "question",
    TherapistInput => "therapist_input",
    Other => "other",
});
label_str!(TalkType { Change => "change", Neutral => "neutral", Sustain => "sustain" });
label_str!(Quality { High => "high", Low => "low" });

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub conversation_id: String,
    pub order_index: u64,
    pub speaker: Speaker,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub therapist_behavior: Option<TherapistBehavior>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client_talk_type: Option<TalkType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

/// One dialogue, utterances strictly ascending by `order_index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    pub id: String,
    pub quality: Quality,
    pub utterances: Vec<Utterance>,
}

impl Conversation {
    /// Builds a conversation, sorting utterances and enforcing the speaker and
    /// ordering invariants.
    pub fn new(id: impl Into<String>, quality: Quality, mut utterances: Vec<Utterance>) -> Result<Self> {
        let id = id.into();
        utterances.sort_by_key(|u| u.order_index);
        for pair in utterances.windows(2) {
            if pair[0].order_index == pair[1].order_index {
                return Err(Error::DuplicateOrder {
                    conversation: id,
                    order_index: pair[0].order_index,
                });
            }
        }
        for u in &mut utterances {
            match u.speaker {
                Speaker::Therapist => u.client_talk_type = None,
                Speaker::Client => u.therapist_behavior = None,
            }
            u.conversation_id.clone_from(&id);
        }
        Ok(Conversation { id, quality, utterances })
    }

    /// Therapist utterances carrying a behavior code, in order.
    pub fn therapist_turns(&self) -> impl Iterator<Item = &Utterance> + '_ {
        self.utterances
            .iter()
            .filter(|u| u.speaker == Speaker::Therapist && u.therapist_behavior.is_some())
    }

    pub fn therapist_behaviors(&self) -> Vec<TherapistBehavior> {
        self.therapist_turns().filter_map(|u| u.therapist_behavior).collect()
    }

    /// Client utterances carrying a talk-type label, in order.
    pub fn labeled_client_utterances(&self) -> impl Iterator<Item = &Utterance> + '_ {
        self.utterances
            .iter()
            .filter(|u| u.speaker == Speaker::Client && u.client_talk_type.is_some())
    }

    pub fn labeled_client_turns(&self) -> Vec<TalkType> {
        self.labeled_client_utterances().filter_map(|u| u.client_talk_type).collect()
    }

    pub fn labeled_client_count(&self) -> usize {
        self.labeled_client_utterances().count()
    }

    pub fn is_included(&self) -> bool {
        self.labeled_client_count() >= MIN_LABELED_CLIENT_TURNS
    }

    pub(crate) fn require_included(&self) -> Result<Vec<TalkType>> {
        let turns = self.labeled_client_turns();
        if turns.len() < MIN_LABELED_CLIENT_TURNS {
            return Err(Error::Excluded { id: self.id.clone(), n: turns.len() });
        }
        Ok(turns)
    }
}

/// Splits a talk-type sequence at `⌊n/2⌋`.
pub fn split_halves(turns: &[TalkType]) -> Option<(&[TalkType], &[TalkType])> {
    if turns.len() < 2 {
        return None;
    }
    Some(turns.split_at(turns.len() / 2))
}

/// First and second halves of the labeled client turns. The first half holds
/// `⌊n/2⌋` turns.
pub fn split_client_halves(conv: &Conversation) -> Result<(Vec<TalkType>, Vec<TalkType>)> {
    let turns = conv.labeled_client_turns();
    match split_halves(&turns) {
        Some((a, b)) => Ok((a.to_vec(), b.to_vec())),
        None => Err(Error::DegenerateSplit { id: conv.id.clone(), n: turns.len() }),
    }
}

/// Therapist behaviors observed before the second client half begins, i.e.
/// with an order index strictly below that of labeled client turn `⌊n/2⌋+1`.
///
/// An empty result is not an error; callers treat it as an undefined
/// midpoint per-turn score.
pub fn first_half_therapist_turns(conv: &Conversation) -> Result<Vec<TherapistBehavior>> {
    let client: Vec<&Utterance> = conv.labeled_client_utterances().collect();
    if client.is_empty() {
        return Err(Error::DegenerateSplit { id: conv.id.clone(), n: 0 });
    }
    let boundary = client[client.len() / 2].order_index;
    Ok(conv
        .therapist_turns()
        .filter(|u| u.order_index < boundary)
        .filter_map(|u| u.therapist_behavior)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    TooFewLabeledClientTurns,
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExclusionReason::TooFewLabeledClientTurns => f.write_str("fewer than 4 labeled client turns"),
        }
    }
}

/// Counts of labels that could not be used during ingestion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestWarnings {
    /// Own-speaker label values that are not in the recognized vocabulary.
    pub unrecognized_labels: usize,
    /// Labels found in the other speaker's column (e.g. a talk type on a
    /// therapist row), dropped.
    pub cross_speaker_labels: usize,
}

impl IngestWarnings {
    pub fn total(&self) -> usize {
        self.unrecognized_labels + self.cross_speaker_labels
    }
}

/// An ingested corpus partitioned by the exclusion rule. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    conversations: Vec<Conversation>,
    excluded: BTreeMap<String, ExclusionReason>,
    pub warnings: IngestWarnings,
}

impl Corpus {
    pub fn from_conversations(conversations: Vec<Conversation>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &conversations {
            if !seen.insert(c.id.as_str()) {
                return Err(Error::Malformed(format!("conversation `{}` appears twice", c.id)));
            }
        }
        let excluded = conversations
            .iter()
            .filter(|c| !c.is_included())
            .map(|c| (c.id.clone(), ExclusionReason::TooFewLabeledClientTurns))
            .collect();
        Ok(Corpus { conversations, excluded, warnings: IngestWarnings::default() })
    }

    /// All conversations in source order.
    pub fn conversations(&self) -> &[Conversation] {
        &self.conversations
    }

    pub fn included(&self) -> impl Iterator<Item = &Conversation> + '_ {
        self.conversations.iter().filter(move |c| !self.excluded.contains_key(&c.id))
    }

    pub fn excluded(&self) -> impl Iterator<Item = (&Conversation, ExclusionReason)> + '_ {
        self.conversations
            .iter()
            .filter_map(move |c| self.excluded.get(&c.id).map(|r| (c, *r)))
    }

    pub fn get(&self, id: &str) -> Option<&Conversation> {
        self.conversations.iter().find(|c| c.id == id)
    }

    pub fn exclusion_reason(&self, id: &str) -> Option<ExclusionReason> {
        self.excluded.get(id).copied()
    }

    pub fn counts(&self) -> CorpusCounts {
        let mut counts = CorpusCounts { total: self.conversations.len(), ..Default::default() };
        for c in &self.conversations {
            match (self.excluded.contains_key(&c.id), c.quality) {
                (true, Quality::High) => { counts.excluded += 1; counts.high_total += 1 }
                (true, Quality::Low) => { counts.excluded += 1; counts.low_total += 1 }
                (false, Quality::High) => { counts.high_included += 1; counts.high_total += 1 }
                (false, Quality::Low) => { counts.low_included += 1; counts.low_total += 1 }
            }
        }
        counts
    }

    /// Utterances-per-conversation summary over all conversations.
    pub fn turn_statistics(&self) -> Option<TurnStatistics> {
        let lengths: Vec<f64> = self.conversations.iter().map(|c| c.utterances.len() as f64).collect();
        TurnStatistics::from_lengths(&lengths)
    }

    /// Writes the canonical line-delimited dump: a schema header line, then one
    /// JSON record per conversation.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let header = serde_json::json!({
            "schema": CORPUS_SCHEMA,
            "version": CORPUS_SCHEMA_VERSION,
            "conversations": self.conversations.len(),
        });
        writeln!(out, "{header}")?;
        for c in &self.conversations {
            let record = ConversationRecord {
                id: &c.id,
                quality: c.quality,
                excluded: self.excluded.get(&c.id).map(|r| r.to_string()),
                utterances: c
                    .utterances
                    .iter()
                    .map(|u| UtteranceRecord {
                        order_index: u.order_index,
                        speaker: u.speaker,
                        therapist_behavior: u.therapist_behavior,
                        client_talk_type: u.client_talk_type,
                        text: u.text.clone(),
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = loop {
            match lines.next() {
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
                None => return Err(Error::EmptySource),
            }
        };
        let header: serde_json::Value = serde_json::from_str(&header)?;
        if header.get("schema").and_then(|v| v.as_str()) != Some(CORPUS_SCHEMA) {
            return Err(Error::MalformedHeader(format!("expected schema `{CORPUS_SCHEMA}`")));
        }
        match header.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(CORPUS_SCHEMA_VERSION) => {}
            other => {
                return Err(Error::MalformedHeader(format!("unsupported corpus version {other:?}")))
            }
        }
        let mut conversations = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: OwnedConversationRecord = serde_json::from_str(&line)?;
            let utterances = rec
                .utterances
                .into_iter()
                .map(|u| Utterance {
                    conversation_id: rec.id.clone(),
                    order_index: u.order_index,
                    speaker: u.speaker,
                    therapist_behavior: u.therapist_behavior,
                    client_talk_type: u.client_talk_type,
                    text: u.text,
                })
                .collect();
            conversations.push(Conversation::new(rec.id, rec.quality, utterances)?);
        }
        Corpus::from_conversations(conversations)
    }

    /// Writes the corpus back out as delimited text under `mapping`, one row
    /// per utterance. Absent labels are written as empty cells.
    pub fn write_delimited<W: Write>(&self, out: W, mapping: &ColumnMapping, delimiter: u8) -> Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
        let mut header = vec![
            mapping.conversation_id.as_str(),
            mapping.quality.as_str(),
            mapping.order.as_str(),
            mapping.speaker.as_str(),
            mapping.therapist_behavior.as_str(),
            mapping.client_talk_type.as_str(),
        ];
        if let Some(text) = &mapping.text {
            header.push(text.as_str());
        }
        w.write_record(&header)?;
        for c in &self.conversations {
            for u in &c.utterances {
                let order = u.order_index.to_string();
                let mut row = vec![
                    c.id.as_str(),
                    c.quality.as_str(),
                    order.as_str(),
                    u.speaker.as_str(),
                    u.therapist_behavior.map_or("", |b| b.as_str()),
                    u.client_talk_type.map_or("", |t| t.as_str()),
                ];
                if mapping.text.is_some() {
                    row.push(u.text.as_deref().unwrap_or(""));
                }
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct ConversationRecord<'a> {
    id: &'a str,
    quality: Quality,
    #[serde(skip_serializing_if = "Option::is_none")]
    excluded: Option<String>,
    utterances: Vec<UtteranceRecord>,
}

#[derive(Deserialize)]
struct OwnedConversationRecord {
    id: String,
    quality: Quality,
    utterances: Vec<UtteranceRecord>,
}

#[derive(Serialize, Deserialize)]
struct UtteranceRecord {
    order_index: u64,
    speaker: Speaker,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    therapist_behavior: Option<TherapistBehavior>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    client_talk_type: Option<TalkType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CorpusCounts {
    pub total: usize,
    pub high_total: usize,
    pub low_total: usize,
    pub high_included: usize,
    pub low_included: usize,
    pub excluded: usize,
}

impl CorpusCounts {
    pub fn included(&self) -> usize {
        self.high_included + self.low_included
    }
}

/// Summary of conversation lengths (in utterances). Percentiles use linear
/// interpolation between order statistics; the standard deviation is the
/// sample (n−1) estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurnStatistics {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub max: f64,
}

impl TurnStatistics {
    pub fn from_lengths(lengths: &[f64]) -> Option<Self> {
        if lengths.is_empty() {
            return None;
        }
        let mut sorted = lengths.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / n;
        let std_dev = if sorted.len() > 1 {
            (sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(TurnStatistics {
            count: sorted.len(),
            mean,
            std_dev,
            min: sorted[0],
            p25: crate::stats::percentile_sorted(&sorted, 25.0),
            median: crate::stats::percentile_sorted(&sorted, 50.0),
            p75: crate::stats::percentile_sorted(&sorted, 75.0),
            max: sorted[sorted.len() - 1],
        })
    }
}

/// Column names used to read a delimited corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub conversation_id: String,
    pub quality: String,
    pub order: String,
    pub speaker: String,
    pub therapist_behavior: String,
    pub client_talk_type: String,
    /// Optional; transcripts are carried but never analysed.
    pub text: Option<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            conversation_id: "transcript_id".into(),
            quality: "mi_quality".into(),
            order: "utterance_id".into(),
            speaker: "interlocutor".into(),
            therapist_behavior: "main_therapist_behaviour".into(),
            client_talk_type: "client_talk_type".into(),
            text: Some("utterance_text".into()),
        }
    }
}

impl ColumnMapping {
    /// Applies an override of the form `field=column`. Field names are
    /// `id`, `quality`, `order`, `speaker`, `behavior`, `talk_type`, `text`.
    /// `text=` (empty) disables the transcript column.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (field, column) = spec
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("mapping `{spec}` is not of the form field=column")))?;
        let column = column.trim().to_string();
        let slot = match field.trim() {
            "id" | "conversation_id" => &mut self.conversation_id,
            "quality" => &mut self.quality,
            "order" | "order_index" => &mut self.order,
            "speaker" => &mut self.speaker,
            "behavior" | "therapist_behavior" => &mut self.therapist_behavior,
            "talk_type" | "client_talk_type" => &mut self.client_talk_type,
            "text" => {
                self.text = (!column.is_empty()).then_some(column);
                return Ok(());
            }
            other => return Err(Error::InvalidParameter(format!("unknown mapping field `{other}`"))),
        };
        if column.is_empty() {
            return Err(Error::InvalidParameter(format!("mapping `{spec}` has an empty column name")));
        }
        *slot = column;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub mapping: ColumnMapping,
    pub delimiter: u8,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { mapping: ColumnMapping::default(), delimiter: b',' }
    }
}

fn is_null_token(s: &str) -> bool {
    let s = s.trim();
    s.is_empty()
        || ["n/a", "na", "nan", "none", "null", "-"].iter().any(|t| s.eq_ignore_ascii_case(t))
}

struct ColumnIndex {
    id: usize,
    quality: usize,
    order: usize,
    speaker: usize,
    behavior: usize,
    talk_type: usize,
    text: Option<usize>,
}

impl ColumnIndex {
    fn resolve(headers: &csv::StringRecord, mapping: &ColumnMapping) -> Result<Self> {
        let mut positions: HashMap<&str, usize> = HashMap::new();
        for (i, h) in headers.iter().enumerate() {
            let h = h.trim().trim_start_matches('\u{feff}');
            if positions.insert(h, i).is_some() && !h.is_empty() {
                return Err(Error::MalformedHeader(format!("column `{h}` appears twice")));
            }
        }
        let find = |name: &str| positions.get(name).copied().ok_or_else(|| Error::MissingColumn(name.to_string()));
        Ok(ColumnIndex {
            id: find(&mapping.conversation_id)?,
            quality: find(&mapping.quality)?,
            order: find(&mapping.order)?,
            speaker: find(&mapping.speaker)?,
            behavior: find(&mapping.therapist_behavior)?,
            talk_type: find(&mapping.client_talk_type)?,
            // The transcript column is optional even when named.
            text: mapping.text.as_deref().and_then(|t| positions.get(t).copied()),
        })
    }
}

/// Reads a delimited corpus, assembles and sorts conversations and applies
/// the exclusion rule.
pub fn ingest<R: Read>(source: R, options: &IngestOptions) -> Result<Corpus> {
    let mapping = &options.mapping;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .flexible(false)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::EmptySource);
    }
    let cols = ColumnIndex::resolve(&headers, mapping)?;

    let mut warnings = IngestWarnings::default();
    let mut order_of_ids: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, (Quality, Vec<Utterance>)> = HashMap::new();
    let mut rows = 0usize;

    for (i, record) in reader.records().enumerate() {
        let record = record?;
        // Row numbers are 1-based and count the header.
        let row = i + 2;
        rows += 1;
        let cell = |idx: usize| record.get(idx).unwrap_or("");
        let invalid = |column: &str, value: &str| Error::InvalidValue {
            row,
            column: column.to_string(),
            value: value.to_string(),
        };

        let id = cell(cols.id).trim().to_string();
        if id.is_empty() {
            return Err(invalid(&mapping.conversation_id, ""));
        }
        let quality: Quality = cell(cols.quality).parse().map_err(|_| invalid(&mapping.quality, cell(cols.quality)))?;
        let order_index: u64 = cell(cols.order)
            .trim()
            .parse()
            .map_err(|_| invalid(&mapping.order, cell(cols.order)))?;
        let speaker: Speaker = cell(cols.speaker).parse().map_err(|_| invalid(&mapping.speaker, cell(cols.speaker)))?;

        let behavior_raw = cell(cols.behavior);
        let talk_raw = cell(cols.talk_type);
        let mut therapist_behavior = None;
        let mut client_talk_type = None;
        match speaker {
            Speaker::Therapist => {
                if !is_null_token(behavior_raw) {
                    match behavior_raw.parse() {
                        Ok(b) => therapist_behavior = Some(b),
                        Err(()) => warnings.unrecognized_labels += 1,
                    }
                }
                if !is_null_token(talk_raw) {
                    warnings.cross_speaker_labels += 1;
                }
            }
            Speaker::Client => {
                if !is_null_token(talk_raw) {
                    match talk_raw.parse() {
                        Ok(t) => client_talk_type = Some(t),
                        Err(()) => warnings.unrecognized_labels += 1,
                    }
                }
                if !is_null_token(behavior_raw) {
                    warnings.cross_speaker_labels += 1;
                }
            }
        }
        let text = cols.text.map(|idx| cell(idx).to_string()).filter(|t| !t.is_empty());

        let entry = grouped.entry(id.clone()).or_insert_with(|| {
            order_of_ids.push(id.clone());
            (quality, Vec::new())
        });
        if entry.0 != quality {
            return Err(Error::Malformed(format!(
                "row {row}: conversation `{id}` has conflicting quality labels"
            )));
        }
        entry.1.push(Utterance {
            conversation_id: id,
            order_index,
            speaker,
            therapist_behavior,
            client_talk_type,
            text,
        });
    }
    if rows == 0 {
        return Err(Error::EmptySource);
    }

    let mut conversations = Vec::with_capacity(order_of_ids.len());
    for id in order_of_ids {
        let (quality, utterances) = grouped.remove(&id).expect("grouped by id");
        conversations.push(Conversation::new(id, quality, utterances)?);
    }
    let mut corpus = Corpus::from_conversations(conversations)?;
    corpus.warnings = warnings;
    Ok(corpus)
}
