//! SCOPE reporting cards and the claim-versus-evidence validator.
//!
//! A claimed dimension is supported iff every determinant it requires is
//! among the card's preserved evidence. Determinants form a closed
//! vocabulary shipped in `data/determinants.json`; free text is carried for
//! disclosure only.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const CARD_SCHEMA_VERSION: &str = "scope-card/1";
const DEFAULT_CATALOG: &str = include_str!("../data/determinants.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    LongitudinalConsistency,
    HarmAccumulation,
    InterventionTiming,
    RecoveryCapability,
    ReferralCorrectness,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::LongitudinalConsistency,
        Dimension::HarmAccumulation,
        Dimension::InterventionTiming,
        Dimension::RecoveryCapability,
        Dimension::ReferralCorrectness,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Dimension::LongitudinalConsistency => "longitudinal_consistency",
            Dimension::HarmAccumulation => "harm_accumulation",
            Dimension::InterventionTiming => "intervention_timing",
            Dimension::RecoveryCapability => "recovery_capability",
            Dimension::ReferralCorrectness => "referral_correctness",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Dimension::LongitudinalConsistency => "Longitudinal consistency",
            Dimension::HarmAccumulation => "Harm accumulation",
            Dimension::InterventionTiming => "Intervention timing",
            Dimension::RecoveryCapability => "Recovery capability",
            Dimension::ReferralCorrectness => "Referral correctness",
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.id() == id)
            .ok_or_else(|| Error::UnknownIdentifier { kind: "dimension", id: id.to_string() })
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Pipeline outputs that can count as preserved evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineOutput {
    PerTurnScore,
    SustainDelta,
    TemporalScore,
    MaxSustainStreak,
    FirstSustainDominance,
    EarlyWarningScore,
    CaseTrace,
}

impl PipelineOutput {
    pub const ALL: [PipelineOutput; 7] = [
        PipelineOutput::PerTurnScore,
        PipelineOutput::SustainDelta,
        PipelineOutput::TemporalScore,
        PipelineOutput::MaxSustainStreak,
        PipelineOutput::FirstSustainDominance,
        PipelineOutput::EarlyWarningScore,
        PipelineOutput::CaseTrace,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Determinant {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionRequirement {
    pub dimension: Dimension,
    pub required_determinants: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct EvidenceMapping {
    output: PipelineOutput,
    determinants: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CatalogFile {
    schema: String,
    version: u32,
    determinants: Vec<Determinant>,
    dimensions: Vec<DimensionRequirement>,
    pipeline_evidence: Vec<EvidenceMapping>,
}

/// Determinant vocabulary, per-dimension requirements and the mapping from
/// pipeline outputs to determinants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterminantCatalog {
    pub version: u32,
    labels: BTreeMap<String, String>,
    requirements: BTreeMap<Dimension, BTreeSet<String>>,
    evidence: BTreeMap<PipelineOutput, BTreeSet<String>>,
}

impl Default for DeterminantCatalog {
    fn default() -> Self {
        DeterminantCatalog::from_json(DEFAULT_CATALOG).expect("shipped catalog is valid")
    }
}

impl DeterminantCatalog {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: CatalogFile = serde_json::from_str(text)?;
        if file.schema != "scopemh.determinants" {
            return Err(Error::InvalidParameter(format!("unexpected catalog schema `{}`", file.schema)));
        }
        let labels: BTreeMap<String, String> = file.determinants.into_iter().map(|d| (d.id, d.label)).collect();
        let known = |id: &String| -> Result<()> {
            if labels.contains_key(id) {
                Ok(())
            } else {
                Err(Error::UnknownIdentifier { kind: "determinant", id: id.clone() })
            }
        };
        let mut requirements = BTreeMap::new();
        for req in file.dimensions {
            if req.required_determinants.is_empty() {
                return Err(Error::InvalidParameter(format!("dimension `{}` has no required determinants", req.dimension)));
            }
            req.required_determinants.iter().try_for_each(known)?;
            requirements.insert(req.dimension, req.required_determinants);
        }
        if let Some(d) = Dimension::ALL.iter().find(|d| !requirements.contains_key(d)) {
            return Err(Error::InvalidParameter(format!("catalog has no requirement for `{d}`")));
        }
        let mut evidence = BTreeMap::new();
        for m in file.pipeline_evidence {
            m.determinants.iter().try_for_each(known)?;
            evidence.insert(m.output, m.determinants);
        }
        Ok(DeterminantCatalog { version: file.version, labels, requirements, evidence })
    }

    pub fn label<'a>(&'a self, id: &'a str) -> &'a str {
        self.labels.get(id).map_or(id, String::as_str)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.labels.contains_key(id)
    }

    pub fn required(&self, dimension: Dimension) -> &BTreeSet<String> {
        &self.requirements[&dimension]
    }

    pub fn requirements(&self) -> Vec<DimensionRequirement> {
        self.requirements
            .iter()
            .map(|(d, r)| DimensionRequirement { dimension: *d, required_determinants: r.clone() })
            .collect()
    }

    pub fn evidence_for(&self, output: PipelineOutput) -> BTreeSet<String> {
        self.evidence.get(&output).cloned().unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationHorizon {
    OneTurn,
    OneDialogue,
    MultiSession,
    Longitudinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitOfAnalysis {
    Response,
    Dialogue,
    User,
    Episode,
    SystemVersion,
    Population,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeLinkage {
    Linked,
    EndpointOnly,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SafetyClaim {
    /// Claimed dimension identifiers.
    pub dimensions: Vec<String>,
    #[serde(default)]
    pub statement: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PrivacyConstraints {
    #[serde(default)]
    pub statement: String,
    #[serde(default)]
    pub retained: bool,
    #[serde(default)]
    pub aggregated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeCard {
    pub schema_version: String,
    pub safety_claim: SafetyClaim,
    pub evaluation_horizon: EvaluationHorizon,
    pub unit_of_analysis: UnitOfAnalysis,
    pub temporal_determinants: BTreeSet<String>,
    pub preserved_evidence: BTreeSet<String>,
    /// Derived by validation; never read from input.
    #[serde(default, skip_deserializing, skip_serializing_if = "Option::is_none")]
    pub unsupported_claims: Option<Vec<Dimension>>,
    pub outcome_linkage: OutcomeLinkage,
    pub privacy_constraints: PrivacyConstraints,
}

/// Author-supplied card fields, in disclosure order. `unsupported_claims`
/// is the eighth field and is always derived.
pub const AUTHOR_FIELDS: [&str; 7] = [
    "safety_claim",
    "evaluation_horizon",
    "unit_of_analysis",
    "temporal_determinants",
    "preserved_evidence",
    "outcome_linkage",
    "privacy_constraints",
];

impl ScopeCard {
    /// Parses a card document, naming the first missing field.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value.as_object().ok_or_else(|| Error::MissingField("safety_claim".into()))?;
        if let Some(missing) = AUTHOR_FIELDS.iter().find(|f| !obj.contains_key(**f)) {
            return Err(Error::MissingField((*missing).to_string()));
        }
        let mut value = value;
        if let Some(obj) = value.as_object_mut() {
            obj.entry("schema_version").or_insert_with(|| CARD_SCHEMA_VERSION.into());
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Runs validation and records the derived unsupported claims.
    pub fn validated(mut self, catalog: &DeterminantCatalog) -> Result<(Self, ValidationReport)> {
        let report = validate_card(&self, catalog)?;
        self.unsupported_claims = Some(report.unsupported.clone());
        Ok((self, report))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub dimension: Dimension,
    pub supported: bool,
    /// Missing determinant ids.
    pub missing: Vec<String>,
    /// Human labels of the missing determinants.
    pub missing_labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub claims: Vec<ClaimCheck>,
    pub supported: Vec<Dimension>,
    pub unsupported: Vec<Dimension>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.unsupported.is_empty()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        if self.claims.is_empty() {
            out.push_str("no safety claims declared\n");
        }
        for c in &self.claims {
            if c.supported {
                let _ = writeln!(out, "SUPPORTED   {}", c.dimension);
            } else {
                let _ = writeln!(out, "UNSUPPORTED {}: missing {}", c.dimension, c.missing_labels.join(", "));
            }
        }
        out
    }
}

/// Checks every claimed dimension against the preserved evidence.
pub fn validate_card(card: &ScopeCard, catalog: &DeterminantCatalog) -> Result<ValidationReport> {
    for id in card.preserved_evidence.iter().chain(&card.temporal_determinants) {
        if !catalog.contains(id) {
            return Err(Error::UnknownIdentifier { kind: "determinant", id: id.clone() });
        }
    }
    let mut dims = Vec::new();
    for id in &card.safety_claim.dimensions {
        let d = Dimension::parse(id)?;
        if !dims.contains(&d) {
            dims.push(d);
        }
    }
    let mut report = ValidationReport { claims: Vec::new(), supported: Vec::new(), unsupported: Vec::new() };
    for d in dims {
        let missing: Vec<String> = catalog.required(d).difference(&card.preserved_evidence).cloned().collect();
        let supported = missing.is_empty();
        if supported {
            report.supported.push(d);
        } else {
            report.unsupported.push(d);
        }
        report.claims.push(ClaimCheck {
            dimension: d,
            supported,
            missing_labels: missing.iter().map(|m| catalog.label(m).to_string()).collect(),
            missing,
        });
    }
    Ok(report)
}

fn horizon_text(h: EvaluationHorizon) -> &'static str {
    match h {
        EvaluationHorizon::OneTurn => "one turn",
        EvaluationHorizon::OneDialogue => "one dialogue",
        EvaluationHorizon::MultiSession => "multiple sessions",
        EvaluationHorizon::Longitudinal => "longitudinal use",
    }
}

fn unit_text(u: UnitOfAnalysis) -> &'static str {
    match u {
        UnitOfAnalysis::Response => "response",
        UnitOfAnalysis::Dialogue => "dialogue",
        UnitOfAnalysis::User => "user",
        UnitOfAnalysis::Episode => "episode",
        UnitOfAnalysis::SystemVersion => "system version",
        UnitOfAnalysis::Population => "deployment population",
    }
}

fn linkage_text(o: OutcomeLinkage) -> &'static str {
    match o {
        OutcomeLinkage::Linked => "endpoint outcomes linked to interactional evidence",
        OutcomeLinkage::EndpointOnly => "endpoints measured before/after use only",
        OutcomeLinkage::None => "no outcome measures",
    }
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

fn labels(ids: &BTreeSet<String>, catalog: &DeterminantCatalog) -> String {
    if ids.is_empty() {
        return "none".into();
    }
    ids.iter().map(|id| catalog.label(id)).collect::<Vec<_>>().join("; ")
}

/// Markdown disclosure table. Byte-deterministic for a given card.
pub fn render_card(card: &ScopeCard, catalog: &DeterminantCatalog) -> Result<String> {
    let unsupported = card.unsupported_claims.as_ref().ok_or(Error::Unvalidated)?;
    let report = validate_card(card, catalog)?;
    let mut out = String::new();
    let _ = writeln!(out, "<!-- {CARD_SCHEMA_VERSION} -->");
    out.push_str("# SCOPE card\n\n");
    out.push_str("| SCOPE field | Disclosure |\n|---|---|\n");

    let claims = if card.safety_claim.dimensions.is_empty() {
        "none".to_string()
    } else {
        card.safety_claim.dimensions.join(", ")
    };
    let claim_text = if card.safety_claim.statement.is_empty() {
        claims
    } else {
        format!("{claims}: {}", card.safety_claim.statement)
    };
    let unsupported_text = if unsupported.is_empty() {
        "none".to_string()
    } else {
        unsupported.iter().map(|d| d.id()).collect::<Vec<_>>().join(", ")
    };
    let p = &card.privacy_constraints;
    let privacy = format!(
        "{} (retained: {}, aggregated: {})",
        if p.statement.is_empty() { "not stated" } else { &p.statement },
        if p.retained { "yes" } else { "no" },
        if p.aggregated { "yes" } else { "no" }
    );
    let rows = [
        ("Safety claim", claim_text),
        ("Evaluation horizon", horizon_text(card.evaluation_horizon).to_string()),
        ("Unit of analysis", unit_text(card.unit_of_analysis).to_string()),
        ("Temporal determinants", labels(&card.temporal_determinants, catalog)),
        ("Preserved evidence", labels(&card.preserved_evidence, catalog)),
        ("Unsupported claims", unsupported_text),
        ("Outcome linkage", linkage_text(card.outcome_linkage).to_string()),
        ("Privacy constraints", privacy),
    ];
    for (field, value) in rows {
        let _ = writeln!(out, "| {field} | {} |", cell(&value));
    }
    if !report.unsupported.is_empty() {
        out.push_str("\n## Unsupported claims\n\n");
        for c in report.claims.iter().filter(|c| !c.supported) {
            let _ = writeln!(out, "- **{}**: missing {}", c.dimension.label(), c.missing_labels.join("; "));
        }
    }
    Ok(out)
}

/// Preserved evidence implied by the outputs a pipeline actually computed.
pub fn preserved_from_outputs(outputs: &[PipelineOutput], catalog: &DeterminantCatalog) -> BTreeSet<String> {
    outputs.iter().flat_map(|o| catalog.evidence_for(*o)).collect()
}

/// Builds and validates a card for an audit that computed `outputs`.
pub fn card_from_audit(outputs: &[PipelineOutput], declared: &[Dimension], catalog: &DeterminantCatalog) -> Result<(ScopeCard, ValidationReport)> {
    let temporal_determinants = declared.iter().flat_map(|d| catalog.required(*d).iter().cloned()).collect();
    let card = ScopeCard {
        schema_version: CARD_SCHEMA_VERSION.into(),
        safety_claim: SafetyClaim {
            dimensions: declared.iter().map(|d| d.id().to_string()).collect(),
            statement: "Derived from the computed client-language and therapist-behavior metrics.".into(),
        },
        evaluation_horizon: EvaluationHorizon::OneDialogue,
        unit_of_analysis: UnitOfAnalysis::Dialogue,
        temporal_determinants,
        preserved_evidence: preserved_from_outputs(outputs, catalog),
        unsupported_claims: None,
        outcome_linkage: OutcomeLinkage::None,
        privacy_constraints: PrivacyConstraints {
            statement: "Annotated transcripts; only per-conversation aggregates are reported.".into(),
            retained: true,
            aggregated: true,
        },
    };
    card.validated(catalog)
}
