//! Exhaustive search for temporal safety non-identifiability.
//!
//! A bounded trajectory space is the set of all step sequences of length `H`
//! where each step picks a user state, a system action and a risk level from
//! finite alphabets. A compression function maps a trajectory to the summary an
//! evaluation observes; a safety predicate maps it to a status. The predicate
//! is identifiable from the compression iff it is constant on every fiber
//! (set of trajectories sharing a compressed value). A witness is a pair in the
//! same fiber whose statuses differ.
//!
//! Enumeration order is lexicographic over step tuples: step `t` is encoded as
//! `(user, action, risk)` alphabet indices, the first step is most
//! significant, and within a step the user index is most significant.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_MAX_HORIZON: usize = 6;
pub const DEFAULT_SPACE_CAP: u128 = 10_000_000;

/// Finite symbol sets. Risk levels are ordinal: index 0 is baseline (no
/// risk), any higher index is a risk cue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabets {
    pub user_states: Vec<String>,
    pub actions: Vec<String>,
    pub risk_levels: Vec<String>,
}

impl Default for Alphabets {
    fn default() -> Self {
        Alphabets {
            user_states: vec!["user".into()],
            actions: ["reflect", "reassure", "escalate", "refer"].map(String::from).to_vec(),
            risk_levels: ["none", "cue", "crisis"].map(String::from).to_vec(),
        }
    }
}

impl Alphabets {
    pub fn new<S: Into<String>>(
        user_states: impl IntoIterator<Item = S>,
        actions: impl IntoIterator<Item = S>,
        risk_levels: impl IntoIterator<Item = S>,
    ) -> Self {
        Alphabets {
            user_states: user_states.into_iter().map(Into::into).collect(),
            actions: actions.into_iter().map(Into::into).collect(),
            risk_levels: risk_levels.into_iter().map(Into::into).collect(),
        }
    }

    fn step_count(&self) -> usize {
        self.user_states.len() * self.actions.len() * self.risk_levels.len()
    }

    pub fn action_index(&self, name: &str) -> Result<usize> {
        self.actions
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| Error::InvalidParameter(format!("action `{name}` is not in the action alphabet")))
    }

    fn validate(&self) -> Result<()> {
        for (name, set) in [("user state", &self.user_states), ("action", &self.actions), ("risk level", &self.risk_levels)] {
            if set.is_empty() {
                return Err(Error::InvalidParameter(format!("{name} alphabet is empty")));
            }
            let mut sorted = set.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != set.len() {
                return Err(Error::InvalidParameter(format!("{name} alphabet has duplicate symbols")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Step {
    pub user: usize,
    pub action: usize,
    pub risk: usize,
}

/// A trajectory over a declared [`Space`]. The history at step `t` is the
/// prefix `steps[..t]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn risks(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|s| s.risk)
    }

    pub fn actions(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|s| s.action)
    }

    /// 0-based index of the first step with a non-baseline risk level.
    pub fn first_risk_cue(&self) -> Option<usize> {
        self.steps.iter().position(|s| s.risk > 0)
    }

    /// Renders symbols, one `(user, action, risk)` triple per step.
    pub fn render(&self, alphabets: &Alphabets) -> Vec<[String; 3]> {
        self.steps
            .iter()
            .map(|s| {
                [
                    alphabets.user_states[s.user].clone(),
                    alphabets.actions[s.action].clone(),
                    alphabets.risk_levels[s.risk].clone(),
                ]
            })
            .collect()
    }

    /// Stable textual key, used by custom lookup tables: steps joined by `;`,
    /// fields by `,`.
    pub fn key(&self, alphabets: &Alphabets) -> String {
        self.render(alphabets).iter().map(|s| s.join(",")).collect::<Vec<_>>().join(";")
    }
}

/// A bounded trajectory space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Space {
    pub alphabets: Alphabets,
    pub horizon: usize,
}

impl Space {
    pub fn new(alphabets: Alphabets, horizon: usize) -> Result<Self> {
        Self::with_max_horizon(alphabets, horizon, DEFAULT_MAX_HORIZON)
    }

    pub fn with_max_horizon(alphabets: Alphabets, horizon: usize, max_horizon: usize) -> Result<Self> {
        alphabets.validate()?;
        if horizon == 0 || horizon > max_horizon {
            return Err(Error::InvalidParameter(format!("horizon must be in 1..={max_horizon}, got {horizon}")));
        }
        Ok(Space { alphabets, horizon })
    }

    /// Number of trajectories, `(|X|·|A|·|R|)^H`.
    pub fn cardinality(&self) -> u128 {
        (self.alphabets.step_count() as u128).saturating_pow(self.horizon as u32)
    }

    /// Iterates every trajectory once in canonical order, failing if the space
    /// is larger than `cap`.
    pub fn enumerate(&self, cap: u128) -> Result<SpaceIter<'_>> {
        let cardinality = self.cardinality();
        if cardinality > cap {
            return Err(Error::SpaceTooLarge { cardinality, cap });
        }
        Ok(SpaceIter { space: self, digits: vec![0; self.horizon], done: false })
    }

    fn decode(&self, digit: usize) -> Step {
        let a = &self.alphabets;
        let per_user = a.actions.len() * a.risk_levels.len();
        Step { user: digit / per_user, action: (digit % per_user) / a.risk_levels.len(), risk: digit % a.risk_levels.len() }
    }

    /// Builds a trajectory from symbol triples.
    pub fn trajectory(&self, steps: &[(&str, &str, &str)]) -> Result<Trajectory> {
        if steps.len() != self.horizon {
            return Err(Error::InvalidParameter(format!("expected {} steps, got {}", self.horizon, steps.len())));
        }
        let a = &self.alphabets;
        let find = |set: &[String], s: &str, what: &str| {
            set.iter().position(|x| x == s).ok_or_else(|| Error::InvalidParameter(format!("unknown {what} `{s}`")))
        };
        let steps = steps
            .iter()
            .map(|(u, act, r)| {
                Ok(Step {
                    user: find(&a.user_states, u, "user state")?,
                    action: find(&a.actions, act, "action")?,
                    risk: find(&a.risk_levels, r, "risk level")?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Trajectory { steps })
    }
}

pub struct SpaceIter<'a> {
    space: &'a Space,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for SpaceIter<'_> {
    type Item = Trajectory;

    fn next(&mut self) -> Option<Trajectory> {
        if self.done {
            return None;
        }
        let traj = Trajectory { steps: self.digits.iter().map(|&d| self.space.decode(d)).collect() };
        let base = self.space.alphabets.step_count();
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < base {
                break;
            }
            self.digits[i] = 0;
        }
        Some(traj)
    }
}

/// Compressed representation observed by an evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Compressed {
    Int(i64),
    /// Exact fraction `numerator / denominator` in lowest terms.
    Ratio(i64, i64),
    Symbol(String),
    Trajectory(Trajectory),
}

impl fmt::Display for Compressed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Compressed::Int(v) => write!(f, "{v}"),
            Compressed::Ratio(n, d) => write!(f, "{n}/{d}"),
            Compressed::Symbol(s) => f.write_str(s),
            Compressed::Trajectory(t) => write!(f, "trajectory of {} steps", t.horizon()),
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn ratio(num: i64, den: i64) -> Compressed {
    let g = gcd(num, den).max(1);
    Compressed::Ratio(num / g, den / g)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompressionKind {
    /// The whole trajectory: every fiber is a singleton.
    Identity,
    /// A single value for every trajectory.
    Constant,
    /// Risk level at the last step.
    FinalValue,
    /// Mean risk level, as an exact fraction.
    MeanValue,
    /// Number of steps taking `action`.
    EventCount { action: String },
    /// Action at the last step.
    FinalAnswer,
    /// Lookup by [`Trajectory::key`]; unmatched trajectories map to `default`.
    CustomTable { table: BTreeMap<String, String>, default: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionFn {
    pub name: String,
    pub kind: CompressionKind,
}

impl CompressionFn {
    pub fn new(name: impl Into<String>, kind: CompressionKind) -> Self {
        CompressionFn { name: name.into(), kind }
    }

    pub fn identity() -> Self {
        Self::new("identity", CompressionKind::Identity)
    }

    pub fn constant() -> Self {
        Self::new("constant", CompressionKind::Constant)
    }

    pub fn event_count(action: &str) -> Self {
        Self::new(format!("count({action})"), CompressionKind::EventCount { action: action.into() })
    }

    /// Checks that the function is total on `space`.
    pub fn check(&self, space: &Space) -> Result<()> {
        if let CompressionKind::EventCount { action } = &self.kind {
            space.alphabets.action_index(action)?;
        }
        Ok(())
    }

    pub fn apply(&self, space: &Space, tau: &Trajectory) -> Compressed {
        match &self.kind {
            CompressionKind::Identity => Compressed::Trajectory(tau.clone()),
            CompressionKind::Constant => Compressed::Int(0),
            CompressionKind::FinalValue => Compressed::Int(tau.steps.last().map_or(0, |s| s.risk) as i64),
            CompressionKind::MeanValue => ratio(tau.risks().sum::<usize>() as i64, tau.horizon() as i64),
            CompressionKind::EventCount { action } => {
                let idx = space.alphabets.action_index(action).expect("checked before use");
                Compressed::Int(tau.actions().filter(|a| *a == idx).count() as i64)
            }
            CompressionKind::FinalAnswer => {
                Compressed::Symbol(tau.steps.last().map_or_else(String::new, |s| space.alphabets.actions[s.action].clone()))
            }
            CompressionKind::CustomTable { table, default } => {
                Compressed::Symbol(table.get(&tau.key(&space.alphabets)).unwrap_or(default).clone())
            }
        }
    }
}

/// Safety status. Binary predicates use 1 for safe and 0 for unsafe; ordinal
/// predicates may use larger values.
pub type Status = u8;
pub const SAFE: Status = 1;
pub const UNSAFE: Status = 0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredicateKind {
    /// Safe iff, when a risk cue occurs, an escalation action happens at the
    /// first cue or within `k` steps after it. Trajectories without a cue are
    /// safe.
    EscalationLatency { k: usize, escalation_actions: Vec<String> },
    /// Safe iff no run of consecutive risk-cue steps is longer than `m`.
    MaxRiskRun { m: usize },
    /// A miscalibration is a risk-cue step answered by one of
    /// `miscalibrated_actions`. Safe iff every miscalibration is followed by a
    /// corrective action within the next `k` steps.
    RecoveryWithin { k: usize, miscalibrated_actions: Vec<String>, corrective_actions: Vec<String> },
    Constant { status: Status },
    /// Lookup by [`Trajectory::key`]; unmatched trajectories get `default`.
    CustomTable { table: BTreeMap<String, Status>, default: Status },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SafetyPredicate {
    pub name: String,
    pub kind: PredicateKind,
}

fn action_set(space: &Space, names: &[String]) -> Result<Vec<usize>> {
    names.iter().map(|n| space.alphabets.action_index(n)).collect()
}

impl SafetyPredicate {
    pub fn new(name: impl Into<String>, kind: PredicateKind) -> Self {
        SafetyPredicate { name: name.into(), kind }
    }

    pub fn constant(status: Status) -> Self {
        Self::new(format!("constant({status})"), PredicateKind::Constant { status })
    }

    pub fn check(&self, space: &Space) -> Result<()> {
        match &self.kind {
            PredicateKind::EscalationLatency { escalation_actions, .. } => {
                action_set(space, escalation_actions)?;
            }
            PredicateKind::RecoveryWithin { miscalibrated_actions, corrective_actions, .. } => {
                action_set(space, miscalibrated_actions)?;
                action_set(space, corrective_actions)?;
            }
            _ => {}
        }
        Ok(())
    }

    pub fn evaluate(&self, space: &Space, tau: &Trajectory) -> Status {
        let verdict = |ok: bool| if ok { SAFE } else { UNSAFE };
        match &self.kind {
            PredicateKind::EscalationLatency { k, escalation_actions } => {
                let escalate = action_set(space, escalation_actions).expect("checked before use");
                match tau.first_risk_cue() {
                    None => SAFE,
                    Some(cue) => verdict(
                        tau.steps.iter().enumerate().skip(cue).take(k + 1).any(|(_, s)| escalate.contains(&s.action)),
                    ),
                }
            }
            PredicateKind::MaxRiskRun { m } => {
                let mut run = 0;
                let mut longest = 0;
                for r in tau.risks() {
                    run = if r > 0 { run + 1 } else { 0 };
                    longest = longest.max(run);
                }
                verdict(longest <= *m)
            }
            PredicateKind::RecoveryWithin { k, miscalibrated_actions, corrective_actions } => {
                let bad = action_set(space, miscalibrated_actions).expect("checked before use");
                let fix = action_set(space, corrective_actions).expect("checked before use");
                let recovered = tau.steps.iter().enumerate().all(|(t, s)| {
                    let miscalibrated = s.risk > 0 && bad.contains(&s.action);
                    !miscalibrated || tau.steps[t + 1..].iter().take(*k).any(|n| fix.contains(&n.action))
                });
                verdict(recovered)
            }
            PredicateKind::Constant { status } => *status,
            PredicateKind::CustomTable { table, default } => *table.get(&tau.key(&space.alphabets)).unwrap_or(default),
        }
    }
}

/// Parameterized constructors for the built-in predicates.
pub mod catalog {
    use super::*;

    fn positive(name: &str, v: usize) -> Result<()> {
        if v == 0 {
            Err(Error::InvalidParameter(format!("{name} must be positive")))
        } else {
            Ok(())
        }
    }

    /// Intervention timing: escalation within `k` steps of the first risk cue.
    /// `k = 0` requires escalation at the cue itself.
    pub fn escalation_latency(k: usize) -> SafetyPredicate {
        SafetyPredicate::new(
            format!("escalation_latency<={k}"),
            PredicateKind::EscalationLatency { k, escalation_actions: vec!["escalate".into()] },
        )
    }

    /// Harm accumulation: no more than `m` consecutive risk-cue steps.
    pub fn max_risk_run(m: usize) -> Result<SafetyPredicate> {
        positive("m", m)?;
        Ok(SafetyPredicate::new(format!("max_risk_run<={m}"), PredicateKind::MaxRiskRun { m }))
    }

    /// Recovery: reassurance at a risk cue is corrected by escalation or
    /// referral within `k` steps.
    pub fn recovery_within(k: usize) -> Result<SafetyPredicate> {
        positive("k", k)?;
        Ok(SafetyPredicate::new(
            format!("recovery_within<={k}"),
            PredicateKind::RecoveryWithin {
                k,
                miscalibrated_actions: vec!["reassure".into()],
                corrective_actions: vec!["escalate".into(), "refer".into()],
            },
        ))
    }

    /// Catalog instances with the given parameters.
    pub fn builtin_predicates(latency_k: usize, run_m: usize, recovery_k: usize) -> Result<Vec<SafetyPredicate>> {
        Ok(vec![escalation_latency(latency_k), max_risk_run(run_m)?, recovery_within(recovery_k)?])
    }
}

/// Two trajectories sharing a compressed value but not a safety status.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub tau: Trajectory,
    pub tau_prime: Trajectory,
    pub compressed_value: Compressed,
    pub statuses: (Status, Status),
}

impl Witness {
    /// Builds a witness after recomputing both sides; fails if the pair is
    /// not a collision with differing status.
    pub fn verified(space: &Space, phi: &CompressionFn, s: &SafetyPredicate, tau: Trajectory, tau_prime: Trajectory) -> Result<Self> {
        let z = phi.apply(space, &tau);
        if phi.apply(space, &tau_prime) != z {
            return Err(Error::InvalidParameter("witness trajectories differ under the compression".into()));
        }
        let statuses = (s.evaluate(space, &tau), s.evaluate(space, &tau_prime));
        if statuses.0 == statuses.1 {
            return Err(Error::InvalidParameter("witness trajectories share a safety status".into()));
        }
        Ok(Witness { tau, tau_prime, compressed_value: z, statuses })
    }

    /// Side-by-side markdown table of both trajectories.
    pub fn render_markdown(&self, space: &Space) -> String {
        let a = self.tau.render(&space.alphabets);
        let b = self.tau_prime.render(&space.alphabets);
        let mut out = String::new();
        out.push_str(&format!("Shared compressed value: `{}`\n\n", self.compressed_value));
        out.push_str(&format!(
            "Statuses: τ = {}, τ′ = {}\n\n",
            status_label(self.statuses.0),
            status_label(self.statuses.1)
        ));
        out.push_str("| t | τ user | τ action | τ risk | τ′ user | τ′ action | τ′ risk |\n");
        out.push_str("|---|---|---|---|---|---|---|\n");
        for (t, (x, y)) in a.iter().zip(&b).enumerate() {
            out.push_str(&format!("| {} | {} | {} | {} | {} | {} | {} |\n", t + 1, x[0], x[1], x[2], y[0], y[1], y[2]));
        }
        out
    }
}

pub fn status_label(s: Status) -> String {
    match s {
        SAFE => "safe".into(),
        UNSAFE => "unsafe".into(),
        other => format!("status {other}"),
    }
}

struct Fiber {
    size: usize,
    /// First trajectory seen with each status, in canonical order.
    first_by_status: BTreeMap<Status, Trajectory>,
}

/// Per-fiber bookkeeping shared by search and identifiability checks.
fn scan(space: &Space, phi: &CompressionFn, s: &SafetyPredicate, cap: u128, stop_at_first: bool) -> Result<(HashMap<Compressed, Fiber>, Option<Witness>)> {
    phi.check(space)?;
    s.check(space)?;
    let mut fibers: HashMap<Compressed, Fiber> = HashMap::new();
    let mut witness = None;
    for tau in space.enumerate(cap)? {
        let z = phi.apply(space, &tau);
        let status = s.evaluate(space, &tau);
        match fibers.entry(z) {
            Entry::Vacant(v) => {
                let mut first_by_status = BTreeMap::new();
                first_by_status.insert(status, tau);
                v.insert(Fiber { size: 1, first_by_status });
            }
            Entry::Occupied(mut o) => {
                let fiber = o.get_mut();
                fiber.size += 1;
                if !fiber.first_by_status.contains_key(&status) {
                    if witness.is_none() {
                        // Earliest trajectory in the fiber with another status.
                        let partner = fiber.first_by_status.values().min().expect("fiber is non-empty").clone();
                        witness = Some(Witness::verified(space, phi, s, partner, tau.clone())?);
                        if stop_at_first {
                            return Ok((fibers, witness));
                        }
                    }
                    fiber.first_by_status.insert(status, tau);
                }
            }
        }
    }
    Ok((fibers, witness))
}

/// First witness in canonical order: `tau_prime` is the earliest trajectory
/// whose fiber already holds a different status, `tau` the earliest member of
/// that fiber.
pub fn find_witness(space: &Space, phi: &CompressionFn, s: &SafetyPredicate, cap: u128) -> Result<Option<Witness>> {
    Ok(scan(space, phi, s, cap, true)?.1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifiabilityReport {
    pub compression: String,
    pub predicate: String,
    pub horizon: usize,
    pub space_size: u128,
    pub identifiable: bool,
    pub fiber_count: usize,
    pub max_fiber_size: usize,
    /// Fibers on which the predicate is not constant.
    pub mixed_fibers: usize,
    pub witness: Option<Witness>,
}

pub fn check_identifiability(space: &Space, phi: &CompressionFn, s: &SafetyPredicate, cap: u128) -> Result<IdentifiabilityReport> {
    let (fibers, witness) = scan(space, phi, s, cap, false)?;
    Ok(IdentifiabilityReport {
        compression: phi.name.clone(),
        predicate: s.name.clone(),
        horizon: space.horizon,
        space_size: space.cardinality(),
        identifiable: witness.is_none(),
        fiber_count: fibers.len(),
        max_fiber_size: fibers.values().map(|f| f.size).max().unwrap_or(0),
        mixed_fibers: fibers.values().filter(|f| f.first_by_status.len() > 1).count(),
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_space(h: usize) -> Space {
        Space::new(Alphabets::new(["u"], ["respond", "escalate"], ["0", "1"]), h).unwrap()
    }

    #[test]
    fn enumeration_size_and_order() {
        let space = binary_space(2);
        let all: Vec<_> = space.enumerate(DEFAULT_SPACE_CAP).unwrap().collect();
        assert_eq!(all.len(), 16);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        let unique: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(unique.len(), 16);
    }

    #[test]
    fn enumeration_errors() {
        assert!(Space::new(Alphabets::default(), 0).is_err());
        let space = binary_space(2);
        match space.enumerate(10) {
            Err(Error::SpaceTooLarge { cardinality, cap }) => assert_eq!((cardinality, cap), (16, 10)),
            other => panic!("unexpected {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn latency_zero_escalating_at_cue_is_safe() {
        let space = Space::new(Alphabets::default(), 3).unwrap();
        let tau = space.trajectory(&[("user", "reflect", "none"), ("user", "escalate", "cue"), ("user", "reflect", "cue")]).unwrap();
        assert_eq!(catalog::escalation_latency(0).evaluate(&space, &tau), SAFE);
        let late = space.trajectory(&[("user", "reflect", "cue"), ("user", "escalate", "cue"), ("user", "reflect", "none")]).unwrap();
        assert_eq!(catalog::escalation_latency(0).evaluate(&space, &late), UNSAFE);
        assert_eq!(catalog::escalation_latency(1).evaluate(&space, &late), SAFE);
    }

    #[test]
    fn max_run_of_three_breaks_bound_two() {
        let space = Space::new(Alphabets::new(["u"], ["respond"], ["0", "1"]), 3).unwrap();
        let tau = space.trajectory(&[("u", "respond", "1"), ("u", "respond", "1"), ("u", "respond", "1")]).unwrap();
        assert_eq!(catalog::max_risk_run(2).unwrap().evaluate(&space, &tau), UNSAFE);
        assert_eq!(catalog::max_risk_run(3).unwrap().evaluate(&space, &tau), SAFE);
    }

    #[test]
    fn recovery_two_steps_late_is_unsafe() {
        let space = Space::new(Alphabets::default(), 4).unwrap();
        let tau = space
            .trajectory(&[("user", "reassure", "cue"), ("user", "reflect", "cue"), ("user", "escalate", "cue"), ("user", "reflect", "none")])
            .unwrap();
        assert_eq!(catalog::recovery_within(1).unwrap().evaluate(&space, &tau), UNSAFE);
        assert_eq!(catalog::recovery_within(2).unwrap().evaluate(&space, &tau), SAFE);
    }

    #[test]
    fn nonpositive_parameters_rejected() {
        assert!(catalog::max_risk_run(0).is_err());
        assert!(catalog::recovery_within(0).is_err());
    }

    #[test]
    fn identity_and_constant_cases() {
        let space = binary_space(2);
        let s = catalog::escalation_latency(0);
        let r = check_identifiability(&space, &CompressionFn::identity(), &s, DEFAULT_SPACE_CAP).unwrap();
        assert!(r.identifiable);
        assert_eq!(r.max_fiber_size, 1);
        assert_eq!(r.fiber_count, 16);

        let r = check_identifiability(&space, &CompressionFn::constant(), &s, DEFAULT_SPACE_CAP).unwrap();
        assert!(!r.identifiable);
        assert_eq!(r.fiber_count, 1);
        assert_eq!(r.max_fiber_size, 16);

        assert!(find_witness(&space, &CompressionFn::constant(), &SafetyPredicate::constant(SAFE), DEFAULT_SPACE_CAP).unwrap().is_none());
    }

    #[test]
    fn unknown_action_is_rejected() {
        let space = binary_space(2);
        let phi = CompressionFn::event_count("refer");
        assert!(find_witness(&space, &phi, &SafetyPredicate::constant(SAFE), DEFAULT_SPACE_CAP).is_err());
    }

    #[test]
    fn verified_rejects_non_witness() {
        let space = binary_space(1);
        let all: Vec<_> = space.enumerate(DEFAULT_SPACE_CAP).unwrap().collect();
        let err = Witness::verified(&space, &CompressionFn::identity(), &catalog::escalation_latency(0), all[0].clone(), all[1].clone());
        assert!(err.is_err());
    }

    #[test]
    fn mean_value_uses_lowest_terms() {
        let space = Space::new(Alphabets::new(["u"], ["a"], ["0", "1", "2"]), 4).unwrap();
        let phi = CompressionFn::new("mean", CompressionKind::MeanValue);
        let tau = space.trajectory(&[("u", "a", "2"), ("u", "a", "0"), ("u", "a", "0"), ("u", "a", "0")]).unwrap();
        assert_eq!(phi.apply(&space, &tau), Compressed::Ratio(1, 2));
    }
}
