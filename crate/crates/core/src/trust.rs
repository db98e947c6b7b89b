//! Trust and credibility stores.
//!
//! Every appreciation an agent holds (trust in another agent, credibility of a
//! consultant for a task, confidence in a program, ...) is a [`TrustLevel`]
//! under an [`AppreciationKey`]. Unset keys read as neutral.
//!
//! Trust kinds are updated from kept/broken assessments under a
//! [`TramPolicy`]:
//!
//! * `incremental` moves one step per assessment, saturating at the ends of
//!   the scale;
//! * `recency-history` derives the level from the two most recent
//!   experiences only.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ids::{AgentId, ProgramId, TaskId};
use crate::level::TrustLevel;
use crate::scalar::Scalar;
use crate::Tick;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrustError {
    #[error("malformed {kind} key: {reason}")]
    MalformedKey {
        kind: AppreciationKind,
        reason: &'static str,
    },
    #[error("{0} is not a trust kind; only trust levels are updated by assessments")]
    NotATrustKind(AppreciationKind),
    #[error("assessment at tick {tick} precedes the latest recorded experience at {last}")]
    ExperienceOutOfOrder { last: Tick, tick: Tick },
    #[error("credibility must lie in [0, 1]")]
    CredibilityOutOfRange,
}

/// What an appreciation level is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AppreciationKind {
    GeneralTrust,
    TaskTrust,
    ProgramTrust,
    TaskCredibility,
    ProgramCredibility,
    Confidence,
    MatchingCredibility,
    Dependability,
}

impl AppreciationKind {
    pub const ALL: [AppreciationKind; 8] = [
        AppreciationKind::GeneralTrust,
        AppreciationKind::TaskTrust,
        AppreciationKind::ProgramTrust,
        AppreciationKind::TaskCredibility,
        AppreciationKind::ProgramCredibility,
        AppreciationKind::Confidence,
        AppreciationKind::MatchingCredibility,
        AppreciationKind::Dependability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AppreciationKind::GeneralTrust => "general-trust",
            AppreciationKind::TaskTrust => "task-trust",
            AppreciationKind::ProgramTrust => "program-trust",
            AppreciationKind::TaskCredibility => "task-credibility",
            AppreciationKind::ProgramCredibility => "program-credibility",
            AppreciationKind::Confidence => "confidence",
            AppreciationKind::MatchingCredibility => "matching-credibility",
            AppreciationKind::Dependability => "dependability",
        }
    }

    /// Kinds that kept/broken assessments update.
    pub fn is_trust(self) -> bool {
        matches!(
            self,
            AppreciationKind::GeneralTrust
                | AppreciationKind::TaskTrust
                | AppreciationKind::ProgramTrust
        )
    }
}

impl fmt::Display for AppreciationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AppreciationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown appreciation kind `{s}`"))
    }
}

/// The thing being appreciated: another agent (possibly the subject itself)
/// or a program.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Agent(AgentId),
    Program(ProgramId),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Agent(a) => write!(f, "{a}"),
            Target::Program(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AppreciationKey {
    pub subject: AgentId,
    pub target: Target,
    pub program: Option<ProgramId>,
    pub task: Option<TaskId>,
    pub kind: AppreciationKind,
}

impl AppreciationKey {
    /// `T_subject(target)`.
    pub fn trust(subject: &AgentId, target: &AgentId) -> Self {
        AppreciationKey {
            subject: subject.clone(),
            target: Target::Agent(target.clone()),
            program: None,
            task: None,
            kind: AppreciationKind::GeneralTrust,
        }
    }

    pub fn task_trust(subject: &AgentId, target: &AgentId, task: &TaskId) -> Self {
        AppreciationKey {
            task: Some(task.clone()),
            kind: AppreciationKind::TaskTrust,
            ..Self::trust(subject, target)
        }
    }

    pub fn program_trust(subject: &AgentId, target: &AgentId, program: &ProgramId) -> Self {
        AppreciationKey {
            program: Some(program.clone()),
            kind: AppreciationKind::ProgramTrust,
            ..Self::trust(subject, target)
        }
    }

    pub fn task_credibility(subject: &AgentId, target: &AgentId, task: &TaskId) -> Self {
        AppreciationKey {
            kind: AppreciationKind::TaskCredibility,
            ..Self::task_trust(subject, target, task)
        }
    }

    pub fn program_credibility(subject: &AgentId, target: &AgentId, program: &ProgramId) -> Self {
        AppreciationKey {
            kind: AppreciationKind::ProgramCredibility,
            ..Self::program_trust(subject, target, program)
        }
    }

    /// Program/task keys: confidence, matching credibility and dependability.
    pub fn program_task(
        kind: AppreciationKind,
        subject: &AgentId,
        program: &ProgramId,
        task: &TaskId,
    ) -> Self {
        AppreciationKey {
            subject: subject.clone(),
            target: Target::Program(program.clone()),
            program: None,
            task: Some(task.clone()),
            kind,
        }
    }

    /// Checks that the optional fields present are the ones `kind` calls for.
    pub fn validate(&self) -> Result<(), TrustError> {
        use AppreciationKind::*;
        let err = |reason| {
            Err(TrustError::MalformedKey {
                kind: self.kind,
                reason,
            })
        };
        let agent_target = matches!(self.target, Target::Agent(_));
        match self.kind {
            GeneralTrust => {
                if !agent_target {
                    return err("target must be an agent");
                }
                if self.program.is_some() || self.task.is_some() {
                    return err("takes neither program nor task");
                }
            }
            TaskTrust | TaskCredibility => {
                if !agent_target {
                    return err("target must be an agent");
                }
                if self.task.is_none() || self.program.is_some() {
                    return err("requires a task and no program");
                }
            }
            ProgramTrust | ProgramCredibility => {
                if !agent_target {
                    return err("target must be an agent");
                }
                if self.program.is_none() || self.task.is_some() {
                    return err("requires a program and no task");
                }
            }
            Confidence | MatchingCredibility | Dependability => {
                if agent_target {
                    return err("target must be a program");
                }
                if self.task.is_none() || self.program.is_some() {
                    return err("requires a task and no separate program");
                }
            }
        }
        Ok(())
    }

    pub fn is_self_trust(&self) -> bool {
        matches!(&self.target, Target::Agent(a) if *a == self.subject)
    }
}

/// Result of assessing a directional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Kept,
    Broken,
}

impl Outcome {
    pub fn is_positive(self) -> bool {
        self == Outcome::Kept
    }

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Kept => "kept",
            Outcome::Broken => "broken",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Experience {
    pub outcome: Outcome,
    pub tick: Tick,
}

/// Why a level was written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cause {
    Kept,
    Broken,
    Lor,
    Survey,
    Init,
    Incredible,
}

impl Cause {
    pub fn name(self) -> &'static str {
        match self {
            Cause::Kept => "kept",
            Cause::Broken => "broken",
            Cause::Lor => "lor",
            Cause::Survey => "survey",
            Cause::Init => "init",
            Cause::Incredible => "incredible",
        }
    }
}

impl From<Outcome> for Cause {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Kept => Cause::Kept,
            Outcome::Broken => Cause::Broken,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TramPolicy {
    #[default]
    Incremental,
    RecencyHistory,
}

impl TramPolicy {
    pub fn name(self) -> &'static str {
        match self {
            TramPolicy::Incremental => "incremental",
            TramPolicy::RecencyHistory => "recency",
        }
    }
}

impl FromStr for TramPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "incremental" => Ok(TramPolicy::Incremental),
            "recency" | "recency-history" => Ok(TramPolicy::RecencyHistory),
            other => Err(format!("unknown TRAM policy `{other}`")),
        }
    }
}

/// Level implied by an experience list under the recency-history policy.
pub fn level_from_history(history: &[Outcome]) -> TrustLevel {
    let last = match history.last() {
        None => return TrustLevel::NEUTRAL,
        Some(o) => *o,
    };
    let before = history.len().checked_sub(2).map(|i| history[i]);
    match (last, before) {
        (Outcome::Kept, Some(Outcome::Kept)) => TrustLevel::MAX,
        (Outcome::Kept, _) => TrustLevel::clamped(1),
        (Outcome::Broken, Some(Outcome::Broken)) => TrustLevel::MIN,
        (Outcome::Broken, _) => TrustLevel::clamped(-1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stamped {
    pub level: TrustLevel,
    pub tick: Tick,
    pub cause: Cause,
}

/// One agent's appreciation levels and assessment history.
#[derive(Debug, Clone, Default)]
pub struct TrustStore {
    levels: BTreeMap<AppreciationKey, Stamped>,
    experience: BTreeMap<AppreciationKey, Vec<Experience>>,
}

impl TrustStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stored level, or neutral when never set.
    pub fn get(&self, key: &AppreciationKey) -> Result<TrustLevel, TrustError> {
        key.validate()?;
        Ok(self.level(key))
    }

    /// Like [`TrustStore::get`] for keys known to be well-formed.
    pub fn level(&self, key: &AppreciationKey) -> TrustLevel {
        self.levels
            .get(key)
            .map(|s| s.level)
            .unwrap_or(TrustLevel::NEUTRAL)
    }

    pub fn stamped(&self, key: &AppreciationKey) -> Option<Stamped> {
        self.levels.get(key).copied()
    }

    /// Overwrites a level. Later assessments build on it, which is how
    /// reputation reports can overrule earlier own experience and be
    /// superseded by newer own experience.
    pub fn set(
        &mut self,
        key: AppreciationKey,
        level: TrustLevel,
        tick: Tick,
        cause: Cause,
    ) -> Result<(), TrustError> {
        key.validate()?;
        self.levels.insert(key, Stamped { level, tick, cause });
        Ok(())
    }

    /// Appends an assessment outcome and updates the level under `policy`.
    pub fn record_assessment(
        &mut self,
        key: &AppreciationKey,
        outcome: Outcome,
        tick: Tick,
        policy: TramPolicy,
    ) -> Result<TrustLevel, TrustError> {
        key.validate()?;
        if !key.kind.is_trust() {
            return Err(TrustError::NotATrustKind(key.kind));
        }
        let history = self.experience.entry(key.clone()).or_default();
        if let Some(last) = history.last() {
            if tick < last.tick {
                return Err(TrustError::ExperienceOutOfOrder {
                    last: last.tick,
                    tick,
                });
            }
        }
        history.push(Experience { outcome, tick });

        let new_level = match policy {
            TramPolicy::Incremental => {
                let old = self.level(key);
                match outcome {
                    Outcome::Kept => old.raised(),
                    Outcome::Broken => old.lowered(),
                }
            }
            TramPolicy::RecencyHistory => {
                let outcomes: Vec<Outcome> = history.iter().map(|e| e.outcome).collect();
                level_from_history(&outcomes)
            }
        };
        self.levels.insert(
            key.clone(),
            Stamped {
                level: new_level,
                tick,
                cause: outcome.into(),
            },
        );
        Ok(new_level)
    }

    pub fn experience(&self, key: &AppreciationKey) -> &[Experience] {
        self.experience.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// True when an own-experience assessment for `key` happened within the
    /// last `window` ticks before `now` (inclusive).
    pub fn has_recent_experience(&self, key: &AppreciationKey, now: Tick, window: Tick) -> bool {
        self.experience(key)
            .last()
            .is_some_and(|e| now.saturating_sub(e.tick) <= window)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AppreciationKey, &Stamped)> {
        self.levels.iter()
    }
}

/// Expected value of a directional's outcome: credibility scaled by the
/// plausibility of the trust level (0.05, 0.25, 0.5, 0.75, 0.95 from -2 up).
pub fn expectation<S: Scalar>(credibility: S, trust: TrustLevel) -> Result<S, TrustError> {
    if credibility < S::zero() || credibility > S::one() {
        return Err(TrustError::CredibilityOutOfRange);
    }
    Ok(credibility * trust.plausibility::<S>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    fn a(s: &str) -> AgentId {
        AgentId::new(s).unwrap()
    }

    fn lvl(v: i64) -> TrustLevel {
        TrustLevel::new(v).unwrap()
    }

    #[test]
    fn unset_key_is_neutral() {
        let store = TrustStore::new();
        assert_eq!(
            store
                .get(&AppreciationKey::trust(&a("q"), &a("p")))
                .unwrap(),
            lvl(0)
        );
    }

    #[test]
    fn set_reads_back() {
        let mut store = TrustStore::new();
        let key = AppreciationKey::trust(&a("q"), &a("p"));
        store.set(key.clone(), lvl(1), 0, Cause::Init).unwrap();
        assert_eq!(store.get(&key).unwrap(), lvl(1));
    }

    #[test]
    fn malformed_keys_are_rejected() {
        let mut key = AppreciationKey::trust(&a("q"), &a("p"));
        key.kind = AppreciationKind::TaskTrust;
        assert!(matches!(
            TrustStore::new().get(&key),
            Err(TrustError::MalformedKey { .. })
        ));
        let mut key = AppreciationKey::program_task(
            AppreciationKind::Confidence,
            &a("q"),
            &ProgramId::new("P").unwrap(),
            &TaskId::new("U").unwrap(),
        );
        assert!(key.validate().is_ok());
        key.target = Target::Agent(a("p"));
        assert!(key.validate().is_err());
    }

    #[test]
    fn incremental_updates() {
        let key = AppreciationKey::trust(&a("q"), &a("p"));
        let mut store = TrustStore::new();
        store.set(key.clone(), lvl(1), 0, Cause::Init).unwrap();
        let l = store
            .record_assessment(&key, Outcome::Broken, 1, TramPolicy::Incremental)
            .unwrap();
        assert_eq!(l, lvl(0));

        store.set(key.clone(), lvl(2), 2, Cause::Init).unwrap();
        let l = store
            .record_assessment(&key, Outcome::Kept, 3, TramPolicy::Incremental)
            .unwrap();
        assert_eq!(l, lvl(2));
    }

    #[test]
    fn recency_history_updates() {
        let key = AppreciationKey::task_trust(&a("q"), &a("p"), &TaskId::new("U").unwrap());
        let mut store = TrustStore::new();
        store
            .record_assessment(&key, Outcome::Kept, 1, TramPolicy::RecencyHistory)
            .unwrap();
        let l = store
            .record_assessment(&key, Outcome::Kept, 2, TramPolicy::RecencyHistory)
            .unwrap();
        assert_eq!(l, lvl(2));

        let mut store = TrustStore::new();
        for (t, o) in [
            (1, Outcome::Broken),
            (2, Outcome::Broken),
            (3, Outcome::Kept),
        ] {
            store
                .record_assessment(&key, o, t, TramPolicy::RecencyHistory)
                .unwrap();
        }
        assert_eq!(store.level(&key), lvl(1));
    }

    #[test]
    fn non_trust_kind_cannot_be_assessed() {
        let key = AppreciationKey::task_credibility(&a("q"), &a("p"), &TaskId::new("U").unwrap());
        assert_eq!(
            TrustStore::new().record_assessment(&key, Outcome::Kept, 0, TramPolicy::Incremental),
            Err(TrustError::NotATrustKind(AppreciationKind::TaskCredibility))
        );
    }

    #[test]
    fn experience_must_be_tick_ordered() {
        let key = AppreciationKey::trust(&a("q"), &a("p"));
        let mut store = TrustStore::new();
        store
            .record_assessment(&key, Outcome::Kept, 5, TramPolicy::Incremental)
            .unwrap();
        assert!(matches!(
            store.record_assessment(&key, Outcome::Kept, 4, TramPolicy::Incremental),
            Err(TrustError::ExperienceOutOfOrder { last: 5, tick: 4 })
        ));
    }

    #[test]
    fn expectation_values() {
        assert_eq!(expectation(0.0f64, lvl(2)).unwrap(), 0.0);
        assert_eq!(expectation(1.0f64, lvl(0)).unwrap(), 0.5);
        assert_eq!(
            expectation(Rational::new(1, 2), lvl(1)).unwrap(),
            Rational::new(3, 8)
        );
        assert_eq!(
            expectation(1.5f64, lvl(0)),
            Err(TrustError::CredibilityOutOfRange)
        );
        assert_eq!(
            expectation(-0.1f64, lvl(0)),
            Err(TrustError::CredibilityOutOfRange)
        );
    }

    #[test]
    fn self_trust_is_an_ordinary_key() {
        let key = AppreciationKey::trust(&a("q"), &a("q"));
        assert!(key.is_self_trust());
        let mut store = TrustStore::new();
        store
            .record_assessment(&key, Outcome::Broken, 0, TramPolicy::Incremental)
            .unwrap();
        assert_eq!(store.level(&key), lvl(-1));
    }

    proptest! {
        #[test]
        fn expectation_is_monotone(c1 in 0u32..=100, c2 in 0u32..=100, t1 in -2i64..=2, t2 in -2i64..=2) {
            let (lo_c, hi_c) = (c1.min(c2), c1.max(c2));
            let (lo_t, hi_t) = (lvl(t1.min(t2)), lvl(t1.max(t2)));
            let c = |x: u32| Rational::new(x as i64, 100);
            prop_assert!(expectation(c(lo_c), lo_t).unwrap() <= expectation(c(lo_c), hi_t).unwrap());
            prop_assert!(expectation(c(lo_c), lo_t).unwrap() <= expectation(c(hi_c), lo_t).unwrap());
        }

        #[test]
        fn recency_level_ignores_interleaving(outcomes in proptest::collection::vec(any::<bool>(), 0..20)) {
            let k1 = AppreciationKey::trust(&a("q"), &a("p"));
            let k2 = AppreciationKey::trust(&a("q"), &a("r"));
            let mut alone = TrustStore::new();
            let mut mixed = TrustStore::new();
            for (i, &kept) in outcomes.iter().enumerate() {
                let o = if kept { Outcome::Kept } else { Outcome::Broken };
                alone.record_assessment(&k1, o, i as Tick, TramPolicy::RecencyHistory).unwrap();
                mixed.record_assessment(&k2, Outcome::Broken, i as Tick, TramPolicy::RecencyHistory).unwrap();
                mixed.record_assessment(&k1, o, i as Tick, TramPolicy::RecencyHistory).unwrap();
            }
            prop_assert_eq!(alone.level(&k1), mixed.level(&k1));
        }
    }
}
