//! Credibility appraisal: consultant credibility levels, the credibility
//! gate for incoming directionals, and attribute-conditioned install rules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::ids::{AgentId, ProgramId, TaskId};
use crate::level::TrustLevel;
use crate::scalar::Scalar;

macro_rules! attributes {
    ($($variant:ident => $name:literal,)*) => {
        /// Program, task, user and provider attributes, each rated on the
        /// five-point scale.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Attribute {
            $($variant,)*
        }

        impl Attribute {
            pub const ALL: &'static [Attribute] = &[$(Attribute::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Attribute::$variant => $name,)*
                }
            }
        }
    };
}

attributes! {
    ProgramDevelopmentTime => "program-development-time",
    ProgramDevelopmentCost => "program-development-cost",
    ProgramQuality => "program-quality",
    ProgramProcessDocumentation => "program-manufacturing-process-documentation-availability",
    ProgramSpecificity => "program-installation-specificity",
    ProgramTestability => "program-testability",
    ProgramMaintainability => "program-maintainability",
    ProgramUserBaseSize => "program-user-base-size",
    ProgramSize => "program-size",
    ProgramDependability => "program-dependability",
    TaskDescriptionAvailability => "task-description-availability",
    TaskUbiquity => "task-ubiquity",
    TaskComplexity => "task-complexity",
    TaskSafetyCriticality => "task-safety-criticality",
    TaskEvolutionSpeed => "task-evolution-speed",
    UserAwareness => "user-awareness-of-required-functionality",
    UserDependencyOnTask => "user-dependency-on-task",
    UserAccessToAlternatives => "user-access-to-alternative-providers",
    UserFailureDiagnosisCompetence => "user-failure-diagnosis-competence",
    ProviderTrackRecord => "provider-track-record",
    ProviderSize => "provider-size",
    ProviderProfitability => "provider-profitability-and-stability",
    ProviderReputation => "provider-reputation",
    ProviderCertification => "provider-certification",
    ProviderProcessDocumentation => "provider-process-documentation-available",
    ProviderProcessMaturity => "provider-process-maturity-level",
    ProviderFormalMethods => "provider-formal-specification-and-verification",
    ProviderMarketDependence => "provider-dependence-from-market",
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Attribute::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown attribute `{s}`"))
    }
}

/// Attribute ratings; missing attributes read as moderate (0).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttributeVector(BTreeMap<Attribute, TrustLevel>);

impl AttributeVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, attr: Attribute, level: TrustLevel) -> &mut Self {
        self.0.insert(attr, level);
        self
    }

    pub fn with(mut self, attr: Attribute, level: i64) -> Self {
        self.0.insert(attr, TrustLevel::clamped(level));
        self
    }

    pub fn get(&self, attr: Attribute) -> TrustLevel {
        self.0.get(&attr).copied().unwrap_or(TrustLevel::NEUTRAL)
    }

    pub fn merge(&mut self, other: &AttributeVector) {
        for (a, l) in &other.0 {
            self.0.insert(*a, *l);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Attribute, TrustLevel)> + '_ {
        self.0.iter().map(|(a, l)| (*a, *l))
    }
}

impl FromIterator<(Attribute, TrustLevel)> for AttributeVector {
    fn from_iter<I: IntoIterator<Item = (Attribute, TrustLevel)>>(iter: I) -> Self {
        AttributeVector(iter.into_iter().collect())
    }
}

/// A rating word as used in the rule conditions. `low` and `high` are
/// satisfied by the extreme level too; `very low`, `moderate` and
/// `very high` are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rating {
    VeryLow,
    Low,
    Moderate,
    High,
    VeryHigh,
}

impl Rating {
    pub fn holds(self, level: TrustLevel) -> bool {
        let v = level.value();
        match self {
            Rating::VeryLow => v == -2,
            Rating::Low => v <= -1,
            Rating::Moderate => v == 0,
            Rating::High => v >= 1,
            Rating::VeryHigh => v == 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstallVerdict {
    RefuseInstall,
    Install,
    NoRule,
}

impl InstallVerdict {
    pub fn name(self) -> &'static str {
        match self {
            InstallVerdict::RefuseInstall => "refuse-install",
            InstallVerdict::Install => "install",
            InstallVerdict::NoRule => "no-rule",
        }
    }
}

/// A conjunction of attribute conditions with its verdict.
#[derive(Debug, Clone, Copy)]
pub struct AttributeRule {
    pub label: &'static str,
    pub verdict: InstallVerdict,
    pub conditions: &'static [(Attribute, Rating)],
}

impl AttributeRule {
    pub fn matches(&self, attrs: &AttributeVector) -> bool {
        self.conditions.iter().all(|(a, r)| r.holds(attrs.get(*a)))
    }
}

use Attribute::*;
use Rating::*;

/// Refusal combinations first, then install combinations, each block in
/// its listed order.
pub const ATTRIBUTE_RULES: &[AttributeRule] = &[
    AttributeRule {
        label: "refuse-1",
        verdict: InstallVerdict::RefuseInstall,
        conditions: &[(ProviderSize, VeryLow), (ProgramSize, VeryHigh)],
    },
    AttributeRule {
        label: "refuse-2",
        verdict: InstallVerdict::RefuseInstall,
        conditions: &[
            (ProgramDevelopmentCost, VeryLow),
            (ProgramUserBaseSize, Low),
            (UserDependencyOnTask, High),
            (TaskUbiquity, Low),
            (ProgramDevelopmentTime, High),
        ],
    },
    AttributeRule {
        label: "refuse-3",
        verdict: InstallVerdict::RefuseInstall,
        conditions: &[
            (ProgramDependability, Low),
            (TaskSafetyCriticality, High),
            (UserDependencyOnTask, High),
        ],
    },
    AttributeRule {
        label: "refuse-4",
        verdict: InstallVerdict::RefuseInstall,
        conditions: &[
            (ProgramMaintainability, Low),
            (TaskEvolutionSpeed, High),
            (UserAwareness, Low),
            (UserAccessToAlternatives, High),
        ],
    },
    AttributeRule {
        label: "install-1",
        verdict: InstallVerdict::Install,
        conditions: &[
            (ProgramQuality, High),
            (ProgramDependability, High),
            (ProgramUserBaseSize, High),
            (UserDependencyOnTask, Moderate),
        ],
    },
    AttributeRule {
        label: "install-2",
        verdict: InstallVerdict::Install,
        conditions: &[
            (ProgramDependability, High),
            (TaskSafetyCriticality, High),
            (UserDependencyOnTask, High),
            (UserAccessToAlternatives, Low),
        ],
    },
    AttributeRule {
        label: "install-3",
        verdict: InstallVerdict::Install,
        conditions: &[
            (ProgramMaintainability, High),
            (TaskEvolutionSpeed, Low),
            (UserAwareness, High),
            (UserAccessToAlternatives, Low),
            (ProviderReputation, Moderate),
            (ProgramDevelopmentCost, Moderate),
            (ProgramDevelopmentTime, Moderate),
            (TaskDescriptionAvailability, High),
        ],
    },
    // task-oriented credibility; "highly user specific" read as very low ubiquity
    AttributeRule {
        label: "install-4",
        verdict: InstallVerdict::Install,
        conditions: &[
            (ProviderTrackRecord, High),
            (TaskSafetyCriticality, Low),
            (UserFailureDiagnosisCompetence, High),
            (TaskUbiquity, VeryLow),
        ],
    },
    AttributeRule {
        label: "install-5",
        verdict: InstallVerdict::Install,
        conditions: &[
            (ProviderTrackRecord, High),
            (TaskSafetyCriticality, High),
            (UserAwareness, High),
            (UserFailureDiagnosisCompetence, High),
            (UserDependencyOnTask, High),
            (TaskUbiquity, VeryLow),
        ],
    },
];

/// First rule satisfied by `attrs`, if any.
pub fn matching_rule(attrs: &AttributeVector) -> Option<&'static AttributeRule> {
    ATTRIBUTE_RULES.iter().find(|r| r.matches(attrs))
}

pub fn attribute_install_decision(attrs: &AttributeVector) -> InstallVerdict {
    matching_rule(attrs)
        .map(|r| r.verdict)
        .unwrap_or(InstallVerdict::NoRule)
}

/// What a credibility level is about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Focus {
    Task(TaskId),
    Program(ProgramId),
}

impl Focus {
    pub fn name(&self) -> &str {
        match self {
            Focus::Task(t) => t.as_str(),
            Focus::Program(p) => p.as_str(),
        }
    }
}

/// Background facts about a consultant. The sets hold task and program
/// names; "related" tasks or programs are listed explicitly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsultantProfile {
    pub agent: AgentId,
    pub independent: bool,
    pub experienced: BTreeSet<String>,
    pub range: BTreeSet<String>,
    pub reputation: BTreeSet<String>,
    pub affiliated: BTreeSet<String>,
}

impl ConsultantProfile {
    pub fn new(agent: AgentId) -> Self {
        ConsultantProfile {
            agent,
            independent: false,
            experienced: BTreeSet::new(),
            range: BTreeSet::new(),
            reputation: BTreeSet::new(),
            affiliated: BTreeSet::new(),
        }
    }

    /// Independence with respect to `focus`: affiliation with the producer
    /// of the focus overrides the general flag.
    pub fn independent_for(&self, focus: &Focus) -> bool {
        self.independent && !self.affiliated.contains(focus.name())
    }
}

/// Consultant credibility on the five-point scale; the most specific
/// positive description wins.
pub fn credibility_level(profile: &ConsultantProfile, focus: &Focus) -> TrustLevel {
    let key = focus.name();
    let independent = profile.independent_for(focus);
    let experienced = profile.experienced.contains(key);
    let range = profile.range.contains(key);
    let reputation = profile.reputation.contains(key);
    let affiliated = profile.affiliated.contains(key);

    let v = if independent && experienced && range && reputation {
        2
    } else if independent && experienced && range {
        1
    } else if independent && experienced {
        0
    } else if !experienced && affiliated {
        -2
    } else {
        -1
    };
    TrustLevel::clamped(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Engage,
    /// Fades at an accelerated rate and generates no expectation.
    DiscardFast,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Engage => "engage",
            Route::DiscardFast => "discard-fast",
        }
    }
}

/// Fade-rate multiplier applied to discarded fragments.
pub const DISCARD_FADE_MULTIPLIER: u64 = 4;

pub fn credibility_gate<S: Scalar>(score: S, floor: S) -> Route {
    if score >= floor {
        Route::Engage
    } else {
        Route::DiscardFast
    }
}

/// Score in `[0, 1]` for a credibility level.
pub fn credibility_score<S: Scalar>(level: TrustLevel) -> S {
    level.plausibility()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn profile() -> ConsultantProfile {
        ConsultantProfile::new(AgentId::new("c").unwrap())
    }

    fn task() -> Focus {
        Focus::Task(TaskId::new("U").unwrap())
    }

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn catalog_has_28_unique_names() {
        assert_eq!(Attribute::ALL.len(), 28);
        let names: BTreeSet<_> = Attribute::ALL.iter().map(|a| a.name()).collect();
        assert_eq!(names.len(), 28);
        for a in Attribute::ALL {
            assert_eq!(a.name().parse::<Attribute>().unwrap(), *a);
        }
    }

    #[test]
    fn affiliated_without_experience_is_low() {
        let mut p = profile();
        p.affiliated = set(&["U"]);
        assert_eq!(credibility_level(&p, &task()).value(), -2);
    }

    #[test]
    fn independent_and_experienced_is_neutral() {
        let mut p = profile();
        p.independent = true;
        p.experienced = set(&["U"]);
        assert_eq!(credibility_level(&p, &task()).value(), 0);
    }

    #[test]
    fn full_virtues_are_positive() {
        let mut p = profile();
        p.independent = true;
        p.experienced = set(&["U"]);
        p.range = set(&["U"]);
        assert_eq!(credibility_level(&p, &task()).value(), 1);
        p.reputation = set(&["U"]);
        assert_eq!(credibility_level(&p, &task()).value(), 2);
    }

    #[test]
    fn dependence_or_inexperience_is_moderately_negative() {
        let mut p = profile();
        p.experienced = set(&["U"]);
        assert_eq!(credibility_level(&p, &task()).value(), -1);
        let mut p = profile();
        p.independent = true;
        assert_eq!(credibility_level(&p, &task()).value(), -1);
        // affiliation with the focus cancels independence
        let mut p = profile();
        p.independent = true;
        p.experienced = set(&["U"]);
        p.affiliated = set(&["U"]);
        assert_eq!(credibility_level(&p, &task()).value(), -1);
    }

    #[test]
    fn gate_routes() {
        assert_eq!(credibility_gate(0.9f64, 0.5), Route::Engage);
        assert_eq!(credibility_gate(0.1f64, 0.5), Route::DiscardFast);
        assert_eq!(
            credibility_gate(Rational::new(1, 2), Rational::new(1, 2)),
            Route::Engage
        );
    }

    #[test]
    fn install_rule_examples() {
        let refuse = AttributeVector::new()
            .with(ProviderSize, -2)
            .with(ProgramSize, 2);
        assert_eq!(
            attribute_install_decision(&refuse),
            InstallVerdict::RefuseInstall
        );

        let install = AttributeVector::new()
            .with(ProgramQuality, 1)
            .with(ProgramDependability, 1)
            .with(ProgramUserBaseSize, 1)
            .with(UserDependencyOnTask, 0);
        assert_eq!(
            attribute_install_decision(&install),
            InstallVerdict::Install
        );

        let neutral: AttributeVector = Attribute::ALL
            .iter()
            .map(|a| (*a, TrustLevel::NEUTRAL))
            .collect();
        assert_eq!(attribute_install_decision(&neutral), InstallVerdict::NoRule);
        assert_eq!(
            attribute_install_decision(&AttributeVector::new()),
            InstallVerdict::NoRule
        );
    }

    #[test]
    fn refusal_takes_precedence() {
        // satisfies refuse-3 and install-3 at once
        let attrs = AttributeVector::new()
            .with(ProgramDependability, -1)
            .with(TaskSafetyCriticality, 1)
            .with(UserDependencyOnTask, 1)
            .with(ProgramMaintainability, 1)
            .with(TaskEvolutionSpeed, -1)
            .with(UserAwareness, 1)
            .with(UserAccessToAlternatives, -1)
            .with(TaskDescriptionAvailability, 1);
        assert_eq!(matching_rule(&attrs).unwrap().label, "refuse-3");
    }

    #[test]
    fn every_rule_is_reachable() {
        for rule in ATTRIBUTE_RULES {
            let attrs: AttributeVector = rule
                .conditions
                .iter()
                .map(|(a, r)| {
                    let v = match r {
                        VeryLow => -2,
                        Low => -1,
                        Moderate => 0,
                        High => 1,
                        VeryHigh => 2,
                    };
                    (*a, TrustLevel::clamped(v))
                })
                .collect();
            assert!(rule.matches(&attrs), "{}", rule.label);
            assert_eq!(
                attribute_install_decision(&attrs),
                rule.verdict,
                "{}",
                rule.label
            );
        }
    }
}
