use std::collections::BTreeMap;
use std::fmt;

use crate::agent::Action;
use crate::ids::{AgentId, ProgramId, TaskId};
use crate::level::TrustLevel;
use crate::lifecycle::LifecycleState;
use crate::trust::{AppreciationKey, AppreciationKind, Cause, Target};
use crate::Tick;

use super::scenario::{Directive, Scenario};
use super::EngineError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Issue {
        token: String,
        statement: String,
    },
    Deliver {
        token: String,
        subject: AgentId,
        route: &'static str,
        credibility: String,
        expectation: String,
    },
    Trust {
        subject: AgentId,
        target: String,
        kind: AppreciationKind,
        program: Option<ProgramId>,
        task: Option<TaskId>,
        level: TrustLevel,
        cause: Cause,
    },
    Lifecycle {
        token: String,
        subject: AgentId,
        state: LifecycleState,
        fade: String,
    },
    Action {
        agent: AgentId,
        action: Action,
    },
    /// `fields` is preformatted `key=value` pairs.
    Reputation {
        kind: &'static str,
        fields: String,
    },
    Terminated {
        token: String,
    },
    Warning {
        detail: String,
    },
}

impl TraceEvent {
    pub fn trust(key: &AppreciationKey, level: TrustLevel, cause: Cause) -> Self {
        let target = match &key.target {
            Target::Agent(a) => a.to_string(),
            Target::Program(p) => p.to_string(),
        };
        TraceEvent::Trust {
            subject: key.subject.clone(),
            target,
            kind: key.kind,
            program: key.program.clone(),
            task: key.task.clone(),
            level,
            cause,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            TraceEvent::Issue { .. } => "issue",
            TraceEvent::Deliver { .. } => "deliver",
            TraceEvent::Trust { .. } => "trust",
            TraceEvent::Lifecycle { .. } => "lifecycle",
            TraceEvent::Action { .. } => "agent",
            TraceEvent::Reputation { .. } => "reputation",
            TraceEvent::Terminated { .. } => "terminated",
            TraceEvent::Warning { .. } => "warning",
        }
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Issue { token, statement } => {
                write!(f, "issue token={token} stmt={statement}")
            }
            TraceEvent::Deliver {
                token,
                subject,
                route,
                credibility,
                expectation,
            } => write!(
                f,
                "deliver token={token} subject={subject} route={route} \
                 credibility={credibility} expectation={expectation}"
            ),
            TraceEvent::Trust {
                subject,
                target,
                kind,
                program,
                task,
                level,
                cause,
            } => {
                write!(f, "trust subject={subject} target={target} kind={kind}")?;
                if let Some(p) = program {
                    write!(f, " program={p}")?;
                }
                if let Some(t) = task {
                    write!(f, " task={t}")?;
                }
                write!(f, " level={level} cause={}", cause.name())
            }
            TraceEvent::Lifecycle {
                token,
                subject,
                state,
                fade,
            } => write!(
                f,
                "lifecycle token={token} subject={subject} state={state} fade={fade}"
            ),
            TraceEvent::Action { agent, action } => {
                write!(
                    f,
                    "agent={agent} action={} detail={}",
                    action.name(),
                    action.detail()
                )
            }
            TraceEvent::Reputation { kind, fields } => write!(f, "reputation kind={kind} {fields}"),
            TraceEvent::Terminated { token } => write!(f, "terminated token={token}"),
            TraceEvent::Warning { detail } => write!(f, "warning detail={detail}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLine {
    pub tick: Tick,
    /// Directive that caused the line; `None` for end-of-tick housekeeping.
    pub directive: Option<usize>,
    pub event: TraceEvent,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} {}", self.tick, self.event)
    }
}

/// Ordered output of a run. Rendering is one line per event, each ending
/// in a newline.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    lines: Vec<TraceLine>,
    /// Number of lines already written when each directive started.
    checkpoints: BTreeMap<usize, usize>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn push(&mut self, tick: Tick, directive: Option<usize>, event: TraceEvent) {
        self.lines.push(TraceLine {
            tick,
            directive,
            event,
        });
    }

    pub(crate) fn checkpoint(&mut self, directive: usize) {
        self.checkpoints.insert(directive, self.lines.len());
    }

    pub fn lines(&self) -> &[TraceLine] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = &TraceEvent> {
        self.lines.iter().map(|l| &l.event)
    }

    /// Levels written for `subject`'s general trust in `target`, in order.
    pub fn trust_trajectory(&self, subject: &str, target: &str) -> Vec<i64> {
        self.events()
            .filter_map(|e| match e {
                TraceEvent::Trust {
                    subject: s,
                    target: t,
                    kind: AppreciationKind::GeneralTrust,
                    level,
                    ..
                } if s.as_str() == subject && t == target => Some(i64::from(*level)),
                _ => None,
            })
            .collect()
    }

    /// Actions taken by `agent`, in order.
    pub fn actions_of(&self, agent: &str) -> Vec<&Action> {
        self.events()
            .filter_map(|e| match e {
                TraceEvent::Action { agent: a, action } if a.as_str() == agent => Some(action),
                _ => None,
            })
            .collect()
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectOutcome {
    pub line: usize,
    pub tick: Tick,
    pub directive: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
}

impl fmt::Display for ExpectOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed {
            write!(
                f,
                "pass line {} t={} {}",
                self.line, self.tick, self.directive
            )
        } else {
            write!(
                f,
                "FAIL line {} t={} {}: expected {}, actual {}",
                self.line, self.tick, self.directive, self.expected, self.actual
            )
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub outcomes: Vec<ExpectOutcome>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ExpectOutcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            writeln!(f, "{o}")?;
        }
        let failed = self.failures().count();
        write!(
            f,
            "{} expectations, {} passed, {failed} failed",
            self.outcomes.len(),
            self.outcomes.len() - failed
        )
    }
}

/// Evaluates every expectation of `scenario` against the trace it produced.
/// `expect-trust` compares the last level written for the key before the
/// directive ran (neutral if none); `expect-action` looks for a matching
/// action earlier in the same tick.
pub fn expect_check(scenario: &Scenario, trace: &Trace) -> Result<Report, EngineError> {
    let known: std::collections::BTreeSet<AgentId> = scenario
        .all_events()
        .filter(|e| !e.directive.is_expectation())
        .flat_map(|e| e.directive.agents())
        .collect();
    let mut report = Report::default();
    for (index, event) in scenario.all_events().enumerate() {
        if !event.directive.is_expectation() {
            continue;
        }
        for agent in event.directive.agents() {
            if !known.contains(&agent) {
                return Err(EngineError::UnknownAgent {
                    line: event.line,
                    agent,
                });
            }
        }
        let end = *trace
            .checkpoints
            .get(&index)
            .ok_or(EngineError::TraceMismatch { line: event.line })?;
        let before = &trace.lines[..end];
        let (expected, actual, passed) = match &event.directive {
            Directive::ExpectTrust { spec, level } => {
                let probe = TraceEvent::trust(&spec.key(), *level, Cause::Init);
                let actual = before
                    .iter()
                    .rev()
                    .find_map(|l| same_key(&l.event, &probe))
                    .unwrap_or(TrustLevel::NEUTRAL);
                (level.to_string(), actual.to_string(), actual == *level)
            }
            Directive::ExpectAction {
                agent,
                action,
                program,
                task,
            } => {
                let seen: Vec<&Action> = before
                    .iter()
                    .rev()
                    .take_while(|l| l.tick == event.tick)
                    .filter_map(|l| match &l.event {
                        TraceEvent::Action { agent: a, action } if a == agent => Some(action),
                        _ => None,
                    })
                    .collect();
                let hit = seen.iter().any(|a| {
                    a.name() == action
                        && program.as_ref().is_none_or(|p| a.program() == Some(p))
                        && task.as_ref().is_none_or(|t| a.task() == Some(t))
                });
                let actual = if seen.is_empty() {
                    "no action".to_string()
                } else {
                    seen.iter()
                        .rev()
                        .map(|a| a.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                (action.clone(), actual, hit)
            }
            _ => unreachable!("filtered to expectations"),
        };
        report.outcomes.push(ExpectOutcome {
            line: event.line,
            tick: event.tick,
            directive: event.directive.to_string(),
            expected,
            actual,
            passed,
        });
    }
    Ok(report)
}

fn same_key(event: &TraceEvent, probe: &TraceEvent) -> Option<TrustLevel> {
    match (event, probe) {
        (
            TraceEvent::Trust {
                subject,
                target,
                kind,
                program,
                task,
                level,
                ..
            },
            TraceEvent::Trust {
                subject: s,
                target: t,
                kind: k,
                program: p,
                task: tk,
                ..
            },
        ) if subject == s && target == t && kind == k && program == p && task == tk => Some(*level),
        _ => None,
    }
}
