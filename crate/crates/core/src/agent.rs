//! Agent behaviour around promised programs.
//!
//! An agent keeps the fragments it has received, a portfolio of impositions
//! (including the self-impositions implied by its own promises), the set of
//! programs it has prepared for tasks, and an index of the adequacy promises
//! backing each prepared pair. The rules below decide what it does when a
//! program is promised adequate, when it is asked to perform a task, and
//! when an outcome is observed.
//!
//! | rule | trigger                      | behaviour                                         |
//! |------|------------------------------|---------------------------------------------------|
//! | 1    | adequacy promise, trust > 0  | prepare the program                               |
//! | 2    | adequacy promise, trust <= 0 | refuse to install                                 |
//! | 3    | request, sole promiser >= 0  | use the program                                   |
//! | 4    | sole promiser at -2          | unload the program                                |
//! | 5    | request, sole promiser at -1 | use only if used before, else fail                |
//! | 6    | several candidates           | program of the most trusted promiser              |
//! | 7    | ties                         | per-program trust sums, then most recent promise  |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::appraisal::{InstallVerdict, Route, DISCARD_FADE_MULTIPLIER};
use crate::ids::{AgentId, ProgramId, TaskId};
use crate::level::TrustLevel;
use crate::lifecycle::{LifecycleRecord, LifecycleState};
use crate::scalar::Scalar;
use crate::statement::{equivalent, DirectionalKind, Statement, TypeTag};
use crate::trust::{AppreciationKey, Outcome, TramPolicy, TrustError, TrustStore};
use crate::Tick;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("`{0}` is not an adequacy(program,task) type")]
    MalformedAdequacy(TypeTag),
    #[error("no active adequacy promise held for program {program} and task {task}")]
    NoMatchingFragment { program: ProgramId, task: TaskId },
    #[error("no pending warning towards `{0}`")]
    NoPendingWarning(AgentId),
    #[error(transparent)]
    Trust(#[from] TrustError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailReason {
    NoPreparedProgram,
    NoActivePromise,
    /// Sole promiser distrusted at -1 and the program was never used.
    NotUsedBefore,
    /// Sole promiser strongly distrusted.
    Distrusted,
}

impl FailReason {
    pub fn name(self) -> &'static str {
        match self {
            FailReason::NoPreparedProgram => "no-prepared-program",
            FailReason::NoActivePromise => "no-active-promise",
            FailReason::NotUsedBefore => "not-used-before",
            FailReason::Distrusted => "distrusted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Prepare {
        program: ProgramId,
        task: TaskId,
    },
    RefuseInstall {
        program: ProgramId,
        task: TaskId,
    },
    Unload {
        program: ProgramId,
    },
    Use {
        program: ProgramId,
        task: TaskId,
    },
    Fail {
        task: TaskId,
        reason: FailReason,
    },
    /// Trust in the program's promiser is positive but not optimal.
    Warn {
        to: AgentId,
        program: ProgramId,
        task: TaskId,
    },
    ProposeWithdraw {
        to: AgentId,
        task: TaskId,
    },
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Prepare { .. } => "prepare",
            Action::RefuseInstall { .. } => "refuse-install",
            Action::Unload { .. } => "unload",
            Action::Use { .. } => "use",
            Action::Fail { .. } => "fail",
            Action::Warn { .. } => "warn",
            Action::ProposeWithdraw { .. } => "propose-withdraw",
        }
    }

    /// Comma-separated `key=value` details, free of spaces.
    pub fn detail(&self) -> String {
        match self {
            Action::Prepare { program, task }
            | Action::RefuseInstall { program, task }
            | Action::Use { program, task } => format!("program={program},task={task}"),
            Action::Unload { program } => format!("program={program}"),
            Action::Fail { task, reason } => format!("task={task},reason={}", reason.name()),
            Action::Warn { to, program, task } => {
                format!("to={to},program={program},task={task},note=trust-positive-not-optimal")
            }
            Action::ProposeWithdraw { to, task } => format!("to={to},task={task}"),
        }
    }

    pub fn program(&self) -> Option<&ProgramId> {
        match self {
            Action::Prepare { program, .. }
            | Action::RefuseInstall { program, .. }
            | Action::Unload { program }
            | Action::Use { program, .. }
            | Action::Warn { program, .. } => Some(program),
            _ => None,
        }
    }

    pub fn task(&self) -> Option<&TaskId> {
        match self {
            Action::Prepare { task, .. }
            | Action::RefuseInstall { task, .. }
            | Action::Use { task, .. }
            | Action::Fail { task, .. }
            | Action::Warn { task, .. }
            | Action::ProposeWithdraw { task, .. } => Some(task),
            Action::Unload { .. } => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.detail())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prepared {
    pub since: Tick,
    /// Cleared by unloading.
    pub used_before: bool,
}

/// An active adequacy promise held by the agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdequacyEntry {
    pub promiser: AgentId,
    pub issued: Tick,
    pub token: String,
}

impl AdequacyEntry {
    /// Recency order: issue tick, then the issuing sequence number in the token.
    fn recency(&self) -> (Tick, u64, &str) {
        let seq = self
            .token
            .rsplit_once('-')
            .and_then(|(_, s)| s.parse().ok())
            .unwrap_or(0);
        (self.issued, seq, &self.token)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingWarning {
    pub program: ProgramId,
    pub task: TaskId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reply {
    Proceed,
    Withdraw,
}

/// Trust change caused by assessing one fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrustDelta {
    pub target: AgentId,
    pub token: String,
    pub outcome: Outcome,
    pub before: TrustLevel,
    pub after: TrustLevel,
}

/// Where a received fragment ended up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Receipt {
    Stored,
    /// An equivalent active fragment already existed and was refreshed;
    /// carries that fragment's token.
    Refreshed(String),
}

/// A terminal transition of a held fragment.
#[derive(Debug, Clone, PartialEq)]
pub struct Ended<S> {
    pub token: String,
    pub state: LifecycleState,
    pub fade: S,
}

#[derive(Debug, Clone)]
pub struct AgentState<S> {
    pub id: AgentId,
    pub trust: TrustStore,
    /// Received impositions and self-impositions from own promises.
    pub portfolio: Vec<LifecycleRecord<S>>,
    /// Every other received directional.
    pub fragments: Vec<LifecycleRecord<S>>,
    prepared: BTreeMap<(ProgramId, TaskId), Prepared>,
    adequacy_index: BTreeMap<(ProgramId, TaskId), Vec<AdequacyEntry>>,
    pending: BTreeMap<AgentId, PendingWarning>,
}

impl<S: Scalar> AgentState<S> {
    pub fn new(id: AgentId) -> Self {
        AgentState {
            id,
            trust: TrustStore::new(),
            portfolio: Vec::new(),
            fragments: Vec::new(),
            prepared: BTreeMap::new(),
            adequacy_index: BTreeMap::new(),
            pending: BTreeMap::new(),
        }
    }

    /// General trust in `other`.
    pub fn trust_in(&self, other: &AgentId) -> TrustLevel {
        self.trust.level(&AppreciationKey::trust(&self.id, other))
    }

    pub fn prepared(&self) -> &BTreeMap<(ProgramId, TaskId), Prepared> {
        &self.prepared
    }

    pub fn is_prepared(&self, program: &ProgramId, task: &TaskId) -> bool {
        self.prepared.contains_key(&(program.clone(), task.clone()))
    }

    pub fn adequacy_index(&self) -> &BTreeMap<(ProgramId, TaskId), Vec<AdequacyEntry>> {
        &self.adequacy_index
    }

    pub fn pending(&self) -> &BTreeMap<AgentId, PendingWarning> {
        &self.pending
    }

    pub fn records(&self) -> impl Iterator<Item = &LifecycleRecord<S>> {
        self.portfolio.iter().chain(self.fragments.iter())
    }

    fn records_mut(&mut self) -> impl Iterator<Item = &mut LifecycleRecord<S>> {
        self.portfolio.iter_mut().chain(self.fragments.iter_mut())
    }

    /// Stores an incoming fragment. Impositions aimed at this agent and its
    /// own promises go to the portfolio. An active equivalent fragment in
    /// the same place is refreshed instead of duplicated.
    pub fn receive(&mut self, fragment: Statement, route: Route, now: Tick) -> Receipt {
        let to_portfolio = match fragment.kind {
            DirectionalKind::Imposition => fragment.promisee == self.id,
            DirectionalKind::Promise => fragment.promiser == self.id,
            _ => false,
        };
        let list = if to_portfolio {
            &mut self.portfolio
        } else {
            &mut self.fragments
        };
        if let Some(existing) = list
            .iter_mut()
            .find(|r| r.is_active() && equivalent(r.fragment(), &fragment))
        {
            if existing.refresh_on_repetition(&fragment, now).is_ok() {
                return Receipt::Refreshed(existing.token().unwrap_or_default().to_string());
            }
        }
        let mut record = LifecycleRecord::new(fragment, now);
        if route == Route::DiscardFast {
            record = record.accelerated(DISCARD_FADE_MULTIPLIER);
        }
        list.push(record);
        Receipt::Stored
    }

    fn prepare(&mut self, program: &ProgramId, task: &TaskId, now: Tick) -> Option<Action> {
        let key = (program.clone(), task.clone());
        if self.prepared.contains_key(&key) {
            return None;
        }
        self.prepared.insert(
            key,
            Prepared {
                since: now,
                used_before: false,
            },
        );
        Some(Action::Prepare {
            program: program.clone(),
            task: task.clone(),
        })
    }

    /// Rules 1, 2 and 4 for an adequacy promise addressed to this agent.
    /// A definite attribute verdict overrides the trust-based choice.
    pub fn on_adequacy_promise(
        &mut self,
        promise: &Statement,
        verdict: InstallVerdict,
        now: Tick,
    ) -> Result<Vec<Action>, AgentError> {
        let (program, task) = promise
            .type_tag
            .as_adequacy()
            .ok_or_else(|| AgentError::MalformedAdequacy(promise.type_tag.clone()))?;
        let token = promise.token().unwrap_or_default().to_string();
        let entries = self
            .adequacy_index
            .entry((program.clone(), task.clone()))
            .or_default();
        if !entries.iter().any(|e| e.token == token) {
            entries.push(AdequacyEntry {
                promiser: promise.promiser.clone(),
                issued: promise.issue_time.unwrap_or(now),
                token,
            });
        }

        let mut actions = Vec::new();
        let trusted = self.trust_in(&promise.promiser) > TrustLevel::NEUTRAL;
        let install = match verdict {
            InstallVerdict::Install => true,
            InstallVerdict::RefuseInstall => false,
            InstallVerdict::NoRule => trusted,
        };
        if install {
            actions.extend(self.prepare(&program, &task, now));
        } else if !self.is_prepared(&program, &task) || verdict == InstallVerdict::RefuseInstall {
            actions.push(Action::RefuseInstall { program, task });
        }
        actions.extend(self.enforce_unload());
        Ok(actions)
    }

    /// Distinct promisers of active adequacy promises for a pair.
    pub fn promisers(&self, program: &ProgramId, task: &TaskId) -> BTreeSet<AgentId> {
        self.adequacy_index
            .get(&(program.clone(), task.clone()))
            .map(|es| es.iter().map(|e| e.promiser.clone()).collect())
            .unwrap_or_default()
    }

    /// Rule 4: unload every prepared program whose sole promiser (for some
    /// prepared task) is now at -2.
    pub fn enforce_unload(&mut self) -> Vec<Action> {
        let doomed: BTreeSet<ProgramId> = self
            .prepared
            .keys()
            .filter(|(program, task)| {
                let promisers = self.promisers(program, task);
                promisers.len() == 1
                    && promisers
                        .iter()
                        .all(|p| self.trust_in(p) == TrustLevel::MIN)
            })
            .map(|(program, _)| program.clone())
            .collect();
        for program in &doomed {
            self.prepared.retain(|(p, _), _| p != program);
        }
        doomed
            .into_iter()
            .map(|program| Action::Unload { program })
            .collect()
    }

    fn candidates(&self, task: &TaskId) -> Vec<ProgramId> {
        self.prepared
            .keys()
            .filter(|(_, t)| t == task)
            .map(|(p, _)| p.clone())
            .collect()
    }

    /// Rules 3 to 7, without side effects.
    pub fn decide_task(&self, task: &TaskId) -> Action {
        let fail = |reason| Action::Fail {
            task: task.clone(),
            reason,
        };
        let use_ = |program: ProgramId| Action::Use {
            program,
            task: task.clone(),
        };
        let candidates = self.candidates(task);
        if candidates.is_empty() {
            return fail(FailReason::NoPreparedProgram);
        }

        if let [program] = candidates.as_slice() {
            let promisers = self.promisers(program, task);
            if promisers.len() == 1 {
                let promiser = promisers.iter().next().expect("one promiser");
                let used_before = self.prepared[&(program.clone(), task.clone())].used_before;
                return match self.trust_in(promiser).value() {
                    0..=2 => use_(program.clone()),
                    -1 if used_before => use_(program.clone()),
                    -1 => fail(FailReason::NotUsedBefore),
                    _ => fail(FailReason::Distrusted),
                };
            }
        }

        match self.select_by_trust(task, &candidates) {
            Some(program) => use_(program),
            None => fail(FailReason::NoActivePromise),
        }
    }

    /// Rules 6 and 7: highest promiser trust, then the largest per-program
    /// trust sum, then the most recent promise by a maximally trusted
    /// promiser, then the smallest program name.
    fn select_by_trust(&self, task: &TaskId, candidates: &[ProgramId]) -> Option<ProgramId> {
        struct Ranked<'a> {
            program: &'a ProgramId,
            max_trust: TrustLevel,
            sum: i64,
            entries: &'a [AdequacyEntry],
        }
        let ranked: Vec<Ranked> = candidates
            .iter()
            .filter_map(|program| {
                let entries = self
                    .adequacy_index
                    .get(&(program.clone(), task.clone()))
                    .filter(|es| !es.is_empty())?;
                let promisers: BTreeSet<&AgentId> = entries.iter().map(|e| &e.promiser).collect();
                let levels: Vec<TrustLevel> = promisers.iter().map(|p| self.trust_in(p)).collect();
                Some(Ranked {
                    program,
                    max_trust: *levels.iter().max()?,
                    sum: levels.iter().map(|l| i64::from(*l)).sum(),
                    entries,
                })
            })
            .collect();

        let top = ranked.iter().map(|r| r.max_trust).max()?;
        let mut best: Vec<&Ranked> = ranked.iter().filter(|r| r.max_trust == top).collect();

        let top_sum = best.iter().map(|r| r.sum).max()?;
        best.retain(|r| r.sum == top_sum);

        let latest = |r: &Ranked| {
            r.entries
                .iter()
                .filter(|e| self.trust_in(&e.promiser) == top)
                .map(|e| {
                    let (tick, seq, token) = e.recency();
                    (tick, seq, token.to_string())
                })
                .max()
        };
        let newest = best.iter().filter_map(|r| latest(r)).max();
        best.retain(|r| latest(r) == newest);

        best.iter().map(|r| r.program).min().cloned()
    }

    fn mark_used(&mut self, program: &ProgramId, task: &TaskId) {
        if let Some(p) = self.prepared.get_mut(&(program.clone(), task.clone())) {
            p.used_before = true;
        }
    }

    /// Handles a request to perform `task`.
    pub fn on_task_request(&mut self, task: &TaskId) -> Action {
        let action = self.decide_task(task);
        if let Action::Use { program, task } = &action {
            self.mark_used(program, task);
        }
        action
    }

    /// The balancing rules, applicable when exactly one program is prepared
    /// for the task and a single agent promised it adequate. Returns `None`
    /// when a warning about this task is still awaiting a reply.
    pub fn on_imposition(&mut self, imposer: &AgentId, task: &TaskId) -> Option<Action> {
        if self.pending.values().any(|w| &w.task == task) {
            return None;
        }
        let candidates = self.candidates(task);
        let sole = match candidates.as_slice() {
            [program] => {
                let promisers = self.promisers(program, task);
                (promisers.len() == 1)
                    .then(|| (program.clone(), promisers.into_iter().next().unwrap()))
            }
            _ => None,
        };
        let Some((program, promiser)) = sole else {
            return Some(self.on_task_request(task));
        };

        let use_ = Action::Use {
            program: program.clone(),
            task: task.clone(),
        };
        let propose = Action::ProposeWithdraw {
            to: imposer.clone(),
            task: task.clone(),
        };
        let tp = self.trust_in(&promiser).value();
        let action = match self.trust_in(imposer).value() {
            2 => match tp {
                2 => use_,
                1 => {
                    self.pending.insert(
                        imposer.clone(),
                        PendingWarning {
                            program: program.clone(),
                            task: task.clone(),
                        },
                    );
                    Action::Warn {
                        to: imposer.clone(),
                        program,
                        task: task.clone(),
                    }
                }
                _ => propose,
            },
            1 => {
                if tp >= 1 {
                    use_
                } else {
                    propose
                }
            }
            _ => return Some(self.on_task_request(task)),
        };
        if let Action::Use { program, task } = &action {
            self.mark_used(program, task);
        }
        Some(action)
    }

    /// Resolves a pending warning. `Proceed` uses the program; `Withdraw`
    /// withdraws the imposer's imposition for that task from the portfolio.
    pub fn on_reply(
        &mut self,
        from: &AgentId,
        reply: Reply,
        now: Tick,
    ) -> Result<(Option<Action>, Vec<Ended<S>>), AgentError> {
        let pending = self
            .pending
            .remove(from)
            .ok_or_else(|| AgentError::NoPendingWarning(from.clone()))?;
        match reply {
            Reply::Proceed => {
                self.mark_used(&pending.program, &pending.task);
                Ok((
                    Some(Action::Use {
                        program: pending.program,
                        task: pending.task,
                    }),
                    Vec::new(),
                ))
            }
            Reply::Withdraw => {
                let tag = TypeTag::task(&pending.task);
                let mut ended = Vec::new();
                for rec in self.portfolio.iter_mut() {
                    let f = rec.fragment();
                    if rec.is_active()
                        && f.kind == DirectionalKind::Imposition
                        && &f.promiser == from
                        && f.type_tag == tag
                    {
                        let state = rec.withdraw(from, now).expect("active, by promiser");
                        ended.push(Ended {
                            token: rec.token().unwrap_or_default().to_string(),
                            state,
                            fade: rec.fade_level(),
                        });
                    }
                }
                Ok((None, ended))
            }
        }
    }

    /// Assesses the adequacy promises behind `(program, task)` and updates
    /// trust in each promiser.
    pub fn on_outcome(
        &mut self,
        program: &ProgramId,
        task: &TaskId,
        outcome: Outcome,
        now: Tick,
        policy: TramPolicy,
    ) -> Result<Vec<TrustDelta>, AgentError> {
        let tag = TypeTag::adequacy(program, task);
        let mut assessed = Vec::new();
        for rec in self.fragments.iter_mut() {
            if rec.is_active() && rec.fragment().type_tag == tag {
                rec.assess(outcome, now).expect("active record");
                assessed.push((
                    rec.fragment().promiser.clone(),
                    rec.token().unwrap_or_default().to_string(),
                ));
            }
        }
        if assessed.is_empty() {
            return Err(AgentError::NoMatchingFragment {
                program: program.clone(),
                task: task.clone(),
            });
        }
        self.mark_used(program, task);

        let mut deltas = Vec::new();
        for (promiser, token) in assessed {
            self.unindex(&token);
            let key = AppreciationKey::trust(&self.id, &promiser);
            let before = self.trust.level(&key);
            let after = self.trust.record_assessment(&key, outcome, now, policy)?;
            deltas.push(TrustDelta {
                target: promiser,
                token,
                outcome,
                before,
                after,
            });
        }
        Ok(deltas)
    }

    fn unindex(&mut self, token: &str) {
        for entries in self.adequacy_index.values_mut() {
            entries.retain(|e| e.token != token);
        }
        self.adequacy_index.retain(|_, es| !es.is_empty());
    }

    /// Withdraws every active fragment with `token` that `by` promised.
    pub fn withdraw_token(&mut self, token: &str, by: &AgentId, now: Tick) -> Vec<Ended<S>> {
        let mut ended = Vec::new();
        for rec in self.records_mut() {
            if rec.is_active() && rec.token() == Some(token) && rec.withdraw(by, now).is_ok() {
                ended.push(Ended {
                    token: token.to_string(),
                    state: rec.state(),
                    fade: rec.fade_level(),
                });
            }
        }
        if !ended.is_empty() {
            self.unindex(token);
        }
        ended
    }

    /// Advances fading of every active record to `now`.
    pub fn step_fade(&mut self, now: Tick) -> Vec<Ended<S>> {
        let mut ended = Vec::new();
        for rec in self.records_mut() {
            if rec.is_active() && rec.step_fade(now) == Ok(LifecycleState::Faded) {
                ended.push(Ended {
                    token: rec.token().unwrap_or_default().to_string(),
                    state: LifecycleState::Faded,
                    fade: rec.fade_level(),
                });
            }
        }
        for e in &ended {
            self.unindex(&e.token);
        }
        ended
    }

    /// Active adequacy fragments from `promiser` addressed to this agent
    /// whose program is not prepared; reconsidered after a trust raise.
    pub fn unprepared_adequacy_from(&self, promiser: &AgentId) -> Vec<Statement> {
        self.fragments
            .iter()
            .filter(|r| r.is_active())
            .map(|r| r.fragment())
            .filter(|f| &f.promiser == promiser && f.promisee == self.id)
            .filter(|f| {
                f.type_tag
                    .as_adequacy()
                    .is_some_and(|(p, t)| !self.is_prepared(&p, &t))
            })
            .cloned()
            .collect()
    }
}
