//! Deterministic scenario execution.
//!
//! Each tick runs its directives one at a time. Issuing a statement splits
//! it into fragments, delivers them in agent name order, passes each through
//! the recipient's credibility gate and lets the recipient react. At the end
//! of a tick every active fragment fades, and identities whose fragments
//! have all ended are reported as terminated.

mod scenario;
mod trace;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::agent::{Action, AgentState, Ended, Receipt};
use crate::appraisal::{
    attribute_install_decision, credibility_gate, credibility_level, credibility_score,
    AttributeVector, ConsultantProfile, Focus, InstallVerdict, Route,
};
use crate::ids::{AgentId, ProgramId, TaskId};
use crate::level::TrustLevel;
use crate::lifecycle::LifecycleState;
use crate::reputation::{lor_update, survey, survey_reinit, LorResponse};
use crate::scalar::{format_scalar, Scalar};
use crate::statement::{render, Body, DirectionalKind, FragmentIssuer, Statement, TypeTag};
use crate::trust::{expectation, AppreciationKey, Cause, Outcome};
use crate::Tick;

pub use scenario::{
    imposition, Directive, Entity, Event, Interleaving, Policy, Scenario, TrustSpec,
};
pub use trace::{expect_check, ExpectOutcome, Report, Trace, TraceEvent, TraceLine};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("line {line}: {message}")]
    Load { line: usize, message: String },
    #[error("line {line}: assertion refers to unknown agent `{agent}`")]
    UnknownAgent { line: usize, agent: AgentId },
    #[error("line {line}: trace was not produced from this scenario")]
    TraceMismatch { line: usize },
}

/// Runs `scenario` with `f64` arithmetic.
pub fn run(scenario: &Scenario) -> Trace {
    Engine::<f64>::new(scenario.policy.clone()).execute(scenario)
}

/// Runs `scenario` with arithmetic in `S`.
pub fn run_with<S: Scalar>(scenario: &Scenario) -> Trace {
    Engine::<S>::new(scenario.policy.clone()).execute(scenario)
}

#[derive(Debug, Clone)]
pub struct Engine<S> {
    policy: Policy,
    agents: BTreeMap<AgentId, AgentState<S>>,
    issuer: FragmentIssuer,
    attrs: BTreeMap<Entity, AttributeVector>,
    profiles: BTreeMap<AgentId, ConsultantProfile>,
    /// Identities with at least one stored fragment and no termination
    /// reported yet, keyed by issue order.
    live: BTreeMap<u64, String>,
    trace: Trace,
    now: Tick,
    directive: Option<usize>,
}

impl<S: Scalar> Engine<S> {
    pub fn new(policy: Policy) -> Self {
        Engine {
            issuer: FragmentIssuer::new(policy.fade),
            policy,
            agents: BTreeMap::new(),
            attrs: BTreeMap::new(),
            profiles: BTreeMap::new(),
            live: BTreeMap::new(),
            trace: Trace::new(),
            now: 0,
            directive: None,
        }
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn agent(&self, id: &AgentId) -> Option<&AgentState<S>> {
        self.agents.get(id)
    }

    pub fn agents(&self) -> impl Iterator<Item = &AgentState<S>> {
        self.agents.values()
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn now(&self) -> Tick {
        self.now
    }

    /// Runs the whole scenario and returns the trace.
    pub fn execute(mut self, scenario: &Scenario) -> Trace {
        self.run_scenario(scenario);
        self.trace
    }

    /// Runs the whole scenario, keeping the final state inspectable.
    pub fn run_scenario(&mut self, scenario: &Scenario) {
        for agent in scenario.agents() {
            self.agent_mut(&agent);
        }
        for (index, event) in scenario.initial.iter().enumerate() {
            self.apply(index, &event.directive);
        }
        for (tick, order) in scenario.schedule(self.policy.interleave) {
            self.now = tick;
            for index in order {
                let event = scenario.event(index).expect("scheduled index");
                self.apply(index, &event.directive);
            }
            self.end_tick();
        }
    }

    fn agent_mut(&mut self, id: &AgentId) -> &mut AgentState<S> {
        self.agents
            .entry(id.clone())
            .or_insert_with(|| AgentState::new(id.clone()))
    }

    fn emit(&mut self, event: TraceEvent) {
        self.trace.push(self.now, self.directive, event);
    }

    fn warn(&mut self, detail: String) {
        self.emit(TraceEvent::Warning { detail });
    }

    fn emit_actions(&mut self, agent: &AgentId, actions: Vec<Action>) {
        for action in actions {
            self.emit(TraceEvent::Action {
                agent: agent.clone(),
                action,
            });
        }
    }

    fn emit_ended(&mut self, subject: &AgentId, ended: Vec<Ended<S>>) {
        for e in ended {
            self.emit(TraceEvent::Lifecycle {
                token: e.token,
                subject: subject.clone(),
                state: e.state,
                fade: format_scalar(e.fade),
            });
        }
    }

    fn set_trust(&mut self, key: AppreciationKey, level: TrustLevel, cause: Cause) {
        let now = self.now;
        let subject = key.subject.clone();
        self.agent_mut(&subject)
            .trust
            .set(key.clone(), level, now, cause)
            .expect("keys are built well-formed");
        self.emit(TraceEvent::trust(&key, level, cause));
    }

    fn apply(&mut self, index: usize, directive: &Directive) {
        self.directive = Some(index);
        self.trace.checkpoint(index);
        match directive {
            Directive::Trust { spec, level } => {
                self.set_trust(spec.key(), *level, Cause::Init);
                self.unload_check(&spec.subject);
            }
            Directive::Attr {
                attr,
                entity,
                level,
            } => {
                self.attrs
                    .entry(entity.clone())
                    .or_default()
                    .set(*attr, *level);
            }
            Directive::Profile(p) => {
                self.profiles.insert(p.agent.clone(), p.clone());
            }
            Directive::Issue(s) => self.issue(s.clone()),
            Directive::Impose {
                from,
                to,
                task,
                strength,
            } => self.issue(imposition(from, to, task, *strength)),
            Directive::Outcome {
                agent,
                program,
                task,
                outcome,
            } => self.outcome(agent, program, task, *outcome),
            Directive::Withdraw { promiser, token } => self.withdraw(promiser, token),
            Directive::LorRequest { asker, peer, about } => {
                let request = Statement::new(
                    DirectionalKind::Proposal,
                    asker.clone(),
                    TypeTag::new("lor-request", vec![about.to_string()]),
                    Body::new(format!("report your trust in {about}")),
                    peer.clone(),
                );
                self.issue(request);
            }
            Directive::Survey {
                surveyor,
                group,
                about,
                window,
            } => self.survey(
                surveyor,
                group,
                about,
                window.unwrap_or(self.policy.recent_window),
            ),
            Directive::Reply { from, to, reply } => {
                let now = self.now;
                match self.agent_mut(to).on_reply(from, *reply, now) {
                    Ok((action, ended)) => {
                        self.emit_ended(to, ended);
                        self.emit_actions(to, action.into_iter().collect());
                    }
                    Err(e) => self.warn(format!("agent={to},{}", slug(&e.to_string()))),
                }
            }
            Directive::ExpectTrust { .. } | Directive::ExpectAction { .. } => {}
        }
        self.directive = None;
    }

    /// Issues `s` now, then any statements its recipients send in response.
    fn issue(&mut self, s: Statement) {
        let mut queue = VecDeque::from([s]);
        while let Some(s) = queue.pop_front() {
            let seq = self.issuer.issued();
            let fragments = self.issuer.fragment_on_issue(&s, self.now);
            let token = fragments[0].token().unwrap_or_default().to_string();
            self.emit(TraceEvent::Issue {
                token: token.clone(),
                statement: render(&s),
            });
            for fragment in fragments {
                let subject = fragment.subject.clone().expect("fragments carry a subject");
                if let Some(reply) = self.deliver(&subject, fragment, seq) {
                    queue.push_back(reply);
                }
            }
        }
    }

    /// Credibility score of a fragment for its recipient: the recipient's
    /// own credibility entry for the promiser if set, else the promiser's
    /// profile, else neutral.
    fn credibility(&self, recipient: &AgentId, f: &Statement) -> S {
        let adequacy = f.type_tag.as_adequacy();
        let task = f.type_tag.as_task();
        let stored = self.agents.get(recipient).and_then(|a| {
            let key = match (&adequacy, &task) {
                (Some((p, _)), _) => {
                    AppreciationKey::program_credibility(recipient, &f.promiser, p)
                }
                (_, Some(t)) => AppreciationKey::task_credibility(recipient, &f.promiser, t),
                _ => return None,
            };
            a.trust.stamped(&key).map(|s| s.level)
        });
        let focus = match (adequacy, task) {
            (Some((p, _)), _) => Some(Focus::Program(p)),
            (_, Some(t)) => Some(Focus::Task(t)),
            _ => None,
        };
        let from_profile = || {
            let profile = self.profiles.get(&f.promiser)?;
            Some(credibility_level(profile, focus.as_ref()?))
        };
        credibility_score(stored.or_else(from_profile).unwrap_or(TrustLevel::NEUTRAL))
    }

    fn install_verdict(&self, f: &Statement, program: &ProgramId, task: &TaskId) -> InstallVerdict {
        let mut attrs = AttributeVector::new();
        for entity in [
            Entity::Program(program.clone()),
            Entity::Task(task.clone()),
            Entity::User(f.promisee.clone()),
            Entity::Provider(f.promiser.clone()),
        ] {
            if let Some(v) = self.attrs.get(&entity) {
                attrs.merge(v);
            }
        }
        attribute_install_decision(&attrs)
    }

    /// Hands one fragment to its carrier. Returns a statement the carrier
    /// sends back, if any.
    fn deliver(&mut self, subject: &AgentId, fragment: Statement, seq: u64) -> Option<Statement> {
        let now = self.now;
        let token = fragment.token().unwrap_or_default().to_string();
        let score = self.credibility(subject, &fragment);
        let route = credibility_gate(score, self.policy.gate.to_scalar());
        let trust = self.agent_mut(subject).trust_in(&fragment.promiser);
        let expect = expectation(score, trust).expect("scores lie in [0,1]");
        self.emit(TraceEvent::Deliver {
            token: token.clone(),
            subject: subject.clone(),
            route: route.name(),
            credibility: format_scalar(score),
            expectation: format_scalar(expect),
        });

        match self
            .agent_mut(subject)
            .receive(fragment.clone(), route, now)
        {
            Receipt::Stored => {
                self.live.entry(seq).or_insert_with(|| token.clone());
                self.emit(TraceEvent::Lifecycle {
                    token,
                    subject: subject.clone(),
                    state: LifecycleState::Active,
                    fade: format_scalar(S::one()),
                });
            }
            Receipt::Refreshed(existing) => self.emit(TraceEvent::Lifecycle {
                token: existing,
                subject: subject.clone(),
                state: LifecycleState::Active,
                fade: format_scalar(S::one()),
            }),
        }

        if route == Route::DiscardFast {
            if self.policy.penalize_incredible && *subject != fragment.promiser {
                let key = AppreciationKey::trust(subject, &fragment.promiser);
                let tram = self.policy.tram;
                let store = &mut self.agent_mut(subject).trust;
                let level = store
                    .record_assessment(&key, Outcome::Broken, now, tram)
                    .expect("general trust key");
                self.set_trust(key, level, Cause::Incredible);
                self.unload_check(subject);
            }
            return None;
        }
        if *subject == fragment.promiser || *subject != fragment.promisee {
            return None;
        }
        self.react(subject, &fragment)
    }

    fn react(&mut self, me: &AgentId, f: &Statement) -> Option<Statement> {
        let now = self.now;
        let head = f.type_tag.head();
        match (f.kind, head) {
            (DirectionalKind::Promise, "adequacy") => {
                let Some((program, task)) = f.type_tag.as_adequacy() else {
                    self.warn(format!("agent={me},malformed-adequacy-type={}", f.type_tag));
                    return None;
                };
                let verdict = self.install_verdict(f, &program, &task);
                let actions = self
                    .agent_mut(me)
                    .on_adequacy_promise(f, verdict, now)
                    .expect("adequacy tag checked");
                self.emit_actions(me, actions);
            }
            (DirectionalKind::Imposition, "task") => {
                let Some(task) = f.type_tag.as_task() else {
                    self.warn(format!("agent={me},malformed-task-type={}", f.type_tag));
                    return None;
                };
                match self.agent_mut(me).on_imposition(&f.promiser, &task) {
                    Some(action) => self.emit_actions(me, vec![action]),
                    None => self.warn(format!("agent={me},task={task},blocked-by-pending-warning")),
                }
            }
            (DirectionalKind::Proposal, "lor-request") => {
                let [about] = f.type_tag.args() else {
                    self.warn(format!("agent={me},malformed-lor-request={}", f.type_tag));
                    return None;
                };
                let about = AgentId::new(about).expect("parsed name");
                let level = self.agent_mut(me).trust_in(&about);
                let reply = match LorResponse::for_peer_level(level) {
                    LorResponse::Communicated => Statement::new(
                        DirectionalKind::Imposition,
                        me.clone(),
                        TypeTag::new("lor-report", vec![about.to_string(), level.to_string()]),
                        Body::new(format!("my trust in {about} is {level}")),
                        f.promiser.clone(),
                    ),
                    LorResponse::Refused => Statement::new(
                        DirectionalKind::Promise,
                        me.clone(),
                        TypeTag::new("lor-refusal", vec![about.to_string()]),
                        Body::new(format!("no report on {about}")),
                        f.promiser.clone(),
                    ),
                };
                return Some(reply);
            }
            (DirectionalKind::Imposition, "lor-report") => {
                let parsed = match f.type_tag.args() {
                    [about, level] => AgentId::new(about)
                        .ok()
                        .zip(level.parse::<TrustLevel>().ok()),
                    _ => None,
                };
                let Some((about, peer_level)) = parsed else {
                    self.warn(format!("agent={me},malformed-lor-report={}", f.type_tag));
                    return None;
                };
                let key = AppreciationKey::trust(me, &about);
                let before = self.agent_mut(me).trust.level(&key);
                let after =
                    lor_update(before, peer_level).expect("reports carry communicable levels");
                self.emit(TraceEvent::Reputation {
                    kind: "lor",
                    fields: format!(
                        "asker={me} peer={} about={about} peer-level={peer_level} response=communicated",
                        f.promiser
                    ),
                });
                self.set_trust(key, after, Cause::Lor);
                self.after_trust_change(me, &about, after);
            }
            (DirectionalKind::Promise, "lor-refusal") => {
                let about = f.type_tag.args().first().cloned().unwrap_or_default();
                self.emit(TraceEvent::Reputation {
                    kind: "lor",
                    fields: format!(
                        "asker={me} peer={} about={about} response=refused",
                        f.promiser
                    ),
                });
            }
            _ => {}
        }
        None
    }

    /// Reconsiders refused adequacy promises from `about` once trust in it
    /// has become positive, then applies unloading.
    fn after_trust_change(&mut self, me: &AgentId, about: &AgentId, level: TrustLevel) {
        if level > TrustLevel::NEUTRAL {
            let pending = self.agent_mut(me).unprepared_adequacy_from(about);
            for promise in pending {
                let (program, task) = promise.type_tag.as_adequacy().expect("filtered");
                let verdict = self.install_verdict(&promise, &program, &task);
                let now = self.now;
                let actions = self
                    .agent_mut(me)
                    .on_adequacy_promise(&promise, verdict, now)
                    .expect("adequacy tag checked");
                self.emit_actions(me, actions);
            }
        }
        self.unload_check(me);
    }

    fn unload_check(&mut self, me: &AgentId) {
        let actions = self.agent_mut(me).enforce_unload();
        self.emit_actions(me, actions);
    }

    fn outcome(&mut self, agent: &AgentId, program: &ProgramId, task: &TaskId, outcome: Outcome) {
        let now = self.now;
        let tram = self.policy.tram;
        match self
            .agent_mut(agent)
            .on_outcome(program, task, outcome, now, tram)
        {
            Ok(deltas) => {
                for d in deltas {
                    let state = match d.outcome {
                        Outcome::Kept => LifecycleState::Kept,
                        Outcome::Broken => LifecycleState::Broken,
                    };
                    let fade = self.agents[agent]
                        .records()
                        .find(|r| r.token() == Some(d.token.as_str()) && r.state() == state)
                        .map(|r| r.fade_level())
                        .unwrap_or_else(S::zero);
                    self.emit(TraceEvent::Lifecycle {
                        token: d.token.clone(),
                        subject: agent.clone(),
                        state,
                        fade: format_scalar(fade),
                    });
                    let key = AppreciationKey::trust(agent, &d.target);
                    self.emit(TraceEvent::trust(&key, d.after, outcome.into()));
                }
                self.unload_check(agent);
            }
            Err(_) => self.warn(format!(
                "agent={agent},program={program},task={task},no-active-adequacy-promise"
            )),
        }
    }

    fn withdraw(&mut self, promiser: &AgentId, token: &str) {
        let now = self.now;
        let ids: Vec<AgentId> = self.agents.keys().cloned().collect();
        let mut any = false;
        for id in ids {
            let ended = self.agent_mut(&id).withdraw_token(token, promiser, now);
            any |= !ended.is_empty();
            self.emit_ended(&id, ended);
        }
        if !any {
            self.warn(format!(
                "promiser={promiser},token={token},nothing-to-withdraw"
            ));
        }
    }

    fn survey(
        &mut self,
        surveyor: &AgentId,
        group: &BTreeSet<AgentId>,
        about: &AgentId,
        window: Tick,
    ) {
        let levels: BTreeMap<AgentId, TrustLevel> = group
            .iter()
            .map(|m| (m.clone(), self.agent_mut(m).trust_in(about)))
            .collect();
        let result =
            survey::<S>(surveyor, group, about, |m| levels[m]).expect("group is non-empty");
        let names: Vec<&str> = group.iter().map(|a| a.as_str()).collect();
        self.emit(TraceEvent::Reputation {
            kind: "survey",
            fields: format!(
                "surveyor={surveyor} about={about} group={} average={}",
                names.join(","),
                format_scalar(result.average)
            ),
        });
        let mut recipients = group.clone();
        recipients.insert(surveyor.clone());
        recipients.remove(about);
        let now = self.now;
        for member in recipients {
            let key = AppreciationKey::trust(&member, about);
            let store = &self.agent_mut(&member).trust;
            if store.has_recent_experience(&key, now, window) {
                continue;
            }
            let level = survey_reinit(store.level(&key), result.average, false);
            self.set_trust(key, level, Cause::Survey);
            self.after_trust_change(&member, about, level);
        }
    }

    fn end_tick(&mut self) {
        let now = self.now;
        let ids: Vec<AgentId> = self.agents.keys().cloned().collect();
        for id in ids {
            let mut ended = self.agent_mut(&id).step_fade(now);
            ended.sort_by_key(|e| token_order(&e.token));
            self.emit_ended(&id, ended);
        }
        let active: BTreeSet<&str> = self
            .agents
            .values()
            .flat_map(|a| a.records())
            .filter(|r| r.is_active())
            .filter_map(|r| r.token())
            .collect();
        let done: Vec<u64> = self
            .live
            .iter()
            .filter(|(_, token)| !active.contains(token.as_str()))
            .map(|(seq, _)| *seq)
            .collect();
        for seq in done {
            let token = self.live.remove(&seq).expect("listed");
            self.emit(TraceEvent::Terminated { token });
        }
    }
}

fn token_order(token: &str) -> (u64, u64) {
    let (tick, seq) = token.split_once('-').unwrap_or((token, "0"));
    (tick.parse().unwrap_or(0), seq.parse().unwrap_or(0))
}

fn slug(message: &str) -> String {
    message
        .chars()
        .map(|c| if c.is_whitespace() { '-' } else { c })
        .filter(|c| *c != '`')
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    const THREAD1: &str = "\
tick 0
trust q p = 1
tick 1
issue p[adequacy(P,U):\"P is adequate for task U\"/{p,q,r}]q
tick 2
impose s q task=U
tick 3
outcome q program=P task=U result=failure
tick 4
issue p[adequacy(Q,V):\"Q is adequate for task V\"/{p,q,r}]q
expect-trust q p = 0
";

    fn load(text: &str) -> Scenario {
        Scenario::load(text).unwrap()
    }

    #[test]
    fn thread_one_in_brief() {
        let s = load(THREAD1);
        let trace = run(&s);
        assert_eq!(trace.trust_trajectory("q", "p"), vec![1, 0]);
        let names: Vec<&str> = trace.actions_of("q").iter().map(|a| a.name()).collect();
        assert_eq!(names, ["prepare", "use", "refuse-install"]);
        assert!(expect_check(&s, &trace).unwrap().all_passed());
    }

    #[test]
    fn delivery_reaches_scope_and_promisee() {
        let trace = run(&load(THREAD1));
        let delivered = trace
            .events()
            .filter(|e| matches!(e, TraceEvent::Deliver { token, .. } if token == "1-0"))
            .count();
        assert_eq!(delivered, 3);
    }

    #[test]
    fn exact_and_float_traces_agree() {
        let s = load(THREAD1);
        assert_eq!(run(&s).render(), run_with::<Rational>(&s).render());
    }

    #[test]
    fn empty_scenario_runs_to_empty_trace() {
        assert!(run(&Scenario::default()).is_empty());
    }

    #[test]
    fn outcome_without_fragment_warns() {
        let trace = run(&load("tick 0\noutcome q program=P task=U result=success\n"));
        assert!(matches!(trace.lines()[0].event, TraceEvent::Warning { .. }));
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn fading_terminates_identity_once() {
        let trace = run(&load(
            "policy fade-span=10 fade-threshold=0.5\ntick 0\nissue p[pi:\"b\"]q\ntick 6\n",
        ));
        let lines: Vec<String> = trace.lines().iter().map(|l| l.to_string()).collect();
        assert_eq!(
            lines.iter().filter(|l| l.contains("state=faded")).count(),
            0,
            "no tick 6 event means no fading step at 6"
        );
        let trace = run(&load(
            "policy fade-span=10 fade-threshold=0.5\ntick 0\nissue p[pi:\"b\"]q\ntick 6\nexpect-trust q p = 0\n",
        ));
        let text = trace.render();
        assert_eq!(text.matches("state=faded").count(), 2);
        assert_eq!(text.matches("terminated token=0-0").count(), 1);
        assert!(text.ends_with("t=6 terminated token=0-0\n"), "{text}");
    }

    #[test]
    fn incredible_promise_is_discarded() {
        let s = load(
            "trust q p program=P kind=program-credibility = -2\n\
             trust q p = 2\n\
             tick 1\n\
             issue p[adequacy(P,U):\"P is adequate\"]q\n",
        );
        let trace = run(&s);
        let text = trace.render();
        assert!(
            text.contains("subject=q route=discard-fast credibility=0.05"),
            "{text}"
        );
        assert!(trace.actions_of("q").is_empty());
    }

    #[test]
    fn penalizing_incredible_promises() {
        let s = load(
            "policy penalize-incredible\n\
             trust q p program=P kind=program-credibility = -2\n\
             trust q p = 2\n\
             tick 1\n\
             issue p[adequacy(P,U):\"P is adequate\"]q\n",
        );
        let trace = run(&s);
        assert_eq!(trace.trust_trajectory("q", "p"), vec![2, 1]);
        assert!(trace.render().contains("cause=incredible"));
    }

    #[test]
    fn attribute_rules_override_trust() {
        let s = load(
            "trust q p = 2\n\
             attr provider-size provider=p = -2\n\
             attr program-size program=P = 2\n\
             tick 1\n\
             issue p[adequacy(P,U):\"P is adequate\"]q\n",
        );
        let names: Vec<String> = run(&s)
            .actions_of("q")
            .iter()
            .map(|a| a.to_string())
            .collect();
        assert_eq!(names, ["refuse-install(program=P,task=U)"]);
    }
}
