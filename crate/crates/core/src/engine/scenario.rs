//! Line-oriented scenario files.
//!
//! ```text
//! policy tram=incremental gate=0.5 fade-span=100 fade-threshold=0.05 seed=0
//! trust q p = 1
//! tick 1
//! issue p[adequacy(P,U):"P is adequate for task U"/{p,q,r}]q
//! expect-trust q p = 1
//! ```
//!
//! Directives before the first `tick` form the initial block, which may
//! only hold state (`trust`, `attr`, `profile`) and `expect-trust`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::agent::Reply;
use crate::appraisal::{Attribute, ConsultantProfile};
use crate::ids::{AgentId, ProgramId, TaskId};
use crate::level::TrustLevel;
use crate::statement::{
    parse, Body, Decimal, DirectionalKind, FadeSpec, ImpositionStrength, Statement, StatementError,
    TypeTag,
};
use crate::trust::{AppreciationKey, AppreciationKind, Outcome, TramPolicy};
use crate::Tick;

use super::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Interleaving {
    #[default]
    FileOrder,
    /// Within a tick, directives are grouped by the agent that acts first
    /// and the groups take turns in name order.
    RoundRobin,
}

impl Interleaving {
    pub fn name(self) -> &'static str {
        match self {
            Interleaving::FileOrder => "file-order",
            Interleaving::RoundRobin => "round-robin",
        }
    }
}

impl FromStr for Interleaving {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "file-order" => Ok(Interleaving::FileOrder),
            "round-robin" => Ok(Interleaving::RoundRobin),
            other => Err(format!("unknown interleaving `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub tram: TramPolicy,
    /// Credibility floor; scores at or above it are engaged with.
    pub gate: Decimal,
    pub fade: FadeSpec,
    /// Stored for reproducibility; no built-in behaviour draws from it.
    pub seed: u64,
    pub interleave: Interleaving,
    pub penalize_incredible: bool,
    /// Window, in ticks, within which own observations shield a level from
    /// survey reinitialization.
    pub recent_window: Tick,
}

impl Default for Policy {
    fn default() -> Self {
        Policy {
            tram: TramPolicy::Incremental,
            gate: Decimal::new(5, 1),
            fade: FadeSpec::default(),
            seed: 0,
            interleave: Interleaving::FileOrder,
            penalize_incredible: false,
            recent_window: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Entity {
    Program(ProgramId),
    Task(TaskId),
    User(AgentId),
    Provider(AgentId),
}

impl Entity {
    fn prefix(&self) -> &'static str {
        match self {
            Entity::Program(_) => "program-",
            Entity::Task(_) => "task-",
            Entity::User(_) => "user-",
            Entity::Provider(_) => "provider-",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrustSpec {
    pub subject: AgentId,
    /// Agent name, or program name for program/task kinds.
    pub target: String,
    pub kind: AppreciationKind,
    pub program: Option<ProgramId>,
    pub task: Option<TaskId>,
}

impl TrustSpec {
    pub fn key(&self) -> AppreciationKey {
        self.try_key().expect("validated at load")
    }

    fn try_key(&self) -> Result<AppreciationKey, String> {
        use AppreciationKind::*;
        let missing = || format!("`{}` needs {}", self.kind, required_fields(self.kind));
        let agent = || name::<AgentId>(&self.target);
        let key = match (self.kind, &self.program, &self.task) {
            (GeneralTrust, _, _) => AppreciationKey::trust(&self.subject, &agent()?),
            (TaskTrust, _, Some(t)) => AppreciationKey::task_trust(&self.subject, &agent()?, t),
            (ProgramTrust, Some(p), _) => {
                AppreciationKey::program_trust(&self.subject, &agent()?, p)
            }
            (TaskCredibility, _, Some(t)) => {
                AppreciationKey::task_credibility(&self.subject, &agent()?, t)
            }
            (ProgramCredibility, Some(p), _) => {
                AppreciationKey::program_credibility(&self.subject, &agent()?, p)
            }
            (Confidence | MatchingCredibility | Dependability, None, Some(t)) => {
                AppreciationKey::program_task(self.kind, &self.subject, &name(&self.target)?, t)
            }
            _ => return Err(missing()),
        };
        key.validate().map_err(|_| missing())?;
        Ok(key)
    }

    /// The agent being appreciated, when it is one.
    pub fn target_agent(&self) -> Option<AgentId> {
        match self.kind {
            AppreciationKind::Confidence
            | AppreciationKind::MatchingCredibility
            | AppreciationKind::Dependability => None,
            _ => AgentId::new(&self.target).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Directive {
    Trust {
        spec: TrustSpec,
        level: TrustLevel,
    },
    Attr {
        attr: Attribute,
        entity: Entity,
        level: TrustLevel,
    },
    Profile(ConsultantProfile),
    Issue(Statement),
    Impose {
        from: AgentId,
        to: AgentId,
        task: TaskId,
        strength: Option<ImpositionStrength>,
    },
    Outcome {
        agent: AgentId,
        program: ProgramId,
        task: TaskId,
        outcome: Outcome,
    },
    Withdraw {
        promiser: AgentId,
        token: String,
    },
    LorRequest {
        asker: AgentId,
        peer: AgentId,
        about: AgentId,
    },
    Survey {
        surveyor: AgentId,
        group: BTreeSet<AgentId>,
        about: AgentId,
        window: Option<Tick>,
    },
    Reply {
        from: AgentId,
        to: AgentId,
        reply: Reply,
    },
    ExpectTrust {
        spec: TrustSpec,
        level: TrustLevel,
    },
    ExpectAction {
        agent: AgentId,
        action: String,
        program: Option<ProgramId>,
        task: Option<TaskId>,
    },
}

const ACTION_NAMES: [&str; 7] = [
    "prepare",
    "refuse-install",
    "unload",
    "use",
    "fail",
    "warn",
    "propose-withdraw",
];

impl Directive {
    pub fn is_expectation(&self) -> bool {
        matches!(
            self,
            Directive::ExpectTrust { .. } | Directive::ExpectAction { .. }
        )
    }

    fn is_state(&self) -> bool {
        matches!(
            self,
            Directive::Trust { .. } | Directive::Attr { .. } | Directive::Profile(_)
        )
    }

    /// The agent that acts first, used for round-robin grouping.
    pub fn actor(&self) -> Option<&AgentId> {
        match self {
            Directive::Trust { spec, .. } | Directive::ExpectTrust { spec, .. } => {
                Some(&spec.subject)
            }
            Directive::Attr { .. } => None,
            Directive::Profile(p) => Some(&p.agent),
            Directive::Issue(s) => Some(&s.promiser),
            Directive::Impose { from, .. } => Some(from),
            Directive::Outcome { agent, .. } | Directive::ExpectAction { agent, .. } => Some(agent),
            Directive::Withdraw { promiser, .. } => Some(promiser),
            Directive::LorRequest { asker, .. } => Some(asker),
            Directive::Survey { surveyor, .. } => Some(surveyor),
            Directive::Reply { from, .. } => Some(from),
        }
    }

    /// Every agent named by the directive.
    pub fn agents(&self) -> BTreeSet<AgentId> {
        let mut out = BTreeSet::new();
        match self {
            Directive::Trust { spec, .. } | Directive::ExpectTrust { spec, .. } => {
                out.insert(spec.subject.clone());
                out.extend(spec.target_agent());
            }
            Directive::Attr { entity, .. } => {
                if let Entity::User(a) | Entity::Provider(a) = entity {
                    out.insert(a.clone());
                }
            }
            Directive::Profile(p) => {
                out.insert(p.agent.clone());
            }
            Directive::Issue(s) => {
                out.extend(s.recipients());
            }
            Directive::Impose { from, to, .. } | Directive::Reply { from, to, .. } => {
                out.insert(from.clone());
                out.insert(to.clone());
            }
            Directive::Outcome { agent, .. } | Directive::ExpectAction { agent, .. } => {
                out.insert(agent.clone());
            }
            Directive::Withdraw { promiser, .. } => {
                out.insert(promiser.clone());
            }
            Directive::LorRequest { asker, peer, about } => {
                out.extend([asker.clone(), peer.clone(), about.clone()]);
            }
            Directive::Survey {
                surveyor,
                group,
                about,
                ..
            } => {
                out.insert(surveyor.clone());
                out.insert(about.clone());
                out.extend(group.iter().cloned());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub tick: Tick,
    /// 1-based line in the source text.
    pub line: usize,
    pub directive: Directive,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scenario {
    pub policy: Policy,
    pub initial: Vec<Event>,
    pub events: Vec<Event>,
}

impl Scenario {
    pub fn load(text: &str) -> Result<Scenario, EngineError> {
        let mut scenario = Scenario::default();
        let mut tick: Option<Tick> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = strip_comment(raw).trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| EngineError::Load { line, message };
            let (word, rest) = content
                .split_once(char::is_whitespace)
                .map(|(w, r)| (w, r.trim()))
                .unwrap_or((content, ""));
            match word {
                "policy" => {
                    if tick.is_some() {
                        return Err(err("policy must precede the first tick".into()));
                    }
                    apply_policy(&mut scenario.policy, rest).map_err(err)?;
                }
                "tick" => {
                    let n: Tick = rest
                        .parse()
                        .map_err(|_| err(format!("invalid tick `{rest}`")))?;
                    if let Some(prev) = tick {
                        if n < prev {
                            return Err(err(format!("tick {n} follows tick {prev}")));
                        }
                    }
                    tick = Some(n);
                }
                _ => {
                    let directive = parse_directive(word, rest).map_err(err)?;
                    match tick {
                        None if directive.is_state()
                            || matches!(directive, Directive::ExpectTrust { .. }) =>
                        {
                            scenario.initial.push(Event {
                                tick: 0,
                                line,
                                directive,
                            })
                        }
                        None => return Err(err(format!("`{word}` before the first tick"))),
                        Some(t) => scenario.events.push(Event {
                            tick: t,
                            line,
                            directive,
                        }),
                    }
                }
            }
        }
        Ok(scenario)
    }

    /// Initial block followed by the timed events; positions in this
    /// sequence are the directive indices used in traces.
    pub fn all_events(&self) -> impl Iterator<Item = &Event> {
        self.initial.iter().chain(self.events.iter())
    }

    pub fn event(&self, index: usize) -> Option<&Event> {
        self.all_events().nth(index)
    }

    /// Every agent the scenario names.
    pub fn agents(&self) -> BTreeSet<AgentId> {
        self.all_events()
            .flat_map(|e| e.directive.agents())
            .collect()
    }

    /// Timed events grouped by tick, as directive indices in execution order.
    pub fn schedule(&self, interleave: Interleaving) -> Vec<(Tick, Vec<usize>)> {
        let offset = self.initial.len();
        let mut groups: Vec<(Tick, Vec<usize>)> = Vec::new();
        for (i, e) in self.events.iter().enumerate() {
            match groups.last_mut() {
                Some((t, idx)) if *t == e.tick => idx.push(offset + i),
                _ => groups.push((e.tick, vec![offset + i])),
            }
        }
        if interleave == Interleaving::RoundRobin {
            for (_, idx) in &mut groups {
                *idx = round_robin(self, idx);
            }
        }
        groups
    }
}

fn round_robin(s: &Scenario, indices: &[usize]) -> Vec<usize> {
    use std::collections::{BTreeMap, VecDeque};
    let mut lanes: BTreeMap<Option<AgentId>, VecDeque<usize>> = BTreeMap::new();
    let mut expects = Vec::new();
    for &i in indices {
        let d = &s.event(i).expect("index in range").directive;
        if d.is_expectation() {
            expects.push(i);
        } else {
            lanes.entry(d.actor().cloned()).or_default().push_back(i);
        }
    }
    let mut order = Vec::with_capacity(indices.len());
    while lanes.values().any(|l| !l.is_empty()) {
        for lane in lanes.values_mut() {
            order.extend(lane.pop_front());
        }
    }
    order.extend(expects);
    order
}

/// Drops a `#` comment unless it sits inside a quoted body.
fn strip_comment(line: &str) -> &str {
    let mut in_quote = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if in_quote => escaped = true,
            '"' => in_quote = !in_quote,
            '#' if !in_quote => return &line[..i],
            _ => {}
        }
    }
    line
}

fn apply_policy(policy: &mut Policy, rest: &str) -> Result<(), String> {
    let mut span = policy.fade.span();
    let mut threshold = policy.fade.threshold();
    for item in rest.split_whitespace() {
        let (key, value) = item.split_once('=').unwrap_or((item, "true"));
        match key {
            "tram" => policy.tram = value.parse()?,
            "gate" => {
                let d: Decimal = value
                    .parse()
                    .map_err(|_| format!("invalid gate `{value}`"))?;
                if d.to_scalar::<f64>() > 1.0 {
                    return Err(format!("gate `{value}` exceeds 1"));
                }
                policy.gate = d;
            }
            "fade-span" => span = parse_num(key, value)?,
            "fade-threshold" => {
                threshold = value
                    .parse()
                    .map_err(|_| format!("invalid fade-threshold `{value}`"))?
            }
            "seed" => policy.seed = parse_num(key, value)?,
            "interleave" => policy.interleave = value.parse()?,
            "recent-window" => policy.recent_window = parse_num(key, value)?,
            "penalize-incredible" => policy.penalize_incredible = parse_bool(value)?,
            other => return Err(format!("unknown policy setting `{other}`")),
        }
    }
    policy.fade = FadeSpec::new(span, threshold)
        .ok_or_else(|| "fade-span must be positive and fade-threshold in (0,1)".to_string())?;
    Ok(())
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid {key} `{value}`"))
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" => Ok(true),
        "false" | "no" => Ok(false),
        other => Err(format!("expected true or false, found `{other}`")),
    }
}

fn name<T: FromStr<Err = crate::ids::InvalidName>>(s: &str) -> Result<T, String> {
    s.parse()
        .map_err(|e: crate::ids::InvalidName| e.to_string())
}

fn name_list<T: FromStr<Err = crate::ids::InvalidName> + Ord>(
    s: &str,
) -> Result<BTreeSet<T>, String> {
    if s.is_empty() {
        return Ok(BTreeSet::new());
    }
    s.split(',').map(name).collect()
}

/// Positional words and `key=value` options of a directive, plus the value
/// after a standalone `=` when present.
struct Args<'a> {
    positional: Vec<&'a str>,
    options: Vec<(&'a str, &'a str)>,
    assigned: Option<&'a str>,
}

impl<'a> Args<'a> {
    fn split(rest: &'a str) -> Result<Self, String> {
        let mut words = rest.split_whitespace();
        let mut args = Args {
            positional: Vec::new(),
            options: Vec::new(),
            assigned: None,
        };
        while let Some(w) = words.next() {
            if w == "=" {
                args.assigned = Some(words.next().ok_or("missing value after `=`")?);
                if let Some(extra) = words.next() {
                    return Err(format!("unexpected `{extra}` after the value"));
                }
            } else if let Some((k, v)) = w.split_once('=') {
                args.options.push((k, v));
            } else if args.options.is_empty() {
                args.positional.push(w);
            } else {
                return Err(format!("positional argument `{w}` after options"));
            }
        }
        Ok(args)
    }

    fn exactly(&self, n: usize, usage: &str) -> Result<(), String> {
        if self.positional.len() == n {
            Ok(())
        } else {
            Err(format!("usage: {usage}"))
        }
    }

    fn only(&self, allowed: &[&str]) -> Result<(), String> {
        for (k, _) in &self.options {
            if !allowed.contains(k) {
                return Err(format!("unknown option `{k}`"));
            }
        }
        Ok(())
    }

    fn opt(&self, key: &str) -> Option<&'a str> {
        self.options
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
    }

    fn req(&self, key: &str) -> Result<&'a str, String> {
        self.opt(key).ok_or_else(|| format!("missing `{key}=`"))
    }

    fn level(&self) -> Result<TrustLevel, String> {
        let v = self.assigned.ok_or("missing `= <level>`")?;
        v.parse::<TrustLevel>().map_err(|e| e.to_string())
    }
}

fn trust_spec(args: &Args, usage: &str) -> Result<TrustSpec, String> {
    args.exactly(2, usage)?;
    args.only(&["program", "task", "kind"])?;
    let program: Option<ProgramId> = args.opt("program").map(name).transpose()?;
    let task: Option<TaskId> = args.opt("task").map(name).transpose()?;
    let kind = match args.opt("kind") {
        Some(k) => k.parse()?,
        None => match (&program, &task) {
            (None, None) => AppreciationKind::GeneralTrust,
            (Some(_), None) => AppreciationKind::ProgramTrust,
            (None, Some(_)) => AppreciationKind::TaskTrust,
            (Some(_), Some(_)) => {
                return Err("program= and task= together need an explicit kind=".into())
            }
        },
    };
    let spec = TrustSpec {
        subject: name(args.positional[0])?,
        target: args.positional[1].to_string(),
        kind,
        program,
        task,
    };
    spec.try_key()?;
    Ok(spec)
}

fn required_fields(kind: AppreciationKind) -> &'static str {
    use AppreciationKind::*;
    match kind {
        GeneralTrust => "no qualifiers",
        TaskTrust | TaskCredibility => "task=",
        ProgramTrust | ProgramCredibility => "program=",
        Confidence | MatchingCredibility | Dependability => "a program target and task=",
    }
}

fn statement_error(e: StatementError) -> String {
    match e {
        StatementError::Syntax { column, message } => {
            format!("statement column {column}: {message}")
        }
        other => format!("statement: {other}"),
    }
}

fn parse_directive(word: &str, rest: &str) -> Result<Directive, String> {
    if word == "issue" {
        return parse(rest).map(Directive::Issue).map_err(statement_error);
    }
    let args = Args::split(rest)?;
    let directive = match word {
        "trust" => {
            let spec = trust_spec(
                &args,
                "trust <subject> <target> [program=] [task=] [kind=] = <level>",
            )?;
            Directive::Trust {
                spec,
                level: args.level()?,
            }
        }
        "expect-trust" => {
            let spec = trust_spec(
                &args,
                "expect-trust <subject> <target> [program=] [task=] [kind=] = <level>",
            )?;
            Directive::ExpectTrust {
                spec,
                level: args.level()?,
            }
        }
        "attr" => {
            args.exactly(1, "attr <name> <entity>=<id> = <level>")?;
            let attr: Attribute = args.positional[0].parse()?;
            let [(kind, id)] = args.options[..] else {
                return Err("attr takes exactly one <entity>=<id>".into());
            };
            let entity = match kind {
                "program" => Entity::Program(name(id)?),
                "task" => Entity::Task(name(id)?),
                "user" => Entity::User(name(id)?),
                "provider" => Entity::Provider(name(id)?),
                other => return Err(format!("unknown entity `{other}`")),
            };
            if !attr.name().starts_with(entity.prefix()) {
                return Err(format!("attribute `{attr}` does not describe a {kind}"));
            }
            Directive::Attr {
                attr,
                entity,
                level: args.level()?,
            }
        }
        "profile" => {
            args.exactly(1, "profile <agent> [independent=] [experienced=] [range=] [reputation=] [affiliated=]")?;
            args.only(&[
                "independent",
                "experienced",
                "range",
                "reputation",
                "affiliated",
            ])?;
            let mut p = ConsultantProfile::new(name(args.positional[0])?);
            p.independent = args
                .opt("independent")
                .map(parse_bool)
                .transpose()?
                .unwrap_or(false);
            let set = |k| -> Result<BTreeSet<String>, String> {
                let list: BTreeSet<ProgramId> = name_list(args.opt(k).unwrap_or(""))?;
                Ok(list.into_iter().map(|n| n.to_string()).collect())
            };
            p.experienced = set("experienced")?;
            p.range = set("range")?;
            p.reputation = set("reputation")?;
            p.affiliated = set("affiliated")?;
            Directive::Profile(p)
        }
        "impose" => {
            args.exactly(2, "impose <from> <to> task=<T> [strength=<1..10>]")?;
            args.only(&["task", "strength"])?;
            let strength = args
                .opt("strength")
                .map(|v| {
                    v.parse()
                        .ok()
                        .and_then(ImpositionStrength::new)
                        .ok_or_else(|| format!("strength `{v}` outside 1..10"))
                })
                .transpose()?;
            Directive::Impose {
                from: name(args.positional[0])?,
                to: name(args.positional[1])?,
                task: name(args.req("task")?)?,
                strength,
            }
        }
        "outcome" => {
            args.exactly(
                1,
                "outcome <agent> program=<P> task=<T> result=success|failure",
            )?;
            args.only(&["program", "task", "result"])?;
            let outcome = match args.req("result")? {
                "success" => Outcome::Kept,
                "failure" => Outcome::Broken,
                other => {
                    return Err(format!(
                        "result must be success or failure, found `{other}`"
                    ))
                }
            };
            Directive::Outcome {
                agent: name(args.positional[0])?,
                program: name(args.req("program")?)?,
                task: name(args.req("task")?)?,
                outcome,
            }
        }
        "withdraw" => {
            args.exactly(1, "withdraw <promiser> token=<id>")?;
            args.only(&["token"])?;
            Directive::Withdraw {
                promiser: name(args.positional[0])?,
                token: args.req("token")?.to_string(),
            }
        }
        "lor-request" => {
            args.exactly(2, "lor-request <asker> <peer> about=<target>")?;
            args.only(&["about"])?;
            Directive::LorRequest {
                asker: name(args.positional[0])?,
                peer: name(args.positional[1])?,
                about: name(args.req("about")?)?,
            }
        }
        "survey" => {
            args.exactly(
                1,
                "survey <surveyor> group=<a,b,...> about=<target> [window=<n>]",
            )?;
            args.only(&["group", "about", "window"])?;
            let group: BTreeSet<AgentId> = name_list(args.req("group")?)?;
            if group.is_empty() {
                return Err("survey group is empty".into());
            }
            Directive::Survey {
                surveyor: name(args.positional[0])?,
                group,
                about: name(args.req("about")?)?,
                window: args
                    .opt("window")
                    .map(|v| parse_num("window", v))
                    .transpose()?,
            }
        }
        "reply" => {
            args.exactly(3, "reply <from> <to> proceed|withdraw")?;
            let reply = match args.positional[2] {
                "proceed" => Reply::Proceed,
                "withdraw" => Reply::Withdraw,
                other => {
                    return Err(format!(
                        "reply must be proceed or withdraw, found `{other}`"
                    ))
                }
            };
            Directive::Reply {
                from: name(args.positional[0])?,
                to: name(args.positional[1])?,
                reply,
            }
        }
        "expect-action" => {
            args.exactly(2, "expect-action <agent> <action> [program=] [task=]")?;
            args.only(&["program", "task"])?;
            let action = args.positional[1];
            if !ACTION_NAMES.contains(&action) {
                return Err(format!("unknown action `{action}`"));
            }
            Directive::ExpectAction {
                agent: name(args.positional[0])?,
                action: action.to_string(),
                program: args.opt("program").map(name).transpose()?,
                task: args.opt("task").map(name).transpose()?,
            }
        }
        other => return Err(format!("unknown directive `{other}`")),
    };
    if args.assigned.is_some()
        && !matches!(
            directive,
            Directive::Trust { .. } | Directive::ExpectTrust { .. } | Directive::Attr { .. }
        )
    {
        return Err(format!("`{word}` takes no `= <value>`"));
    }
    Ok(directive)
}

/// The imposition an `impose` directive stands for.
pub fn imposition(
    from: &AgentId,
    to: &AgentId,
    task: &TaskId,
    strength: Option<ImpositionStrength>,
) -> Statement {
    let mut s = Statement::new(
        DirectionalKind::Imposition,
        from.clone(),
        TypeTag::task(task),
        Body::new(format!("perform {task}")),
        to.clone(),
    );
    s.strength = strength;
    s
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qualifiers = |spec: &TrustSpec| {
            let mut out = String::new();
            if let Some(p) = &spec.program {
                out.push_str(&format!(" program={p}"));
            }
            if let Some(t) = &spec.task {
                out.push_str(&format!(" task={t}"));
            }
            let implied = match (&spec.program, &spec.task) {
                (None, None) => AppreciationKind::GeneralTrust,
                (Some(_), None) => AppreciationKind::ProgramTrust,
                (None, Some(_)) => AppreciationKind::TaskTrust,
                _ => AppreciationKind::Confidence,
            };
            if spec.kind != implied || (spec.program.is_some() && spec.task.is_some()) {
                out.push_str(&format!(" kind={}", spec.kind));
            }
            out
        };
        match self {
            Directive::Trust { spec, level } => write!(
                f,
                "trust {} {}{} = {level}",
                spec.subject,
                spec.target,
                qualifiers(spec)
            ),
            Directive::ExpectTrust { spec, level } => write!(
                f,
                "expect-trust {} {}{} = {level}",
                spec.subject,
                spec.target,
                qualifiers(spec)
            ),
            Directive::Attr {
                attr,
                entity,
                level,
            } => {
                let (k, id) = match entity {
                    Entity::Program(p) => ("program", p.to_string()),
                    Entity::Task(t) => ("task", t.to_string()),
                    Entity::User(a) => ("user", a.to_string()),
                    Entity::Provider(a) => ("provider", a.to_string()),
                };
                write!(f, "attr {attr} {k}={id} = {level}")
            }
            Directive::Profile(p) => {
                let join = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(",");
                write!(
                    f,
                    "profile {} independent={} experienced={} range={} reputation={} affiliated={}",
                    p.agent,
                    p.independent,
                    join(&p.experienced),
                    join(&p.range),
                    join(&p.reputation),
                    join(&p.affiliated)
                )
            }
            Directive::Issue(s) => write!(f, "issue {s}"),
            Directive::Impose {
                from,
                to,
                task,
                strength,
            } => {
                write!(f, "impose {from} {to} task={task}")?;
                if let Some(s) = strength {
                    write!(f, " strength={}", s.level())?;
                }
                Ok(())
            }
            Directive::Outcome {
                agent,
                program,
                task,
                outcome,
            } => {
                let result = match outcome {
                    Outcome::Kept => "success",
                    Outcome::Broken => "failure",
                };
                write!(
                    f,
                    "outcome {agent} program={program} task={task} result={result}"
                )
            }
            Directive::Withdraw { promiser, token } => {
                write!(f, "withdraw {promiser} token={token}")
            }
            Directive::LorRequest { asker, peer, about } => {
                write!(f, "lor-request {asker} {peer} about={about}")
            }
            Directive::Survey {
                surveyor,
                group,
                about,
                window,
            } => {
                let g: Vec<String> = group.iter().map(|a| a.to_string()).collect();
                write!(f, "survey {surveyor} group={} about={about}", g.join(","))?;
                if let Some(w) = window {
                    write!(f, " window={w}")?;
                }
                Ok(())
            }
            Directive::Reply { from, to, reply } => {
                let r = match reply {
                    Reply::Proceed => "proceed",
                    Reply::Withdraw => "withdraw",
                };
                write!(f, "reply {from} {to} {r}")
            }
            Directive::ExpectAction {
                agent,
                action,
                program,
                task,
            } => {
                write!(f, "expect-action {agent} {action}")?;
                if let Some(p) = program {
                    write!(f, " program={p}")?;
                }
                if let Some(t) = task {
                    write!(f, " task={t}")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_empty_scenario() {
        let s = Scenario::load("").unwrap();
        assert!(s.initial.is_empty() && s.events.is_empty());
        assert_eq!(s.policy, Policy::default());
        let s = Scenario::load("# only a comment\n\n").unwrap();
        assert!(s.events.is_empty());
    }

    #[test]
    fn ticks_must_not_decrease() {
        let e = Scenario::load("tick 7\ntick 5\n").unwrap_err();
        assert_eq!(
            e,
            EngineError::Load {
                line: 2,
                message: "tick 5 follows tick 7".into()
            }
        );
    }

    #[test]
    fn unknown_directive_is_line_addressed() {
        let e = Scenario::load("tick 0\n\nfrobnicate q\n").unwrap_err();
        assert!(matches!(e, EngineError::Load { line: 3, .. }), "{e:?}");
    }

    #[test]
    fn statement_errors_carry_columns() {
        let e = Scenario::load("tick 0\nissue p[pi \"b\"]q\n").unwrap_err();
        match e {
            EngineError::Load { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("column 6"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_inside_body_is_not_a_comment() {
        let s = Scenario::load("tick 0\nissue p[pi:\"item #4\"]q # trailing\n").unwrap();
        match &s.events[0].directive {
            Directive::Issue(st) => assert_eq!(st.body.text, "item #4"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn policy_header() {
        let s = Scenario::load(
            "policy tram=recency gate=0.25 fade-span=40 fade-threshold=0.1 seed=7 penalize-incredible\n",
        )
        .unwrap();
        assert_eq!(s.policy.tram, TramPolicy::RecencyHistory);
        assert_eq!(s.policy.gate, Decimal::new(25, 2));
        assert_eq!(s.policy.fade.span(), 40);
        assert_eq!(s.policy.seed, 7);
        assert!(s.policy.penalize_incredible);
        assert!(Scenario::load("policy fade-threshold=1.5\n").is_err());
        assert!(Scenario::load("policy colour=blue\n").is_err());
    }

    #[test]
    fn trust_directive_forms() {
        let s = Scenario::load(
            "trust q p = 1\ntrust q p task=U = -1\ntrust q P kind=confidence task=U = 2\n",
        )
        .unwrap();
        assert_eq!(s.initial.len(), 3);
        match &s.initial[1].directive {
            Directive::Trust { spec, level } => {
                assert_eq!(spec.kind, AppreciationKind::TaskTrust);
                assert_eq!(level.value(), -1);
            }
            other => panic!("{other:?}"),
        }
        assert!(Scenario::load("trust q p = 3\n").is_err());
        assert!(Scenario::load("trust q p kind=confidence = 1\n").is_err());
        assert!(Scenario::load("trust q p program=P task=U = 1\n").is_err());
    }

    #[test]
    fn events_need_a_tick() {
        assert!(Scenario::load("issue p[pi:\"b\"]q\n").is_err());
    }

    #[test]
    fn attr_entity_must_match_attribute() {
        assert!(Scenario::load("attr provider-size provider=p = -2\n").is_ok());
        assert!(Scenario::load("attr provider-size program=P = -2\n").is_err());
    }

    #[test]
    fn directives_display_as_they_parse() {
        let text = "trust q p = 1\n\
                    expect-trust q p task=U = 0\n\
                    attr program-size program=P = 2\n\
                    profile c independent=true experienced=P range= reputation= affiliated=\n\
                    tick 1\n\
                    issue p[adequacy(P,U):\"P is adequate for task U\"/{p,q,r}]q\n\
                    impose s q task=U strength=3\n\
                    outcome q program=P task=U result=failure\n\
                    withdraw p token=1-0\n\
                    lor-request q r about=p\n\
                    survey u group=q,r about=p window=5\n\
                    reply s q proceed\n\
                    expect-action q use program=P task=U\n";
        let s = Scenario::load(text).unwrap();
        let rendered: Vec<String> = s.all_events().map(|e| e.directive.to_string()).collect();
        let expected: Vec<&str> = text.lines().filter(|l| !l.starts_with("tick")).collect();
        assert_eq!(rendered, expected);
    }

    #[test]
    fn round_robin_alternates_actors() {
        let s = Scenario::load(
            "tick 0\nimpose s q task=U\nimpose s q task=V\nimpose a q task=W\nexpect-trust q p = 0\n",
        )
        .unwrap();
        let file = s.schedule(Interleaving::FileOrder);
        assert_eq!(file, vec![(0, vec![0, 1, 2, 3])]);
        let rr = s.schedule(Interleaving::RoundRobin);
        assert_eq!(rr, vec![(0, vec![2, 0, 1, 3])]);
    }
}
