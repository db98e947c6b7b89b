//! Directional statements: promises, impositions, suggestions, warnings,
//! proposals and predictions, in a bracketed notation such as
//!
//! ```text
//! p[pi:"b"]q
//! p[pi:"b"/{p,q,r}]q
//! p[w=9,r(k1),fade(100,0.05)/u=3,impose!pi:(5,"b" if "c",8)@4/{q}]q
//! ```
//!
//! The textual form is parsed by [`parse`] and printed canonically by
//! [`render`]; `parse(render(s)) == s` for every valid statement.

mod fragment;
mod parser;
mod printer;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ids::{AgentId, ProgramId, TaskId};
use crate::scalar::Scalar;
use crate::Tick;

pub use fragment::FragmentIssuer;
pub use parser::parse;
pub use printer::render;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatementError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("subject `{subject}` is neither in the effective scope nor the promisee")]
    ScopeMembership { subject: AgentId },
    #[error("validity window ends at {end} before it starts at {start}")]
    WindowOrder { start: Tick, end: Tick },
    #[error("observation time {observed} precedes issue time {issued}")]
    ObservationBeforeIssue { issued: Tick, observed: Tick },
}

impl StatementError {
    pub(crate) fn syntax(column: usize, message: impl Into<String>) -> Self {
        StatementError::Syntax {
            column,
            message: message.into(),
        }
    }
}

/// The six directional kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DirectionalKind {
    Promise,
    Imposition,
    Suggestion,
    Warning,
    Proposal,
    Prediction,
}

impl DirectionalKind {
    pub const ALL: [DirectionalKind; 6] = [
        DirectionalKind::Promise,
        DirectionalKind::Imposition,
        DirectionalKind::Suggestion,
        DirectionalKind::Warning,
        DirectionalKind::Proposal,
        DirectionalKind::Prediction,
    ];

    /// Keyword used before `!` in the notation.
    pub fn keyword(self) -> &'static str {
        match self {
            DirectionalKind::Promise => "promise",
            DirectionalKind::Imposition => "impose",
            DirectionalKind::Suggestion => "suggest",
            DirectionalKind::Warning => "warn",
            DirectionalKind::Proposal => "propose",
            DirectionalKind::Prediction => "predict",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.keyword() == word)
    }

    pub fn name(self) -> &'static str {
        match self {
            DirectionalKind::Promise => "promise",
            DirectionalKind::Imposition => "imposition",
            DirectionalKind::Suggestion => "suggestion",
            DirectionalKind::Warning => "warning",
            DirectionalKind::Proposal => "proposal",
            DirectionalKind::Prediction => "prediction",
        }
    }
}

impl fmt::Display for DirectionalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Strength of an imposition, 1 (strongest) to 10 (weakest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImpositionStrength(u8);

const IMPERATIVES: [&str; 10] = [
    "you must immediately",
    "you must under all circumstances",
    "you must",
    "I request you to",
    "you should",
    "you ought to",
    "can you please ... now",
    "can you please",
    "I would appreciate if you",
    "you are advised to",
];

impl ImpositionStrength {
    pub fn new(level: u8) -> Option<Self> {
        (1..=10)
            .contains(&level)
            .then_some(ImpositionStrength(level))
    }

    pub fn level(self) -> u8 {
        self.0
    }

    pub fn is_stronger_than(self, other: Self) -> bool {
        self.0 < other.0
    }

    /// The imperative phrasing conventionally associated with this level.
    pub fn imperative(self) -> &'static str {
        IMPERATIVES[(self.0 - 1) as usize]
    }
}

impl PartialOrd for ImpositionStrength {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered by strength: the stronger imposition compares greater.
impl Ord for ImpositionStrength {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.cmp(&self.0)
    }
}

/// Free-text body with an optional, uninterpreted condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Body {
    pub text: String,
    pub condition: Option<String>,
}

impl Body {
    pub fn new(text: impl Into<String>) -> Self {
        Body {
            text: text.into(),
            condition: None,
        }
    }

    pub fn with_condition(text: impl Into<String>, condition: impl Into<String>) -> Self {
        Body {
            text: text.into(),
            condition: Some(condition.into()),
        }
    }

    pub fn normalized(&self) -> Body {
        normalize(self)
    }
}

fn normalize_text(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Case- and whitespace-folded copy of a body, used for equivalence.
pub fn normalize(body: &Body) -> Body {
    Body {
        text: normalize_text(&body.text),
        condition: body.condition.as_deref().map(normalize_text),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ValidityWindow {
    pub start: Tick,
    pub end: Tick,
}

impl ValidityWindow {
    pub fn new(start: Tick, end: Tick) -> Result<Self, StatementError> {
        if start > end {
            return Err(StatementError::WindowOrder { start, end });
        }
        Ok(ValidityWindow { start, end })
    }

    pub fn contains(&self, t: Tick) -> bool {
        self.start <= t && t <= self.end
    }
}

/// Links the fragments of one issuing together. Equal tokens mean a common
/// origin; the optional public tag is carried along but never compared.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FragmentIdentity {
    pub token: String,
    pub public_tag: Option<String>,
}

impl FragmentIdentity {
    pub fn new(token: impl Into<String>) -> Self {
        FragmentIdentity {
            token: token.into(),
            public_tag: None,
        }
    }

    pub fn same_origin(&self, other: &FragmentIdentity) -> bool {
        self.token == other.token
    }
}

/// Non-negative decimal kept exactly as written (after dropping trailing
/// zeros), so that printing reproduces the parsed text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decimal {
    units: u64,
    scale: u32,
}

impl Decimal {
    pub fn new(units: u64, scale: u32) -> Self {
        let mut d = Decimal { units, scale };
        while d.scale > 0 && d.units.is_multiple_of(10) {
            d.units /= 10;
            d.scale -= 1;
        }
        d
    }

    pub fn units(self) -> u64 {
        self.units
    }

    pub fn scale(self) -> u32 {
        self.scale
    }

    pub fn to_scalar<S: Scalar>(self) -> S {
        S::from_ratio(self.units as i64, 10i64.pow(self.scale))
    }

    fn denominator(self) -> u64 {
        10u64.pow(self.scale)
    }

    /// Strictly between 0 and 1.
    pub fn is_proper_fraction(self) -> bool {
        self.units > 0 && self.units < self.denominator()
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.units);
        }
        let den = self.denominator();
        write!(
            f,
            "{}.{:0width$}",
            self.units / den,
            self.units % den,
            width = self.scale as usize
        )
    }
}

impl FromStr for Decimal {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        let (int, frac) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
            return Err(());
        }
        if s.contains('.') && (frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit())) {
            return Err(());
        }
        if frac.len() > 12 {
            return Err(());
        }
        let digits = format!("{int}{frac}");
        let units: u64 = digits.parse().map_err(|_| ())?;
        Ok(Decimal::new(units, frac.len() as u32))
    }
}

/// Linear fading: a fragment loses `1/span` of its vividness per tick and
/// terminates once below `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FadeSpec {
    span: u64,
    threshold: Decimal,
}

impl FadeSpec {
    pub fn new(span: u64, threshold: Decimal) -> Option<Self> {
        (span >= 1 && threshold.is_proper_fraction()).then_some(FadeSpec { span, threshold })
    }

    pub fn span(&self) -> u64 {
        self.span
    }

    pub fn threshold(&self) -> Decimal {
        self.threshold
    }
}

impl Default for FadeSpec {
    /// 100 ticks, threshold 0.05.
    fn default() -> Self {
        FadeSpec {
            span: 100,
            threshold: Decimal::new(5, 2),
        }
    }
}

/// Statement type, e.g. `pi` or `adequacy(P,U)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeTag {
    head: String,
    args: Vec<String>,
}

impl TypeTag {
    pub fn new(head: impl Into<String>, args: Vec<String>) -> Self {
        TypeTag {
            head: head.into(),
            args,
        }
    }

    pub fn simple(head: impl Into<String>) -> Self {
        Self::new(head, Vec::new())
    }

    pub fn head(&self) -> &str {
        &self.head
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }

    /// `adequacy(X,Y)`: program `X` is adequate for task `Y`.
    pub fn adequacy(program: &ProgramId, task: &TaskId) -> Self {
        Self::new("adequacy", vec![program.to_string(), task.to_string()])
    }

    /// Returns `(X, Y)` for a well-formed `adequacy(X,Y)` tag.
    pub fn as_adequacy(&self) -> Option<(ProgramId, TaskId)> {
        if self.head != "adequacy" || self.args.len() != 2 {
            return None;
        }
        Some((
            ProgramId::new(self.args[0].clone()).ok()?,
            TaskId::new(self.args[1].clone()).ok()?,
        ))
    }

    /// `task(Y)`: the tag used for impositions to perform task `Y`.
    pub fn task(task: &TaskId) -> Self {
        Self::new("task", vec![task.to_string()])
    }

    pub fn as_task(&self) -> Option<TaskId> {
        if self.head != "task" || self.args.len() != 1 {
            return None;
        }
        TaskId::new(self.args[0].clone()).ok()
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.head)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(","))?;
        }
        Ok(())
    }
}

/// A parsed directional.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Statement {
    pub kind: DirectionalKind,
    pub promiser: AgentId,
    pub promisee: AgentId,
    pub type_tag: TypeTag,
    pub body: Body,
    pub window: Option<ValidityWindow>,
    /// Explicit scope as written; see [`Statement::effective_scope`].
    pub scope: BTreeSet<AgentId>,
    pub issue_time: Option<Tick>,
    pub observation_time: Option<Tick>,
    /// Agent carrying this fragment.
    pub subject: Option<AgentId>,
    pub identity: Option<FragmentIdentity>,
    pub fade: Option<FadeSpec>,
    pub strength: Option<ImpositionStrength>,
}

impl Statement {
    /// Ground form `promiser[type:body]promisee`.
    pub fn new(
        kind: DirectionalKind,
        promiser: AgentId,
        type_tag: TypeTag,
        body: Body,
        promisee: AgentId,
    ) -> Self {
        Statement {
            kind,
            promiser,
            promisee,
            type_tag,
            body,
            window: None,
            scope: BTreeSet::new(),
            issue_time: None,
            observation_time: None,
            subject: None,
            identity: None,
            fade: None,
            strength: None,
        }
    }

    pub fn with_scope(mut self, scope: impl IntoIterator<Item = AgentId>) -> Self {
        self.scope = scope.into_iter().collect();
        self
    }

    /// Scope plus the promiser.
    pub fn effective_scope(&self) -> BTreeSet<AgentId> {
        let mut s = self.scope.clone();
        s.insert(self.promiser.clone());
        s
    }

    /// Agents that receive a fragment when this statement is issued.
    pub fn recipients(&self) -> BTreeSet<AgentId> {
        let mut s = self.effective_scope();
        s.insert(self.promisee.clone());
        s
    }

    pub fn validate(&self) -> Result<(), StatementError> {
        if let Some(w) = self.window {
            if w.start > w.end {
                return Err(StatementError::WindowOrder {
                    start: w.start,
                    end: w.end,
                });
            }
        }
        if let (Some(issued), Some(observed)) = (self.issue_time, self.observation_time) {
            if observed < issued {
                return Err(StatementError::ObservationBeforeIssue { issued, observed });
            }
        }
        if let Some(subject) = &self.subject {
            if subject != &self.promisee
                && subject != &self.promiser
                && !self.scope.contains(subject)
            {
                return Err(StatementError::ScopeMembership {
                    subject: subject.clone(),
                });
            }
        }
        if self.strength.is_some() && self.kind != DirectionalKind::Imposition {
            return Err(StatementError::syntax(
                1,
                "strength applies to impositions only",
            ));
        }
        Ok(())
    }

    pub fn token(&self) -> Option<&str> {
        self.identity.as_ref().map(|i| i.token.as_str())
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl FromStr for Statement {
    type Err = StatementError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Whether two issuings convey the same directional. Timing, carrier,
/// identity, fading and scope are ignored.
pub fn equivalent(a: &Statement, b: &Statement) -> bool {
    a.kind == b.kind
        && a.promiser == b.promiser
        && a.promisee == b.promisee
        && a.type_tag == b.type_tag
        && a.window == b.window
        && normalize(&a.body) == normalize(&b.body)
}
