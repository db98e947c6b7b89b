//! Recursive-descent parser for the statement notation.
//!
//! ```text
//! stmt     := agent "[" frag? issue? kindtag? type ":" bodycore strength? scope? "]" agent
//! frag     := fragitem ("," fragitem)* "/"
//!             fragitem in order: "w=" int | agent ("(" token ("," token)? ")")?
//!                                | "fade(" int "," decimal ")"
//! issue    := "u=" int ","
//! kindtag  := ("promise"|"impose"|"suggest"|"warn"|"propose"|"predict") "!"
//! type     := name ("(" name ("," name)* ")")?
//! bodycore := qstring cond? | "(" int "," qstring cond? "," int ")"
//! cond     := "if" qstring
//! strength := "@" int
//! scope    := "/" "{" agent ("," agent)* "}"
//! ```
//!
//! Whitespace is accepted between tokens. Column numbers in errors are
//! 1-based character positions.

use std::collections::BTreeSet;

use super::{
    Body, Decimal, DirectionalKind, FadeSpec, FragmentIdentity, ImpositionStrength, Statement,
    StatementError, TypeTag, ValidityWindow,
};
use crate::ids::{is_name_char, AgentId};
use crate::Tick;

type PResult<T> = Result<T, StatementError>;

/// Parses a single statement and checks its invariants.
pub fn parse(text: &str) -> Result<Statement, StatementError> {
    let mut p = Parser::new(text);
    let stmt = p.statement()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    stmt.validate()?;
    Ok(stmt)
}

#[derive(Default)]
struct FragClause {
    observation_time: Option<Tick>,
    subject: Option<AgentId>,
    identity: Option<FragmentIdentity>,
    fade: Option<FadeSpec>,
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Self {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn error(&self, message: impl Into<String>) -> StatementError {
        StatementError::syntax(self.pos + 1, message)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn looking_at(&self, lit: &str) -> bool {
        lit.chars()
            .enumerate()
            .all(|(i, c)| self.chars.get(self.pos + i) == Some(&c))
    }

    /// Consumes `lit` after optional whitespace.
    fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        if self.looking_at(lit) {
            self.pos += lit.chars().count();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> PResult<()> {
        if self.eat(lit) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{lit}`")))
        }
    }

    fn name(&mut self, what: &str) -> PResult<String> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(is_name_char) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error(format!("expected {what}")));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn agent(&mut self) -> PResult<AgentId> {
        let name = self.name("agent name")?;
        Ok(AgentId::new(name).expect("name chars validated"))
    }

    fn int(&mut self) -> PResult<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits
            .parse()
            .map_err(|_| StatementError::syntax(start + 1, "integer too large"))
    }

    fn decimal(&mut self) -> PResult<Decimal> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse()
            .map_err(|_| StatementError::syntax(start + 1, "expected decimal number"))
    }

    fn qstring(&mut self) -> PResult<String> {
        self.skip_ws();
        if self.peek() != Some('"') {
            return Err(self.error("expected quoted string"));
        }
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(self.error("unterminated string")),
                Some('"') => {
                    self.pos += 1;
                    break;
                }
                Some('\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some(c @ ('"' | '\\')) => {
                            out.push(c);
                            self.pos += 1;
                        }
                        _ => return Err(self.error("invalid escape")),
                    }
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
        Ok(out)
    }

    fn statement(&mut self) -> PResult<Statement> {
        let promiser = self.agent()?;
        self.expect("[")?;

        let frag = self.try_frag()?;
        let issue_time = if self.eat("u=") {
            let u = self.int()?;
            self.expect(",")?;
            Some(u)
        } else {
            None
        };
        let kind = self.kind_tag();
        let type_tag = self.type_tag()?;
        self.expect(":")?;
        let (body, window) = self.body_core()?;

        let strength_col = {
            self.skip_ws();
            self.pos + 1
        };
        let strength = if self.eat("@") {
            let level = self.int()?;
            if kind != DirectionalKind::Imposition {
                return Err(StatementError::syntax(
                    strength_col,
                    "strength clause is only allowed on impositions",
                ));
            }
            let s = u8::try_from(level)
                .ok()
                .and_then(ImpositionStrength::new)
                .ok_or_else(|| {
                    StatementError::syntax(strength_col + 1, "strength must be 1..10")
                })?;
            Some(s)
        } else {
            None
        };

        let scope = if self.eat("/") {
            self.scope()?
        } else {
            BTreeSet::new()
        };
        self.expect("]")?;
        let promisee = self.agent()?;

        Ok(Statement {
            kind,
            promiser,
            promisee,
            type_tag,
            body,
            window,
            scope,
            issue_time,
            observation_time: frag.observation_time,
            subject: frag.subject,
            identity: frag.identity,
            fade: frag.fade,
            strength,
        })
    }

    /// The fragment clause can only be told apart from a type tag by the
    /// terminating `/`, so it is parsed speculatively unless it opens with
    /// `w=` or `fade(<digit>`.
    fn try_frag(&mut self) -> PResult<FragClause> {
        let start = self.pos;
        self.skip_ws();
        let committed = self.looking_at("w=")
            || (self.looking_at("fade(")
                && self
                    .chars
                    .get(self.pos + 5)
                    .is_some_and(|c| c.is_ascii_digit()));
        match self.frag() {
            Ok(Some(f)) => Ok(f),
            Err(e) if committed => Err(e),
            Ok(None) | Err(_) => {
                self.pos = start;
                Ok(FragClause::default())
            }
        }
    }

    fn frag(&mut self) -> PResult<Option<FragClause>> {
        let mut clause = FragClause::default();
        let mut any = false;

        if self.eat("w=") {
            clause.observation_time = Some(self.int()?);
            any = true;
            if !self.eat(",") {
                return self.finish_frag(clause);
            }
        }

        self.skip_ws();
        if !self.looking_at("fade(") && self.peek().is_some_and(is_name_char) {
            let subject = self.agent()?;
            if self.eat("(") {
                let token = self.name("identity token")?;
                let public_tag = if self.eat(",") {
                    Some(self.name("public tag")?)
                } else {
                    None
                };
                self.expect(")")?;
                clause.identity = Some(FragmentIdentity { token, public_tag });
            }
            clause.subject = Some(subject);
            any = true;
            if !self.eat(",") {
                return self.finish_frag(clause);
            }
        }

        self.skip_ws();
        if self.looking_at("fade(") {
            self.pos += "fade(".len();
            let col = self.pos + 1;
            let span = self.int()?;
            self.expect(",")?;
            let threshold = self.decimal()?;
            self.expect(")")?;
            clause.fade = Some(FadeSpec::new(span, threshold).ok_or_else(|| {
                StatementError::syntax(col, "fade needs span >= 1 and 0 < threshold < 1")
            })?);
            any = true;
        } else if any {
            return Err(self.error("expected `fade(`"));
        }

        if !any {
            return Ok(None);
        }
        self.finish_frag(clause)
    }

    fn finish_frag(&mut self, clause: FragClause) -> PResult<Option<FragClause>> {
        self.skip_ws();
        if self.peek() == Some('/') {
            self.pos += 1;
            Ok(Some(clause))
        } else {
            Err(self.error("expected `/` after fragment clause"))
        }
    }

    fn kind_tag(&mut self) -> DirectionalKind {
        self.skip_ws();
        let start = self.pos;
        if let Ok(word) = self.name("kind") {
            if let Some(kind) = DirectionalKind::from_keyword(&word) {
                if self.eat("!") {
                    return kind;
                }
            }
        }
        self.pos = start;
        DirectionalKind::Promise
    }

    fn type_tag(&mut self) -> PResult<TypeTag> {
        let head = self.name("statement type")?;
        let mut args = Vec::new();
        if self.eat("(") {
            loop {
                args.push(self.name("type argument")?);
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        Ok(TypeTag::new(head, args))
    }

    fn condition(&mut self) -> PResult<Option<String>> {
        self.skip_ws();
        let start = self.pos;
        if self.eat("if") {
            self.skip_ws();
            if self.peek() == Some('"') {
                return Ok(Some(self.qstring()?));
            }
        }
        self.pos = start;
        Ok(None)
    }

    fn body_core(&mut self) -> PResult<(Body, Option<ValidityWindow>)> {
        if self.eat("(") {
            let start = self.int()?;
            self.expect(",")?;
            let text = self.qstring()?;
            if text.is_empty() {
                return Err(self.error("body must not be empty"));
            }
            let condition = self.condition()?;
            self.expect(",")?;
            let end = self.int()?;
            self.expect(")")?;
            let window = ValidityWindow::new(start, end)?;
            Ok((Body { text, condition }, Some(window)))
        } else {
            let text = self.qstring()?;
            if text.is_empty() {
                return Err(self.error("body must not be empty"));
            }
            let condition = self.condition()?;
            Ok((Body { text, condition }, None))
        }
    }

    fn scope(&mut self) -> PResult<BTreeSet<AgentId>> {
        self.expect("{")?;
        let mut scope = BTreeSet::new();
        loop {
            scope.insert(self.agent()?);
            if self.eat("}") {
                break;
            }
            self.expect(",")?;
        }
        Ok(scope)
    }
}
