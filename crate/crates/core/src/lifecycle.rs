//! Per-fragment life-cycle: a fragment is `active` until it is assessed
//! (`kept` / `broken`), withdrawn by its promiser, or fades below its
//! threshold. All four end states are absorbing.

use std::fmt;

use thiserror::Error;

use crate::ids::AgentId;
use crate::scalar::Scalar;
use crate::statement::{equivalent, Decimal, FadeSpec, Statement};
use crate::trust::Outcome;
use crate::Tick;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LifecycleState {
    Active,
    Kept,
    Broken,
    Withdrawn,
    Faded,
}

impl LifecycleState {
    pub fn is_terminal(self) -> bool {
        self != LifecycleState::Active
    }

    pub fn name(self) -> &'static str {
        match self {
            LifecycleState::Active => "active",
            LifecycleState::Kept => "kept",
            LifecycleState::Broken => "broken",
            LifecycleState::Withdrawn => "withdrawn",
            LifecycleState::Faded => "faded",
        }
    }
}

impl fmt::Display for LifecycleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LifecycleError {
    #[error("fragment is already {0}")]
    Terminal(LifecycleState),
    #[error("time moved backwards: last update {last}, now {now}")]
    TimeReversal { last: Tick, now: Tick },
    #[error("only the promiser may withdraw; `{0}` is not the promiser")]
    NotPromiser(AgentId),
    #[error("reissued statement is not equivalent to the fragment")]
    NotEquivalent,
}

/// A fragment held by one agent, with its fading clock.
#[derive(Debug, Clone, PartialEq)]
pub struct LifecycleRecord<S> {
    fragment: Statement,
    state: LifecycleState,
    fade_level: S,
    fade_rate_multiplier: u64,
    last_update: Tick,
    /// Tick of creation or of the last refresh; fading is measured from here.
    vivid_since: Tick,
    span: u64,
    threshold: Decimal,
}

impl<S: Scalar> LifecycleRecord<S> {
    /// Fresh, fully vivid record. The fade parameters come from the
    /// fragment, or the default when it carries none.
    pub fn new(fragment: Statement, now: Tick) -> Self {
        let fade = fragment.fade.unwrap_or_default();
        Self::with_fade(fragment, fade, now)
    }

    pub fn with_fade(fragment: Statement, fade: FadeSpec, now: Tick) -> Self {
        LifecycleRecord {
            fragment,
            state: LifecycleState::Active,
            fade_level: S::one(),
            fade_rate_multiplier: 1,
            last_update: now,
            vivid_since: now,
            span: fade.span(),
            threshold: fade.threshold(),
        }
    }

    /// Multiplier on the fading rate (at least 1).
    pub fn accelerated(mut self, multiplier: u64) -> Self {
        self.fade_rate_multiplier = multiplier.max(1);
        self
    }

    pub fn fragment(&self) -> &Statement {
        &self.fragment
    }

    pub fn state(&self) -> LifecycleState {
        self.state
    }

    pub fn is_active(&self) -> bool {
        self.state == LifecycleState::Active
    }

    pub fn fade_level(&self) -> S {
        self.fade_level
    }

    pub fn fade_rate_multiplier(&self) -> u64 {
        self.fade_rate_multiplier
    }

    pub fn last_update(&self) -> Tick {
        self.last_update
    }

    pub fn token(&self) -> Option<&str> {
        self.fragment.token()
    }

    pub fn subject(&self) -> Option<&AgentId> {
        self.fragment.subject.as_ref()
    }

    fn ensure_active(&self) -> Result<(), LifecycleError> {
        if self.state.is_terminal() {
            Err(LifecycleError::Terminal(self.state))
        } else {
            Ok(())
        }
    }

    fn ensure_forward(&self, now: Tick) -> Result<(), LifecycleError> {
        if now < self.last_update {
            Err(LifecycleError::TimeReversal {
                last: self.last_update,
                now,
            })
        } else {
            Ok(())
        }
    }

    /// Linear fading: the level is `1 - multiplier * elapsed / span` since
    /// the last refresh, floored at 0. Falling below the threshold ends the
    /// fragment as `faded`; that comparison is done in integers so every
    /// scalar type fades on the same tick.
    pub fn step_fade(&mut self, now: Tick) -> Result<LifecycleState, LifecycleError> {
        self.ensure_active()?;
        self.ensure_forward(now)?;
        let elapsed = now - self.vivid_since;
        let scaled = u128::from(self.fade_rate_multiplier) * u128::from(elapsed);
        let loss = S::from_ratio(scaled as i64, self.span as i64);
        self.fade_level = (S::one() - loss).max_of(S::zero());
        self.last_update = now;
        let den = 10u128.pow(self.threshold.scale());
        let margin = den - u128::from(self.threshold.units());
        if margin * u128::from(self.span) < scaled * den {
            self.state = LifecycleState::Faded;
        }
        Ok(self.state)
    }

    pub fn assess(
        &mut self,
        verdict: Outcome,
        now: Tick,
    ) -> Result<LifecycleState, LifecycleError> {
        self.ensure_active()?;
        self.ensure_forward(now)?;
        self.state = match verdict {
            Outcome::Kept => LifecycleState::Kept,
            Outcome::Broken => LifecycleState::Broken,
        };
        self.last_update = now;
        Ok(self.state)
    }

    pub fn withdraw(&mut self, by: &AgentId, now: Tick) -> Result<LifecycleState, LifecycleError> {
        self.ensure_active()?;
        if *by != self.fragment.promiser {
            return Err(LifecycleError::NotPromiser(by.clone()));
        }
        self.ensure_forward(now)?;
        self.state = LifecycleState::Withdrawn;
        self.last_update = now;
        Ok(self.state)
    }

    /// An equivalent reissue restores full vividness.
    pub fn refresh_on_repetition(
        &mut self,
        reissue: &Statement,
        now: Tick,
    ) -> Result<LifecycleState, LifecycleError> {
        self.ensure_active()?;
        if !equivalent(&self.fragment, reissue) {
            return Err(LifecycleError::NotEquivalent);
        }
        self.ensure_forward(now)?;
        self.fade_level = S::one();
        self.last_update = now;
        self.vivid_since = now;
        Ok(self.state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statement::parse;
    use crate::Rational;

    fn frag() -> Statement {
        let mut s = parse(r#"p[r/adequacy(P,U):"P is adequate"/{p,q,r}]q"#).unwrap();
        s.fade = FadeSpec::new(100, Decimal::new(5, 2));
        s
    }

    #[test]
    fn linear_fade_step() {
        let mut rec = LifecycleRecord::<Rational>::new(frag(), 0);
        rec.step_fade(10).unwrap();
        assert_eq!(rec.fade_level(), Rational::new(9, 10));
        assert!(rec.is_active());

        let mut rec = LifecycleRecord::<f64>::new(frag(), 0);
        rec.step_fade(10).unwrap();
        assert!((rec.fade_level() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn crossing_threshold_fades() {
        let mut rec = LifecycleRecord::<Rational>::new(frag(), 0);
        rec.step_fade(94).unwrap();
        assert_eq!(rec.fade_level(), Rational::new(6, 100));
        assert!(rec.is_active());
        assert_eq!(rec.step_fade(96).unwrap(), LifecycleState::Faded);
        assert_eq!(rec.fade_level(), Rational::new(4, 100));
    }

    #[test]
    fn accelerated_fading() {
        let mut rec = LifecycleRecord::<Rational>::new(frag(), 0).accelerated(4);
        rec.step_fade(10).unwrap();
        assert_eq!(rec.fade_level(), Rational::new(6, 10));
    }

    #[test]
    fn fade_level_floors_at_zero() {
        let mut rec = LifecycleRecord::<f64>::new(frag(), 0);
        rec.step_fade(1000).unwrap();
        assert_eq!(rec.fade_level(), 0.0);
        assert_eq!(rec.state(), LifecycleState::Faded);
    }

    #[test]
    fn terminal_record_rejects_stepping() {
        let mut rec = LifecycleRecord::<f64>::new(frag(), 0);
        rec.assess(Outcome::Kept, 1).unwrap();
        assert_eq!(
            rec.step_fade(2),
            Err(LifecycleError::Terminal(LifecycleState::Kept))
        );
    }

    #[test]
    fn assessment_is_final() {
        let mut rec = LifecycleRecord::<f64>::new(frag(), 0);
        assert_eq!(
            rec.assess(Outcome::Broken, 3).unwrap(),
            LifecycleState::Broken
        );
        assert!(rec.assess(Outcome::Kept, 4).is_err());
        let mut rec = LifecycleRecord::<f64>::new(frag(), 0);
        assert_eq!(rec.assess(Outcome::Kept, 3).unwrap(), LifecycleState::Kept);
    }

    #[test]
    fn withdrawal_rules() {
        let p = AgentId::new("p").unwrap();
        let q = AgentId::new("q").unwrap();
        let mut rec = LifecycleRecord::<f64>::new(frag(), 0);
        assert_eq!(rec.withdraw(&q, 1), Err(LifecycleError::NotPromiser(q)));
        assert_eq!(rec.withdraw(&p, 1).unwrap(), LifecycleState::Withdrawn);

        let mut rec = LifecycleRecord::<f64>::new(frag(), 0);
        rec.assess(Outcome::Kept, 1).unwrap();
        assert!(rec.withdraw(&p, 2).is_err());
    }

    #[test]
    fn repetition_refreshes() {
        let mut rec = LifecycleRecord::<Rational>::new(frag(), 0);
        rec.step_fade(70).unwrap();
        assert_eq!(rec.fade_level(), Rational::new(3, 10));
        let mut again = frag();
        again.issue_time = Some(70);
        rec.refresh_on_repetition(&again, 70).unwrap();
        assert_eq!(rec.fade_level(), Rational::from_integer(1));
        assert!(rec.is_active());

        let other = parse(r#"p[adequacy(Q,V):"Q is adequate"]q"#).unwrap();
        assert_eq!(
            rec.refresh_on_repetition(&other, 71),
            Err(LifecycleError::NotEquivalent)
        );

        rec.step_fade(1000).unwrap();
        assert!(matches!(
            rec.refresh_on_repetition(&again, 1000),
            Err(LifecycleError::Terminal(LifecycleState::Faded))
        ));
    }

    #[test]
    fn time_cannot_run_backwards() {
        let mut rec = LifecycleRecord::<f64>::new(frag(), 5);
        assert!(matches!(
            rec.step_fade(4),
            Err(LifecycleError::TimeReversal { .. })
        ));
    }
}
