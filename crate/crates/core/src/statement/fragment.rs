//! Splitting an issued statement into per-agent fragments.

use super::{FadeSpec, FragmentIdentity, Statement};
use crate::Tick;

/// Hands out fragment identity tokens of the form `<tick>-<sequence>`.
/// The sequence counts issuings over the issuer's lifetime, so two batches
/// never share a token even within one tick.
#[derive(Debug, Clone, Default)]
pub struct FragmentIssuer {
    next_seq: u64,
    default_fade: FadeSpec,
}

impl FragmentIssuer {
    pub fn new(default_fade: FadeSpec) -> Self {
        FragmentIssuer {
            next_seq: 0,
            default_fade,
        }
    }

    pub fn default_fade(&self) -> FadeSpec {
        self.default_fade
    }

    pub fn issued(&self) -> u64 {
        self.next_seq
    }

    /// One fragment per agent in the effective scope plus the promisee,
    /// in name order. Any carrier or identity already on `s` is replaced.
    pub fn fragment_on_issue(&mut self, s: &Statement, now: Tick) -> Vec<Statement> {
        let token = format!("{now}-{}", self.next_seq);
        self.next_seq += 1;
        let fade = s.fade.unwrap_or(self.default_fade);
        let observation_time = s.observation_time.filter(|&w| w >= now);

        s.recipients()
            .into_iter()
            .map(|subject| Statement {
                subject: Some(subject),
                issue_time: Some(now),
                observation_time,
                identity: Some(FragmentIdentity::new(token.clone())),
                fade: Some(fade),
                ..s.clone()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::{equivalent, parse};
    use super::*;

    fn subjects(frags: &[Statement]) -> Vec<String> {
        frags
            .iter()
            .map(|f| f.subject.as_ref().unwrap().to_string())
            .collect()
    }

    #[test]
    fn m0_fragments_over_scope() {
        let m0 = parse(r#"p[adequacy(P,U):"P is adequate for task U"/{p,q,r}]q"#).unwrap();
        let mut issuer = FragmentIssuer::default();
        let frags = issuer.fragment_on_issue(&m0, 4);
        assert_eq!(subjects(&frags), ["p", "q", "r"]);
        assert!(frags.iter().all(|f| f.token() == Some("4-0")));
        assert!(frags.iter().all(|f| f.issue_time == Some(4)));
        assert!(frags.iter().all(|f| f.fade == Some(FadeSpec::default())));
        assert!(frags.iter().all(|f| f.validate().is_ok()));
    }

    #[test]
    fn ground_form_reaches_promiser_and_promisee() {
        let s = parse(r#"p[pi:"b"]q"#).unwrap();
        let frags = FragmentIssuer::default().fragment_on_issue(&s, 0);
        assert_eq!(subjects(&frags), ["p", "q"]);
    }

    #[test]
    fn tokens_are_fresh_per_batch() {
        let s = parse(r#"p[pi:"b"]q"#).unwrap();
        let mut issuer = FragmentIssuer::default();
        let a = issuer.fragment_on_issue(&s, 2);
        let b = issuer.fragment_on_issue(&s, 2);
        assert_ne!(a[0].token(), b[0].token());
    }

    #[test]
    fn explicit_fade_is_kept() {
        let s = parse(r#"p[fade(10,0.5)/pi:"b"]q"#).unwrap();
        let frags = FragmentIssuer::default().fragment_on_issue(&s, 0);
        assert_eq!(frags[0].fade.unwrap().span(), 10);
    }

    #[test]
    fn fragments_are_pairwise_equivalent() {
        let s = parse(r#"p[pi:"b"/{a,b,c}]q"#).unwrap();
        let frags = FragmentIssuer::default().fragment_on_issue(&s, 1);
        assert_eq!(frags.len(), s.recipients().len());
        assert_eq!(frags.len(), 5);
        for x in &frags {
            for y in &frags {
                assert!(equivalent(x, y));
                assert!(x
                    .identity
                    .as_ref()
                    .unwrap()
                    .same_origin(y.identity.as_ref().unwrap()));
            }
        }
    }
}
