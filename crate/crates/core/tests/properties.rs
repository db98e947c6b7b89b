use std::collections::{BTreeMap, BTreeSet};

use coop_core::engine::{run_with, TraceEvent};
use coop_core::{parse, render, run, Rational, Scenario};
use proptest::prelude::*;

const AGENTS: [&str; 5] = ["p", "q", "r", "s", "M_A"];
const KINDS: [&str; 6] = ["", "impose!", "suggest!", "warn!", "propose!", "predict!"];

fn agent() -> impl Strategy<Value = String> {
    prop::sample::select(AGENTS.to_vec()).prop_map(str::to_string)
}

fn quoted() -> impl Strategy<Value = String> {
    "[!-~][ -~]{0,11}".prop_map(|s| {
        let mut out = String::from('"');
        for c in s.chars() {
            if c == '"' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('"');
        out
    })
}

/// Canonical statement text, built clause by clause in printer order.
fn canonical_text() -> impl Strategy<Value = String> {
    let head = (
        agent(),
        agent(),
        prop::sample::subsequence(AGENTS.to_vec(), 0..=3),
    );
    let clauses = (
        prop::option::of(0u64..50),
        prop::option::of((0u64..20, 0u64..20)),
        0usize..KINDS.len(),
        "[a-z][a-z0-9-]{0,5}",
        prop::option::of("[A-Z][A-Za-z0-9]{0,3}"),
        quoted(),
        prop::option::of(quoted()),
        1u8..=10,
    );
    let frag = (
        prop::option::of(0u64..50),
        prop::option::of((
            0usize..8,
            prop::option::of(("[a-z]{1,4}", prop::option::of("[a-z]{1,3}"))),
        )),
        prop::option::of((
            1u64..500,
            prop::sample::select(vec!["0.05", "0.5", "0.25", "0.1", "0.01"]),
        )),
    );
    (head, clauses, frag).prop_map(
        |(
            (promiser, promisee, scope),
            (issue, window, kind, ty, arg, body, cond, strength),
            (obs, subject, fade),
        )| {
            let mut out = format!("{promiser}[");
            let mut items = Vec::new();
            if let Some(delta) = obs {
                items.push(format!("w={}", issue.unwrap_or(0) + delta));
            }
            if let Some((pick, id)) = subject {
                let mut holders: BTreeSet<&str> = scope.iter().copied().collect();
                holders.insert(&promiser);
                holders.insert(&promisee);
                let holders: Vec<&str> = holders.into_iter().collect();
                let mut item = holders[pick % holders.len()].to_string();
                if let Some((token, tag)) = id {
                    item.push('(');
                    item.push_str(&token);
                    if let Some(tag) = tag {
                        item.push(',');
                        item.push_str(&tag);
                    }
                    item.push(')');
                }
                items.push(item);
            }
            if let Some((span, threshold)) = fade {
                items.push(format!("fade({span},{threshold})"));
            }
            if !items.is_empty() {
                out.push_str(&items.join(","));
                out.push('/');
            }
            if let Some(u) = issue {
                out.push_str(&format!("u={u},"));
            }
            out.push_str(KINDS[kind]);
            out.push_str(&ty);
            if let Some(arg) = arg {
                out.push_str(&format!("({arg})"));
            }
            out.push(':');
            let mut core = body;
            if let Some(c) = cond {
                core.push_str(" if ");
                core.push_str(&c);
            }
            match window {
                Some((a, b)) => out.push_str(&format!("({},{core},{})", a.min(b), a.max(b))),
                None => out.push_str(&core),
            }
            if KINDS[kind] == "impose!" {
                out.push_str(&format!("@{strength}"));
            }
            if !scope.is_empty() {
                let mut scope = scope.clone();
                scope.sort_unstable();
                out.push_str(&format!("/{{{}}}", scope.join(",")));
            }
            out.push(']');
            out.push_str(&promisee);
            out
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn canonical_text_is_a_fixed_point(text in canonical_text()) {
        let s = parse(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(render(&s), text);
    }

    #[test]
    fn parse_inverts_render(text in canonical_text()) {
        let s = parse(&text).unwrap();
        prop_assert_eq!(parse(&render(&s)).unwrap(), s);
    }
}

fn directive() -> impl Strategy<Value = String> {
    let level = -2i64..=2;
    let program = prop::sample::select(vec!["P", "Q"]);
    let task = prop::sample::select(vec!["U", "V"]);
    let promiser = prop::sample::select(vec!["p", "r"]);
    prop_oneof![
        (promiser.clone(), level.clone()).prop_map(|(p, l)| format!("trust q {p} = {l}")),
        (level.clone()).prop_map(|l| format!("trust q s = {l}")),
        (promiser.clone(), program.clone(), task.clone()).prop_map(|(p, x, t)| format!(
            "issue {p}[adequacy({x},{t}):\"{x} is adequate for task {t}\"/{{p,q,r}}]q"
        )),
        task.clone().prop_map(|t| format!("impose s q task={t}")),
        (program, task, any::<bool>()).prop_map(|(x, t, ok)| format!(
            "outcome q program={x} task={t} result={}",
            if ok { "success" } else { "failure" }
        )),
        (promiser.clone(), level).prop_map(|(p, l)| format!("trust r {p} = {l}")),
        promiser
            .clone()
            .prop_map(|p| format!("lor-request q r about={p}")),
        promiser.prop_map(|p| format!("survey q group=r,s about={p}")),
        prop::sample::select(vec!["proceed", "withdraw"]).prop_map(|r| format!("reply s q {r}")),
    ]
}

fn scenario_text() -> impl Strategy<Value = String> {
    (
        prop::sample::select(vec!["incremental", "recency-history"]),
        prop::collection::vec((0u64..4, prop::collection::vec(directive(), 1..4)), 1..12),
    )
        .prop_map(|(tram, ticks)| {
            let mut out = format!("policy tram={tram} fade-span=20 fade-threshold=0.5\n");
            let mut now = 0;
            for (gap, lines) in ticks {
                now += gap;
                out.push_str(&format!("tick {now}\n"));
                for line in lines {
                    out.push_str(&line);
                    out.push('\n');
                }
            }
            out
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_scenarios_are_deterministic_and_exact(text in scenario_text()) {
        let scenario = Scenario::load(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        let trace = run(&scenario);
        prop_assert_eq!(run(&scenario).render(), trace.render());
        prop_assert_eq!(run_with::<Rational>(&scenario).render(), trace.render());
    }

    #[test]
    fn identities_terminate_once_and_stay_ended(text in scenario_text()) {
        let trace = run(&Scenario::load(&text).unwrap());
        let mut ended: BTreeSet<String> = BTreeSet::new();
        let mut record_state: BTreeMap<(String, String), String> = BTreeMap::new();
        for line in trace.lines() {
            match &line.event {
                TraceEvent::Terminated { token } => {
                    prop_assert!(ended.insert(token.clone()), "{} terminated twice", token);
                }
                TraceEvent::Lifecycle { token, subject, state, .. } => {
                    prop_assert!(!ended.contains(token), "{} changed after termination", token);
                    let key = (token.clone(), subject.to_string());
                    if let Some(prev) = record_state.get(&key) {
                        prop_assert!(prev == "active", "{:?} left {}", key, prev);
                    }
                    record_state.insert(key, state.to_string());
                }
                _ => {}
            }
        }
    }

    #[test]
    fn trust_lines_always_carry_a_cause(text in scenario_text()) {
        let trace = run(&Scenario::load(&text).unwrap());
        for line in trace.lines() {
            if let TraceEvent::Trust { .. } = &line.event {
                prop_assert!(line.directive.is_some(), "trust line outside a directive: {}", line);
            }
        }
    }
}
