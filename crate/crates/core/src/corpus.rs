//! Bundled statements in canonical form.
//!
//! The main corpus encodes the promise bundle around a single transfer of an
//! amount `m` from agent `A` to agent `B` for a service or good S/G, plus
//! directionals from a recurring parking-exit case so that every kind
//! appears. [`STATEMENT_FORMS`] holds one statement per notational form.

use crate::statement::{parse, Statement};

/// A labelled canonical statement text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub label: &'static str,
    pub text: &'static str,
}

const fn e(label: &'static str, text: &'static str) -> Entry {
    Entry { label, text }
}

pub const CORPUS: &[Entry] = &[
    e(
        "p1",
        r#"B[propose!deliver(SG):"deliver S/G against compensation m"/{M_B}]A"#,
    ),
    e("p2", r#"A[accept(SG):"accept S/G"/{M_A}]B"#),
    e(
        "p3",
        r#"A[suggest!pay-via(IM):"A is able and willing to pay B for S/G via informational money IM"/{M_B}]B"#,
    ),
    e(
        "p4",
        r#"A[propose!pay-via(IMX):"pay B by way of informational money IMX"]B"#,
    ),
    e("p5", r#"B[accept-payment(IMX):"accept an IMX payment"]A"#),
    e(
        "p6",
        r#"B[confirm-payment(m):"confirm payment of amount m after receipt via an IMX channel"/{M_A,M_B}]A"#,
    ),
    e(
        "pm1",
        r#"A[satisfaction(SG):"satisfied upon acquiring S/G for compensation m or below"]A"#,
    ),
    e(
        "pm2",
        r#"A[satisfaction(SG):"satisfied upon acquiring S/G for compensation m or below"/{B}]A"#,
    ),
    e(
        "pm3",
        r#"A[preference(IMX):"currently prefers transferring amounts via informational money IMX"/{M_A}]A"#,
    ),
    e(
        "q1",
        r#"A[visit(l_B):(10,"visit B at location l_B to be informed about the specifics of S/G",11)]B"#,
    ),
    e(
        "q2",
        r#"B[receive(l_B):(10,"receive A at location l_B to inform A about the specifics of S/G",11)]A"#,
    ),
    e(
        "q3",
        r#"B[exclusivity(SG):(0,"not deliver S/G to any other agent if that stands in the way of delivery to A",35)]A"#,
    ),
    e(
        "q4",
        r#"B[parking(l_B):"a car driven by A can be parked for free at the site of B" if "A announces arrival at the gate reasonably in advance"]A"#,
    ),
    e(
        "q5",
        r#"B[propose!price(SG):"a price for S/G is fixed during the visit and the offer stands for 10 days"]A"#,
    ),
    e(
        "q6",
        r#"P_A[suggest!car(l_A):"A will use the car of P_A" if "the car is returned in time"]A"#,
    ),
    e(
        "q7",
        r#"A[car-return(l_A):"the car is returned at location l_A at time t+r at the latest"]P_A"#,
    ),
    e(
        "q8",
        r#"P_A[car-ready(l_A):"the car is ready for use at location l_A at time t-s at the latest"]A"#,
    ),
    e(
        "q9",
        r#"A[consult(P_A):"seek the opinion of P_A before promising B to buy S/G against compensation m"]P_A"#,
    ),
    e(
        "q10",
        r#"P_A[support(m):"support A in providing compensation m to B upon delivery of S/G" if "P_A gave a positive opinion"]A"#,
    ),
    e(
        "q11",
        r#"A[transfer(m):"only transfer m to B after adequate delivery of S/G"]P_A"#,
    ),
    e(
        "q12",
        r#"P_A[propose!reachable(phone):"P_A is reachable by phone during the visit of A to B"]A"#,
    ),
    e("q13", r#"A[use(q12):"make use of proposal q12"]P_A"#),
    e(
        "b1",
        r#"PayStation[warn!status(out-of-order):"this pay station is out of order"]A"#,
    ),
    e(
        "b2",
        r#"Qcr1[suggest!exit(barrier):"drive the car in front of the exit barrier and call again"]A"#,
    ),
    e(
        "b3",
        r#"A[propose!check-out(RPPC):"check out the RPPC in the system"]Qcr1"#,
    ),
    e(
        "b4",
        r#"Qcr2[impose!ticket(paper):"take a paper ticket and pay the reduced price with the RPPC on exit"@4]A"#,
    ),
    e(
        "b5",
        r#"Qcr2[predict!cause(checkout):"A exited while the barrier was open and forgot to check out"]A"#,
    ),
];

/// One statement per notational form, from the ground form to fading
/// fragments with bound identities.
pub const STATEMENT_FORMS: &[Entry] = &[
    e("ground", r#"p[pi:"b"]q"#),
    e("scope", r#"p[pi:"b"/{p,q,r}]q"#),
    e("episode", r#"p[pi:(5,"b",8)/{p,q,r}]q"#),
    e("issuing-time", r#"p[u=3,pi:(5,"b",8)/{p,q,r}]q"#),
    e("observation-time", r#"p[w=9/u=3,pi:(5,"b",8)/{p,q,r}]q"#),
    e("subject-fragment", r#"p[w=9,r/u=3,pi:(5,"b",8)/{p,q,r}]q"#),
    e(
        "identified-fragment",
        r#"p[w=9,r(alpha,beta)/u=3,pi:(5,"b",8)/{p,q,r}]q"#,
    ),
    e("bound-identity", r#"p[w=9,r(x)/u=3,pi:(5,"b",8)/{p,q,r}]q"#),
    e(
        "fading",
        r#"p[w=9,r,fade(100,0.05)/u=3,pi:(5,"b",8)/{p,q,r}]q"#,
    ),
    e(
        "fading-identified",
        r#"p[w=9,r(alpha,beta),fade(100,0.05)/u=3,pi:(5,"b",8)/{p,q,r}]q"#,
    ),
    e(
        "fading-bound",
        r#"p[w=9,r(x),fade(50,0.1)/u=3,pi:(5,"b",8)/{p,q,r}]q"#,
    ),
];

/// The parsed corpus, in listing order.
pub fn corpus() -> Vec<Statement> {
    CORPUS
        .iter()
        .map(|entry| parse(entry.text).expect("corpus statements are well-formed"))
        .collect()
}

pub fn lookup(label: &str) -> Option<&'static Entry> {
    CORPUS
        .iter()
        .chain(STATEMENT_FORMS)
        .find(|entry| entry.label == label)
}
