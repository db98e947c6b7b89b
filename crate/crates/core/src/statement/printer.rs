//! Canonical printer. Clauses appear in grammar order, the scope is sorted,
//! the default `promise!` kind tag is omitted and the only whitespace is
//! around `if`.

use std::fmt::Write;

use super::{Body, DirectionalKind, Statement};

fn quote(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

fn body(out: &mut String, b: &Body) {
    quote(out, &b.text);
    if let Some(cond) = &b.condition {
        out.push_str(" if ");
        quote(out, cond);
    }
}

/// Canonical text of a statement.
pub fn render(s: &Statement) -> String {
    let mut out = String::new();
    out.push_str(s.promiser.as_str());
    out.push('[');

    let mut frag: Vec<String> = Vec::new();
    if let Some(w) = s.observation_time {
        frag.push(format!("w={w}"));
    }
    if let Some(subject) = &s.subject {
        let mut item = subject.to_string();
        if let Some(id) = &s.identity {
            item.push('(');
            item.push_str(&id.token);
            if let Some(tag) = &id.public_tag {
                item.push(',');
                item.push_str(tag);
            }
            item.push(')');
        }
        frag.push(item);
    }
    if let Some(f) = s.fade {
        frag.push(format!("fade({},{})", f.span(), f.threshold()));
    }
    if !frag.is_empty() {
        out.push_str(&frag.join(","));
        out.push('/');
    }

    if let Some(u) = s.issue_time {
        let _ = write!(out, "u={u},");
    }
    if s.kind != DirectionalKind::Promise {
        out.push_str(s.kind.keyword());
        out.push('!');
    }
    let _ = write!(out, "{}:", s.type_tag);
    match s.window {
        Some(w) => {
            let _ = write!(out, "({},", w.start);
            body(&mut out, &s.body);
            let _ = write!(out, ",{})", w.end);
        }
        None => body(&mut out, &s.body),
    }
    if let Some(strength) = s.strength {
        let _ = write!(out, "@{}", strength.level());
    }
    if !s.scope.is_empty() {
        let names: Vec<&str> = s.scope.iter().map(|a| a.as_str()).collect();
        let _ = write!(out, "/{{{}}}", names.join(","));
    }
    out.push(']');
    out.push_str(s.promisee.as_str());
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn ground_form_prints_minimally() {
        let s = parse(r#"p[pi:"b"]q"#).unwrap();
        assert_eq!(render(&s), r#"p[pi:"b"]q"#);
    }

    #[test]
    fn scope_is_sorted() {
        let s = parse(r#"p[pi:"b"/{r,q,p}]q"#).unwrap();
        assert_eq!(render(&s), r#"p[pi:"b"/{p,q,r}]q"#);
    }

    #[test]
    fn canonicalizes_spacing_and_default_kind() {
        let s = parse(r#" p [ promise! pi : ( 1 , "b"  if "c" , 4 ) ] q"#).unwrap();
        assert_eq!(render(&s), r#"p[pi:(1,"b" if "c",4)]q"#);
        let s = parse(r#"p[w=9,r(k,pub),fade(100,0.050)/u=3,impose!t:"x"@2/{r}]q"#).unwrap();
        assert_eq!(
            render(&s),
            r#"p[w=9,r(k,pub),fade(100,0.05)/u=3,impose!t:"x"@2/{r}]q"#
        );
    }

    #[test]
    fn escapes_quotes() {
        let s = parse(r#"p[pi:"a \"quoted\" \\ word"]q"#).unwrap();
        let text = render(&s);
        assert_eq!(parse(&text).unwrap(), s);
    }
}
