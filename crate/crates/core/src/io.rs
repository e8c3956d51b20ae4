//! Text formats for instances, matrices and lotteries, plus a flat
//! key/value rendering for scripts.
//!
//! Instance file:
//!
//! ```text
//! # comments and blank lines are ignored
//! n 3
//! objects: a b c
//! agent 1: a b c
//! agent 2: b c a
//! agent 3: c a b
//! ```
//!
//! Matrix file: `n` lines of `n` exact rationals (`1/3`, `0.4`, `1`).
//! Lottery file: one `weight : object-of-agent-1 ... object-of-agent-n` line
//! per support entry.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Precondition, Result};
use crate::instance::{DeterministicAssignment, Instance};
use crate::lottery::{EnvyMatrix, Lottery};
use crate::matrix::{check_square, validate_matrix, AssignmentMatrix};
use crate::scalar::Scalar;

/// An instance together with the object names it was written with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedInstance {
    pub instance: Instance,
    pub objects: Vec<String>,
}

impl NamedInstance {
    /// Names objects `a`, `b`, ... (or `o1`, `o2`, ... beyond 26).
    pub fn with_default_names(instance: Instance) -> Self {
        let objects = default_names(instance.n());
        NamedInstance { instance, objects }
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == name)
    }
}

pub fn default_names(n: usize) -> Vec<String> {
    if n <= 26 {
        (0..n).map(|k| ((b'a' + k as u8) as char).to_string()).collect()
    } else {
        (1..=n).map(|k| format!("o{k}")).collect()
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

/// Non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            None
        } else {
            Some((k + 1, body))
        }
    })
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..k]));
            }
        } else if start.is_none() {
            start = Some(k);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn column_of(line: &str, needle: &str) -> usize {
    line.find(needle).map_or(1, |k| k + 1)
}

pub fn parse_instance(text: &str) -> Result<NamedInstance> {
    let mut lines = content_lines(text);
    let eof = || parse_err(text.lines().count().max(1), 1, "unexpected end of input");

    let (ln, line) = lines.next().ok_or_else(eof)?;
    let toks = tokens(line);
    let n = match toks.as_slice() {
        [(_, "n"), (col, count)] => count
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| parse_err(ln, *col, format!("expected a positive count, found '{count}'")))?,
        _ => return Err(parse_err(ln, 1, "expected 'n <count>'")),
    };

    let (ln, line) = lines.next().ok_or_else(eof)?;
    let rest = line
        .trim_start()
        .strip_prefix("objects:")
        .ok_or_else(|| parse_err(ln, column_of(line, line.trim_start()), "expected 'objects: <names>'"))?;
    let offset = line.len() - rest.len();
    let mut objects = Vec::with_capacity(n);
    for (col, name) in tokens(rest) {
        if objects.iter().any(|o: &String| o == name) {
            return Err(parse_err(ln, offset + col, format!("duplicate object '{name}'")));
        }
        objects.push(name.to_string());
    }
    if objects.len() != n {
        return Err(parse_err(ln, 1, format!("expected {n} objects, found {}", objects.len())));
    }
    let index: HashMap<&str, usize> = objects.iter().enumerate().map(|(k, o)| (o.as_str(), k)).collect();

    let mut prefs: Vec<Option<Vec<usize>>> = vec![None; n];
    for (ln, line) in lines {
        let (head, rest) = line
            .split_once(':')
            .ok_or_else(|| parse_err(ln, 1, "expected 'agent <i>: <objects>'"))?;
        let head_toks = tokens(head);
        let agent = match head_toks.as_slice() {
            [(_, "agent"), (col, i)] => match i.parse::<usize>() {
                Ok(i) if (1..=n).contains(&i) => i - 1,
                _ => return Err(parse_err(ln, *col, format!("agent number must be in 1..={n}"))),
            },
            _ => return Err(parse_err(ln, 1, "expected 'agent <i>: <objects>'")),
        };
        if prefs[agent].is_some() {
            return Err(parse_err(ln, 1, format!("agent {} listed twice", agent + 1)));
        }
        let offset = head.len() + 1;
        let mut list = Vec::with_capacity(n);
        for (col, name) in tokens(rest) {
            let o = *index
                .get(name)
                .ok_or_else(|| parse_err(ln, offset + col, format!("unknown object '{name}'")))?;
            if list.contains(&o) {
                return Err(parse_err(ln, offset + col, format!("object '{name}' repeated")));
            }
            list.push(o);
        }
        if list.len() != n {
            return Err(parse_err(ln, offset + 1, format!("expected {n} objects, found {}", list.len())));
        }
        prefs[agent] = Some(list);
    }
    let last = text.lines().count().max(1);
    let prefs = prefs
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| parse_err(last, 1, format!("missing preferences for agent {}", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    let instance = Instance::new(prefs)?;
    Ok(NamedInstance { instance, objects })
}

pub fn render_instance(named: &NamedInstance) -> String {
    let mut out = String::new();
    writeln!(out, "n {}", named.instance.n()).unwrap();
    writeln!(out, "objects: {}", named.objects.join(" ")).unwrap();
    for (i, p) in named.instance.preferences().iter().enumerate() {
        let names: Vec<&str> = p.iter().map(|&o| named.objects[o].as_str()).collect();
        writeln!(out, "agent {}: {}", i + 1, names.join(" ")).unwrap();
    }
    out
}

/// Parses a square grid of exact rationals without checking bistochasticity.
pub fn parse_matrix_rows<T: Scalar>(text: &str) -> Result<Vec<Vec<T>>> {
    let mut rows = Vec::new();
    let mut width = None;
    for (ln, line) in content_lines(text) {
        let toks = tokens(line);
        match width {
            None => width = Some(toks.len()),
            Some(w) if w != toks.len() => {
                return Err(parse_err(ln, 1, format!("expected {w} entries, found {}", toks.len())))
            }
            _ => {}
        }
        let row = toks
            .into_iter()
            .map(|(col, t)| {
                T::parse_exact(t).ok_or_else(|| parse_err(ln, col, format!("'{t}' is not an exact rational")))
            })
            .collect::<Result<Vec<T>>>()?;
        rows.push(row);
    }
    let last = text.lines().count().max(1);
    if rows.is_empty() {
        return Err(parse_err(last, 1, "empty matrix"));
    }
    check_square(&rows).map_err(|d| parse_err(last, 1, format!("matrix is not square: {d}")))?;
    Ok(rows)
}

/// Parses a matrix and requires it to be bistochastic.
pub fn parse_matrix<T: Scalar>(text: &str) -> Result<AssignmentMatrix<T>> {
    let rows = parse_matrix_rows(text)?;
    validate_matrix(&rows).map_err(|_| Error::Precondition(Precondition::Bistochastic))?;
    AssignmentMatrix::new(rows)
}

pub fn render_matrix<T: Scalar>(m: &AssignmentMatrix<T>) -> String {
    m.to_string()
}

pub fn parse_lottery<T: Scalar>(text: &str, objects: &[String]) -> Result<Lottery<T>> {
    let n = objects.len();
    let index: HashMap<&str, usize> = objects.iter().enumerate().map(|(k, o)| (o.as_str(), k)).collect();
    let mut entries = Vec::new();
    let mut last = 1;
    for (ln, line) in content_lines(text) {
        last = ln;
        let (w, rest) = line
            .split_once(':')
            .ok_or_else(|| parse_err(ln, 1, "expected 'weight : objects'"))?;
        let wt = w.trim();
        let weight = T::parse_exact(wt)
            .ok_or_else(|| parse_err(ln, column_of(line, wt), format!("'{wt}' is not an exact rational")))?;
        if weight.is_negative() {
            return Err(parse_err(ln, column_of(line, wt), "negative weight"));
        }
        let offset = w.len() + 1;
        let mut assignment = Vec::with_capacity(n);
        for (col, name) in tokens(rest) {
            let o = *index
                .get(name)
                .ok_or_else(|| parse_err(ln, offset + col, format!("unknown object '{name}'")))?;
            if assignment.contains(&o) {
                return Err(parse_err(ln, offset + col, format!("object '{name}' assigned twice")));
            }
            assignment.push(o);
        }
        if assignment.len() != n {
            return Err(parse_err(ln, offset + 1, format!("expected {n} objects, found {}", assignment.len())));
        }
        entries.push((DeterministicAssignment::new(assignment)?, weight));
    }
    if entries.is_empty() {
        return Err(parse_err(last, 1, "empty lottery"));
    }
    Lottery::new(entries).map_err(|e| match e {
        Error::Argument(msg) => parse_err(last, 1, msg),
        other => other,
    })
}

pub fn render_lottery<T: Scalar>(l: &Lottery<T>, objects: &[String]) -> String {
    let mut out = String::new();
    for (a, w) in l.support() {
        let names: Vec<&str> = a.as_slice().iter().map(|&o| objects[o].as_str()).collect();
        writeln!(out, "{w} : {}", names.join(" ")).unwrap();
    }
    out
}

pub fn render_envy<T: Scalar>(e: &EnvyMatrix<T>) -> String {
    e.to_string()
}

/// Ordered `key=value` lines with stable field names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Structured {
    fields: Vec<(String, String)>,
}

impl Structured {
    pub fn new(kind: &str) -> Self {
        let mut s = Structured::default();
        s.push("kind", kind);
        s
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    pub fn push_matrix<T: Scalar>(&mut self, key: &str, rows: &[Vec<T>]) -> &mut Self {
        self.push(format!("{key}.n"), rows.len());
        for (i, row) in rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            self.push(format!("{key}[{i}]"), cells.join(" "));
        }
        self
    }

    pub fn push_lottery<T: Scalar>(&mut self, key: &str, l: &Lottery<T>, objects: &[String]) -> &mut Self {
        self.push(format!("{key}.len"), l.len());
        for (k, (a, w)) in l.support().iter().enumerate() {
            let names: Vec<&str> = a.as_slice().iter().map(|&o| objects[o].as_str()).collect();
            self.push(format!("{key}[{k}].weight"), w);
            self.push(format!("{key}[{k}].assignment"), names.join(" "));
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn fields(&self) -> &[(String, String)] {
        &self.fields
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            writeln!(out, "{k}={v}").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Structured::default();
        for (ln, line) in content_lines(text) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(ln, 1, "expected 'key=value'"))?;
            s.push(k.trim(), v.trim());
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    const EXAMPLE: &str = "# three agents\nn 3\nobjects: a b c\n\nagent 1: a b c\nagent 2: b c a\nagent 3: c a b\n";

    #[test]
    fn parses_instance() {
        let named = parse_instance(EXAMPLE).unwrap();
        assert_eq!(named.instance.preferences(), &[vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]);
        assert_eq!(parse_instance(&render_instance(&named)).unwrap(), named);
    }

    #[test]
    fn agents_may_appear_out_of_order() {
        let text = "n 2\nobjects: x y\nagent 2: y x\nagent 1: x y\n";
        let named = parse_instance(text).unwrap();
        assert_eq!(named.instance.preferences(), &[vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn instance_errors_carry_positions() {
        let bad = "n 3\nobjects: a b c\nagent 1: a b d\nagent 2: a b c\nagent 3: a b c\n";
        assert_eq!(
            parse_instance(bad).unwrap_err(),
            Error::Parse { line: 3, column: 14, message: "unknown object 'd'".into() }
        );
        let missing = "n 2\nobjects: a b\nagent 1: a b\n";
        assert!(matches!(parse_instance(missing), Err(Error::Parse { .. })));
        let count = "n x\n";
        assert!(matches!(parse_instance(count), Err(Error::Parse { line: 1, column: 3, .. })));
        let repeated = "n 2\nobjects: a a\n";
        assert!(matches!(parse_instance(repeated), Err(Error::Parse { line: 2, column: 12, .. })));
    }

    #[test]
    fn parses_matrix_exactly() {
        let m: AssignmentMatrix<Rational> = parse_matrix("0.4 0.6\n3/5 2/5\n").unwrap();
        assert_eq!(m.get(0, 0), &Rational::from_frac(2, 5));
        assert_eq!(parse_matrix::<Rational>(&render_matrix(&m)).unwrap(), m);
        assert!(matches!(
            parse_matrix::<Rational>("1 0\n0 x\n"),
            Err(Error::Parse { line: 2, column: 3, .. })
        ));
        assert_eq!(
            parse_matrix::<Rational>("1 1\n0 0\n").unwrap_err(),
            Error::Precondition(Precondition::Bistochastic)
        );
        assert!(matches!(parse_matrix::<Rational>("1 0\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn parses_lottery() {
        let names = default_names(3);
        let text = "1/2 : a b c\n1/2 : c a b\n";
        let l: Lottery<Rational> = parse_lottery(text, &names).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(parse_lottery::<Rational>(&render_lottery(&l, &names), &names).unwrap(), l);
        assert!(matches!(
            parse_lottery::<Rational>("1/2 : a b c\n", &names),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_lottery::<Rational>("1 : a a c\n", &names),
            Err(Error::Parse { line: 1, column: 7, .. })
        ));
    }

    #[test]
    fn structured_round_trip() {
        let mut s = Structured::new("matrix");
        s.push_matrix("row", &[vec![Rational::from_frac(1, 2)]]);
        s.push("verdict", true);
        let text = s.render();
        assert!(text.contains("kind=matrix\n"));
        assert!(text.contains("row[0]=1/2\n"));
        assert_eq!(Structured::parse(&text).unwrap(), s);
    }
}
