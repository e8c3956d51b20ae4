#![allow(dead_code)]

use randassign::{DeterministicAssignment, Instance, Lottery, Matrix, Rational, Scalar};

pub fn q(s: &str) -> Rational {
    Rational::parse_exact(s).unwrap_or_else(|| panic!("bad rational {s}"))
}

fn letter(c: char) -> usize {
    (c as u8 - b'a') as usize
}

/// `&["abc", "acb"]`: agent `i` ranks the letters of entry `i` best first.
pub fn inst(prefs: &[&str]) -> Instance {
    Instance::new(prefs.iter().map(|p| p.chars().map(letter).collect()).collect()).unwrap()
}

pub fn mat(rows: &[&str]) -> Matrix {
    Matrix::new(rows.iter().map(|r| r.split_whitespace().map(q).collect()).collect()).unwrap()
}

/// `"bac"`: agent 1 gets b, agent 2 gets a, agent 3 gets c.
pub fn asg(s: &str) -> DeterministicAssignment {
    DeterministicAssignment::new(s.chars().map(letter).collect()).unwrap()
}

pub fn lot(entries: &[(&str, &str)]) -> Lottery<Rational> {
    Lottery::new(entries.iter().map(|(w, a)| (asg(a), q(w)))).unwrap()
}

pub fn ex1() -> Instance {
    inst(&["abc", "abc", "abc"])
}

pub fn ex1_cyclic() -> Lottery<Rational> {
    lot(&[("1/3", "abc"), ("1/3", "bca"), ("1/3", "cab")])
}

pub fn ex2() -> (Instance, Matrix) {
    (inst(&["abc", "acb", "cab"]), mat(&["0 1 0", "0.9 0 0.1", "0.1 0 0.9"]))
}

pub fn ex3() -> (Instance, Lottery<Rational>, Matrix) {
    (
        inst(&["abc", "bca", "cab"]),
        lot(&[("0.5", "abc"), ("0.5", "cab")]),
        mat(&["0.5 0 0.5", "0.5 0.5 0", "0 0.5 0.5"]),
    )
}

pub fn ex4() -> (Instance, Matrix, Lottery<Rational>) {
    (
        inst(&["abcd", "abcd", "acbd", "cabd"]),
        mat(&["1/3 5/12 0 1/4", "1/3 5/12 0 1/4", "1/3 1/12 1/3 1/4", "0 1/12 2/3 1/4"]),
        lot(&[
            ("1/12", "abcd"),
            ("1/12", "adbc"),
            ("1/12", "badc"),
            ("1/12", "dacb"),
            ("1/6", "abdc"),
            ("1/6", "bacd"),
            ("1/6", "bdac"),
            ("1/6", "dbac"),
        ]),
    )
}

/// Serial dictatorship outcomes for every agent order (1-indexed order,
/// object of agents 1..4), grouped by reversal.
pub const EX4_TABLE: [(&str, &str); 24] = [
    ("1234", "abcd"),
    ("4321", "dbac"),
    ("2134", "bacd"),
    ("4312", "bdac"),
    ("1243", "abdc"),
    ("3421", "dbac"),
    ("2143", "badc"),
    ("3412", "bdac"),
    ("1324", "abcd"),
    ("4231", "dabc"),
    ("2314", "bacd"),
    ("4132", "adbc"),
    ("1342", "adcb"),
    ("2431", "dabc"),
    ("2341", "dacb"),
    ("1432", "adbc"),
    ("1423", "abdc"),
    ("3241", "dbac"),
    ("2413", "badc"),
    ("3142", "bdac"),
    ("3124", "bcad"),
    ("4213", "badc"),
    ("3214", "cbad"),
    ("4123", "abdc"),
];

pub fn ex5() -> (Instance, Matrix) {
    (
        inst(&["abcd", "abcd", "abcd", "bcda"]),
        mat(&["1/3 1/6 1/4 1/4", "1/3 1/6 1/4 1/4", "1/3 1/6 1/4 1/4", "0 1/2 1/4 1/4"]),
    )
}

pub fn ex5_q_sequence() -> Vec<DeterministicAssignment> {
    vec![asg("acdb"), asg("abcd"), asg("abdc")]
}

pub fn ex6() -> (Instance, Matrix, Lottery<Rational>) {
    (
        inst(&["abc", "abc", "cab"]),
        mat(&["0.4 0.4 0.2", "0.5 0.4 0.1", "0.1 0.2 0.7"]),
        lot(&[("0.4", "abc"), ("0.3", "bac"), ("0.1", "bca"), ("0.2", "cab")]),
    )
}

pub fn ex7() -> (Instance, Matrix) {
    (
        inst(&["abcd", "abdc", "abdc", "abdc"]),
        mat(&["0 0 1 0", "1/3 1/3 0 1/3", "1/3 1/3 0 1/3", "1/3 1/3 0 1/3"]),
    )
}
