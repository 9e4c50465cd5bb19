//! DIMACS CNF reader and writer.
//!
//! The normalized form is a `p cnf n m` header, an optional `c seed <u64>`
//! comment line directly before it, and one `0`-terminated clause per line.
//! Other comment lines are dropped when parsing.

use std::fmt::Write;

use super::{Clause, KSatInstance, Literal};
use crate::error::{Error, Result};

pub fn emit_dimacs(instance: &KSatInstance) -> String {
    let mut out = String::new();
    if let Some(seed) = instance.seed() {
        writeln!(out, "c seed {seed}").unwrap();
    }
    writeln!(out, "p cnf {} {}", instance.n(), instance.m()).unwrap();
    for clause in instance.clauses() {
        for l in clause.literals() {
            write!(out, "{} ", l.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

pub fn parse_dimacs(text: &str) -> Result<KSatInstance> {
    let mut header: Option<(usize, usize)> = None;
    let mut seed = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut width: Option<usize> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if header.is_none() {
                let mut words = rest.split_whitespace();
                if words.next() == Some("seed") {
                    seed = words.next().and_then(|s| s.parse().ok());
                }
            }
            continue;
        }
        if line.starts_with('%') {
            // SATLIB trailer
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::parse(line_no, "duplicate header"));
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                ["p", "cnf", n, m] => {
                    let n = n
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("bad variable count {n:?}")))?;
                    let m = m
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("bad clause count {m:?}")))?;
                    header = Some((n, m));
                }
                _ => return Err(Error::parse(line_no, format!("malformed header {line:?}"))),
            }
            continue;
        }
        let (n, _) = header.ok_or_else(|| Error::parse(line_no, "clause before header"))?;
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad literal {tok:?}")))?;
            match Literal::from_dimacs(lit) {
                None => {
                    let w = current.len();
                    match width {
                        None => width = Some(w),
                        Some(first) if first != w => {
                            return Err(Error::UnsupportedWidth { first, other: w })
                        }
                        _ => {}
                    }
                    let clause = Clause::new(std::mem::take(&mut current))
                        .map_err(|e| Error::parse(line_no, e.to_string()))?;
                    clauses.push(clause);
                }
                Some(l) if l.variable >= n => {
                    return Err(Error::parse(
                        line_no,
                        format!("literal {lit} out of range for {n} variables"),
                    ))
                }
                Some(l) => current.push(l),
            }
        }
    }

    let (n, m) = header.ok_or_else(|| Error::parse(0, "missing `p cnf` header"))?;
    if !current.is_empty() {
        return Err(Error::parse(0, "last clause is not 0-terminated"));
    }
    if clauses.len() != m {
        return Err(Error::parse(
            0,
            format!("header declares {m} clauses, found {}", clauses.len()),
        ));
    }
    let k = width.ok_or_else(|| Error::parse(0, "no clauses"))?;
    Ok(KSatInstance::new(n, k, clauses)?.with_seed(seed))
}
