//! Line-oriented text formats shared by the file readers and writers.
//!
//! Blank lines and lines starting with `#` are ignored. Tensors are written as
//! a `tensor ...` header line followed by one coefficient line.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::partitions::IntPartition;
use crate::tensors::MultiTensor;

pub struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Lines { lines, pos: 0 }
    }

    pub fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).map(|(_, l)| *l)
    }

    pub fn peek_keyword(&self) -> Option<&'a str> {
        self.peek().and_then(|l| l.split_whitespace().next())
    }

    pub fn line_no(&self) -> usize {
        self.lines.get(self.pos).map(|(n, _)| *n).unwrap_or_else(|| self.lines.last().map(|(n, _)| n + 1).unwrap_or(1))
    }

    pub fn next_line(&mut self) -> Result<&'a str> {
        let l = self.peek().ok_or_else(|| self.error("unexpected end of input"))?;
        self.pos += 1;
        Ok(l)
    }

    pub fn is_done(&self) -> bool {
        self.pos >= self.lines.len()
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line_no(), msg: msg.into() }
    }

    /// Consumes a line starting with `keyword` and returns the remaining words.
    pub fn expect(&mut self, keyword: &str) -> Result<Vec<&'a str>> {
        let line_no = self.line_no();
        let l = self.next_line()?;
        let mut words = l.split_whitespace();
        if words.next() != Some(keyword) {
            return Err(Error::Parse { line: line_no, msg: format!("expected `{keyword}`, found {l:?}") });
        }
        Ok(words.collect())
    }

    pub fn tensor(&mut self) -> Result<MultiTensor> {
        let line_no = self.line_no();
        let header = self.next_line()?;
        let body = self.next_line()?;
        MultiTensor::parse_block(header, body).map_err(|e| relocate(e, line_no))
    }

    /// Reads `component <p>` blocks until a line with another keyword.
    pub fn components(&mut self) -> Result<BTreeMap<IntPartition, MultiTensor>> {
        let mut out = BTreeMap::new();
        while self.peek_keyword() == Some("component") {
            let line_no = self.line_no();
            let words = self.expect("component")?;
            let key = words.first().ok_or_else(|| Error::Parse { line: line_no, msg: "component key missing".into() })?;
            let p = IntPartition::parse(key).map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?;
            let t = self.tensor()?;
            if out.insert(p, t).is_some() {
                return Err(Error::Parse { line: line_no, msg: format!("duplicate component {key}") });
            }
        }
        Ok(out)
    }
}

pub fn relocate(e: Error, line: usize) -> Error {
    match e {
        Error::Parse { msg, .. } => Error::Parse { line, msg },
        other => Error::Parse { line, msg: other.to_string() },
    }
}

pub fn parse_usize(lines: &Lines<'_>, s: &str) -> Result<usize> {
    s.parse().map_err(|_| lines.error(format!("expected a nonnegative integer, found {s:?}")))
}

/// Parses `key=v1,v2,...` (or `key=-` for the empty list).
pub fn parse_list_field(lines: &Lines<'_>, word: &str, key: &str) -> Result<Vec<usize>> {
    let v = word
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| lines.error(format!("expected `{key}=...`, found {word:?}")))?;
    if v == "-" {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| parse_usize(lines, x)).collect()
}

pub fn format_list(v: &[usize]) -> String {
    if v.is_empty() {
        "-".into()
    } else {
        v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    }
}

pub fn write_components(out: &mut String, comps: &BTreeMap<IntPartition, MultiTensor>) {
    for (p, t) in comps {
        let _ = writeln!(out, "component {p}");
        let _ = writeln!(out, "{t}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensors::int;

    #[test]
    fn components_round_trip_and_line_numbers() {
        let mut comps = BTreeMap::new();
        comps.insert(IntPartition::single(1), MultiTensor::identity(1, 2));
        comps.insert(IntPartition::new(vec![1, 1]).unwrap(), MultiTensor::identity(1, 1).scale(&int(0)));
        let mut text = String::from("# header\n");
        write_components(&mut text, &comps);
        let mut lines = Lines::new(&text);
        assert_eq!(lines.components().unwrap(), comps);
        assert!(lines.is_done());

        let bad = "component 1\ntensor degrees=1 dims=1 out=1\nx\n";
        match Lines::new(bad).components() {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
