//! Text formats for instances.
//!
//! ```text
//! SETCOVER v1
//! n 3 m 3
//! costs 1 1 2
//! set 1: 1 2
//! set 2: 2 3
//! set 3: 1 2 3
//! ```
//!
//! A batched instance is a `SETCOVER` body followed by `batch <i>: ...` lines.
//! A covering IP uses `CIP v1`, `rows <n> cols <m>`, `costs ...` and
//! `row <i>: <j>:<a_ij> ...`. Identifiers are 1-based on disk.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::instance::{BatchedInstance, CipInstance, SetSystem};

pub const SETCOVER_HEADER: &str = "SETCOVER v1";
pub const CIP_HEADER: &str = "CIP v1";

#[derive(Debug, Clone, PartialEq)]
pub enum AnyInstance {
    SetCover(SetSystem),
    Cip(CipInstance),
    Batched(BatchedInstance),
}

impl AnyInstance {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyInstance::SetCover(_) => "setcover",
            AnyInstance::Cip(_) => "cip",
            AnyInstance::Batched(_) => "batched",
        }
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<AnyInstance> {
    let text = std::fs::read_to_string(path)?;
    parse_instance(&text)
}

pub fn save_instance(instance: &AnyInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_instance(instance))?;
    Ok(())
}

pub fn format_instance(instance: &AnyInstance) -> String {
    match instance {
        AnyInstance::SetCover(sys) => format_set_system(sys),
        AnyInstance::Cip(cip) => format_cip(cip),
        AnyInstance::Batched(b) => format_batched(b),
    }
}

fn push_costs(out: &mut String, costs: &[f64]) {
    out.push_str("costs");
    for c in costs {
        let _ = write!(out, " {c}");
    }
    out.push('\n');
}

pub fn format_set_system(sys: &SetSystem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SETCOVER_HEADER}");
    let _ = writeln!(out, "n {} m {}", sys.n(), sys.m());
    push_costs(&mut out, sys.costs());
    for (j, set) in sys.members().iter().enumerate() {
        let _ = write!(out, "set {}:", j + 1);
        for v in set {
            let _ = write!(out, " {}", v + 1);
        }
        out.push('\n');
    }
    out
}

pub fn format_batched(inst: &BatchedInstance) -> String {
    let mut out = format_set_system(inst.base());
    for (i, batch) in inst.batches().iter().enumerate() {
        let _ = write!(out, "batch {}:", i + 1);
        for v in batch {
            let _ = write!(out, " {}", v + 1);
        }
        out.push('\n');
    }
    out
}

pub fn format_cip(cip: &CipInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CIP_HEADER}");
    let _ = writeln!(out, "rows {} cols {}", cip.n(), cip.m());
    push_costs(&mut out, cip.costs());
    for (i, row) in cip.rows().iter().enumerate() {
        let _ = write!(out, "row {}:", i + 1);
        for &(j, a) in row {
            let _ = write!(out, " {}:{a}", j + 1);
        }
        out.push('\n');
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate().peekable(), last: 0 }
    }

    /// Next non-blank line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let line = line.trim_end_matches('\r');
            if !line.trim().is_empty() {
                return Some((i + 1, line));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let missing_at = self.last + 1;
        self.next().ok_or_else(|| Error::parse(missing_at, format!("unexpected end of file, expected {what}")))
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::parse(line, format!("non-numeric {what} '{tok}'")))
}

/// Parses `<kw1> <a> <kw2> <b>`.
fn parse_dims(line: usize, text: &str, kw1: &str, kw2: &str) -> Result<(usize, usize)> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != kw1 || toks[2] != kw2 {
        return Err(Error::parse(line, format!("expected '{kw1} <int> {kw2} <int>'")));
    }
    Ok((parse_num(toks[1], line, kw1)?, parse_num(toks[3], line, kw2)?))
}

fn parse_costs(line: usize, text: &str, count: usize) -> Result<Vec<f64>> {
    let mut toks = text.split_whitespace();
    if toks.next() != Some("costs") {
        return Err(Error::parse(line, "expected 'costs ...'"));
    }
    let costs: Vec<f64> = toks.map(|t| parse_num(t, line, "cost")).collect::<Result<_>>()?;
    if costs.len() != count {
        return Err(Error::parse(line, format!("expected {count} costs, found {}", costs.len())));
    }
    Ok(costs)
}

/// Splits `<kw> <idx>: rest`, checking the keyword and that idx == expected (1-based).
fn parse_labeled<'a>(line: usize, text: &'a str, kw: &str, expected: usize) -> Result<&'a str> {
    let (head, rest) = text.split_once(':').ok_or_else(|| Error::parse(line, format!("expected '{kw} <id>: ...'")))?;
    let mut toks = head.split_whitespace();
    if toks.next() != Some(kw) {
        return Err(Error::parse(line, format!("expected '{kw} <id>: ...'")));
    }
    let id: usize = parse_num(toks.next().unwrap_or(""), line, "id")?;
    if toks.next().is_some() {
        return Err(Error::parse(line, "trailing tokens before ':'"));
    }
    if id != expected {
        return Err(Error::parse(line, format!("expected {kw} {expected}, found {kw} {id}")));
    }
    Ok(rest)
}

fn parse_ids(line: usize, text: &str, bound: usize, what: &str) -> Result<Vec<usize>> {
    let mut ids = Vec::new();
    for tok in text.split_whitespace() {
        let id: usize = parse_num(tok, line, what)?;
        if id == 0 || id > bound {
            return Err(Error::parse(line, format!("{what} id {id} out of range 1..={bound}")));
        }
        ids.push(id - 1);
    }
    Ok(ids)
}

fn check_header(line: usize, text: &str) -> Result<&'static str> {
    let text = text.trim();
    match text {
        SETCOVER_HEADER => Ok(SETCOVER_HEADER),
        CIP_HEADER => Ok(CIP_HEADER),
        _ => {
            let mut toks = text.split_whitespace();
            match (toks.next(), toks.next()) {
                (Some("SETCOVER" | "CIP"), Some(_)) => Err(Error::UnsupportedVersion(text.to_string())),
                _ => Err(Error::parse(line, format!("malformed header '{text}'"))),
            }
        }
    }
}

/// Parses any of the three formats. Membership and batch lists are
/// canonicalized (sorted, deduplicated); coverability is left to
/// [`crate::instance::Validate`].
pub fn parse_instance(text: &str) -> Result<AnyInstance> {
    let mut lines = Lines::new(text);
    let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file: missing header"))?;
    match check_header(hl, header)? {
        SETCOVER_HEADER => parse_setcover_body(&mut lines),
        _ => parse_cip_body(&mut lines),
    }
}

fn parse_setcover_body(lines: &mut Lines<'_>) -> Result<AnyInstance> {
    let (l, text) = lines.expect("'n <n> m <m>'")?;
    let (n, m) = parse_dims(l, text, "n", "m")?;
    let (l, text) = lines.expect("'costs ...'")?;
    let costs = parse_costs(l, text, m)?;
    let mut members = Vec::with_capacity(m);
    for j in 1..=m {
        let (l, text) = lines.expect("'set <j>: ...'")?;
        let mut ids = parse_ids(l, parse_labeled(l, text, "set", j)?, n, "element")?;
        ids.sort_unstable();
        ids.dedup();
        members.push(ids);
    }
    let sys = SetSystem::new_unchecked(n, members, costs);
    let mut batches = Vec::new();
    while let Some((l, text)) = lines.next() {
        let mut ids = parse_ids(l, parse_labeled(l, text, "batch", batches.len() + 1)?, n, "element")?;
        ids.sort_unstable();
        ids.dedup();
        batches.push(ids);
    }
    if batches.is_empty() {
        return Ok(AnyInstance::SetCover(sys));
    }
    let inst = BatchedInstance::new_unchecked(sys, batches);
    let mut seen = vec![false; n];
    for b in inst.batches() {
        for &v in b {
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::parse(lines.last, format!("element {} is in two batches", v + 1)));
            }
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(Error::parse(lines.last, format!("batches do not cover element {}", v + 1)));
    }
    Ok(AnyInstance::Batched(inst))
}

fn parse_cip_body(lines: &mut Lines<'_>) -> Result<AnyInstance> {
    let (l, text) = lines.expect("'rows <n> cols <m>'")?;
    let (n, m) = parse_dims(l, text, "rows", "cols")?;
    let (l, text) = lines.expect("'costs ...'")?;
    let costs = parse_costs(l, text, m)?;
    let mut rows = Vec::with_capacity(n);
    for i in 1..=n {
        let (l, text) = lines.expect("'row <i>: ...'")?;
        let body = parse_labeled(l, text, "row", i)?;
        let mut row = Vec::new();
        for tok in body.split_whitespace() {
            let (j, a) = tok
                .split_once(':')
                .ok_or_else(|| Error::parse(l, format!("expected '<col>:<coef>', found '{tok}'")))?;
            let j: usize = parse_num(j, l, "column")?;
            if j == 0 || j > m {
                return Err(Error::parse(l, format!("column id {j} out of range 1..={m}")));
            }
            let a: f64 = parse_num(a, l, "coefficient")?;
            row.push((j - 1, a));
        }
        row.sort_by_key(|&(j, _)| j);
        if row.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::parse(l, "duplicate column in row"));
        }
        rows.push(row);
    }
    if let Some((l, _)) = lines.next() {
        return Err(Error::parse(l, "unexpected trailing content"));
    }
    Ok(AnyInstance::Cip(CipInstance::new_unchecked(m, rows, costs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::t1;
    use proptest::prelude::*;

    const T1_TEXT: &str = "SETCOVER v1\nn 3 m 3\ncosts 1 1 2\nset 1: 1 2\nset 2: 2 3\nset 3: 1 2 3\n";

    #[test]
    fn t1_text_round_trip() {
        assert_eq!(format_set_system(&t1()), T1_TEXT);
        assert_eq!(parse_instance(T1_TEXT).unwrap(), AnyInstance::SetCover(t1()));
    }

    #[test]
    fn version_gate() {
        let text = T1_TEXT.replace("v1", "v2");
        assert!(matches!(parse_instance(&text), Err(Error::UnsupportedVersion(_))));
    }

    #[test]
    fn empty_file_fails_at_line_one() {
        assert!(matches!(parse_instance(""), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_cost = T1_TEXT.replace("costs 1 1 2", "costs 1 x 2");
        assert!(matches!(parse_instance(&bad_cost), Err(Error::Parse { line: 3, .. })));
        let bad_id = T1_TEXT.replace("set 2: 2 3", "set 2: 2 4");
        assert!(matches!(parse_instance(&bad_id), Err(Error::Parse { line: 5, .. })));
        let bad_dims = T1_TEXT.replace("n 3 m 3", "n three m 3");
        assert!(matches!(parse_instance(&bad_dims), Err(Error::Parse { line: 2, .. })));
        let bad_header = T1_TEXT.replace("SETCOVER v1", "SETCOVERv1");
        assert!(matches!(parse_instance(&bad_header), Err(Error::Parse { line: 1, .. })));
        let truncated = "SETCOVER v1\nn 3 m 3\ncosts 1 1 2\nset 1: 1 2\n";
        assert!(matches!(parse_instance(truncated), Err(Error::Parse { line: 5, .. })));
    }

    #[test]
    fn members_are_canonicalized() {
        let text = T1_TEXT.replace("set 3: 1 2 3", "set 3: 3 1 2 2");
        assert_eq!(parse_instance(&text).unwrap(), AnyInstance::SetCover(t1()));
    }

    #[test]
    fn batched_round_trip() {
        let text = format!("{T1_TEXT}batch 1: 1 3\nbatch 2: 2\n");
        let parsed = parse_instance(&text).unwrap();
        match &parsed {
            AnyInstance::Batched(b) => {
                assert_eq!(b.batches(), &[vec![0, 2], vec![1]]);
                assert_eq!(b.b(), 2);
                assert_eq!(b.s(), None);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(format_instance(&parsed), text);
        let overlapping = format!("{T1_TEXT}batch 1: 1 2\nbatch 2: 2 3\n");
        assert!(parse_instance(&overlapping).is_err());
    }

    #[test]
    fn cip_round_trip() {
        let text = "CIP v1\nrows 2 cols 2\ncosts 1 4\nrow 1: 1:0.5 2:1\nrow 2: 2:0.25\n";
        let parsed = parse_instance(text).unwrap();
        match &parsed {
            AnyInstance::Cip(c) => {
                assert_eq!(c.row(0), &[(0, 0.5), (1, 1.0)]);
                assert_eq!(c.costs(), &[1.0, 4.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(format_instance(&parsed), text);
        let bad = text.replace("2:0.25", "3:0.25");
        assert!(matches!(parse_instance(&bad), Err(Error::Parse { line: 5, .. })));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t1.sc");
        save_instance(&AnyInstance::SetCover(t1()), &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), T1_TEXT);
        assert_eq!(load_instance(&path).unwrap(), AnyInstance::SetCover(t1()));
    }

    proptest! {
        #[test]
        fn save_load_is_identity(
            n in 1usize..15,
            raw in proptest::collection::vec(
                (proptest::collection::btree_set(0usize..15, 0..8), 0.01f64..1e4), 1..8),
        ) {
            let mut members: Vec<Vec<usize>> = raw
                .iter()
                .map(|(s, _)| s.iter().copied().filter(|&v| v < n).collect())
                .collect();
            members[0] = (0..n).collect();
            let costs = raw.iter().map(|(_, c)| *c).collect();
            let sys = AnyInstance::SetCover(SetSystem::new(n, members, costs).unwrap());
            let text = format_instance(&sys);
            let back = parse_instance(&text).unwrap();
            prop_assert_eq!(&back, &sys);
            prop_assert_eq!(format_instance(&back), text);
        }
    }
}
