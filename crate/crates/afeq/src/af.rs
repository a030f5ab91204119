//! Framework data model and text formats.
//!
//! Arguments are non-empty names over `[A-Za-z0-9_]`. A [`Framework`] stores
//! an ordered set of arguments and an ordered set of attack pairs, so every
//! iteration over a framework is deterministic and lexicographic.
//!
//! Two text formats are supported:
//!
//! - TGF: one argument name per line, a separator line containing exactly
//!   `#`, then one `attacker target` pair per line (whitespace separated).
//! - APX: facts `arg(NAME).` and `att(A,B).`; `%` starts a comment that runs
//!   to the end of the line; whitespace and blank lines are ignored, and
//!   several facts may share a line.
//!
//! Names starting with the reserved prefix `__z_` are rejected by the
//! parsers; that prefix is used by [`Framework::add_zero_attackers`] to
//! synthesize guaranteed-fresh attacker nodes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Ordered set of argument names.
pub type ArgumentSet = BTreeSet<String>;

/// Name prefix reserved for synthesized zero-attacker nodes.
pub const ZERO_PREFIX: &str = "__z_";

/// Acceptance status of one argument in a labelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    In,
    Out,
    Und,
}

/// Total assignment of labels to arguments.
pub type Labelling = BTreeMap<String, Label>;

/// Text formats for plain frameworks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Tgf,
    Apx,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Format::Tgf => write!(f, "tgf"),
            Format::Apx => write!(f, "apx"),
        }
    }
}

/// Errors from reading framework text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: attack references undeclared argument `{name}`")]
    UndeclaredArgument { line: usize, name: String },
    #[error("line {line}: duplicate declaration of argument `{name}`")]
    DuplicateDeclaration { line: usize, name: String },
    #[error("line {line}: argument name `{name}` uses a reserved prefix")]
    ReservedName { line: usize, name: String },
}

/// Errors from framework operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AfError {
    #[error("unknown argument `{0}`")]
    UnknownArgument(String),
    #[error("invalid argument name `{0}`: names are non-empty over [A-Za-z0-9_]")]
    InvalidName(String),
    #[error("argument `{0}` collides with a reserved generated name")]
    NameCollision(String),
}

pub(crate) fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// A finite attack graph: arguments plus directed attacks between them.
///
/// Invariants kept by construction: every attack endpoint is a declared
/// argument, names are valid, and self-attacks are permitted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Framework {
    args: ArgumentSet,
    attacks: BTreeSet<(String, String)>,
}

impl Framework {
    /// The empty framework.
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a framework from argument names and attack pairs.
    pub fn from_parts<A, T>(args: A, attacks: T) -> Result<Self, AfError>
    where
        A: IntoIterator,
        A::Item: Into<String>,
        T: IntoIterator<Item = (String, String)>,
    {
        let mut arg_set = ArgumentSet::new();
        for a in args {
            let a = a.into();
            if !valid_name(&a) {
                return Err(AfError::InvalidName(a));
            }
            arg_set.insert(a);
        }
        let mut attack_set = BTreeSet::new();
        for (src, dst) in attacks {
            if !arg_set.contains(&src) {
                return Err(AfError::UnknownArgument(src));
            }
            if !arg_set.contains(&dst) {
                return Err(AfError::UnknownArgument(dst));
            }
            attack_set.insert((src, dst));
        }
        Ok(Framework {
            args: arg_set,
            attacks: attack_set,
        })
    }

    pub fn args(&self) -> &ArgumentSet {
        &self.args
    }

    pub fn attacks(&self) -> &BTreeSet<(String, String)> {
        &self.attacks
    }

    pub fn contains(&self, name: &str) -> bool {
        self.args.contains(name)
    }

    pub fn has_attack(&self, src: &str, dst: &str) -> bool {
        self.attacks.contains(&(src.to_string(), dst.to_string()))
    }

    /// All arguments attacking `x`.
    pub fn attackers_of(&self, x: &str) -> ArgumentSet {
        self.attacks
            .iter()
            .filter(|(_, dst)| dst == x)
            .map(|(src, _)| src.clone())
            .collect()
    }

    /// Attacker sets for every argument, computed in one pass.
    pub fn attacker_map(&self) -> BTreeMap<String, ArgumentSet> {
        let mut map: BTreeMap<String, ArgumentSet> = self
            .args
            .iter()
            .map(|a| (a.clone(), ArgumentSet::new()))
            .collect();
        for (src, dst) in &self.attacks {
            map.get_mut(dst).unwrap().insert(src.clone());
        }
        map
    }

    /// Reads a framework from text in the given format.
    pub fn parse(text: &str, format: Format) -> Result<Self, ParseError> {
        match format {
            Format::Tgf => parse_tgf(text),
            Format::Apx => parse_apx(text),
        }
    }

    /// Writes the framework in the given format; arguments and attacks come
    /// out in lexicographic order, so output is stable across runs.
    pub fn serialize(&self, format: Format) -> String {
        match format {
            Format::Tgf => {
                let mut out = String::new();
                for a in &self.args {
                    out.push_str(a);
                    out.push('\n');
                }
                out.push_str("#\n");
                for (src, dst) in &self.attacks {
                    out.push_str(src);
                    out.push(' ');
                    out.push_str(dst);
                    out.push('\n');
                }
                out
            }
            Format::Apx => {
                let mut out = String::new();
                for a in &self.args {
                    out.push_str("arg(");
                    out.push_str(a);
                    out.push_str(").\n");
                }
                for (src, dst) in &self.attacks {
                    out.push_str("att(");
                    out.push_str(src);
                    out.push(',');
                    out.push_str(dst);
                    out.push_str(").\n");
                }
                out
            }
        }
    }

    /// Sub-framework induced by `keep`: exactly those arguments, and the
    /// attacks with both endpoints inside.
    pub fn restrict(&self, keep: &ArgumentSet) -> Result<Self, AfError> {
        for k in keep {
            if !self.args.contains(k) {
                return Err(AfError::UnknownArgument(k.clone()));
            }
        }
        let attacks = self
            .attacks
            .iter()
            .filter(|(src, dst)| keep.contains(src) && keep.contains(dst))
            .cloned()
            .collect();
        Ok(Framework {
            args: keep.clone(),
            attacks,
        })
    }

    /// Adds one fresh unattacked argument `__z_<x>` per `x` in `targets`,
    /// attacking only `x`. The fresh node forces `x` to 0 under grounded
    /// propagation, which is the graph-level counterpart of clamping `x`'s
    /// equation.
    pub fn add_zero_attackers(&self, targets: &ArgumentSet) -> Result<Self, AfError> {
        let mut out = self.clone();
        for t in targets {
            if !self.args.contains(t) {
                return Err(AfError::UnknownArgument(t.clone()));
            }
            let z = format!("{ZERO_PREFIX}{t}");
            if self.args.contains(&z) {
                return Err(AfError::NameCollision(z));
            }
            out.args.insert(z.clone());
            out.attacks.insert((z, t.clone()));
        }
        Ok(out)
    }

    /// True iff no attack has both endpoints in `s` (self-attacks count).
    pub fn is_conflict_free(&self, s: &ArgumentSet) -> Result<bool, AfError> {
        for m in s {
            if !self.args.contains(m) {
                return Err(AfError::UnknownArgument(m.clone()));
            }
        }
        Ok(!self
            .attacks
            .iter()
            .any(|(src, dst)| s.contains(src) && s.contains(dst)))
    }

    /// All inclusion-maximal conflict-free sets, in lexicographic order.
    ///
    /// These are the maximal independent sets of the symmetrized attack
    /// graph once self-attackers are removed; self-attackers can never be in
    /// a conflict-free set, so excluding them keeps maximality intact.
    /// Enumeration is Bron-Kerbosch with pivoting on the complement graph.
    pub fn maximal_conflict_free_sets(&self) -> Vec<ArgumentSet> {
        let self_attackers: ArgumentSet = self
            .args
            .iter()
            .filter(|a| self.has_attack(a, a))
            .cloned()
            .collect();
        let ground: Vec<String> = self
            .args
            .iter()
            .filter(|a| !self_attackers.contains(*a))
            .cloned()
            .collect();
        let index: BTreeMap<&str, usize> = ground
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_str(), i))
            .collect();
        let n = ground.len();
        // conflict[i] holds the symmetrized neighbours of ground[i]
        let mut conflict = vec![vec![false; n]; n];
        for (src, dst) in &self.attacks {
            if let (Some(&i), Some(&j)) = (index.get(src.as_str()), index.get(dst.as_str())) {
                if i != j {
                    conflict[i][j] = true;
                    conflict[j][i] = true;
                }
            }
        }
        // independent sets in `conflict` = cliques in its complement
        let compat = |i: usize, j: usize| i != j && !conflict[i][j];
        let mut found: Vec<Vec<usize>> = Vec::new();
        let mut r: Vec<usize> = Vec::new();
        let p: Vec<usize> = (0..n).collect();
        let x: Vec<usize> = Vec::new();
        bron_kerbosch(&compat, &mut r, p, x, &mut found);
        let mut out: Vec<ArgumentSet> = found
            .into_iter()
            .map(|members| members.into_iter().map(|i| ground[i].clone()).collect())
            .collect();
        out.sort();
        out
    }
}

fn bron_kerbosch(
    compat: &dyn Fn(usize, usize) -> bool,
    r: &mut Vec<usize>,
    p: Vec<usize>,
    x: Vec<usize>,
    found: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        found.push(r.clone());
        return;
    }
    // pivot with the most candidate neighbours shrinks the branching set
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&v| compat(u, v)).count())
        .unwrap();
    let branch: Vec<usize> = p.iter().copied().filter(|&v| !compat(pivot, v)).collect();
    let mut p = p;
    let mut x = x;
    for v in branch {
        r.push(v);
        let p_next: Vec<usize> = p.iter().copied().filter(|&w| compat(v, w)).collect();
        let x_next: Vec<usize> = x.iter().copied().filter(|&w| compat(v, w)).collect();
        bron_kerbosch(compat, r, p_next, x_next, found);
        r.pop();
        p.retain(|&w| w != v);
        x.push(v);
    }
}

fn check_new_name(name: &str, line: usize, args: &ArgumentSet) -> Result<(), ParseError> {
    if !valid_name(name) {
        return Err(ParseError::Syntax {
            line,
            message: format!("invalid argument name `{name}`"),
        });
    }
    if name.starts_with(ZERO_PREFIX) {
        return Err(ParseError::ReservedName {
            line,
            name: name.to_string(),
        });
    }
    if args.contains(name) {
        return Err(ParseError::DuplicateDeclaration {
            line,
            name: name.to_string(),
        });
    }
    Ok(())
}

fn parse_tgf(text: &str) -> Result<Framework, ParseError> {
    let mut args = ArgumentSet::new();
    let mut attacks = BTreeSet::new();
    let mut seen_separator = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed == "#" {
            if seen_separator {
                return Err(ParseError::Syntax {
                    line,
                    message: "second `#` separator".into(),
                });
            }
            seen_separator = true;
            continue;
        }
        if !seen_separator {
            check_new_name(trimmed, line, &args)?;
            args.insert(trimmed.to_string());
        } else {
            let mut parts = trimmed.split_whitespace();
            let (src, dst) = match (parts.next(), parts.next(), parts.next()) {
                (Some(s), Some(d), None) => (s, d),
                _ => {
                    return Err(ParseError::Syntax {
                        line,
                        message: "expected `attacker target`".into(),
                    })
                }
            };
            for name in [src, dst] {
                if !args.contains(name) {
                    return Err(ParseError::UndeclaredArgument {
                        line,
                        name: name.to_string(),
                    });
                }
            }
            attacks.insert((src.to_string(), dst.to_string()));
        }
    }
    Ok(Framework { args, attacks })
}

/// One fact scanned out of APX-style text.
pub(crate) enum ApxFact {
    Arg(String),
    Att(String, String),
    Jatt(Vec<String>, String),
}

/// Scans `arg(..)`, `att(..)` and optionally `jatt([..],..)` facts. Shared
/// between the plain APX parser and the joint-attack parser.
pub(crate) fn scan_apx_facts(
    text: &str,
    allow_jatt: bool,
) -> Result<Vec<(usize, ApxFact)>, ParseError> {
    let mut facts = Vec::new();
    let bytes = text.as_bytes();
    let mut pos = 0usize;
    let line_at = |pos: usize| text[..pos].matches('\n').count() + 1;
    while pos < bytes.len() {
        let c = bytes[pos] as char;
        if c.is_whitespace() {
            pos += 1;
            continue;
        }
        if c == '%' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let line = line_at(pos);
        let rest = &text[pos..];
        if rest.starts_with("arg(") {
            pos += 4;
            let name = scan_name(text, &mut pos, line)?;
            expect_char(text, &mut pos, ')', line)?;
            expect_char(text, &mut pos, '.', line)?;
            facts.push((line, ApxFact::Arg(name)));
        } else if rest.starts_with("att(") {
            pos += 4;
            let src = scan_name(text, &mut pos, line)?;
            expect_char(text, &mut pos, ',', line)?;
            let dst = scan_name(text, &mut pos, line)?;
            expect_char(text, &mut pos, ')', line)?;
            expect_char(text, &mut pos, '.', line)?;
            facts.push((line, ApxFact::Att(src, dst)));
        } else if allow_jatt && rest.starts_with("jatt(") {
            pos += 5;
            expect_char(text, &mut pos, '[', line)?;
            let mut sources = Vec::new();
            loop {
                sources.push(scan_name(text, &mut pos, line)?);
                skip_spaces(text, &mut pos);
                if text[pos..].starts_with(',') {
                    pos += 1;
                    continue;
                }
                break;
            }
            expect_char(text, &mut pos, ']', line)?;
            expect_char(text, &mut pos, ',', line)?;
            let target = scan_name(text, &mut pos, line)?;
            expect_char(text, &mut pos, ')', line)?;
            expect_char(text, &mut pos, '.', line)?;
            facts.push((line, ApxFact::Jatt(sources, target)));
        } else {
            return Err(ParseError::Syntax {
                line,
                message: format!(
                    "expected {} fact",
                    if allow_jatt {
                        "`arg(..)`, `att(..)` or `jatt([..],..)`"
                    } else {
                        "`arg(..)` or `att(..)`"
                    }
                ),
            });
        }
    }
    Ok(facts)
}

fn skip_spaces(text: &str, pos: &mut usize) {
    let bytes = text.as_bytes();
    while *pos < bytes.len() && (bytes[*pos] as char).is_whitespace() {
        *pos += 1;
    }
}

fn scan_name(text: &str, pos: &mut usize, line: usize) -> Result<String, ParseError> {
    skip_spaces(text, pos);
    let bytes = text.as_bytes();
    let start = *pos;
    while *pos < bytes.len() && (bytes[*pos].is_ascii_alphanumeric() || bytes[*pos] == b'_') {
        *pos += 1;
    }
    if *pos == start {
        return Err(ParseError::Syntax {
            line,
            message: "expected an argument name".into(),
        });
    }
    Ok(text[start..*pos].to_string())
}

fn expect_char(text: &str, pos: &mut usize, want: char, line: usize) -> Result<(), ParseError> {
    skip_spaces(text, pos);
    if text[*pos..].starts_with(want) {
        *pos += want.len_utf8();
        Ok(())
    } else {
        Err(ParseError::Syntax {
            line,
            message: format!("expected `{want}`"),
        })
    }
}

fn parse_apx(text: &str) -> Result<Framework, ParseError> {
    let mut args = ArgumentSet::new();
    let mut attacks = BTreeSet::new();
    let facts = scan_apx_facts(text, false)?;
    for (line, fact) in &facts {
        if let ApxFact::Arg(name) = fact {
            check_new_name(name, *line, &args)?;
            args.insert(name.clone());
        }
    }
    for (line, fact) in facts {
        if let ApxFact::Att(src, dst) = fact {
            for name in [&src, &dst] {
                if !args.contains(name) {
                    return Err(ParseError::UndeclaredArgument {
                        line,
                        name: name.clone(),
                    });
                }
            }
            attacks.insert((src, dst));
        }
    }
    Ok(Framework { args, attacks })
}
