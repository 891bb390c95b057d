//! Attribute-value matrix text format.
//!
//! ```text
//! FS  ::= TAG? '[' TYPE (FEAT ':' FS)* ']'  |  TAG
//! TAG ::= '#' digits
//! ```
//!
//! A tag followed by a bracket defines a re-entrant node; a bare tag refers
//! back to it. Features left out on input are filled with their most general
//! value. Output is canonical: features in alphabetical order, every
//! appropriate feature shown, tags numbered from 1 in order of first
//! occurrence, single spaces.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::fs::{Dag, FeatureStructure};
use crate::scan::Scanner;
use crate::types::TypeHierarchy;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct AvmError {
    pub line: usize,
    pub col: usize,
    pub kind: AvmErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AvmErrorKind {
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown feature {0}")]
    UnknownFeature(String),
    #[error("feature {feature} is not appropriate for type `{ty}`")]
    Inappropriate { feature: String, ty: String },
    #[error("value of {feature} has type `{value}`, outside its range `{range}`")]
    OutOfRange {
        feature: String,
        value: String,
        range: String,
    },
    #[error("feature {0} given twice")]
    DuplicateFeature(String),
    #[error("tag #{0} used before its definition")]
    UndefinedTag(u32),
    #[error("tag #{0} defined twice")]
    TagRedefined(u32),
    #[error("tag #{0} refers to a node containing it")]
    Cyclic(u32),
    #[error("unexpected input after structure")]
    Trailing,
}

pub fn parse_avm(h: &TypeHierarchy, text: &str) -> Result<FeatureStructure, AvmError> {
    let mut sc = Scanner::new(text);
    let fs = read_avm(h, &mut sc)?;
    if !sc.at_end() {
        return Err(error_at(&sc, AvmErrorKind::Trailing));
    }
    Ok(fs)
}

/// Reads one structure from the scanner, leaving it positioned after the
/// closing bracket.
pub(crate) fn read_avm(h: &TypeHierarchy, sc: &mut Scanner<'_>) -> Result<FeatureStructure, AvmError> {
    let mut reader = Reader {
        h,
        dag: Dag::new(h),
        tags: HashMap::new(),
    };
    sc.skip_trivia();
    let start = sc.position();
    let root = reader.value(sc)?;
    reader.dag.freeze(root).map_err(|_| AvmError {
        line: start.0,
        col: start.1,
        kind: AvmErrorKind::Cyclic(0),
    })
}

fn error_at(sc: &Scanner<'_>, kind: AvmErrorKind) -> AvmError {
    let (line, col) = sc.position();
    AvmError { line, col, kind }
}

enum Tag {
    Open,
    Closed(usize),
}

struct Reader<'h> {
    h: &'h TypeHierarchy,
    dag: Dag<'h>,
    tags: HashMap<u32, Tag>,
}

impl Reader<'_> {
    fn value(&mut self, sc: &mut Scanner<'_>) -> Result<usize, AvmError> {
        sc.skip_trivia();
        if sc.peek() == Some('#') {
            let at = sc.position();
            sc.bump();
            let digits = sc.digits();
            let tag: u32 = digits
                .parse()
                .map_err(|_| error_at(sc, AvmErrorKind::Expected("tag number")))?;
            let located = |kind| AvmError {
                line: at.0,
                col: at.1,
                kind,
            };
            sc.skip_trivia();
            if sc.peek() == Some('[') {
                if self.tags.contains_key(&tag) {
                    return Err(located(AvmErrorKind::TagRedefined(tag)));
                }
                self.tags.insert(tag, Tag::Open);
                let node = self.body(sc)?;
                self.tags.insert(tag, Tag::Closed(node));
                return Ok(node);
            }
            return match self.tags.get(&tag) {
                Some(Tag::Closed(node)) => Ok(*node),
                Some(Tag::Open) => Err(located(AvmErrorKind::Cyclic(tag))),
                None => Err(located(AvmErrorKind::UndefinedTag(tag))),
            };
        }
        self.body(sc)
    }

    fn body(&mut self, sc: &mut Scanner<'_>) -> Result<usize, AvmError> {
        if !sc.eat('[') {
            return Err(error_at(sc, AvmErrorKind::Expected("`[` or a tag")));
        }
        sc.skip_trivia();
        let at = sc.position();
        let name = sc.word();
        if name.is_empty() {
            return Err(error_at(sc, AvmErrorKind::Expected("type name")));
        }
        let ty = self.h.type_id(name).ok_or_else(|| AvmError {
            line: at.0,
            col: at.1,
            kind: AvmErrorKind::UnknownType(name.to_string()),
        })?;
        let node = self.dag.add(ty);
        loop {
            if sc.eat(']') {
                return Ok(node);
            }
            sc.skip_trivia();
            let at = sc.position();
            let located = |kind| AvmError {
                line: at.0,
                col: at.1,
                kind,
            };
            let fname = sc.word();
            if fname.is_empty() {
                return Err(error_at(sc, AvmErrorKind::Expected("feature or `]`")));
            }
            let f = self
                .h
                .feat_id(fname)
                .ok_or_else(|| located(AvmErrorKind::UnknownFeature(fname.to_string())))?;
            let range = *self.h.approp(ty).get(&f).ok_or_else(|| {
                located(AvmErrorKind::Inappropriate {
                    feature: self.h.feat_name(f).to_string(),
                    ty: name.to_string(),
                })
            })?;
            if !sc.eat(':') {
                return Err(error_at(sc, AvmErrorKind::Expected("`:`")));
            }
            let value = self.value(sc)?;
            let vt = self.dag.type_of(value);
            if !self.h.is_subtype(vt, range) {
                return Err(located(AvmErrorKind::OutOfRange {
                    feature: self.h.feat_name(f).to_string(),
                    value: self.h.type_name(vt).to_string(),
                    range: self.h.type_name(range).to_string(),
                }));
            }
            if self.dag.set_arc(node, f, value).is_some() {
                return Err(located(AvmErrorKind::DuplicateFeature(
                    self.h.feat_name(f).to_string(),
                )));
            }
        }
    }
}

/// Canonical single-line rendering.
pub fn print_avm(h: &TypeHierarchy, fs: &FeatureStructure) -> String {
    let shared: Vec<bool> = fs.in_degrees().into_iter().map(|d| d > 1).collect();
    let mut tags = vec![0u32; fs.node_count()];
    let mut next = 0;
    let mut out = String::new();
    write_node(h, fs, FeatureStructure::ROOT, &shared, &mut tags, &mut next, &mut out);
    out
}

fn write_node(
    h: &TypeHierarchy,
    fs: &FeatureStructure,
    node: usize,
    shared: &[bool],
    tags: &mut [u32],
    next: &mut u32,
    out: &mut String,
) {
    if shared[node] {
        if tags[node] != 0 {
            let _ = write!(out, "#{}", tags[node]);
            return;
        }
        *next += 1;
        tags[node] = *next;
        let _ = write!(out, "#{}", tags[node]);
    }
    out.push('[');
    out.push_str(h.type_name(fs.node_type(node)));
    for &(f, child) in fs.arcs(node) {
        out.push(' ');
        out.push_str(h.feat_name(f));
        out.push(':');
        write_node(h, fs, child, shared, tags, next, out);
    }
    out.push(']');
}

impl FeatureStructure {
    pub fn display<'a>(&'a self, h: &'a TypeHierarchy) -> impl fmt::Display + 'a {
        AvmDisplay { fs: self, h }
    }
}

struct AvmDisplay<'a> {
    fs: &'a FeatureStructure,
    h: &'a TypeHierarchy,
}

impl fmt::Display for AvmDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_avm(self.h, self.fs))
    }
}
