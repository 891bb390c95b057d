//! Type hierarchies with appropriateness conditions.
//!
//! A hierarchy is declared in a small line-based language:
//!
//! ```text
//! # comment
//! bot sub [event, entity].
//! agentive intro [agent:human].
//! ```
//!
//! Compilation validates the declarations and precomputes the subtype
//! relation, the type generalization table (most specific common supertype)
//! and the type join table (most general common subtype).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

/// Index of a type in a compiled [`TypeHierarchy`].
///
/// Ids are assigned in lexicographic order of type names, so they are stable
/// under reordering of the declarations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeId(u32);

impl TypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a feature. Ids follow alphabetical order of feature names, which
/// makes `Vec<FeatId>` comparison agree with lexicographic path order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatId(u32);

impl FeatId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One type declaration: its immediate supertypes and the features it
/// introduces together with their range types.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TypeDecl {
    pub name: String,
    pub parents: Vec<String>,
    pub intro: Vec<(String, String)>,
}

impl TypeDecl {
    pub fn new(name: impl Into<String>) -> Self {
        TypeDecl {
            name: name.into(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("no types declared")]
    Empty,
    #[error("type `{0}` declared more than once")]
    DuplicateType(String),
    #[error("undeclared type `{name}` referenced {context}")]
    Undeclared { name: String, context: String },
    #[error("feature {feature} introduced by both `{first}` and `{second}`")]
    FeatureReintroduced {
        feature: String,
        first: String,
        second: String,
    },
    #[error("subtype cycle through {}", .0.join(" < "))]
    Cycle(Vec<String>),
    #[error("hierarchy has several most general types: {}", .0.join(", "))]
    MultipleRoots(Vec<String>),
    #[error("types `{a}` and `{b}` have no unique generalization: candidates {}", .candidates.join(", "))]
    NonUniqueGeneralization {
        a: String,
        b: String,
        candidates: Vec<String>,
    },
    #[error("types `{a}` and `{b}` have no unique join: candidates {}", .candidates.join(", "))]
    NonUniqueJoin {
        a: String,
        b: String,
        candidates: Vec<String>,
    },
    #[error("appropriateness is recursive: {}", .0.join(" -> "))]
    RecursiveAppropriateness(Vec<String>),
}

/// A compiled, validated type hierarchy. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeHierarchy {
    names: Vec<String>,
    feat_names: Vec<String>,
    root: TypeId,
    /// `sub[s * n + t]` iff `s` is a (reflexive) subtype of `t`.
    sub: Vec<bool>,
    gen: Vec<TypeId>,
    join: Vec<Option<TypeId>>,
    intro_of: Vec<TypeId>,
    range: Vec<TypeId>,
    approp: Vec<BTreeMap<FeatId, TypeId>>,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_' | '-'))
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            src: text.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn err(&self, message: impl Into<String>) -> HierarchyError {
        HierarchyError::Syntax {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn bump(&mut self) {
        if self.src[self.pos] == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        self.pos += 1;
    }

    fn skip_trivia(&mut self) {
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                b'#' => {
                    while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                        self.bump();
                    }
                }
                c if c.is_ascii_whitespace() => self.bump(),
                _ => break,
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_trivia();
        self.pos >= self.src.len()
    }

    fn ident(&mut self, what: &str) -> Result<String, HierarchyError> {
        self.skip_trivia();
        let start = self.pos;
        while self.pos < self.src.len()
            && matches!(self.src[self.pos], b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'_' | b'-')
        {
            self.bump();
        }
        let word = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        if word.is_empty() {
            return Err(self.err(format!("expected {what}")));
        }
        if !is_ident(&word) {
            return Err(self.err(format!("invalid identifier `{word}`")));
        }
        Ok(word)
    }

    fn expect(&mut self, c: u8) -> Result<(), HierarchyError> {
        self.skip_trivia();
        if self.pos < self.src.len() && self.src[self.pos] == c {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", c as char)))
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_trivia();
        if self.pos < self.src.len() && self.src[self.pos] == c {
            self.bump();
            true
        } else {
            false
        }
    }

    /// `[ item, item, ... ]` where each item is parsed by `item`.
    fn list<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, HierarchyError>,
    ) -> Result<Vec<T>, HierarchyError> {
        self.expect(b'[')?;
        let mut out = Vec::new();
        if self.eat(b']') {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(b']') {
                return Ok(out);
            }
            self.expect(b',')?;
        }
    }
}

/// Parses the hierarchy language into one declaration per mentioned type.
/// Types named only as children of a `sub` clause are declared implicitly.
pub fn parse_decls(text: &str) -> Result<Vec<TypeDecl>, HierarchyError> {
    let mut decls: BTreeMap<String, TypeDecl> = BTreeMap::new();
    let mut lx = Lexer::new(text);
    while !lx.at_end() {
        let name = lx.ident("type name")?;
        decls
            .entry(name.clone())
            .or_insert_with(|| TypeDecl::new(&name));
        let keyword = lx.ident("`sub` or `intro`")?;
        match keyword.as_str() {
            "sub" => {
                let children = lx.list(|lx| lx.ident("subtype name"))?;
                for child in children {
                    let decl = decls
                        .entry(child.clone())
                        .or_insert_with(|| TypeDecl::new(&child));
                    if !decl.parents.contains(&name) {
                        decl.parents.push(name.clone());
                    }
                }
            }
            "intro" => {
                let feats = lx.list(|lx| {
                    let feat = lx.ident("feature name")?;
                    lx.expect(b':')?;
                    let range = lx.ident("range type")?;
                    Ok((feat, range))
                })?;
                decls.get_mut(&name).unwrap().intro.extend(feats);
            }
            other => return Err(lx.err(format!("unknown clause `{other}`"))),
        }
        lx.expect(b'.')?;
    }
    Ok(decls.into_values().collect())
}

impl FromStr for TypeHierarchy {
    type Err = HierarchyError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        TypeHierarchy::compile(&parse_decls(text)?)
    }
}

impl TypeHierarchy {
    /// Validates `decls` and builds the hierarchy. The result does not depend
    /// on the order of `decls` or of the parents/features inside them.
    pub fn compile(decls: &[TypeDecl]) -> Result<Self, HierarchyError> {
        if decls.is_empty() {
            return Err(HierarchyError::Empty);
        }
        let mut by_name: BTreeMap<&str, &TypeDecl> = BTreeMap::new();
        for d in decls {
            if by_name.insert(d.name.as_str(), d).is_some() {
                return Err(HierarchyError::DuplicateType(d.name.clone()));
            }
        }
        let names: Vec<String> = by_name.keys().map(|s| s.to_string()).collect();
        let n = names.len();
        let id_of = |name: &str, context: &str| -> Result<usize, HierarchyError> {
            by_name
                .keys()
                .position(|k| *k == name)
                .ok_or_else(|| HierarchyError::Undeclared {
                    name: name.to_string(),
                    context: context.to_string(),
                })
        };

        let mut parents: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (i, d) in by_name.values().enumerate() {
            for p in &d.parents {
                parents[i].insert(id_of(p, &format!("as supertype of `{}`", d.name))?);
            }
        }

        // Features: intro type and range, checked for unique introduction.
        let mut feats: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        for (i, d) in by_name.values().enumerate() {
            for (f, r) in &d.intro {
                let fname = f.to_ascii_uppercase();
                let range = id_of(r, &format!("as range of {fname} on `{}`", d.name))?;
                if let Some(&(prev, _)) = feats.get(&fname) {
                    let (first, second) = if prev <= i { (prev, i) } else { (i, prev) };
                    return Err(HierarchyError::FeatureReintroduced {
                        feature: fname,
                        first: names[first].clone(),
                        second: names[second].clone(),
                    });
                }
                feats.insert(fname, (i, range));
            }
        }

        check_acyclic(&names, &parents)?;

        let roots: Vec<usize> = (0..n).filter(|&i| parents[i].is_empty()).collect();
        if roots.len() != 1 {
            return Err(HierarchyError::MultipleRoots(
                roots.iter().map(|&i| names[i].clone()).collect(),
            ));
        }
        let root = roots[0];

        // Reflexive-transitive closure of the parent relation.
        let mut sub = vec![false; n * n];
        for s in 0..n {
            let mut stack = vec![s];
            while let Some(t) = stack.pop() {
                if !sub[s * n + t] {
                    sub[s * n + t] = true;
                    stack.extend(parents[t].iter().copied());
                }
            }
        }

        let mut gen = vec![TypeId(root as u32); n * n];
        let mut join = vec![None; n * n];
        for a in 0..n {
            for b in a..n {
                let uppers: Vec<usize> = (0..n)
                    .filter(|&c| sub[a * n + c] && sub[b * n + c])
                    .collect();
                let minimal: Vec<usize> = uppers
                    .iter()
                    .copied()
                    .filter(|&c| !uppers.iter().any(|&d| d != c && sub[d * n + c]))
                    .collect();
                if minimal.len() != 1 {
                    return Err(HierarchyError::NonUniqueGeneralization {
                        a: names[a].clone(),
                        b: names[b].clone(),
                        candidates: minimal.iter().map(|&i| names[i].clone()).collect(),
                    });
                }
                let g = TypeId(minimal[0] as u32);
                gen[a * n + b] = g;
                gen[b * n + a] = g;

                let lowers: Vec<usize> = (0..n)
                    .filter(|&d| sub[d * n + a] && sub[d * n + b])
                    .collect();
                let maximal: Vec<usize> = lowers
                    .iter()
                    .copied()
                    .filter(|&d| !lowers.iter().any(|&e| e != d && sub[d * n + e]))
                    .collect();
                match maximal.len() {
                    0 => {}
                    1 => {
                        let j = Some(TypeId(maximal[0] as u32));
                        join[a * n + b] = j;
                        join[b * n + a] = j;
                    }
                    _ => {
                        return Err(HierarchyError::NonUniqueJoin {
                            a: names[a].clone(),
                            b: names[b].clone(),
                            candidates: maximal.iter().map(|&i| names[i].clone()).collect(),
                        })
                    }
                }
            }
        }

        let feat_names: Vec<String> = feats.keys().cloned().collect();
        let intro_of: Vec<TypeId> = feats.values().map(|&(t, _)| TypeId(t as u32)).collect();
        let range: Vec<TypeId> = feats.values().map(|&(_, r)| TypeId(r as u32)).collect();
        let approp: Vec<BTreeMap<FeatId, TypeId>> = (0..n)
            .map(|t| {
                intro_of
                    .iter()
                    .enumerate()
                    .filter(|(_, intro)| sub[t * n + intro.index()])
                    .map(|(f, _)| (FeatId(f as u32), range[f]))
                    .collect()
            })
            .collect();

        let h = TypeHierarchy {
            names,
            feat_names,
            root: TypeId(root as u32),
            sub,
            gen,
            join,
            intro_of,
            range,
            approp,
        };
        h.check_total_typing_terminates()?;
        Ok(h)
    }

    /// The most general satisfier of every type must be finite: no type may
    /// require, through the ranges of its features, a value of its own type.
    fn check_total_typing_terminates(&self) -> Result<(), HierarchyError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        fn visit(
            h: &TypeHierarchy,
            t: usize,
            marks: &mut [Mark],
            trail: &mut Vec<usize>,
        ) -> Result<(), HierarchyError> {
            match marks[t] {
                Mark::Done => return Ok(()),
                Mark::Open => {
                    let from = trail.iter().position(|&x| x == t).unwrap_or(0);
                    let mut cycle: Vec<String> =
                        trail[from..].iter().map(|&i| h.names[i].clone()).collect();
                    cycle.push(h.names[t].clone());
                    return Err(HierarchyError::RecursiveAppropriateness(cycle));
                }
                Mark::New => {}
            }
            marks[t] = Mark::Open;
            trail.push(t);
            for r in h.approp[t].values() {
                visit(h, r.index(), marks, trail)?;
            }
            trail.pop();
            marks[t] = Mark::Done;
            Ok(())
        }
        let mut marks = vec![Mark::New; self.names.len()];
        for t in 0..self.names.len() {
            visit(self, t, &mut marks, &mut Vec::new())?;
        }
        Ok(())
    }

    pub fn root(&self) -> TypeId {
        self.root
    }

    pub fn type_count(&self) -> usize {
        self.names.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feat_names.len()
    }

    pub fn types(&self) -> impl Iterator<Item = TypeId> + '_ {
        (0..self.names.len() as u32).map(TypeId)
    }

    pub fn features(&self) -> impl Iterator<Item = FeatId> + '_ {
        (0..self.feat_names.len() as u32).map(FeatId)
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(name))
            .ok()
            .map(|i| TypeId(i as u32))
    }

    pub fn type_name(&self, t: TypeId) -> &str {
        &self.names[t.index()]
    }

    /// Looks a feature up by name, case-insensitively.
    pub fn feat_id(&self, name: &str) -> Option<FeatId> {
        let upper = name.to_ascii_uppercase();
        self.feat_names
            .binary_search(&upper)
            .ok()
            .map(|i| FeatId(i as u32))
    }

    pub fn feat_name(&self, f: FeatId) -> &str {
        &self.feat_names[f.index()]
    }

    /// `s ⊑ t` in the type order: `s` is `t` or one of its subtypes.
    pub fn is_subtype(&self, s: TypeId, t: TypeId) -> bool {
        self.sub[s.index() * self.names.len() + t.index()]
    }

    pub fn is_strict_subtype(&self, s: TypeId, t: TypeId) -> bool {
        s != t && self.is_subtype(s, t)
    }

    /// Most specific common supertype. Always defined.
    pub fn type_gen(&self, a: TypeId, b: TypeId) -> TypeId {
        self.gen[a.index() * self.names.len() + b.index()]
    }

    /// Most general common subtype, or `None` when the types clash.
    pub fn type_join(&self, a: TypeId, b: TypeId) -> Option<TypeId> {
        self.join[a.index() * self.names.len() + b.index()]
    }

    /// Appropriate features of `t`, inherited ones included, with ranges.
    pub fn approp(&self, t: TypeId) -> &BTreeMap<FeatId, TypeId> {
        &self.approp[t.index()]
    }

    pub fn range(&self, f: FeatId) -> TypeId {
        self.range[f.index()]
    }

    /// The unique type introducing `f`.
    pub fn intro_type(&self, f: FeatId) -> TypeId {
        self.intro_of[f.index()]
    }

    /// All supertypes of `t`, `t` included, in id order.
    pub fn supertypes(&self, t: TypeId) -> impl Iterator<Item = TypeId> + '_ {
        self.types().filter(move |&u| self.is_subtype(t, u))
    }

    /// Generalization table as `a b -> gen` lines, sorted by `(a, b)` name.
    pub fn dump_gen_table(&self) -> String {
        let mut out = String::new();
        for a in self.types() {
            for b in self.types().filter(|&b| b >= a) {
                let _ = writeln!(
                    out,
                    "{} {} -> {}",
                    self.type_name(a),
                    self.type_name(b),
                    self.type_name(self.type_gen(a, b))
                );
            }
        }
        out
    }

    /// Number of unordered type pairs in the generalization table.
    pub fn gen_table_len(&self) -> usize {
        let n = self.names.len();
        n * (n + 1) / 2
    }
}

fn check_acyclic(names: &[String], parents: &[BTreeSet<usize>]) -> Result<(), HierarchyError> {
    let n = names.len();
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(start, parents[start].iter().copied().collect())];
        state[start] = 1;
        while let Some((node, pending)) = stack.last_mut() {
            let node = *node;
            match pending.pop() {
                Some(p) if state[p] == 1 => {
                    let from = stack.iter().position(|(x, _)| *x == p).unwrap();
                    let mut cycle: Vec<String> =
                        stack[from..].iter().map(|(x, _)| names[*x].clone()).collect();
                    cycle.push(names[p].clone());
                    return Err(HierarchyError::Cycle(cycle));
                }
                Some(p) if state[p] == 0 => {
                    state[p] = 1;
                    stack.push((p, parents[p].iter().copied().collect()));
                }
                Some(_) => {}
                None => {
                    state[node] = 2;
                    stack.pop();
                }
            }
        }
    }
    Ok(())
}

impl fmt::Display for TypeHierarchy {
    /// Re-emits the hierarchy in the declaration language.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.types() {
            let children: Vec<&str> = self
                .types()
                .filter(|&c| self.is_strict_subtype(c, t))
                .filter(|&c| {
                    !self
                        .types()
                        .any(|m| m != t && m != c && self.is_subtype(c, m) && self.is_subtype(m, t))
                })
                .map(|c| self.type_name(c))
                .collect();
            if !children.is_empty() {
                writeln!(f, "{} sub [{}].", self.type_name(t), children.join(", "))?;
            }
            let intro: Vec<String> = self
                .features()
                .filter(|&ft| self.intro_type(ft) == t)
                .map(|ft| {
                    format!(
                        "{}:{}",
                        self.feat_name(ft).to_ascii_lowercase(),
                        self.type_name(self.range(ft))
                    )
                })
                .collect();
            if !intro.is_empty() {
                writeln!(f, "{} intro [{}].", self.type_name(t), intro.join(", "))?;
            }
        }
        Ok(())
    }
}
