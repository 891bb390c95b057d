//! Atomic constraints: decomposition of a feature structure into single-path
//! typings, path equations and a root typing, and reassembly of atom sets.
//!
//! Notation (one atom per line in `.atoms` files):
//!
//! ```text
//! (*/like)                              root type
//! (PATIENT/brother)|(BROTHER-OF/jessy)  typed path; inner types are implied
//! AGENT = PATIENT|BROTHER-OF            path equation
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::fs::{Clash, Dag, FeatureStructure, Path};
use crate::scan::Scanner;
use crate::types::{FeatId, TypeHierarchy, TypeId};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    RootType(TypeId),
    PathType(Path, TypeId),
    /// Left path is lexicographically smaller than the right one.
    PathEq(Path, Path),
}

/// Atoms of `fs`.
///
/// * one root typing when the root is more specific than the hierarchy root;
/// * one typing per *path* whose value is more specific than what the range
///   of its last feature and the features needed below it already imply, so a
///   shared value is typed separately along each path reaching it;
/// * for every node reachable along several paths, an equation between its
///   least path and each other path.
pub fn decompose(h: &TypeHierarchy, fs: &FeatureStructure) -> BTreeSet<Atom> {
    let paths = fs.paths();
    let mut atoms = BTreeSet::new();
    if fs.root_type() != h.root() {
        atoms.insert(Atom::RootType(fs.root_type()));
    }
    let mut oracle = Informative::new(h, fs);
    for (path, node) in &paths {
        if let Some(f) = path.last() {
            if oracle.informative(*node, f) {
                atoms.insert(Atom::PathType(path.clone(), fs.node_type(*node)));
            }
        }
    }
    atoms.extend(equations(&paths));
    atoms
}

/// Every atom that holds of `fs`: the root and each path typed with every
/// supertype of its value that is still more specific than the feature range,
/// plus the equations of [`decompose`]. Subsets of this set describe exactly
/// the generalizations of `fs` that keep its re-entrancy pattern or drop parts
/// of it.
pub fn entailed_atoms(h: &TypeHierarchy, fs: &FeatureStructure) -> BTreeSet<Atom> {
    let paths = fs.paths();
    let mut atoms = BTreeSet::new();
    for t in h.supertypes(fs.root_type()) {
        if t != h.root() {
            atoms.insert(Atom::RootType(t));
        }
    }
    for (path, node) in &paths {
        if let Some(f) = path.last() {
            let range = h.range(f);
            for t in h.supertypes(fs.node_type(*node)) {
                if h.is_strict_subtype(t, range) {
                    atoms.insert(Atom::PathType(path.clone(), t));
                }
            }
        }
    }
    atoms.extend(equations(&paths));
    atoms
}

fn equations(paths: &[(Path, usize)]) -> Vec<Atom> {
    let mut least: HashMap<usize, &Path> = HashMap::new();
    let mut out = Vec::new();
    // `paths` is in lexicographic order, so the first path seen is the least.
    for (path, node) in paths {
        match least.get(node) {
            Some(first) => out.push(Atom::PathEq((*first).clone(), path.clone())),
            None => {
                least.insert(*node, path);
            }
        }
    }
    out
}

/// Decides which arcs carry information that the atom set must state.
///
/// Only typed paths make an inner type implicit. A type that only an
/// equation implies gets its own atom, so that it survives when the
/// equation is dropped.
struct Informative<'a> {
    h: &'a TypeHierarchy,
    fs: &'a FeatureStructure,
    carries: HashMap<(usize, FeatId), bool>,
}

impl<'a> Informative<'a> {
    fn new(h: &'a TypeHierarchy, fs: &'a FeatureStructure) -> Self {
        Informative {
            h,
            fs,
            carries: HashMap::new(),
        }
    }

    /// Type `node` would get from the range of `via` and the intro types of
    /// the features that some typed path below it mentions.
    fn forced(&mut self, node: usize, via: FeatId) -> TypeId {
        let mut t = self.h.range(via);
        for &(f, child) in self.fs.arcs(node) {
            if self.carries(child, f) {
                t = self
                    .h
                    .type_join(t, self.h.intro_type(f))
                    .expect("node type is a common subtype");
            }
        }
        t
    }

    fn informative(&mut self, node: usize, via: FeatId) -> bool {
        let forced = self.forced(node, via);
        self.h.is_strict_subtype(self.fs.node_type(node), forced)
    }

    /// Whether some typed path runs through the arc `via` into `node`.
    fn carries(&mut self, node: usize, via: FeatId) -> bool {
        if let Some(&c) = self.carries.get(&(node, via)) {
            return c;
        }
        let c = self
                .fs
                .arcs(node)
                .iter()
                .any(|&(f, child)| self.carries(child, f))
            || self.informative(node, via);
        self.carries.insert((node, via), c);
        c
    }
}

pub(crate) fn apply(dag: &mut Dag<'_>, root: usize, atom: &Atom) -> Result<(), Clash> {
    match atom {
        Atom::RootType(t) => dag.constrain(root, *t),
        Atom::PathType(p, t) => {
            let n = dag.walk(root, p)?;
            dag.constrain(n, *t)
        }
        Atom::PathEq(p, q) => {
            let a = dag.walk(root, p)?;
            let b = dag.walk(root, q)?;
            dag.unify(a, b)
        }
    }
}

/// The most general structure satisfying one atom.
pub fn expand(h: &TypeHierarchy, atom: &Atom) -> Option<FeatureStructure> {
    reassemble(h, std::iter::once(atom))
}

/// Unification of the expansions of `atoms`; `None` if they are inconsistent.
/// The empty set gives the most general structure of the hierarchy root.
pub fn reassemble<'a>(
    h: &TypeHierarchy,
    atoms: impl IntoIterator<Item = &'a Atom>,
) -> Option<FeatureStructure> {
    let mut dag = Dag::new(h);
    let root = dag.add(h.root());
    for a in atoms {
        apply(&mut dag, root, a).ok()?;
    }
    dag.freeze(root).ok()
}

/// `unify(target, reassemble(atoms))`, computed by adding the atoms to a copy
/// of `target` directly.
pub fn add_atoms<'a>(
    h: &TypeHierarchy,
    target: &FeatureStructure,
    atoms: impl IntoIterator<Item = &'a Atom>,
) -> Option<FeatureStructure> {
    let mut dag = Dag::new(h);
    let root = dag.import(target);
    for a in atoms {
        apply(&mut dag, root, a).ok()?;
    }
    dag.freeze(root).ok()
}

impl Atom {
    pub fn display<'a>(&'a self, h: &'a TypeHierarchy) -> impl fmt::Display + 'a {
        AtomDisplay { atom: self, h }
    }
}

struct AtomDisplay<'a> {
    atom: &'a Atom,
    h: &'a TypeHierarchy,
}

/// Type implied at step `i` of a typed path: range of the feature leading
/// there joined with the intro type of the next feature.
fn implied_step_type(h: &TypeHierarchy, path: &Path, i: usize) -> TypeId {
    let range = h.range(path.0[i]);
    h.type_join(range, h.intro_type(path.0[i + 1]))
        .unwrap_or(range)
}

impl fmt::Display for AtomDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.h;
        match self.atom {
            Atom::RootType(t) => write!(f, "(*/{})", h.type_name(*t)),
            Atom::PathType(p, t) => {
                for (i, feat) in p.0.iter().enumerate() {
                    let ty = if i + 1 == p.len() {
                        *t
                    } else {
                        implied_step_type(h, p, i)
                    };
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    write!(f, "({}/{})", h.feat_name(*feat), h.type_name(ty))?;
                }
                Ok(())
            }
            Atom::PathEq(p, q) => write!(f, "{} = {}", p.display(h), q.display(h)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct AtomError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Reads atoms in the notation above, one per line, `#` comments allowed.
pub fn parse_atoms(h: &TypeHierarchy, text: &str) -> Result<BTreeSet<Atom>, AtomError> {
    let mut atoms = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let mut sc = Scanner::new(raw);
        if sc.at_end() {
            continue;
        }
        let atom = read_atom(h, &mut sc).map_err(|(col, message)| AtomError {
            line: i + 1,
            col,
            message,
        })?;
        if !sc.at_end() {
            return Err(AtomError {
                line: i + 1,
                col: sc.position().1,
                message: "unexpected input after atom".into(),
            });
        }
        atoms.insert(atom);
    }
    Ok(atoms)
}

fn read_atom(h: &TypeHierarchy, sc: &mut Scanner<'_>) -> Result<Atom, (usize, String)> {
    let fail = |sc: &Scanner<'_>, msg: String| (sc.position().1, msg);
    sc.skip_trivia();
    if sc.peek() == Some('(') {
        let mut feats = Vec::new();
        let mut types = Vec::new();
        loop {
            if !sc.eat('(') {
                return Err(fail(sc, "expected `(`".into()));
            }
            if sc.eat('*') {
                if !feats.is_empty() {
                    return Err(fail(sc, "`*` only allowed alone".into()));
                }
                feats.push(None);
            } else {
                let name = sc.word();
                let f = h
                    .feat_id(name)
                    .ok_or_else(|| fail(sc, format!("unknown feature {name}")))?;
                feats.push(Some(f));
            }
            if !sc.eat('/') {
                return Err(fail(sc, "expected `/`".into()));
            }
            let tname = sc.word();
            let t = h
                .type_id(tname)
                .ok_or_else(|| fail(sc, format!("unknown type `{tname}`")))?;
            types.push(t);
            if !sc.eat(')') {
                return Err(fail(sc, "expected `)`".into()));
            }
            if !sc.eat('|') {
                break;
            }
        }
        if feats == [None] {
            return Ok(Atom::RootType(types[0]));
        }
        let path = Path(
            feats
                .into_iter()
                .map(|f| f.ok_or_else(|| fail(sc, "`*` only allowed alone".into())))
                .collect::<Result<_, _>>()?,
        );
        for (i, &t) in types[..path.len() - 1].iter().enumerate() {
            if t != implied_step_type(h, &path, i) {
                return Err(fail(
                    sc,
                    format!(
                        "inner type `{}` is not the one implied by the path",
                        h.type_name(t)
                    ),
                ));
            }
        }
        return Ok(Atom::PathType(path, *types.last().unwrap()));
    }
    let read_path = |sc: &mut Scanner<'_>| -> Result<Path, (usize, String)> {
        let mut feats = Vec::new();
        loop {
            let name = sc.word();
            let f = h
                .feat_id(name)
                .ok_or_else(|| fail(sc, format!("unknown feature {name:?}")))?;
            feats.push(f);
            if !sc.eat('|') {
                return Ok(Path(feats));
            }
        }
    };
    let left = read_path(sc)?;
    if !sc.eat('=') {
        return Err(fail(sc, "expected `=`".into()));
    }
    let right = read_path(sc)?;
    Ok(if left <= right {
        Atom::PathEq(left, right)
    } else {
        Atom::PathEq(right, left)
    })
}
