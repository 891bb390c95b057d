//! Totally well-typed feature structures.
//!
//! A [`FeatureStructure`] is an acyclic rooted graph. Every node carries a
//! type and exactly the features appropriate for it; re-entrancy is two arcs
//! pointing at the same node. Structures are kept in a canonical form (nodes
//! numbered in preorder, arcs in feature order), so derived equality is
//! equality up to isomorphism.

use std::collections::BTreeMap;
use std::fmt;

use crate::types::{FeatId, TypeHierarchy, TypeId};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Node {
    ty: TypeId,
    arcs: Vec<(FeatId, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureStructure {
    nodes: Vec<Node>,
}

/// A sequence of features; the empty path addresses the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path(pub Vec<FeatId>);

impl Path {
    pub fn root() -> Self {
        Path(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<FeatId> {
        self.0.last().copied()
    }

    pub fn child(&self, f: FeatId) -> Path {
        let mut p = self.0.clone();
        p.push(f);
        Path(p)
    }

    pub fn starts_with(&self, prefix: &Path) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// Parses `A|B|C` (features separated by `|`); `*` or an empty string is
    /// the root path.
    pub fn parse(h: &TypeHierarchy, text: &str) -> Option<Path> {
        let text = text.trim();
        if text.is_empty() || text == "*" {
            return Some(Path::root());
        }
        text.split('|')
            .map(|f| h.feat_id(f.trim()))
            .collect::<Option<Vec<_>>>()
            .map(Path)
    }

    pub fn display<'a>(&'a self, h: &'a TypeHierarchy) -> impl fmt::Display + 'a {
        PathDisplay { path: self, h }
    }
}

struct PathDisplay<'a> {
    path: &'a Path,
    h: &'a TypeHierarchy,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_root() {
            return f.write_str("*");
        }
        for (i, feat) in self.path.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            f.write_str(self.h.feat_name(*feat))?;
        }
        Ok(())
    }
}

impl FeatureStructure {
    /// Index of the root node.
    pub const ROOT: usize = 0;

    pub fn root_type(&self) -> TypeId {
        self.nodes[0].ty
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_type(&self, node: usize) -> TypeId {
        self.nodes[node].ty
    }

    /// Outgoing arcs of `node`, sorted by feature.
    pub fn arcs(&self, node: usize) -> &[(FeatId, usize)] {
        &self.nodes[node].arcs
    }

    pub fn follow(&self, node: usize, f: FeatId) -> Option<usize> {
        let arcs = &self.nodes[node].arcs;
        arcs.binary_search_by_key(&f, |&(g, _)| g)
            .ok()
            .map(|i| arcs[i].1)
    }

    pub fn node_at(&self, path: &Path) -> Option<usize> {
        path.0
            .iter()
            .try_fold(Self::ROOT, |node, &f| self.follow(node, f))
    }

    /// The substructure rooted at `path`, if the path is defined.
    pub fn get_path(&self, path: &Path) -> Option<FeatureStructure> {
        let node = self.node_at(path)?;
        let mut out = Vec::new();
        let mut map = vec![usize::MAX; self.nodes.len()];
        self.copy_from(node, &mut map, &mut out);
        Some(FeatureStructure { nodes: out })
    }

    fn copy_from(&self, node: usize, map: &mut [usize], out: &mut Vec<Node>) -> usize {
        if map[node] != usize::MAX {
            return map[node];
        }
        let id = out.len();
        map[node] = id;
        out.push(Node {
            ty: self.nodes[node].ty,
            arcs: Vec::new(),
        });
        let arcs = self.nodes[node]
            .arcs
            .iter()
            .map(|&(f, c)| (f, self.copy_from(c, map, out)))
            .collect();
        out[id].arcs = arcs;
        id
    }

    /// Every path of the structure with the node it reaches, in lexicographic
    /// path order. A node reachable along several paths appears once per path.
    pub fn paths(&self) -> Vec<(Path, usize)> {
        fn walk(fs: &FeatureStructure, node: usize, prefix: &mut Vec<FeatId>, out: &mut Vec<(Path, usize)>) {
            out.push((Path(prefix.clone()), node));
            for &(f, child) in &fs.nodes[node].arcs {
                prefix.push(f);
                walk(fs, child, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        walk(self, Self::ROOT, &mut Vec::new(), &mut out);
        out
    }

    /// Number of arcs entering each node.
    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for n in &self.nodes {
            for &(_, c) in &n.arcs {
                deg[c] += 1;
            }
        }
        deg
    }

    /// Checks total well-typing against `h`.
    pub fn check_well_typed(&self, h: &TypeHierarchy) -> Result<(), String> {
        for (i, n) in self.nodes.iter().enumerate() {
            let approp = h.approp(n.ty);
            let feats: Vec<FeatId> = n.arcs.iter().map(|&(f, _)| f).collect();
            let expected: Vec<FeatId> = approp.keys().copied().collect();
            if feats != expected {
                return Err(format!(
                    "node {i} of type {} has features {:?}, expected {:?}",
                    h.type_name(n.ty),
                    feats.iter().map(|f| h.feat_name(*f)).collect::<Vec<_>>(),
                    expected.iter().map(|f| h.feat_name(*f)).collect::<Vec<_>>()
                ));
            }
            for &(f, c) in &n.arcs {
                if !h.is_subtype(self.nodes[c].ty, approp[&f]) {
                    return Err(format!(
                        "value of {} has type {}, outside range {}",
                        h.feat_name(f),
                        h.type_name(self.nodes[c].ty),
                        h.type_name(approp[&f])
                    ));
                }
            }
        }
        Ok(())
    }
}

/// The most general totally well-typed structure of type `t`.
pub fn mgsat(h: &TypeHierarchy, t: TypeId) -> FeatureStructure {
    let mut dag = Dag::new(h);
    let root = dag.add(t);
    dag.freeze(root)
        .expect("total typing of a compiled hierarchy is finite and acyclic")
}

/// Unification: the most general structure subsumed by both inputs, or
/// `None` on a type clash or when the merged graph would be cyclic.
pub fn unify(h: &TypeHierarchy, a: &FeatureStructure, b: &FeatureStructure) -> Option<FeatureStructure> {
    let mut dag = Dag::new(h);
    let ra = dag.import(a);
    let rb = dag.import(b);
    dag.unify(ra, rb).ok()?;
    dag.freeze(ra).ok()
}

/// `a ⊑ b`: `a` is at least as general as `b`. Requires a root-preserving
/// mapping of `a`'s nodes into `b`'s that respects arcs, never makes a type
/// more general, and keeps `a`'s re-entrancies.
pub fn subsumes(h: &TypeHierarchy, a: &FeatureStructure, b: &FeatureStructure) -> bool {
    let mut image = vec![usize::MAX; a.nodes.len()];
    let mut stack = vec![(FeatureStructure::ROOT, FeatureStructure::ROOT)];
    while let Some((na, nb)) = stack.pop() {
        if image[na] != usize::MAX {
            if image[na] != nb {
                return false;
            }
            continue;
        }
        image[na] = nb;
        if !h.is_subtype(b.nodes[nb].ty, a.nodes[na].ty) {
            return false;
        }
        for &(f, ca) in &a.nodes[na].arcs {
            match b.follow(nb, f) {
                Some(cb) => stack.push((ca, cb)),
                None => return false,
            }
        }
    }
    true
}

/// Marker for a failed type join or a cyclic merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Clash;

/// Mutable graph under construction, with union-find over nodes. Used by
/// unification, parsing and atom expansion; `freeze` produces the canonical
/// immutable structure.
pub(crate) struct Dag<'h> {
    h: &'h TypeHierarchy,
    parent: Vec<usize>,
    ty: Vec<TypeId>,
    arcs: Vec<BTreeMap<FeatId, usize>>,
}

impl<'h> Dag<'h> {
    pub(crate) fn new(h: &'h TypeHierarchy) -> Self {
        Dag {
            h,
            parent: Vec::new(),
            ty: Vec::new(),
            arcs: Vec::new(),
        }
    }

    pub(crate) fn add(&mut self, ty: TypeId) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        self.ty.push(ty);
        self.arcs.push(BTreeMap::new());
        id
    }

    pub(crate) fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn type_of(&self, node: usize) -> TypeId {
        self.ty[self.find(node)]
    }

    pub(crate) fn set_arc(&mut self, node: usize, f: FeatId, value: usize) -> Option<usize> {
        let rep = self.find(node);
        self.arcs[rep].insert(f, value)
    }

    /// Copies `fs` in and returns the id of its root.
    pub(crate) fn import(&mut self, fs: &FeatureStructure) -> usize {
        let base = self.parent.len();
        for n in &fs.nodes {
            self.add(n.ty);
        }
        for (i, n) in fs.nodes.iter().enumerate() {
            self.arcs[base + i] = n.arcs.iter().map(|&(f, c)| (f, base + c)).collect();
        }
        base
    }

    /// Narrows the type of `node` by joining it with `t`.
    pub(crate) fn constrain(&mut self, node: usize, t: TypeId) -> Result<(), Clash> {
        let rep = self.find(node);
        self.ty[rep] = self.h.type_join(self.ty[rep], t).ok_or(Clash)?;
        Ok(())
    }

    /// Value of `f` at `node`, creating it (and typing `node` for `f`) when
    /// absent.
    pub(crate) fn arc(&mut self, node: usize, f: FeatId) -> Result<usize, Clash> {
        self.constrain(node, self.h.intro_type(f))?;
        let rep = self.find(node);
        if let Some(&v) = self.arcs[rep].get(&f) {
            return Ok(self.find(v));
        }
        let v = self.add(self.h.range(f));
        self.arcs[rep].insert(f, v);
        Ok(v)
    }

    pub(crate) fn walk(&mut self, node: usize, path: &Path) -> Result<usize, Clash> {
        path.0.iter().try_fold(node, |n, &f| self.arc(n, f))
    }

    /// Merges the two nodes and, recursively, their common features.
    pub(crate) fn unify(&mut self, a: usize, b: usize) -> Result<(), Clash> {
        let mut pending = vec![(a, b)];
        while let Some((a, b)) = pending.pop() {
            let (ra, rb) = (self.find(a), self.find(b));
            if ra == rb {
                continue;
            }
            let t = self.h.type_join(self.ty[ra], self.ty[rb]).ok_or(Clash)?;
            self.parent[rb] = ra;
            self.ty[ra] = t;
            let moved = std::mem::take(&mut self.arcs[rb]);
            for (f, v) in moved {
                match self.arcs[ra].get(&f) {
                    Some(&u) => pending.push((u, v)),
                    None => {
                        self.arcs[ra].insert(f, v);
                    }
                }
            }
        }
        Ok(())
    }

    /// Adds the most general value for every appropriate feature that is
    /// still missing. Feature ranges do not vary between types, so existing
    /// values never need narrowing here.
    fn fill(&mut self) {
        let mut i = 0;
        while i < self.parent.len() {
            if self.parent[i] == i {
                let t = self.ty[i];
                for (&f, &r) in self.h.approp(t) {
                    if !self.arcs[i].contains_key(&f) {
                        let v = self.add(r);
                        self.arcs[i].insert(f, v);
                    }
                }
            }
            i += 1;
        }
    }

    /// Completes total typing and produces the canonical structure reachable
    /// from `root`. Fails if that graph has a cycle.
    pub(crate) fn freeze(mut self, root: usize) -> Result<FeatureStructure, Clash> {
        self.fill();
        let mut ids = vec![usize::MAX; self.parent.len()];
        let mut on_stack = vec![false; self.parent.len()];
        let mut nodes = Vec::new();
        self.number(self.find(root), &mut ids, &mut on_stack, &mut nodes)?;
        Ok(FeatureStructure { nodes })
    }

    fn number(
        &self,
        rep: usize,
        ids: &mut [usize],
        on_stack: &mut [bool],
        nodes: &mut Vec<Node>,
    ) -> Result<usize, Clash> {
        if on_stack[rep] {
            return Err(Clash);
        }
        if ids[rep] != usize::MAX {
            return Ok(ids[rep]);
        }
        let id = nodes.len();
        ids[rep] = id;
        nodes.push(Node {
            ty: self.ty[rep],
            arcs: Vec::new(),
        });
        on_stack[rep] = true;
        let mut arcs = Vec::with_capacity(self.arcs[rep].len());
        for (&f, &v) in &self.arcs[rep] {
            arcs.push((f, self.number(self.find(v), ids, on_stack, nodes)?));
        }
        on_stack[rep] = false;
        nodes[id].arcs = arcs;
        Ok(id)
    }
}
