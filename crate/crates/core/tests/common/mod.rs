#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write as _;

use proptest::prelude::*;
use tfs_core::atoms::{add_atoms, decompose, reassemble, Atom};
use tfs_core::fs::{subsumes, FeatureStructure, Path};
use tfs_core::{parse_avm, print_avm, TypeHierarchy, TypeId};

pub const MICRO: &str = "\
bot sub [s, v].
s intro [f:v, g:v].
s sub [s1, s2].
v sub [v1, v2, w].
v1 sub [v11, v12].
w intro [h:v].
";

pub fn micro() -> TypeHierarchy {
    MICRO.parse().unwrap()
}

pub const MAX_NODES: usize = 6;

/// Builds a well-typed structure from a stream of choices; an exhausted
/// stream always picks the first option, so shrinking heads toward small
/// structures.
struct Builder<'a> {
    h: &'a TypeHierarchy,
    choices: &'a [u32],
    next: usize,
    types: Vec<TypeId>,
    arcs: Vec<Vec<(String, usize)>>,
    pending: usize,
}

impl Builder<'_> {
    fn pick(&mut self, n: usize) -> usize {
        let c = self.choices.get(self.next).copied().unwrap_or(0);
        self.next += 1;
        c as usize % n
    }

    fn node(&mut self, range: TypeId, ancestors: &mut Vec<usize>) -> usize {
        let h = self.h;
        let sharable: Vec<usize> = (0..self.types.len())
            .filter(|n| !ancestors.contains(n) && h.is_subtype(self.types[*n], range))
            .collect();
        if !sharable.is_empty() && self.pick(3) == 0 {
            let i = self.pick(sharable.len());
            return sharable[i];
        }
        let fits: Vec<TypeId> = h
            .types()
            .filter(|&t| h.is_subtype(t, range))
            .filter(|&t| self.types.len() + 1 + self.pending + h.approp(t).len() <= MAX_NODES)
            .collect();
        let t = fits[self.pick(fits.len())];
        let id = self.types.len();
        self.types.push(t);
        self.arcs.push(Vec::new());
        let feats: Vec<_> = h.approp(t).iter().map(|(&f, &r)| (f, r)).collect();
        self.pending += feats.len();
        ancestors.push(id);
        for (f, r) in feats {
            self.pending -= 1;
            let child = self.node(r, ancestors);
            self.arcs[id].push((h.feat_name(f).to_string(), child));
        }
        ancestors.pop();
        id
    }

    fn text(&self) -> String {
        let mut indeg = vec![0; self.types.len()];
        for a in &self.arcs {
            for (_, c) in a {
                indeg[*c] += 1;
            }
        }
        let mut tags = vec![None; self.types.len()];
        let mut next_tag = 0;
        let mut out = String::new();
        self.write(0, &indeg, &mut tags, &mut next_tag, &mut out);
        out
    }

    fn write(
        &self,
        n: usize,
        indeg: &[usize],
        tags: &mut Vec<Option<usize>>,
        next_tag: &mut usize,
        out: &mut String,
    ) {
        if let Some(t) = tags[n] {
            write!(out, "#{t}").unwrap();
            return;
        }
        if indeg[n] > 1 {
            *next_tag += 1;
            tags[n] = Some(*next_tag);
            write!(out, "#{}", *next_tag).unwrap();
        }
        write!(out, "[{}", self.h.type_name(self.types[n])).unwrap();
        for (f, c) in &self.arcs[n] {
            write!(out, " {f}:").unwrap();
            self.write(*c, indeg, tags, next_tag, out);
        }
        out.push(']');
    }
}

/// AVM text for the structure described by `choices`, rooted in `range`.
pub fn build_text(h: &TypeHierarchy, range: TypeId, choices: &[u32]) -> String {
    let mut b = Builder {
        h,
        choices,
        next: 0,
        types: Vec::new(),
        arcs: Vec::new(),
        pending: 0,
    };
    b.node(range, &mut Vec::new());
    b.text()
}

pub fn build(h: &TypeHierarchy, choices: &[u32]) -> FeatureStructure {
    let text = build_text(h, h.root(), choices);
    parse_avm(h, &text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// Structures over the micro-hierarchy whose root has features, so that
/// paths and sharing occur often.
pub fn arb_fs() -> impl Strategy<Value = FeatureStructure> {
    prop::collection::vec(any::<u32>(), 0..40).prop_map(|mut c| {
        // The first choice selects the root type; bias it toward `s` types.
        if let Some(first) = c.first_mut() {
            if *first % 4 != 0 {
                *first = 1;
            }
        }
        let h = micro();
        let s = h.type_id("s").unwrap();
        let text = build_text(&h, if c.first() == Some(&1) { s } else { h.root() }, &c[c.len().min(1)..]);
        parse_avm(&h, &text).unwrap_or_else(|e| panic!("{text}: {e}"))
    })
}

pub fn texts(h: &TypeHierarchy, v: &[FeatureStructure]) -> Vec<String> {
    v.iter().map(|f| print_avm(h, f)).collect()
}

/// Dedups, drops anything strictly more general than another member, and
/// sorts by printed form.
pub fn most_specific(h: &TypeHierarchy, v: Vec<FeatureStructure>) -> Vec<FeatureStructure> {
    let mut uniq: Vec<FeatureStructure> = Vec::new();
    for x in v {
        if !uniq.contains(&x) {
            uniq.push(x);
        }
    }
    let mut keep: Vec<FeatureStructure> = uniq
        .iter()
        .filter(|r| !uniq.iter().any(|s| s != *r && subsumes(h, r, s)))
        .cloned()
        .collect();
    keep.sort_by_key(|f| print_avm(h, f));
    keep
}

fn subsets<T: Clone>(items: &[T]) -> impl Iterator<Item = Vec<T>> + '_ {
    (0u64..1 << items.len()).map(move |m| {
        items
            .iter()
            .enumerate()
            .filter(|(i, _)| m & (1 << i) != 0)
            .map(|(_, a)| a.clone())
            .collect()
    })
}

/// Priority union by brute force: every subset of the source's atoms, kept
/// when consistent with the target and not strictly contained in another
/// consistent subset.
pub fn punion_oracle(
    h: &TypeHierarchy,
    target: &FeatureStructure,
    source: &FeatureStructure,
) -> Vec<FeatureStructure> {
    let atoms: Vec<Atom> = decompose(h, source).into_iter().collect();
    let consistent: Vec<(BTreeSet<Atom>, FeatureStructure)> = subsets(&atoms)
        .filter_map(|s| {
            let r = add_atoms(h, target, s.iter())?;
            Some((s.into_iter().collect(), r))
        })
        .collect();
    let maximal = consistent
        .iter()
        .filter(|(s, _)| !consistent.iter().any(|(t, _)| t.len() > s.len() && t.is_superset(s)))
        .map(|(_, r)| r.clone())
        .collect();
    most_specific(h, maximal)
}

/// Every atom true of `fs` over its own paths: each supertype of each value
/// below the range, each root supertype, and an equation for every pair of
/// paths to a shared node.
pub fn full_inventory(h: &TypeHierarchy, fs: &FeatureStructure) -> Vec<Atom> {
    let mut atoms = BTreeSet::new();
    for t in h.supertypes(fs.root_type()) {
        if t != h.root() {
            atoms.insert(Atom::RootType(t));
        }
    }
    let paths = fs.paths();
    for (p, n) in &paths {
        if let Some(f) = p.last() {
            for t in h.supertypes(fs.node_type(*n)) {
                if t != h.range(f) {
                    atoms.insert(Atom::PathType(p.clone(), t));
                }
            }
        }
    }
    for (i, (p, n)) in paths.iter().enumerate() {
        for (q, m) in &paths[i + 1..] {
            if n == m {
                atoms.insert(Atom::PathEq(p.clone(), q.clone()));
            }
        }
    }
    atoms
        .into_iter()
        .filter(|a| match a {
            // Keep only types at least as specific as the range.
            Atom::PathType(p, t) => h.is_subtype(*t, h.range(p.last().unwrap())),
            _ => true,
        })
        .collect()
}

/// All generalizations of `fs` expressible over its own paths, when the
/// inventory is small enough to enumerate.
pub fn generalizations(h: &TypeHierarchy, fs: &FeatureStructure, max_atoms: usize) -> Option<Vec<FeatureStructure>> {
    let inv = full_inventory(h, fs);
    if inv.len() > max_atoms {
        return None;
    }
    let mut out: Vec<FeatureStructure> = Vec::new();
    for s in subsets(&inv) {
        if let Some(g) = reassemble(h, s.iter()) {
            if !out.contains(&g) {
                out.push(g);
            }
        }
    }
    Some(out)
}

/// Generalization rebuilt from atoms: paths present in both inputs typed by
/// the generalization of their types, plus equations between paths that
/// share a node in both inputs.
pub fn generalize_oracle(h: &TypeHierarchy, a: &FeatureStructure, b: &FeatureStructure) -> FeatureStructure {
    let pa = a.paths();
    let pb: Vec<(Path, usize)> = b.paths();
    let common: Vec<(Path, usize, usize)> = pa
        .iter()
        .filter_map(|(p, na)| pb.iter().find(|(q, _)| q == p).map(|(_, nb)| (p.clone(), *na, *nb)))
        .collect();
    let mut atoms = Vec::new();
    for (p, na, nb) in &common {
        let t = h.type_gen(a.node_type(*na), b.node_type(*nb));
        if p.is_root() {
            atoms.push(Atom::RootType(t));
        } else {
            atoms.push(Atom::PathType(p.clone(), t));
        }
    }
    for (i, (p, na, nb)) in common.iter().enumerate() {
        for (q, ma, mb) in &common[i + 1..] {
            if na == ma && nb == mb {
                atoms.push(Atom::PathEq(p.clone(), q.clone()));
            }
        }
    }
    reassemble(h, atoms.iter()).expect("atoms of a common generalization are consistent")
}

pub fn fixture_path(rel: &str) -> String {
    format!("{}/../../fixtures/{rel}", env!("CARGO_MANIFEST_DIR"))
}
