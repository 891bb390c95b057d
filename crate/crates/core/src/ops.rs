//! Generalization, most specific common denominator, and credulous and
//! skeptical priority union.

use std::collections::HashMap;

use thiserror::Error;

use crate::atoms::{add_atoms, decompose, entailed_atoms, reassemble, Atom};
use crate::avm::print_avm;
use crate::fs::{subsumes, unify, Dag, FeatureStructure};
use crate::types::TypeHierarchy;

pub const DEFAULT_MAX_ATOMS: usize = 24;

/// Ceiling on the number of atoms a subset search may range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimit(pub usize);

impl Default for SearchLimit {
    fn default() -> Self {
        SearchLimit(DEFAULT_MAX_ATOMS)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpsError {
    #[error("{atoms} atoms exceed the search limit of {limit}")]
    AtomLimit { atoms: usize, limit: usize },
}

/// Results of a possibly ambiguous operation: deduplicated, pairwise
/// incomparable under subsumption, ordered by canonical text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultSet {
    results: Vec<FeatureStructure>,
}

impl ResultSet {
    /// Keeps the most specific of the candidates: duplicates and any
    /// candidate that strictly subsumes another are dropped.
    pub fn maximal(h: &TypeHierarchy, candidates: Vec<FeatureStructure>) -> Self {
        let mut unique: Vec<FeatureStructure> = Vec::new();
        for c in candidates {
            if !unique.contains(&c) {
                unique.push(c);
            }
        }
        let keep: Vec<bool> = unique
            .iter()
            .map(|r| {
                !unique
                    .iter()
                    .any(|s| s != r && subsumes(h, r, s))
            })
            .collect();
        let mut results: Vec<(String, FeatureStructure)> = unique
            .into_iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(r, _)| (print_avm(h, &r), r))
            .collect();
        results.sort_by(|a, b| a.0.cmp(&b.0));
        ResultSet {
            results: results.into_iter().map(|(_, r)| r).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FeatureStructure> {
        self.results.iter()
    }

    pub fn as_slice(&self) -> &[FeatureStructure] {
        &self.results
    }

    pub fn into_vec(self) -> Vec<FeatureStructure> {
        self.results
    }

    pub fn texts(&self, h: &TypeHierarchy) -> Vec<String> {
        self.results.iter().map(|r| print_avm(h, r)).collect()
    }
}

impl<'a> IntoIterator for &'a ResultSet {
    type Item = &'a FeatureStructure;
    type IntoIter = std::slice::Iter<'a, FeatureStructure>;

    fn into_iter(self) -> Self::IntoIter {
        self.results.iter()
    }
}

/// Subset-maximal sets of atom indices (as bitmasks) accepted by
/// `consistent`, which must be monotone: every subset of an accepted set is
/// accepted. Sets are generated largest first, and a set is only tested when
/// no already accepted set contains it.
pub fn maximal_consistent_subsets(
    n: usize,
    limit: SearchLimit,
    mut consistent: impl FnMut(u64) -> bool,
) -> Result<Vec<u64>, OpsError> {
    if n > limit.0 || n >= 64 {
        return Err(OpsError::AtomLimit {
            atoms: n,
            limit: limit.0.min(63),
        });
    }
    // An atom that fails on its own can never be part of a consistent set.
    let candidates: Vec<usize> = (0..n).filter(|&i| consistent(1 << i)).collect();
    let mut accepted: Vec<u64> = Vec::new();
    for k in (0..=candidates.len()).rev() {
        for_each_combination(candidates.len(), k, |combo| {
            let mask = combo.iter().fold(0u64, |m, &i| m | 1 << candidates[i]);
            if accepted.iter().any(|&a| a & mask == mask) {
                return;
            }
            if consistent(mask) {
                accepted.push(mask);
            }
        });
    }
    Ok(accepted)
}

/// Calls `f` with every `k`-element subset of `0..n`, as sorted indices, in
/// lexicographic order.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn selected(atoms: &[Atom], mask: u64) -> impl Iterator<Item = &Atom> {
    atoms
        .iter()
        .enumerate()
        .filter(move |(i, _)| mask & (1 << i) != 0)
        .map(|(_, a)| a)
}

/// Credulous priority union of a strict `target` and a defeasible `source`:
/// the target unified with each maximal subset of the source's atoms it is
/// consistent with.
pub fn punion(
    h: &TypeHierarchy,
    target: &FeatureStructure,
    source: &FeatureStructure,
    limit: SearchLimit,
) -> Result<ResultSet, OpsError> {
    let atoms: Vec<Atom> = decompose(h, source).into_iter().collect();
    let mut cache: HashMap<u64, FeatureStructure> = HashMap::new();
    let masks = maximal_consistent_subsets(atoms.len(), limit, |mask| {
        match add_atoms(h, target, selected(&atoms, mask)) {
            Some(r) => {
                cache.insert(mask, r);
                true
            }
            None => false,
        }
    })?;
    let results = masks.iter().map(|m| cache[m].clone()).collect();
    Ok(ResultSet::maximal(h, results))
}

/// Most specific generalizations of `c1` that unify with `s2`.
pub fn mscd(
    h: &TypeHierarchy,
    c1: &FeatureStructure,
    s2: &FeatureStructure,
    limit: SearchLimit,
) -> Result<ResultSet, OpsError> {
    let atoms: Vec<Atom> = entailed_atoms(h, c1).into_iter().collect();
    let masks = maximal_consistent_subsets(atoms.len(), limit, |mask| {
        add_atoms(h, s2, selected(&atoms, mask)).is_some()
    })?;
    let results = masks
        .iter()
        .map(|&m| reassemble(h, selected(&atoms, m)).expect("subset of entailed atoms"))
        .collect();
    Ok(ResultSet::maximal(h, results))
}

/// Composite resolution: each MSCD of `c1` and `s2` unified back with `s2`.
pub fn mscd_resolve(
    h: &TypeHierarchy,
    c1: &FeatureStructure,
    s2: &FeatureStructure,
    limit: SearchLimit,
) -> Result<ResultSet, OpsError> {
    let candidates = mscd(h, c1, s2, limit)?
        .iter()
        .map(|m| unify(h, m, s2).expect("mscd result unifies with its second argument"))
        .collect();
    Ok(ResultSet::maximal(h, candidates))
}

/// Most specific structure subsuming both inputs. Paths defined in both are
/// kept with the generalization of their types; two paths stay shared
/// exactly when they are shared in both inputs.
pub fn generalize(h: &TypeHierarchy, a: &FeatureStructure, b: &FeatureStructure) -> FeatureStructure {
    fn visit(
        h: &TypeHierarchy,
        a: &FeatureStructure,
        b: &FeatureStructure,
        pair: (usize, usize),
        dag: &mut Dag<'_>,
        seen: &mut HashMap<(usize, usize), usize>,
    ) -> usize {
        if let Some(&n) = seen.get(&pair) {
            return n;
        }
        let t = h.type_gen(a.node_type(pair.0), b.node_type(pair.1));
        let node = dag.add(t);
        seen.insert(pair, node);
        for &f in h.approp(t).keys() {
            // Both node types are subtypes of `t`, so both carry `f`.
            let ca = a.follow(pair.0, f).expect("well-typed input");
            let cb = b.follow(pair.1, f).expect("well-typed input");
            let child = visit(h, a, b, (ca, cb), dag, seen);
            dag.set_arc(node, f, child);
        }
        node
    }
    let mut dag = Dag::new(h);
    let root = visit(
        h,
        a,
        b,
        (FeatureStructure::ROOT, FeatureStructure::ROOT),
        &mut dag,
        &mut HashMap::new(),
    );
    dag.freeze(root).expect("generalization of acyclic inputs is acyclic")
}

/// Skeptical priority union: what every credulous result agrees on.
pub fn skeptical_punion(
    h: &TypeHierarchy,
    target: &FeatureStructure,
    source: &FeatureStructure,
    limit: SearchLimit,
) -> Result<FeatureStructure, OpsError> {
    let results = punion(h, target, source, limit)?.into_vec();
    let mut it = results.into_iter();
    let first = it.next().expect("priority union of a well-typed target is never empty");
    Ok(it.fold(first, |acc, r| generalize(h, &acc, &r)))
}
