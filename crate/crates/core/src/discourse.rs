//! Discourse grammar: clauses are combined pairwise into list and contrast
//! nodes. The right daughter is resolved by priority union against the left
//! context and the node records the common ground of its daughters.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::atoms::{decompose, Atom};
use crate::avm::print_avm;
use crate::fs::FeatureStructure;
use crate::ops::{generalize, mscd, punion, OpsError, SearchLimit};
use crate::types::TypeHierarchy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Connective {
    None,
    And,
    Or,
    But,
}

impl Connective {
    pub fn as_str(self) -> &'static str {
        match self {
            Connective::None => "none",
            Connective::And => "and",
            Connective::Or => "or",
            Connective::But => "but",
        }
    }
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Connective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Connective::None),
            "and" => Ok(Connective::And),
            "or" => Ok(Connective::Or),
            "but" => Ok(Connective::But),
            _ => Err(format!("unknown connective `{s}` (expected and, or, but or none)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    List,
    Contrast,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::List => "list",
            Relation::Contrast => "contrast",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relations a clause may enter with its left context, given the connective
/// that introduces it.
pub fn connective_relation(c: Connective) -> &'static [Relation] {
    match c {
        Connective::And | Connective::Or => &[Relation::List],
        Connective::But => &[Relation::Contrast],
        Connective::None => &[Relation::List, Relation::Contrast],
    }
}

/// A clause with its unresolved semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dcu {
    pub id: String,
    pub sem: FeatureStructure,
    pub connective: Connective,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Leaf {
        /// Position of the clause in the discourse, from 0.
        clause: usize,
        id: String,
        sem: FeatureStructure,
    },
    Internal {
        relation: Relation,
        schema: FeatureStructure,
        left: Box<DiscourseNode>,
        right: Box<DiscourseNode>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscourseNode {
    /// Resolved semantics. For an internal node this is the consem of its
    /// rightmost clause, the most recent resolved material.
    pub consem: FeatureStructure,
    pub kind: NodeKind,
}

impl DiscourseNode {
    pub fn leaf(clause: usize, dcu: &Dcu) -> Self {
        DiscourseNode {
            consem: dcu.sem.clone(),
            kind: NodeKind::Leaf {
                clause,
                id: dcu.id.clone(),
                sem: dcu.sem.clone(),
            },
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    pub fn schema(&self) -> Option<&FeatureStructure> {
        match &self.kind {
            NodeKind::Leaf { .. } => None,
            NodeKind::Internal { schema, .. } => Some(schema),
        }
    }

    pub fn relation(&self) -> Option<Relation> {
        match &self.kind {
            NodeKind::Leaf { .. } => None,
            NodeKind::Internal { relation, .. } => Some(*relation),
        }
    }

    pub fn children(&self) -> Option<(&DiscourseNode, &DiscourseNode)> {
        match &self.kind {
            NodeKind::Leaf { .. } => None,
            NodeKind::Internal { left, right, .. } => Some((left, right)),
        }
    }

    /// What the node contributes to the common ground of a parent: the
    /// resolved clause for a leaf, the schema otherwise.
    pub fn representative(&self) -> &FeatureStructure {
        self.schema().unwrap_or(&self.consem)
    }

    /// Leaves from left to right.
    pub fn leaves(&self) -> Vec<&DiscourseNode> {
        let mut out = Vec::new();
        fn walk<'a>(n: &'a DiscourseNode, out: &mut Vec<&'a DiscourseNode>) {
            match n.children() {
                None => out.push(n),
                Some((l, r)) => {
                    walk(l, out);
                    walk(r, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// Bracketing with relation labels and 1-based clause numbers, e.g.
    /// `list(1, contrast(2, 3))`.
    pub fn shape(&self) -> String {
        match &self.kind {
            NodeKind::Leaf { clause, .. } => (clause + 1).to_string(),
            NodeKind::Internal {
                relation,
                left,
                right,
                ..
            } => format!("{relation}({}, {})", left.shape(), right.shape()),
        }
    }

    /// True when every right daughter in the tree is a single clause.
    pub fn is_left_branching(&self) -> bool {
        match self.children() {
            None => true,
            Some((l, r)) => r.is_leaf() && l.is_left_branching(),
        }
    }

    /// Serialization of everything but the relation labels; two nodes with
    /// the same key behave identically in any further combination.
    fn content_key(&self, h: &TypeHierarchy, out: &mut String) {
        match &self.kind {
            NodeKind::Leaf { clause, .. } => {
                out.push_str(&format!("{}:{}", clause, print_avm(h, &self.consem)));
            }
            NodeKind::Internal {
                schema, left, right, ..
            } => {
                out.push('(');
                left.content_key(h, out);
                out.push(' ');
                right.content_key(h, out);
                out.push_str(&format!(") {} / {}", print_avm(h, &self.consem), print_avm(h, schema)));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reading {
    pub tree: DiscourseNode,
}

impl Reading {
    pub fn root_consem(&self) -> &FeatureStructure {
        &self.tree.consem
    }

    pub fn root_schema(&self) -> Option<&FeatureStructure> {
        self.tree.schema()
    }

    /// Resolved semantics of each clause, in discourse order.
    pub fn clause_consems(&self) -> Vec<&FeatureStructure> {
        self.tree.leaves().into_iter().map(|l| &l.consem).collect()
    }
}

/// Test applied to every schema before a node is admitted.
#[derive(Debug, Clone, Copy, Default)]
pub enum Characteristic {
    /// See [`characteristic_gen`].
    #[default]
    Default,
    /// Accepts every schema.
    Permissive,
    Custom(fn(&TypeHierarchy, &FeatureStructure) -> bool),
}

impl Characteristic {
    pub fn accepts(&self, h: &TypeHierarchy, schema: &FeatureStructure) -> bool {
        match self {
            Characteristic::Default => characteristic_gen(h, schema),
            Characteristic::Permissive => true,
            Characteristic::Custom(f) => f(h, schema),
        }
    }
}

/// Default informativeness test for common ground. The root type must be
/// more specific than the hierarchy root, and the schema must say something
/// beyond bare appropriateness: either some path carries a specific type or
/// the root type is more specific than its features alone force.
pub fn characteristic_gen(h: &TypeHierarchy, schema: &FeatureStructure) -> bool {
    let root = schema.root_type();
    if root == h.root() {
        return false;
    }
    let has_path_type = decompose(h, schema)
        .iter()
        .any(|a| matches!(a, Atom::PathType(..)));
    if has_path_type {
        return true;
    }
    let forced = h
        .approp(root)
        .keys()
        .try_fold(h.root(), |acc, &f| h.type_join(acc, h.intro_type(f)));
    forced.is_some_and(|t| h.is_strict_subtype(root, t))
}

/// How a node's schema is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchemaMode {
    /// Generalization over the resolved daughters.
    #[default]
    Generalization,
    /// MSCD of the left daughter against the unresolved right daughter.
    Mscd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TreeShapes {
    #[default]
    All,
    /// Only trees whose right daughters are single clauses.
    LeftBranching,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub trees: TreeShapes,
    pub characteristic: Characteristic,
    pub schema: SchemaMode,
    pub limit: SearchLimit,
}

/// All ways of joining `left` and `right` under `rel`.
///
/// A right daughter that is a single clause is resolved against the
/// consem of the left daughter, one node per priority-union result. A
/// complex right daughter is already resolved and is taken as is.
pub fn combine(
    h: &TypeHierarchy,
    rel: Relation,
    left: &DiscourseNode,
    right: &DiscourseNode,
    opts: &ParseOptions,
) -> Result<Vec<DiscourseNode>, OpsError> {
    let resolved: Vec<DiscourseNode> = match &right.kind {
        NodeKind::Leaf { sem, .. } => punion(h, sem, &left.consem, opts.limit)?
            .into_vec()
            .into_iter()
            .map(|r| DiscourseNode {
                consem: r,
                kind: right.kind.clone(),
            })
            .collect(),
        NodeKind::Internal { .. } => vec![right.clone()],
    };
    let mut out = Vec::new();
    for r in resolved {
        let schemas = match opts.schema {
            SchemaMode::Generalization => {
                vec![generalize(h, left.representative(), r.representative())]
            }
            SchemaMode::Mscd => {
                let unresolved = match &r.kind {
                    NodeKind::Leaf { sem, .. } => sem,
                    NodeKind::Internal { schema, .. } => schema,
                };
                mscd(h, left.representative(), unresolved, opts.limit)?.into_vec()
            }
        };
        for schema in schemas {
            if !opts.characteristic.accepts(h, &schema) {
                continue;
            }
            out.push(DiscourseNode {
                consem: r.consem.clone(),
                kind: NodeKind::Internal {
                    relation: rel,
                    schema,
                    left: Box::new(left.clone()),
                    right: Box::new(r.clone()),
                },
            });
        }
    }
    Ok(out)
}

/// Chart parse of the clause sequence. Each span is built from every split
/// point; nodes that differ only in relation label are merged, keeping list
/// over contrast. Readings come out sorted by shape, then content.
pub fn parse_discourse(
    h: &TypeHierarchy,
    dcus: &[Dcu],
    opts: &ParseOptions,
) -> Result<Vec<Reading>, OpsError> {
    let n = dcus.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    // chart[i][len - 1] holds the nodes spanning clauses i..i + len.
    let mut chart: Vec<Vec<Vec<DiscourseNode>>> = vec![vec![Vec::new(); n]; n];
    for (i, d) in dcus.iter().enumerate() {
        chart[i][0].push(DiscourseNode::leaf(i, d));
    }
    for len in 2..=n {
        for i in 0..=n - len {
            let mut cell = Vec::new();
            let mut seen = HashSet::new();
            for llen in 1..len {
                let rlen = len - llen;
                if opts.trees == TreeShapes::LeftBranching && rlen != 1 {
                    continue;
                }
                let rels = connective_relation(dcus[i + llen].connective);
                for left in &chart[i][llen - 1] {
                    for right in &chart[i + llen][rlen - 1] {
                        for &rel in rels {
                            for node in combine(h, rel, left, right, opts)? {
                                let mut key = String::new();
                                node.content_key(h, &mut key);
                                if seen.insert(key) {
                                    cell.push(node);
                                }
                            }
                        }
                    }
                }
            }
            chart[i][len - 1] = cell;
        }
    }
    let mut readings: Vec<(String, Reading)> = std::mem::take(&mut chart[0][n - 1])
        .into_iter()
        .map(|tree| {
            let mut key = tree.shape();
            key.push('\n');
            tree.content_key(h, &mut key);
            (key, Reading { tree })
        })
        .collect();
    readings.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(readings.into_iter().map(|(_, r)| r).collect())
}

/// One resolution of every clause in a cascade of ellipses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeReading {
    pub clauses: Vec<FeatureStructure>,
}

/// Resolves each clause after the first against every resolved value of
/// every earlier clause, then takes all combinations of per-clause results.
pub fn resolve_cascade(
    h: &TypeHierarchy,
    dcus: &[Dcu],
    limit: SearchLimit,
) -> Result<Vec<CascadeReading>, OpsError> {
    let Some(first) = dcus.first() else {
        return Ok(Vec::new());
    };
    let mut pool = vec![first.sem.clone()];
    let mut per_clause = vec![vec![first.sem.clone()]];
    for d in &dcus[1..] {
        let mut results: Vec<FeatureStructure> = Vec::new();
        for antecedent in &pool {
            for r in punion(h, &d.sem, antecedent, limit)?.into_vec() {
                if !results.contains(&r) {
                    results.push(r);
                }
            }
        }
        results.sort_by_cached_key(|r| print_avm(h, r));
        pool.extend(results.iter().cloned());
        per_clause.push(results);
    }
    let mut readings = vec![Vec::new()];
    for options in &per_clause {
        readings = readings
            .into_iter()
            .flat_map(|prefix: Vec<FeatureStructure>| {
                options.iter().map(move |o| {
                    let mut next = prefix.clone();
                    next.push(o.clone());
                    next
                })
            })
            .collect();
    }
    Ok(readings
        .into_iter()
        .map(|clauses| CascadeReading { clauses })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avm::parse_avm;
    use crate::fixtures;
    use crate::fs::{mgsat, subsumes};

    fn dcu(h: &TypeHierarchy, name: &str, c: Connective) -> Dcu {
        Dcu {
            id: name.into(),
            sem: fixtures::example_avm(h, name),
            connective: c,
        }
    }

    fn text(h: &TypeHierarchy, fs: &FeatureStructure) -> String {
        print_avm(h, fs)
    }

    #[test]
    fn connectives() {
        assert_eq!(connective_relation(Connective::And), &[Relation::List]);
        assert_eq!(connective_relation(Connective::Or), &[Relation::List]);
        assert_eq!(connective_relation(Connective::But), &[Relation::Contrast]);
        assert_eq!(connective_relation(Connective::None).len(), 2);
        assert_eq!("but".parse::<Connective>(), Ok(Connective::But));
        assert!("because".parse::<Connective>().is_err());
    }

    #[test]
    fn characteristic_default() {
        let h = fixtures::example_hierarchy();
        assert!(characteristic_gen(&h, &fixtures::example_avm(&h, "ex07")));
        assert!(characteristic_gen(&h, &fixtures::example_avm(&h, "ex06")));
        assert!(!characteristic_gen(&h, &mgsat(&h, h.root())));
        let vague = parse_avm(&h, "[agentive AGENT:[human]]").unwrap();
        assert!(!characteristic_gen(&h, &vague));
        let female = parse_avm(&h, "[agentive AGENT:[female]]").unwrap();
        assert!(characteristic_gen(&h, &female));
    }

    #[test]
    fn combine_resolves_and_generalizes() {
        let h = fixtures::example_hierarchy();
        let left = DiscourseNode::leaf(0, &dcu(&h, "ex05a", Connective::None));
        let right = DiscourseNode::leaf(1, &dcu(&h, "ex05d", Connective::None));
        let nodes = combine(&h, Relation::List, &left, &right, &ParseOptions::default()).unwrap();
        assert_eq!(nodes.len(), 1);
        assert_eq!(nodes[0].consem, fixtures::example_avm(&h, "ex13"));
        assert_eq!(nodes[0].schema(), Some(&fixtures::example_avm(&h, "ex06")));

        let right = DiscourseNode::leaf(1, &dcu(&h, "ex05b", Connective::None));
        let nodes = combine(&h, Relation::List, &left, &right, &ParseOptions::default()).unwrap();
        assert_eq!(text(&h, &nodes[0].consem), "[like AGENT:[thomas] PATIENT:[beetle]]");
        assert_eq!(
            text(&h, nodes[0].schema().unwrap()),
            "[like AGENT:[human] PATIENT:[beetle]]"
        );
    }

    #[test]
    fn combine_filters_vacuous_schemas() {
        let h = fixtures::example_hierarchy();
        let a = Dcu {
            id: "a".into(),
            sem: parse_avm(&h, "[like AGENT:[thomas] PATIENT:[ant]]").unwrap(),
            connective: Connective::None,
        };
        let b = Dcu {
            id: "b".into(),
            sem: parse_avm(&h, "[laugh AGENT:[jessy]]").unwrap(),
            connective: Connective::None,
        };
        let (l, r) = (DiscourseNode::leaf(0, &a), DiscourseNode::leaf(1, &b));
        let strict = ParseOptions::default();
        assert!(combine(&h, Relation::List, &l, &r, &strict).unwrap().is_empty());
        let permissive = ParseOptions {
            characteristic: Characteristic::Permissive,
            ..ParseOptions::default()
        };
        assert_eq!(combine(&h, Relation::List, &l, &r, &permissive).unwrap().len(), 1);
    }

    #[test]
    fn two_clause_discourses() {
        let h = fixtures::example_hierarchy();
        let opts = ParseOptions::default();
        let readings = parse_discourse(
            &h,
            &[dcu(&h, "ex05a", Connective::None), dcu(&h, "ex05b", Connective::None)],
            &opts,
        )
        .unwrap();
        assert_eq!(readings.len(), 1);
        assert_eq!(readings[0].tree.shape(), "list(1, 2)");
        assert_eq!(readings[0].root_consem(), &fixtures::example_avm(&h, "ex11"));

        let readings = parse_discourse(
            &h,
            &[
                dcu(&h, "ex15_source", Connective::None),
                dcu(&h, "ex15_target", Connective::None),
            ],
            &opts,
        )
        .unwrap();
        let consems: Vec<_> = readings.iter().map(|r| r.root_consem().clone()).collect();
        assert_eq!(
            consems,
            vec![fixtures::example_avm(&h, "ex26"), fixtures::example_avm(&h, "ex27")]
        );
    }

    fn eight(h: &TypeHierarchy) -> Vec<Dcu> {
        let mk = |id: &str, avm: &str, c| Dcu {
            id: id.into(),
            sem: parse_avm(h, avm).unwrap(),
            connective: c,
        };
        vec![
            mk("a", "[like AGENT:[hannah] PATIENT:[ant]]", Connective::None),
            mk("b", "[like AGENT:[thomas] PATIENT:[bee]]", Connective::None),
            mk("c", "[hate AGENT:[jessy]]", Connective::But),
        ]
    }

    #[test]
    fn contrast_inside_a_list() {
        let h = fixtures::example_hierarchy();
        let readings = parse_discourse(&h, &eight(&h), &ParseOptions::default()).unwrap();
        let r = readings
            .iter()
            .find(|r| r.tree.shape() == "list(1, contrast(2, 3))")
            .expect("right-branching reading");
        assert_eq!(
            text(&h, r.root_schema().unwrap()),
            "[emot_att AGENT:[human] PATIENT:[insect]]"
        );
        assert_eq!(text(&h, r.root_consem()), "[hate AGENT:[jessy] PATIENT:[bee]]");
        for r in &readings {
            let (l, _) = r.tree.children().unwrap();
            assert!(subsumes(&h, r.root_schema().unwrap(), &l.consem));
            assert!(subsumes(&h, r.root_schema().unwrap(), r.root_consem()));
        }

        let left_only = ParseOptions {
            trees: TreeShapes::LeftBranching,
            ..ParseOptions::default()
        };
        let readings = parse_discourse(&h, &eight(&h), &left_only).unwrap();
        assert!(readings.iter().all(|r| r.tree.is_left_branching()));
        assert!(!readings.is_empty());
    }

    #[test]
    fn mscd_schema_overcommits() {
        let h = fixtures::example_hierarchy();
        let opts = ParseOptions {
            schema: SchemaMode::Mscd,
            ..ParseOptions::default()
        };
        let readings = parse_discourse(&h, &eight(&h), &opts).unwrap();
        let r = readings
            .iter()
            .find(|r| r.tree.shape() == "list(1, contrast(2, 3))")
            .unwrap();
        assert_eq!(
            text(&h, r.root_schema().unwrap()),
            "[like AGENT:[hannah] PATIENT:[insect]]"
        );
        let (_, contrast) = r.tree.children().unwrap();
        assert_eq!(
            text(&h, contrast.schema().unwrap()),
            "[emot_att AGENT:[human] PATIENT:[bee]]"
        );
    }

    #[test]
    fn single_clause_and_empty() {
        let h = fixtures::example_hierarchy();
        let one = parse_discourse(&h, &[dcu(&h, "ex05a", Connective::None)], &ParseOptions::default())
            .unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0].tree.is_leaf());
        assert!(parse_discourse(&h, &[], &ParseOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn cascade_of_two_matches_the_parser() {
        let h = fixtures::example_hierarchy();
        let dcus = [
            dcu(&h, "ex15_source", Connective::None),
            dcu(&h, "ex15_target", Connective::None),
        ];
        let readings = resolve_cascade(&h, &dcus, SearchLimit::default()).unwrap();
        assert_eq!(readings.len(), 2);
        let dcus = [dcu(&h, "ex05a", Connective::None), dcu(&h, "ex05b", Connective::None)];
        assert_eq!(resolve_cascade(&h, &dcus, SearchLimit::default()).unwrap().len(), 1);
    }
}
