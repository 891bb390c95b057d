//! The example set shipped under `fixtures/`, embedded at compile time.

use crate::avm::parse_avm;
use crate::fs::FeatureStructure;
use crate::types::TypeHierarchy;

pub const HIERARCHY: &str = include_str!("../../../fixtures/paper.hier");
pub const LEXICON: &str = include_str!("../../../fixtures/paper_examples.lex");

macro_rules! table {
    ($dir:literal, $ext:literal: $($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../../fixtures/", $dir, $name, $ext)))),*]
    };
}
const AVMS: &[(&str, &str)] = table!("paper/", ".avm":
    "ex05a",
    "ex05b",
    "ex05c",
    "ex05d",
    "ex06",
    "ex07",
    "ex09_root",
    "ex10_root",
    "ex11",
    "ex12",
    "ex13",
    "ex15_source",
    "ex15_target",
    "ex25_d1",
    "ex25_d2",
    "ex25_d3",
    "ex25_d4",
    "ex25_s",
    "ex26",
    "ex27",
    "ex28",
    "ex29",
    "ex32",
);
const TEXTS: &[(&str, &str)] = table!("paper/", "":
    "ex24.atoms",
    "ex24_strict.atoms",
    "ex30.atoms",
    "ex31.atoms",
);
const DISCOURSES: &[(&str, &str)] = table!("discourse/", ".disc":
    "1a",
    "1b",
    "1c",
    "8",
    "14",
    "19",
);

/// Names of the shipped AVM fixtures, without extension.
pub const EXAMPLE_AVMS: &[&str] = &[
    "ex05a",
    "ex05b",
    "ex05c",
    "ex05d",
    "ex06",
    "ex07",
    "ex09_root",
    "ex10_root",
    "ex11",
    "ex12",
    "ex13",
    "ex15_source",
    "ex15_target",
    "ex25_d1",
    "ex25_d2",
    "ex25_d3",
    "ex25_d4",
    "ex25_s",
    "ex26",
    "ex27",
    "ex28",
    "ex29",
    "ex32",
];

/// Names of the shipped discourse files, without extension.
pub const DISCOURSE_NAMES: &[&str] = &["1a", "1b", "1c", "8", "14", "19"];

fn lookup(table: &'static [(&'static str, &'static str)], name: &str) -> &'static str {
    table
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .unwrap_or_else(|| panic!("no fixture named {name:?}"))
}

pub fn example_hierarchy() -> TypeHierarchy {
    HIERARCHY.parse().expect("fixture hierarchy compiles")
}

pub fn example_avm_text(name: &str) -> &'static str {
    lookup(AVMS, name)
}

pub fn example_avm(h: &TypeHierarchy, name: &str) -> FeatureStructure {
    parse_avm(h, example_avm_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Non-AVM files under `fixtures/paper/`, by file name.
pub fn example_text(file: &str) -> &'static str {
    lookup(TEXTS, file)
}

pub fn discourse_text(name: &str) -> &'static str {
    lookup(DISCOURSES, name)
}
