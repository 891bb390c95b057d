//! Typed feature structures with generalization, MSCD and priority union,
//! and a small discourse grammar built on them.

pub mod atoms;
pub mod avm;
pub mod cli;
pub mod discourse;
pub mod fixtures;
pub mod formats;
pub mod fs;
pub mod ops;
mod scan;
pub mod types;

pub use atoms::{decompose, reassemble, Atom};
pub use avm::{parse_avm, print_avm};
pub use fs::{mgsat, subsumes, unify, FeatureStructure, Path};
pub use ops::{generalize, mscd, punion, skeptical_punion, ResultSet, SearchLimit};
pub use types::{TypeHierarchy, TypeId, FeatId};
