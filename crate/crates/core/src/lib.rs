//! Symbolic ranks and convergence analysis on Cantor space.
//!
//! The crate provides ordinal arithmetic in Cantor normal form, finitely
//! branching and schematic trees with ordinal ranks, symbolic points and
//! index sets on the Cantor space, a catalog of step-like functions with
//! dense sequences, separation ranks of functions on countable compacta,
//! decision procedures for pointwise convergence of subsequences, block
//! tree constructions with ordinal bounds, and explicit reductions
//! between these presentations. Every symbolic procedure is paired with
//! a finite brute-force oracle used by the test suite.

pub mod acceptance;
pub mod blocktrees;
pub mod cantor;
pub mod catalog;
pub mod convergence;
pub mod error;
pub mod generators;
pub mod ordinals;
pub mod rank;
pub mod reductions;
pub mod trees;

pub use acceptance::{CaseReport, CriterionReport};
pub use blocktrees::{
    BlockNode, BranchWitness, Extension, LimitNode, MonotoneReduction, TreeKind, TruncatedTree,
    TruncationCaps,
};
pub use cantor::{ClopenSet, Cylinder, IndexSet, Point, SiblingSelect, Word};
pub use catalog::{DenseSequence, LexInterval, NormalFn, Region, SymbolicFn};
pub use convergence::{LabeledTree, NodeLabel, Verdict};
pub use error::Error;
pub use ordinals::{Ordinal, RankBound};
pub use reductions::{DecidablePointSet, PsiCoding, RestrictedFamily};
pub use rank::{
    Attachment, AttachmentValues, CompactPresentation, ExamplePattern, FnOnCompact, RankExample,
    RankStats, TowerTop,
};
pub use trees::{BranchSet, FinTree, MonotoneMap, OmegaRule, TreeSchema};

/// Rational values used for function outputs and thresholds.
pub type Rational = num::rational::Ratio<i64>;

/// Convenience constructor for `Rational`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}
