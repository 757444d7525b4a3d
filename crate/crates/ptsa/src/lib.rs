//! Monte Carlo tree search with probabilistic tree-state abstraction.
//!
//! The crate has five layers. [`mdp`] holds exact finite environments and a
//! value-iteration oracle. [`tree`] is the PUCT search tree with pruning and
//! visit merging. [`abstraction`] defines the state-equivalence predicates,
//! the path-level aggregation probability, and their verification
//! machinery. [`model`] supplies the prediction oracles the search queries,
//! and [`harness`] drives full searches, experiments, and metric emission.

pub mod abstraction;
pub mod harness;
pub mod mdp;
pub mod model;
pub mod tree;

// The guide's code samples run as doc-tests, so the book in `book/` cannot
// drift from the crate. These items exist only under rustdoc's test pass.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/environments.md")]
pub struct GuideEnvironments;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/predicates.md")]
pub struct GuidePredicates;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/aggregation.md")]
pub struct GuideAggregation;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/search.md")]
pub struct GuideSearch;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/harness.md")]
pub struct GuideHarness;
