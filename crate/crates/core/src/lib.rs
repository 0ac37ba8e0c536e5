//! Finite directed multigraphs, graph moves and block maps for one-sided
//! edge shifts, together with balanced (strong) shift equivalence of
//! nonnegative integer matrices.
//!
//! The crate provides:
//!
//! * [`graph`] — the multigraph model: paths, higher block graphs,
//!   adjacency matrices, isomorphism testing, JSON and DOT output;
//! * [`matrix`] — exact integer matrices, division/amalgamation matrices,
//!   verification and bounded decision of balanced elementary equivalence,
//!   and certificate search for balanced strong shift equivalence;
//! * [`moves`] — out-splits, in-splits (empty cells allowed), balanced and
//!   iterated balanced in-splits, their matrix factorizations, and the
//!   source-attachment chain connecting iterated splits by elementary ones;
//! * [`blockmap`] — block maps with memory and anticipation, sliding
//!   verification, the bijectivity-condition checks, and the constructive
//!   witnesses built from split histories and from equivalence triples;
//! * [`equivalence`] — top-level eventual-conjugacy witness pipelines.
//!
//! Everything is finite and exact: infinite paths are represented by their
//! prefixes, every check is an exhaustive finite-depth verification with the
//! depth recorded, and all matrix arithmetic is arbitrary-precision integer
//! arithmetic.

pub mod blockmap;
pub mod equivalence;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod moves;

pub use error::{Error, Result};
