//! Invariants and representation obstructions for graph manifolds glued from
//! trivially fibered Seifert blocks over surfaces of genus at least two.
//!
//! The crate is organized around three layers:
//!
//! * combinatorial data — [`manifold`] holds the dual graph, gluing matrices,
//!   and the exact rational invariants (intersection indices, charges, strict
//!   diagonal dominance), with [`covers`] providing cut-and-copy double covers
//!   and invariant scaling;
//! * exact certification — [`linalg`] implements fraction-free integer
//!   determinants and adjugates, [`obstruction`] assembles the associated
//!   matrix of an abelian component and derives the fiber contradictions, and
//!   [`certificate`] freezes the result into a replayable document;
//! * analytic models — [`motion`] is arithmetic in the motion group of a
//!   trivial circle bundle (a central extension of `PSL(2, R)` acting on the
//!   circle of directions), and [`rep`] builds explicit representations by
//!   ping-pong seeding and abelian extension along a tree.
//!
//! File formats (the line-oriented manifold description and lossless float
//! encodings) live in [`format`].

pub mod certificate;
pub mod covers;
pub mod format;
pub mod linalg;
pub mod manifold;
pub mod motion;
pub mod obstruction;
pub mod rep;
