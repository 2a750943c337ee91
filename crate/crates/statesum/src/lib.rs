//! A combinatorial engine for state-sum topological invariants in
//! dimensions 2 and 3.
//!
//! The crate is organised around one pipeline:
//!
//! * [`mesh`] — oriented triangulations with an injective rational height
//!   function on vertices, oriented Pachner moves, boundary gluing, and a
//!   small census of built-in manifolds.
//! * [`euler`] — stratified complexes, ordinary and relative Euler
//!   characteristics, and invertible Euler weights.
//! * [`frob`] — finite-dimensional Frobenius algebra data and the axiom
//!   checks that make the 2d state sum move-invariant.
//! * [`tqft2d`] — the 2d state sum: closed invariants, bordism operators,
//!   cylinder idempotents and state spaces, point-insertion algebras, and
//!   local Pachner checks.
//! * [`fusioncat`] — multiplicity-free fusion data with F-matrices and the
//!   ten-constraint check (pentagon, six lens constraints, three bubble
//!   constraints) that characterises a special orbifold datum in 3d.
//! * [`statesum3d`] — the 3d state sum: closed invariants, ball tensors
//!   with free boundary indices, gluing, and the full census of oriented
//!   2-3 / 1-4 move checks plus bubble moves.
//! * [`cli`] — a thin command-line front end over the library.
//!
//! Scalars are generic: exact arbitrary-precision rationals
//! ([`scalar::Rat`]) or complex floating point with an explicit tolerance
//! ([`scalar::Cx`]). Exact data stays exact end to end; nothing silently
//! converts.

pub mod scalar;
pub mod mesh;
pub mod euler;
pub mod frob;
pub mod tqft2d;
pub mod fusioncat;
pub mod statesum3d;
pub mod report;
pub mod io;
pub mod cli;
