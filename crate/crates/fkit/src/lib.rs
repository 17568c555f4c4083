//! Graph calculus for deformation quantization on ℝ^d.
//!
//! The crate enumerates admissible graphs, evaluates their configuration-space
//! weights by quasi–Monte Carlo, assembles star products and the tangent maps
//! of the formality / chain formality expansions, and carries an exact-
//! arithmetic Duflo module for universal enveloping algebras.

pub mod algebra;
pub mod cli;
pub mod duflo;
pub mod formality;
pub mod geometry;
pub mod graphs;
pub mod integrate;
pub mod verify;
