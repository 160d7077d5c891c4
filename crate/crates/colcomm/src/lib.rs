//! Toolkit for the bipartite collision decision problem and the weak
//! bit-pigeonhole search problem.
//!
//! The crate provides four layers, one module each:
//!
//! - [`instances`]: lists of fixed-width numbers, their bipartite half-number
//!   splits, promise classification (1-to-1 / 2-to-1), seeded generators, and
//!   brute-force collision search.
//! - [`gadgets`]: small bipartite boolean functions stored as truth-table
//!   matrices, permutation-pair symmetry groups acting on their domains, and
//!   the regularity check (orbits equal preimages, action free and transitive
//!   on each preimage). Ships the versatile gadget `Ver` and two-bit `Xor`
//!   with their groups.
//! - [`unfold`]: the composed collision problem over a gadget and the
//!   rectangular unfold reduction that maps it to a plain bipartite collision
//!   instance, together with exhaustive/sampled verification of the
//!   reduction's set-structure properties.
//! - [`protocols`]: two-party protocol simulation with bit-exact cost
//!   accounting — the deterministic and randomized collision protocols, the
//!   plant-and-shuffle decision-to-search reduction to weak bit-pigeonhole,
//!   pluggable pigeonhole oracles, and a Monte-Carlo success estimator.
//!
//! The [`cli`] module wires everything into the `colcomm` binary.

pub mod cli;
pub mod error;
pub mod gadgets;
pub mod instances;
pub mod protocols;
pub mod rng;
pub mod unfold;

pub use error::{Error, Result};
