//! Computational companion for aperiodicity questions about `IA(F_N, 3)`:
//! free-group words and automorphisms, homology actions, finite graphs,
//! Stallings folding, Bass–Serre splittings, relative train tracks and a
//! randomized experiment harness.

pub mod aut;
pub mod error;
pub mod graphs;
pub mod harness;
pub mod homology;
pub mod subgroups;
mod poly;
pub mod rtt;
pub mod splittings;
pub mod words;

pub use error::{Error, Result};
