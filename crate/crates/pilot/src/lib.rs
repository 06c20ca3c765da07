//! Deadlock-freedom, progress and race analysis for recursion-free
//! π-calculus processes by proof search, with choreography extraction.

pub mod choreography;
pub mod chorl;
pub mod corpus;
pub mod formula;
pub mod process;
pub mod prover;
pub mod semantics;
pub mod syntax;
