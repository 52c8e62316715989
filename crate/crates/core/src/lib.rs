//! Exact-arithmetic Top Trading Cycles and checkers for the
//! stochastic-dominance and ex-post axioms it is judged by.
//!
//! All arithmetic is over [`Rational`]; no floating point enters a verdict.

pub mod axioms;
pub mod error;
pub mod harness;
pub mod io;
pub mod limits;
pub mod lp;
pub mod matrix;
pub mod prefs;
pub mod rational;
pub mod rule;
pub mod ttc;

pub use axioms::{Axiom, AxiomVerdict, Witness};
pub use error::{Error, Result};
pub use matrix::{BistochasticMatrix, DeterministicAssignment};
pub use prefs::{Domain, ObjectId, Preference, Profile};
pub use rational::Rational;
pub use rule::AssignmentRule;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/preferences.md")]
    mod preferences {}
    #[doc = include_str!("../../../book/src/ttc.md")]
    mod ttc {}
    #[doc = include_str!("../../../book/src/sd_axioms.md")]
    mod sd_axioms {}
    #[doc = include_str!("../../../book/src/ex_post.md")]
    mod ex_post {}
    #[doc = include_str!("../../../book/src/lp.md")]
    mod lp {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
