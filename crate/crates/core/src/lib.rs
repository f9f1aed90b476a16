//! Automata and transducers over infinite words with advice.
//!
//! The crate executes Mealy machines, one-way and two-way finite
//! transducers, two-way transducers with lookbehind and copyless streaming
//! string transducers on lazily evaluated infinite words, and implements
//! constructive conversions between these models. Every conversion is
//! checked the same way: by comparing output prefixes letter by letter
//! against an independent execution.

pub mod advice;
pub mod analysis;
pub mod doc;
pub mod ltl;
pub mod mealy;
pub mod sst;
pub mod suites;
pub mod transducers;
pub mod words;

pub use advice::{AdviceLanguage, BuchiAutomaton, Dfa};
pub use ltl::LtlFormula;
pub use mealy::MealyMachine;
pub use sst::{SimpleSst, Sst, Substitution};
pub use transducers::{
    LookbehindTransducer, OneWayTransducer, RunOutcome, RunStatus, TwoWayTransducer,
};
pub use words::{Alphabet, InfiniteWord, LassoWord, Word};
