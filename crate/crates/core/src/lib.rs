//! S-machines, the staged construction of an accepting machine, and the
//! group presentation compiled from it.

pub mod blueprint;
pub mod compute;
pub mod constructors;
pub mod error;
pub mod format;
pub mod harness;
pub mod machine;
pub mod presentation;
pub mod search;
pub mod trapezia;
pub mod word;

pub use compute::{
    apply_rule, enumerate_computations, is_applicable, is_eligible, run_history, step_history,
    Computation, HistoryFilter,
};
pub use error::{Error, Result};
pub use machine::{AdmissibleWord, Hardware, History, Rule, RuleRef, SMachine};
pub use word::{reduce_word, Letter, Sym, Word};
