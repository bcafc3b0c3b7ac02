//! Model checking for register automata over an infinite alphabet.
//!
//! Configurations are abstracted by representative matrices, which record
//! only which registers agree and which hold constants. The quotient graph
//! over these is finite and supports reachability and CTL checking.

pub mod automaton;
pub mod ctl;
pub mod dsl;
pub mod eqlogic;
pub mod error;
pub mod reach;
pub mod repr;

pub use automaton::{
    Action, Assignment, Configuration, ConstantSet, DataSymbol, Guard, GuardAtom, Polarity,
    RegisterAutomaton, Symbol, Term, Transition, Valuation,
};
pub use error::{Error, Result};
