//! Localised team logics `L[Ω]`: formulas evaluated at a single assignment of a
//! fixed team, with local dependence, anonymity, inclusion, exclusion,
//! independence and equality atoms.
//!
//! The crate provides parsing and printing ([`syntax`]), finite dependence
//! models ([`model`]), a model checker ([`checker`]), a first-order evaluator
//! and translations ([`fo`]), bisimulation refinement ([`bisim`]),
//! characteristic formulas ([`charform`]) and reduction encoders ([`reduce`]).

pub mod bisim;
pub mod charform;
pub mod checker;
pub mod fo;
pub mod model;
pub mod reduce;
pub mod syntax;
