//! Formulas of the localised team logics: AST, parser, printer, and the
//! syntactic operations (free variables, quantifier rank, negation normal form).

mod formula;
mod parse;
mod print;
mod types;

pub use formula::{to_nnf, AtomKind, Census, Formula, OmegaProfile};
pub use parse::{parse_formula, parse_formula_infer};
pub use print::FormulaDisplay;
pub use types::{FiniteType, RelId, Var, VarSet, MAX_VARIABLES};

pub(crate) use parse::{Lexer, Token};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("syntax error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown variable `{name}` at offset {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("unknown relation `{name}` at offset {pos}")]
    UnknownRelation { name: String, pos: usize },
    #[error("relation `{rel}` expects {expected} argument(s), found {found} (offset {pos})")]
    ArityMismatch {
        rel: String,
        expected: usize,
        found: usize,
        pos: usize,
    },
    #[error("tuples of different length {left} and {right} (offset {pos})")]
    TupleLength {
        left: usize,
        right: usize,
        pos: usize,
    },
    #[error("empty variable tuple at offset {pos}")]
    EmptyTuple { pos: usize },
    #[error("dual atom `{0}` is not in the enabled atom profile")]
    AtomNotInProfile(AtomKind),
    #[error("invalid type: {0}")]
    InvalidType(String),
}
