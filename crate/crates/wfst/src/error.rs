//! Error type shared by the whole toolkit.

use thiserror::Error;

use crate::fst::StateId;
use crate::semiring::Semiring;

#[derive(Debug, Error)]
pub enum Error {
    #[error("semiring mismatch: {left} vs {right}")]
    SemiringMismatch { left: Semiring, right: Semiring },

    #[error("symbol table mismatch: {0}")]
    SymbolTableMismatch(String),

    #[error("alphabet mismatch: output table of the left operand differs from input table of the right operand")]
    AlphabetMismatch,

    #[error("division by semiring zero")]
    DivisionByZero,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown symbol `{symbol}` at line {line}")]
    UnknownSymbol { symbol: String, line: usize },

    #[error("input is not an acceptor (arc with ilabel != olabel)")]
    NotAcceptor,

    #[error("input is not deterministic (state {state} has multiple arcs on the same label)")]
    NotDeterministic { state: StateId },

    #[error("input has epsilon arcs; run rmepsilon first")]
    HasEpsilon,

    #[error("divergent sum: {0}")]
    Divergent(String),

    #[error("path enumeration exceeded the cap of {cap} paths")]
    EnumerationLimit { cap: usize },

    #[error("possibly non-determinizable: subset construction exceeded {max_states} states")]
    StateLimit { max_states: usize },

    #[error("no accepting path")]
    NoPath,

    #[error("state {0} is not co-accessible (no path to a final state)")]
    NotCoAccessible(StateId),

    #[error("unknown state id {0}")]
    UnknownState(StateId),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
