//! Weighted finite-state transducers over exchangeable semirings.
//!
//! The crate provides:
//!
//! - weights and semirings ([`semiring`]): tropical, log, and probability;
//! - machines, builders, and a brute-force path oracle ([`fst`]);
//! - a deterministic text format ([`text`]);
//! - rational operations — union, concatenation, closure ([`rational`]);
//! - composition with the ε-filter, eagerly or on demand ([`compose`]);
//! - ε-removal, weighted determinization, weight pushing, minimization
//!   ([`optimize`]);
//! - shortest distance and best-path search ([`search`]);
//! - a toy speech-recognition cascade built from the above ([`cascade`]);
//! - the `wfst` command-line toolkit ([`cli`]).
//!
//! ```
//! use wfst::fst::{Arc, FstBuilder, SymbolTable};
//! use wfst::search::shortest_path;
//! use wfst::semiring::{Semiring, Weight};
//!
//! let syms = SymbolTable::from_symbols(["a", "b"]);
//! let a = syms.find("a").unwrap();
//! let b = syms.find("b").unwrap();
//! let mut builder = FstBuilder::with_symbols(Semiring::Tropical, syms.clone(), syms);
//! let q = builder.add_states(2);
//! builder.set_start(q[0]);
//! builder.add_arc(q[0], Arc::new(a, b, Weight::new(1.5), q[1]));
//! builder.set_final(q[1], Weight::new(0.0));
//! let f = builder.build().unwrap();
//!
//! let (input, output, weight) = shortest_path(&f).unwrap().unwrap();
//! assert_eq!((input, output), (vec![a], vec![b]));
//! assert_eq!(weight, Weight::new(1.5));
//! ```

pub mod cascade;
pub mod cli;
pub mod compose;
pub mod error;
pub mod fst;
pub mod optimize;
pub mod rational;
pub mod search;
pub mod semiring;
pub mod text;

pub use error::{Error, Result};
pub use fst::{Arc, Fst, FstBuilder, Label, StateId, SymbolTable, EPSILON};
pub use semiring::{Semiring, Weight};

/// Keeps the guide's code blocks compiling; each chapter of `book/` is run
/// as a doctest.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    chapter!(semirings, "../../../book/src/semirings.md");
    chapter!(machines, "../../../book/src/machines.md");
    chapter!(rational, "../../../book/src/rational.md");
    chapter!(composition, "../../../book/src/composition.md");
    chapter!(optimization, "../../../book/src/optimization.md");
    chapter!(search, "../../../book/src/search.md");
    chapter!(cascade, "../../../book/src/cascade.md");
    chapter!(cli, "../../../book/src/cli.md");
}
