//! Rational operations: union-sum, concatenation and Kleene closure.
//!
//! All three are built from ε:ε glue arcs rather than state merging; the
//! ε's are removable later by `rm_epsilon`. Operands must share a semiring
//! and symbol tables.

use crate::error::{Error, Result};
use crate::fst::{Arc, Fst, FstBuilder, StateId, EPSILON};
use crate::optimize::epsilon_divergence;

fn check_compat(a: &Fst, b: &Fst) -> Result<()> {
    if a.semiring() != b.semiring() {
        return Err(Error::SemiringMismatch {
            left: a.semiring(),
            right: b.semiring(),
        });
    }
    if a.isyms() != b.isyms() {
        return Err(Error::SymbolTableMismatch("input tables differ".to_string()));
    }
    if a.osyms() != b.osyms() {
        return Err(Error::SymbolTableMismatch("output tables differ".to_string()));
    }
    Ok(())
}

/// Copies all states and arcs of `src` into `b`, returning the id offset.
fn splice(b: &mut FstBuilder, src: &Fst) -> usize {
    let offset = b.num_states();
    b.add_states(src.num_states());
    for s in src.state_ids() {
        for a in src.arcs(s) {
            b.add_arc(
                StateId(s.0 + offset),
                Arc::new(a.ilabel, a.olabel, a.weight, StateId(a.nextstate.0 + offset)),
            );
        }
    }
    offset
}

/// Union-sum: the result assigns `(r, s)` the weight `a(r,s) ⊕ b(r,s)`.
///
/// A fresh start state fans out to both operands through ε:ε arcs carrying
/// the operands' initial weights.
pub fn union(a: &Fst, b: &Fst) -> Result<Fst> {
    check_compat(a, b)?;
    let sem = a.semiring();
    let mut out = FstBuilder::with_symbols(sem, a.isyms().clone(), a.osyms().clone());
    let start = out.add_state();
    out.set_start(start);
    let offa = splice(&mut out, a);
    let offb = splice(&mut out, b);
    out.add_arc(
        start,
        Arc::new(EPSILON, EPSILON, a.initial_weight(), StateId(a.start().0 + offa)),
    );
    out.add_arc(
        start,
        Arc::new(EPSILON, EPSILON, b.initial_weight(), StateId(b.start().0 + offb)),
    );
    for (s, w) in a.finals() {
        out.set_final(StateId(s.0 + offa), w);
    }
    for (s, w) in b.finals() {
        out.set_final(StateId(s.0 + offb), w);
    }
    out.build()
}

/// Concatenation: the result assigns `(r, s)` the ⊕-sum over all splits
/// `r = r₁r₂, s = s₁s₂` of `a(r₁,s₁) ⊗ b(r₂,s₂)`.
///
/// Each final state of `a` gains an ε:ε arc (carrying its final weight ⊗
/// `b`'s initial weight) into `b`'s start; `a`'s finality is dropped.
pub fn concat(a: &Fst, b: &Fst) -> Result<Fst> {
    check_compat(a, b)?;
    let sem = a.semiring();
    let mut out = FstBuilder::with_symbols(sem, a.isyms().clone(), a.osyms().clone());
    let offa = splice(&mut out, a);
    let offb = splice(&mut out, b);
    out.set_start(StateId(a.start().0 + offa));
    out.set_initial_weight(a.initial_weight());
    for (s, w) in a.finals() {
        out.add_arc(
            StateId(s.0 + offa),
            Arc::new(
                EPSILON,
                EPSILON,
                sem.times(w, b.initial_weight()),
                StateId(b.start().0 + offb),
            ),
        );
    }
    for (s, w) in b.finals() {
        out.set_final(StateId(s.0 + offb), w);
    }
    out.build()
}

/// Kleene closure: `⊕_{n≥0} aⁿ`. Accepts `(ε, ε)` with at least weight one.
///
/// A fresh state is both start and final; it enters the operand through an
/// ε:ε arc carrying the initial weight, and every operand final loops back
/// through an ε:ε arc carrying its final weight. Errors when the resulting
/// ε-cycle makes the closure sum ⊕-divergent in the active semiring.
pub fn closure(a: &Fst) -> Result<Fst> {
    let sem = a.semiring();
    let mut out = FstBuilder::with_symbols(sem, a.isyms().clone(), a.osyms().clone());
    let hub = out.add_state();
    out.set_start(hub);
    out.set_final(hub, sem.one());
    let off = splice(&mut out, a);
    out.add_arc(
        hub,
        Arc::new(EPSILON, EPSILON, a.initial_weight(), StateId(a.start().0 + off)),
    );
    for (s, w) in a.finals() {
        out.add_arc(StateId(s.0 + off), Arc::new(EPSILON, EPSILON, w, hub));
    }
    let result = out.build()?;
    if let Some(msg) = epsilon_divergence(&result) {
        return Err(Error::Divergent(msg));
    }
    Ok(result)
}
