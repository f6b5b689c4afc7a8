//! Weighted composition with the 3-state ε-filter, eager and lazy.
//!
//! The composed machine denotes `C(r,t) = ⊕_s A(r,s) ⊗ B(s,t)`. With ε
//! labels present, a naive product machine finds one path per interleaving of
//! A-side and B-side null moves and ⊕-sums the same weight several times.
//! The filter state carried in each composed triple `(qa, qb, f)` prunes the
//! redundant interleavings so each pair of operand paths contributes exactly
//! once: between two matches, all A-side null moves must come before all
//! B-side ones.
//!
//! [`LazyFst`] builds the same machine on demand, interning composed states
//! as they are first reached and optionally memoizing expanded arc lists.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fst::{Arc, Fst, FstBuilder, StateId, SymbolTable, EPSILON};
use crate::semiring::{Semiring, Weight};

/// The three ways a composed machine can advance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsMoveKind {
    /// Both sides consume one matching non-ε label.
    Match,
    /// A advances on an output-ε arc; B stays.
    AOnly,
    /// B advances on an input-ε arc; A stays.
    BOnly,
}

/// Filter coordinate of a composed state: 0 neutral, 1 A-side ε-run,
/// 2 B-side ε-run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FilterState(pub u8);

pub const FILTER_START: FilterState = FilterState(0);

/// The filter transition table. `None` means the interleaving is pruned.
///
/// A match resets to neutral. A-side ε-runs may start from neutral or
/// continue, and may hand over to a B-side run; once a B-side run has begun,
/// switching back to A-side moves is blocked. This keeps exactly one
/// canonical interleaving (all A moves first) per redundant family.
pub fn filter_transition(f: FilterState, m: EpsMoveKind) -> Option<FilterState> {
    match (f.0, m) {
        (_, EpsMoveKind::Match) => Some(FilterState(0)),
        (0 | 1, EpsMoveKind::AOnly) => Some(FilterState(1)),
        (_, EpsMoveKind::AOnly) => None,
        (_, EpsMoveKind::BOnly) => Some(FilterState(2)),
    }
}

/// A composed state: a state in each operand plus the filter coordinate.
pub type ComposedState = (StateId, StateId, FilterState);

/// An arc of the composed machine before its target triple is interned.
struct RawArc {
    ilabel: crate::fst::Label,
    olabel: crate::fst::Label,
    weight: Weight,
    target: ComposedState,
}

/// Computes the arcs leaving composed state `(qa, qb, f)` from the operands'
/// arc lists, by sort-and-merge on (A output label, B input label).
fn expand_state(
    sem: Semiring,
    a_arcs: &[Arc],
    b_arcs: &[Arc],
    qa: StateId,
    qb: StateId,
    f: FilterState,
) -> Vec<RawArc> {
    let mut out = Vec::new();

    // A-side ε moves, in A arc order.
    if let Some(f2) = filter_transition(f, EpsMoveKind::AOnly) {
        for pa in a_arcs.iter().filter(|a| a.olabel.is_epsilon()) {
            out.push(RawArc {
                ilabel: pa.ilabel,
                olabel: EPSILON,
                weight: pa.weight,
                target: (pa.nextstate, qb, f2),
            });
        }
    }

    // Matches: sort both sides by the shared label and merge.
    let mut ai: Vec<&Arc> = a_arcs.iter().filter(|a| !a.olabel.is_epsilon()).collect();
    let mut bi: Vec<&Arc> = b_arcs.iter().filter(|b| !b.ilabel.is_epsilon()).collect();
    ai.sort_by_key(|a| a.olabel);
    bi.sort_by_key(|b| b.ilabel);
    let f2 = filter_transition(f, EpsMoveKind::Match).expect("match is never blocked");
    let mut j0 = 0usize;
    for pa in &ai {
        while j0 < bi.len() && bi[j0].ilabel < pa.olabel {
            j0 += 1;
        }
        let mut j = j0;
        while j < bi.len() && bi[j].ilabel == pa.olabel {
            let pb = bi[j];
            out.push(RawArc {
                ilabel: pa.ilabel,
                olabel: pb.olabel,
                weight: sem.times(pa.weight, pb.weight),
                target: (pa.nextstate, pb.nextstate, f2),
            });
            j += 1;
        }
    }

    // B-side ε moves, in B arc order.
    if let Some(f2) = filter_transition(f, EpsMoveKind::BOnly) {
        for pb in b_arcs.iter().filter(|b| b.ilabel.is_epsilon()) {
            out.push(RawArc {
                ilabel: EPSILON,
                olabel: pb.olabel,
                weight: pb.weight,
                target: (qa, pb.nextstate, f2),
            });
        }
    }

    out
}

fn check_operands(
    sem_a: Semiring,
    sem_b: Semiring,
    a_osyms: &SymbolTable,
    b_isyms: &SymbolTable,
) -> Result<()> {
    if sem_a != sem_b {
        return Err(Error::SemiringMismatch {
            left: sem_a,
            right: sem_b,
        });
    }
    if a_osyms != b_isyms {
        return Err(Error::AlphabetMismatch);
    }
    Ok(())
}

/// Eager composition: builds the reachable part of the filtered product in
/// breadth-first discovery order.
pub fn compose_eager(a: &Fst, b: &Fst) -> Result<Fst> {
    check_operands(a.semiring(), b.semiring(), a.osyms(), b.isyms())?;
    let sem = a.semiring();
    let mut builder = FstBuilder::with_symbols(sem, a.isyms().clone(), b.osyms().clone());
    let mut intern: HashMap<ComposedState, StateId> = HashMap::new();
    let mut triples: Vec<ComposedState> = Vec::new();

    let start_triple = (a.start(), b.start(), FILTER_START);
    let s0 = builder.add_state();
    intern.insert(start_triple, s0);
    triples.push(start_triple);
    builder.set_start(s0);
    builder.set_initial_weight(sem.times(a.initial_weight(), b.initial_weight()));

    let mut next = 0usize;
    while next < triples.len() {
        let (qa, qb, f) = triples[next];
        let here = StateId(next);
        next += 1;
        if let (Some(wa), Some(wb)) = (a.final_weight(qa), b.final_weight(qb)) {
            builder.set_final(here, sem.times(wa, wb));
        }
        for raw in expand_state(sem, a.arcs(qa), b.arcs(qb), qa, qb, f) {
            let target = *intern.entry(raw.target).or_insert_with(|| {
                triples.push(raw.target);
                builder.add_state()
            });
            builder.add_arc(here, Arc::new(raw.ilabel, raw.olabel, raw.weight, target));
        }
    }
    builder.build()
}

/// A machine whose states can be expanded one at a time. Explicit machines
/// and lazy compositions share this surface, so cascades can be chained
/// without materializing intermediates.
pub trait ExpandFst {
    fn semiring(&self) -> Semiring;
    fn start(&self) -> StateId;
    fn initial_weight(&self) -> Weight;
    fn isyms(&self) -> &SymbolTable;
    fn osyms(&self) -> &SymbolTable;
    /// Arcs and final weight of one state.
    fn expand(&self, s: StateId) -> Result<(Vec<Arc>, Option<Weight>)>;
}

impl ExpandFst for Fst {
    fn semiring(&self) -> Semiring {
        Fst::semiring(self)
    }

    fn start(&self) -> StateId {
        Fst::start(self)
    }

    fn initial_weight(&self) -> Weight {
        Fst::initial_weight(self)
    }

    fn isyms(&self) -> &SymbolTable {
        Fst::isyms(self)
    }

    fn osyms(&self) -> &SymbolTable {
        Fst::osyms(self)
    }

    fn expand(&self, s: StateId) -> Result<(Vec<Arc>, Option<Weight>)> {
        if s.0 >= self.num_states() {
            return Err(Error::UnknownState(s));
        }
        Ok((self.arcs(s).to_vec(), self.final_weight(s)))
    }
}

struct LazyInner {
    intern: HashMap<ComposedState, StateId>,
    triples: Vec<ComposedState>,
    memo: HashMap<StateId, (Vec<Arc>, Option<Weight>)>,
}

/// On-demand composition. States are created the first time they are
/// reached; expanded arc lists are saved for reuse unless caching is
/// disabled. Expansion calls must be externally serialized (the memo is
/// interior-mutable); fully expanding a `LazyFst` yields a machine identical
/// to [`compose_eager`]'s output.
pub struct LazyFst<'a> {
    a: &'a dyn ExpandFst,
    b: &'a dyn ExpandFst,
    caching: bool,
    inner: RefCell<LazyInner>,
    operand_expansions: Cell<u64>,
}

impl<'a> LazyFst<'a> {
    pub fn new(a: &'a dyn ExpandFst, b: &'a dyn ExpandFst) -> Result<Self> {
        Self::with_caching(a, b, true)
    }

    pub fn with_caching(a: &'a dyn ExpandFst, b: &'a dyn ExpandFst, caching: bool) -> Result<Self> {
        check_operands(a.semiring(), b.semiring(), a.osyms(), b.isyms())?;
        let start_triple = (a.start(), b.start(), FILTER_START);
        let mut intern = HashMap::new();
        intern.insert(start_triple, StateId(0));
        Ok(LazyFst {
            a,
            b,
            caching,
            inner: RefCell::new(LazyInner {
                intern,
                triples: vec![start_triple],
                memo: HashMap::new(),
            }),
            operand_expansions: Cell::new(0),
        })
    }

    /// Number of composed states created so far.
    pub fn num_known_states(&self) -> usize {
        self.inner.borrow().triples.len()
    }

    /// Instrumentation: how many operand-state expansions have been
    /// performed. With caching on, re-expanding a state does not grow this.
    pub fn operand_expansions(&self) -> u64 {
        self.operand_expansions.get()
    }

    fn expand_uncached(&self, s: StateId) -> Result<(Vec<Arc>, Option<Weight>)> {
        let (qa, qb, f) = {
            let inner = self.inner.borrow();
            *inner.triples.get(s.0).ok_or(Error::UnknownState(s))?
        };
        let (a_arcs, a_final) = self.a.expand(qa)?;
        let (b_arcs, b_final) = self.b.expand(qb)?;
        self.operand_expansions
            .set(self.operand_expansions.get() + 2);
        let sem = self.a.semiring();
        let final_weight = match (a_final, b_final) {
            (Some(wa), Some(wb)) => Some(sem.times(wa, wb)),
            _ => None,
        };
        let raw = expand_state(sem, &a_arcs, &b_arcs, qa, qb, f);
        let mut inner = self.inner.borrow_mut();
        let mut arcs = Vec::with_capacity(raw.len());
        for r in raw {
            let target = match inner.intern.get(&r.target) {
                Some(&t) => t,
                None => {
                    let t = StateId(inner.triples.len());
                    inner.intern.insert(r.target, t);
                    inner.triples.push(r.target);
                    t
                }
            };
            arcs.push(Arc::new(r.ilabel, r.olabel, r.weight, target));
        }
        Ok((arcs, final_weight))
    }

    /// Fully expands the reachable part into an explicit machine, in
    /// breadth-first order.
    pub fn expand_all(&self) -> Result<Fst> {
        let sem = self.a.semiring();
        let mut builder =
            FstBuilder::with_symbols(sem, self.a.isyms().clone(), self.b.osyms().clone());
        let s0 = builder.add_state();
        builder.set_start(s0);
        builder.set_initial_weight(ExpandFst::initial_weight(self));
        let mut next = 0usize;
        while next < builder.num_states() {
            let here = StateId(next);
            next += 1;
            let (arcs, final_weight) = self.expand(here)?;
            for a in &arcs {
                while builder.num_states() <= a.nextstate.0 {
                    builder.add_state();
                }
                builder.add_arc(here, *a);
            }
            if let Some(w) = final_weight {
                builder.set_final(here, w);
            }
        }
        builder.build()
    }
}

impl ExpandFst for LazyFst<'_> {
    fn semiring(&self) -> Semiring {
        self.a.semiring()
    }

    fn start(&self) -> StateId {
        StateId(0)
    }

    fn initial_weight(&self) -> Weight {
        self.a
            .semiring()
            .times(self.a.initial_weight(), self.b.initial_weight())
    }

    fn isyms(&self) -> &SymbolTable {
        self.a.isyms()
    }

    fn osyms(&self) -> &SymbolTable {
        self.b.osyms()
    }

    fn expand(&self, s: StateId) -> Result<(Vec<Arc>, Option<Weight>)> {
        if self.caching {
            if let Some(hit) = self.inner.borrow().memo.get(&s) {
                return Ok(hit.clone());
            }
        }
        let result = self.expand_uncached(s)?;
        if self.caching {
            self.inner.borrow_mut().memo.insert(s, result.clone());
        }
        Ok(result)
    }
}
