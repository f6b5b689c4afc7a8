//! The weighted transducer data model.
//!
//! An [`Fst`] denotes a weighted transduction `T : Σ* × Γ* → K`: a mapping
//! from input/output string pairs to weights in the active semiring. An
//! *acceptor* is an `Fst` whose every arc carries equal input and output
//! labels; it is identified with a weighted language via the identity
//! transduction.
//!
//! [`transduction_weight`] is the brute-force oracle behind the crate's
//! property tests: it sums, in the semiring, over every accepting path whose
//! ε-stripped labels match the queried strings. It is deliberately independent
//! of every optimized algorithm it is used to check.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::semiring::{Semiring, Weight};

/// An arc label. Id 0 is reserved for ε, the null move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

/// The ε label: consumes or emits nothing.
pub const EPSILON: Label = Label(0);

impl Label {
    pub fn is_epsilon(self) -> bool {
        self == EPSILON
    }
}

/// Dense, 0-based state index within one `Fst`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bijection between symbol strings and labels. `<eps>` ↔ 0 always.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    symbols: Vec<String>,
    index: HashMap<String, Label>,
}

pub const EPSILON_SYMBOL: &str = "<eps>";

impl SymbolTable {
    pub fn new() -> Self {
        let mut t = SymbolTable {
            symbols: Vec::new(),
            index: HashMap::new(),
        };
        t.symbols.push(EPSILON_SYMBOL.to_string());
        t.index.insert(EPSILON_SYMBOL.to_string(), EPSILON);
        t
    }

    /// Builds a table from non-ε symbols, assigning ids 1, 2, ...
    pub fn from_symbols<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut t = SymbolTable::new();
        for s in symbols {
            t.add_symbol(s.as_ref());
        }
        t
    }

    /// Returns the existing label for `symbol` or assigns the next free id.
    pub fn add_symbol(&mut self, symbol: &str) -> Label {
        if let Some(&l) = self.index.get(symbol) {
            return l;
        }
        let l = Label(self.symbols.len() as u32);
        self.symbols.push(symbol.to_string());
        self.index.insert(symbol.to_string(), l);
        l
    }

    pub fn find(&self, symbol: &str) -> Option<Label> {
        self.index.get(symbol).copied()
    }

    pub fn name(&self, label: Label) -> Option<&str> {
        self.symbols.get(label.0 as usize).map(String::as_str)
    }

    /// Number of entries, ε included.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false // ε is always present
    }

    /// All entries in id order, ε first.
    pub fn iter(&self) -> impl Iterator<Item = (Label, &str)> {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (Label(i as u32), s.as_str()))
    }
}

impl Default for SymbolTable {
    fn default() -> Self {
        SymbolTable::new()
    }
}

impl PartialEq for SymbolTable {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Eq for SymbolTable {}

/// A weighted transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub ilabel: Label,
    pub olabel: Label,
    pub weight: Weight,
    pub nextstate: StateId,
}

impl Arc {
    pub fn new(ilabel: Label, olabel: Label, weight: Weight, nextstate: StateId) -> Self {
        Arc {
            ilabel,
            olabel,
            weight,
            nextstate,
        }
    }
}

/// A weighted finite-state transducer. Immutable after construction; build
/// one with [`FstBuilder`].
#[derive(Clone, Debug)]
pub struct Fst {
    semiring: Semiring,
    states: Vec<Vec<Arc>>,
    start: StateId,
    initial_weight: Weight,
    finals: BTreeMap<StateId, Weight>,
    isyms: SymbolTable,
    osyms: SymbolTable,
}

impl Fst {
    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    /// Weight multiplied in before the start state. Usually the semiring
    /// one; weight pushing stores the leftover potential of the start state
    /// here so equivalence is exact.
    pub fn initial_weight(&self) -> Weight {
        self.initial_weight
    }

    pub fn arcs(&self, s: StateId) -> &[Arc] {
        &self.states[s.0]
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(Vec::len).sum()
    }

    pub fn final_weight(&self, s: StateId) -> Option<Weight> {
        self.finals.get(&s).copied()
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.finals.contains_key(&s)
    }

    /// Final states with their weights, in state-id order.
    pub fn finals(&self) -> impl Iterator<Item = (StateId, Weight)> + '_ {
        self.finals.iter().map(|(&s, &w)| (s, w))
    }

    pub fn isyms(&self) -> &SymbolTable {
        &self.isyms
    }

    pub fn osyms(&self) -> &SymbolTable {
        &self.osyms
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> {
        (0..self.num_states()).map(StateId)
    }

    /// True when every arc has equal input and output labels.
    pub fn is_acceptor(&self) -> bool {
        self.isyms == self.osyms
            && self
                .states
                .iter()
                .flatten()
                .all(|a| a.ilabel == a.olabel)
    }

    /// True when no arc at all carries an ε label.
    pub fn is_epsilon_free(&self) -> bool {
        self.states
            .iter()
            .flatten()
            .all(|a| !a.ilabel.is_epsilon() && !a.olabel.is_epsilon())
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// States in topological order, or `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<StateId>> {
        let n = self.num_states();
        let mut indegree = vec![0usize; n];
        for arcs in &self.states {
            for a in arcs {
                indegree[a.nextstate.0] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop() {
            order.push(StateId(i));
            for a in &self.states[i] {
                indegree[a.nextstate.0] -= 1;
                if indegree[a.nextstate.0] == 0 {
                    queue.push(a.nextstate.0);
                }
            }
        }
        if order.len() == n {
            Some(order)
        } else {
            None
        }
    }

    /// Checks every structural invariant and returns the violations found.
    /// Library-produced machines always come back clean.
    pub fn validate(&self) -> Vec<String> {
        let n = self.num_states();
        let mut out = Vec::new();
        if self.start.0 >= n {
            out.push(format!("start state {} out of range (machine has {n} states)", self.start));
        }
        for (i, arcs) in self.states.iter().enumerate() {
            for (j, a) in arcs.iter().enumerate() {
                if a.nextstate.0 >= n {
                    out.push(format!(
                        "arc {j} of state {i} targets state {} but the machine has {n} states",
                        a.nextstate
                    ));
                }
                if (a.ilabel.0 as usize) >= self.isyms.len() {
                    out.push(format!("arc {j} of state {i} has ilabel {} outside the input table", a.ilabel.0));
                }
                if (a.olabel.0 as usize) >= self.osyms.len() {
                    out.push(format!("arc {j} of state {i} has olabel {} outside the output table", a.olabel.0));
                }
                if a.weight.value().is_nan() {
                    out.push(format!("arc {j} of state {i} has a NaN weight"));
                }
            }
        }
        for (&s, &w) in &self.finals {
            if s.0 >= n {
                out.push(format!("final state {s} out of range"));
            }
            if self.semiring.is_zero(w) {
                out.push(format!(
                    "final weight of state {s} is semiring zero; non-final states must be absent from the final map"
                ));
            }
        }
        out
    }
}

/// Single-use builder for [`Fst`].
#[derive(Clone, Debug)]
pub struct FstBuilder {
    semiring: Semiring,
    states: Vec<Vec<Arc>>,
    start: Option<StateId>,
    initial_weight: Weight,
    finals: BTreeMap<StateId, Weight>,
    isyms: SymbolTable,
    osyms: SymbolTable,
}

impl FstBuilder {
    pub fn new(semiring: Semiring) -> Self {
        Self::with_symbols(semiring, SymbolTable::new(), SymbolTable::new())
    }

    pub fn with_symbols(semiring: Semiring, isyms: SymbolTable, osyms: SymbolTable) -> Self {
        FstBuilder {
            semiring,
            states: Vec::new(),
            start: None,
            initial_weight: semiring.one(),
            finals: BTreeMap::new(),
            isyms,
            osyms,
        }
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn add_state(&mut self) -> StateId {
        self.states.push(Vec::new());
        StateId(self.states.len() - 1)
    }

    pub fn add_states(&mut self, n: usize) -> Vec<StateId> {
        (0..n).map(|_| self.add_state()).collect()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn add_arc(&mut self, from: StateId, arc: Arc) {
        self.states[from.0].push(arc);
    }

    pub fn set_start(&mut self, s: StateId) {
        self.start = Some(s);
    }

    pub fn set_initial_weight(&mut self, w: Weight) {
        self.initial_weight = w;
    }

    /// Marks `s` final. A semiring-zero weight means "not final" and removes
    /// any existing entry, keeping the zero-final invariant by construction.
    pub fn set_final(&mut self, s: StateId, w: Weight) {
        if self.semiring.is_zero(w) {
            self.finals.remove(&s);
        } else {
            self.finals.insert(s, w);
        }
    }

    pub fn isyms_mut(&mut self) -> &mut SymbolTable {
        &mut self.isyms
    }

    pub fn osyms_mut(&mut self) -> &mut SymbolTable {
        &mut self.osyms
    }

    /// Finalizes the machine. Only the start state is mandatory; structural
    /// diagnostics are the province of [`Fst::validate`].
    pub fn build(self) -> Result<Fst> {
        let start = self
            .start
            .ok_or_else(|| Error::InvalidInput("no start state".to_string()))?;
        Ok(Fst {
            semiring: self.semiring,
            states: self.states,
            start,
            initial_weight: self.initial_weight,
            finals: self.finals,
            isyms: self.isyms,
            osyms: self.osyms,
        })
    }
}

/// Reinterprets an acceptor as the restriction of the identity transduction:
/// the result assigns `(w, w)` the weight the acceptor assigns to `w` and
/// zero to every other pair. Structurally, `olabel := ilabel` on every arc
/// and the output table becomes the input table.
pub fn as_identity_transducer(a: &Fst) -> Result<Fst> {
    if !a.is_acceptor() {
        return Err(Error::NotAcceptor);
    }
    let mut f = a.clone();
    for arcs in &mut f.states {
        for arc in arcs {
            arc.olabel = arc.ilabel;
        }
    }
    f.osyms = f.isyms.clone();
    Ok(f)
}

/// Re-expresses a machine over replacement symbol tables, translating every
/// label by name. Useful for aligning independently built machines before
/// composition, which compares tables structurally.
pub fn remap_symbols(f: &Fst, isyms: &SymbolTable, osyms: &SymbolTable) -> Result<Fst> {
    let map = |label: Label, old: &SymbolTable, new: &SymbolTable| -> Result<Label> {
        if label.is_epsilon() {
            return Ok(EPSILON);
        }
        let name = old
            .name(label)
            .ok_or_else(|| Error::SymbolTableMismatch(format!("label {} has no name", label.0)))?;
        new.find(name)
            .ok_or_else(|| Error::SymbolTableMismatch(format!("symbol `{name}` missing from replacement table")))
    };
    let mut g = f.clone();
    for arcs in &mut g.states {
        for arc in arcs {
            arc.ilabel = map(arc.ilabel, f.isyms(), isyms)?;
            arc.olabel = map(arc.olabel, f.osyms(), osyms)?;
        }
    }
    g.isyms = isyms.clone();
    g.osyms = osyms.clone();
    Ok(g)
}

/// Default cap on the number of accepting paths the oracle will enumerate.
pub const DEFAULT_PATH_CAP: usize = 1_000_000;

/// Brute-force transduction weight: the ⊕-sum over all accepting paths of at
/// most `max_path_len` arcs whose ε-stripped input/output labels equal
/// `input`/`output`, each path weighted
/// `initial_weight ⊗ arc weights ⊗ final weight`.
///
/// Exact whenever every accepting path for the pair fits in `max_path_len`
/// arcs (always true for acyclic machines with `max_path_len >= num_states`).
pub fn transduction_weight(
    f: &Fst,
    input: &[Label],
    output: &[Label],
    max_path_len: usize,
) -> Result<Weight> {
    let sem = f.semiring();
    let mut total = sem.zero();
    let mut paths = 0usize;
    let mut stack = vec![(f.start(), 0usize, 0usize, 0usize, f.initial_weight())];
    while let Some((state, ipos, opos, len, w)) = stack.pop() {
        if ipos == input.len() && opos == output.len() {
            if let Some(fw) = f.final_weight(state) {
                total = sem.plus(total, sem.times(w, fw));
                paths += 1;
                if paths > DEFAULT_PATH_CAP {
                    return Err(Error::EnumerationLimit {
                        cap: DEFAULT_PATH_CAP,
                    });
                }
            }
        }
        if len == max_path_len {
            continue;
        }
        for arc in f.arcs(state) {
            let ipos2 = if arc.ilabel.is_epsilon() {
                ipos
            } else if ipos < input.len() && input[ipos] == arc.ilabel {
                ipos + 1
            } else {
                continue;
            };
            let opos2 = if arc.olabel.is_epsilon() {
                opos
            } else if opos < output.len() && output[opos] == arc.olabel {
                opos + 1
            } else {
                continue;
            };
            stack.push((arc.nextstate, ipos2, opos2, len + 1, sem.times(w, arc.weight)));
        }
    }
    Ok(total)
}

/// Enumerates every accepting path of at most `max_path_len` arcs and returns
/// the ⊕-summed weight per ε-stripped `(input, output)` pair. The exhaustive
/// companion of [`transduction_weight`] for whole-transduction comparisons.
pub fn enumerate_transductions(
    f: &Fst,
    max_path_len: usize,
) -> Result<HashMap<(Vec<Label>, Vec<Label>), Weight>> {
    let sem = f.semiring();
    let mut map: HashMap<(Vec<Label>, Vec<Label>), Weight> = HashMap::new();
    let mut paths = 0usize;
    let mut stack = vec![(f.start(), Vec::new(), Vec::new(), 0usize, sem.one())];
    while let Some((state, istr, ostr, len, w)) = stack.pop() {
        if let Some(fw) = f.final_weight(state) {
            let total = sem.times(w, fw);
            let entry = map
                .entry((istr.clone(), ostr.clone()))
                .or_insert_with(|| sem.zero());
            *entry = sem.plus(*entry, total);
            paths += 1;
            if paths > DEFAULT_PATH_CAP {
                return Err(Error::EnumerationLimit {
                    cap: DEFAULT_PATH_CAP,
                });
            }
        }
        if len == max_path_len {
            continue;
        }
        for arc in f.arcs(state) {
            let mut istr2 = istr.clone();
            if !arc.ilabel.is_epsilon() {
                istr2.push(arc.ilabel);
            }
            let mut ostr2 = ostr.clone();
            if !arc.olabel.is_epsilon() {
                ostr2.push(arc.olabel);
            }
            stack.push((arc.nextstate, istr2, ostr2, len + 1, sem.times(w, arc.weight)));
        }
    }
    // Fold in the initial weight once per pair.
    for w in map.values_mut() {
        *w = sem.times(f.initial_weight(), *w);
    }
    Ok(map)
}
