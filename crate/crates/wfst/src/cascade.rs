//! A toy speech-recognition cascade built from the library's primitives.
//!
//! Decoding searches the composition O ∘ A ∘ C ∘ D ∘ M for its best path:
//! O is a linear acceptor over observation symbols, A maps observations to
//! context-dependent phone units, C rewrites CD units as context-independent
//! phones, D (the lexicon) maps phone sequences to words, and M scores word
//! sequences with a bigram model. Everything runs at desk scale with exact
//! search — no pruning.

use std::collections::HashMap;

use crate::compose::LazyFst;
use crate::error::{Error, Result};
use crate::fst::{Arc, Fst, FstBuilder, StateId, SymbolTable, EPSILON};
use crate::rational::{closure, union};
use crate::search::shortest_path;
use crate::semiring::{Semiring, Weight};

/// Boundary sentinel used as left/right context at utterance edges.
pub const BOUNDARY: &str = "#";

/// A context-dependent phone: `center` heard with `left` on its left and
/// `right` on its right. Sentinel `#` stands for an utterance boundary.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CdPhone {
    pub left: String,
    pub center: String,
    pub right: String,
}

impl CdPhone {
    pub fn new(left: &str, center: &str, right: &str) -> Self {
        CdPhone {
            left: left.to_string(),
            center: center.to_string(),
            right: right.to_string(),
        }
    }

    /// The conventional `l-c+r` spelling used as the unit's symbol.
    pub fn unit_name(&self) -> String {
        format!("{}-{}+{}", self.left, self.center, self.right)
    }
}

/// An ordered phone pair; the states of the context-dependency transducer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Biphone {
    pub first: String,
    pub second: String,
}

/// A pronouncing-dictionary entry: one word with its weighted pronunciations.
#[derive(Debug, Clone)]
pub struct LexEntry {
    pub word: String,
    /// Each pronunciation is a phone sequence with a probability.
    pub prons: Vec<(Vec<String>, f64)>,
}

/// Probability `p` as a weight of the given semiring (negative log where the
/// semiring is log-scaled).
fn prob_weight(sem: Semiring, p: f64) -> Weight {
    match sem {
        Semiring::Probability => Weight::new(p),
        Semiring::Tropical | Semiring::Log => Weight::new(-p.ln()),
    }
}

/// The phone symbol table for an inventory, in inventory order.
pub fn phone_symbols(inventory: &[&str]) -> SymbolTable {
    SymbolTable::from_symbols(inventory.iter().copied())
}

/// The CD-unit symbol table for an inventory: one `l-c+r` symbol per triple
/// with `c` a real phone and `l`, `r` drawn from inventory ∪ {#}.
pub fn cd_unit_symbols(inventory: &[&str]) -> SymbolTable {
    let mut ext: Vec<&str> = vec![BOUNDARY];
    ext.extend_from_slice(inventory);
    let mut t = SymbolTable::new();
    for l in &ext {
        for c in inventory {
            for r in &ext {
                t.add_symbol(&CdPhone::new(l, c, r).unit_name());
            }
        }
    }
    t
}

/// The word symbol table, in the given order.
pub fn word_symbols(words: &[&str]) -> SymbolTable {
    SymbolTable::from_symbols(words.iter().copied())
}

/// O: a linear chain acceptor for one observation sequence — |obs|+1 states,
/// arc `i → i+1` labeled with the i-th observation at weight one, last state
/// final at weight one.
pub fn observation_acceptor(sem: Semiring, obs: &[&str], obs_syms: &SymbolTable) -> Result<Fst> {
    if obs.is_empty() {
        return Err(Error::InvalidInput("empty observation sequence".to_string()));
    }
    let mut b = FstBuilder::with_symbols(sem, obs_syms.clone(), obs_syms.clone());
    let states = b.add_states(obs.len() + 1);
    b.set_start(states[0]);
    for (i, o) in obs.iter().enumerate() {
        let label = obs_syms
            .find(o)
            .ok_or_else(|| Error::InvalidInput(format!("unknown observation symbol `{o}`")))?;
        b.add_arc(states[i], Arc::new(label, label, sem.one(), states[i + 1]));
    }
    b.set_final(states[obs.len()], sem.one());
    b.build()
}

/// A: the Kleene closure of the union of the per-CD-phone models — accepts
/// any concatenation of acoustic segments, emitting the CD-unit sequence
/// with ⊗-accumulated likelihoods.
pub fn phone_model_transducer(models: &[Fst]) -> Result<Fst> {
    let (first, rest) = models
        .split_first()
        .ok_or_else(|| Error::InvalidInput("empty model set".to_string()))?;
    let mut u = first.clone();
    for m in rest {
        u = union(&u, m)?;
    }
    closure(&u)
}

/// C: the context-dependency transducer from CD-unit strings to phone
/// strings. States are biphones over inventory ∪ {#}; each triple (l, c, r)
/// contributes an arc `q_lc → q_cr` reading `l-c+r` and emitting `r`.
///
/// The output is the right context, so the emitted phone string is shifted
/// one position; the boundary sentinel absorbs the shift: leaving the start
/// state `q_##` emits the first real phone on an ε-input arc, and triples
/// with `r = #` emit nothing.
pub fn context_dependency(sem: Semiring, inventory: &[&str]) -> Result<Fst> {
    if inventory.is_empty() {
        return Err(Error::InvalidInput("empty phone inventory".to_string()));
    }
    let phones = phone_symbols(inventory);
    let units = cd_unit_symbols(inventory);
    let mut ext: Vec<&str> = vec![BOUNDARY];
    ext.extend_from_slice(inventory);
    let n = ext.len();
    let idx = |l: usize, r: usize| StateId(l * n + r);

    let mut b = FstBuilder::with_symbols(sem, units.clone(), phones.clone());
    b.add_states(n * n);
    b.set_start(idx(0, 0));
    // Boot arcs out of q_##: emit the first phone before any unit is read.
    for (ri, r) in ext.iter().enumerate().skip(1) {
        let phone = phones.find(r).unwrap();
        b.add_arc(idx(0, 0), Arc::new(EPSILON, phone, sem.one(), idx(0, ri)));
    }
    for (li, l) in ext.iter().enumerate() {
        for (ci, c) in ext.iter().enumerate().skip(1) {
            for (ri, r) in ext.iter().enumerate() {
                let unit = units.find(&CdPhone::new(l, c, r).unit_name()).unwrap();
                let olabel = if ri == 0 {
                    EPSILON
                } else {
                    phones.find(r).unwrap()
                };
                b.add_arc(idx(li, ci), Arc::new(unit, olabel, sem.one(), idx(ci, ri)));
            }
        }
    }
    for ci in 1..n {
        b.set_final(idx(ci, 0), sem.one());
    }
    b.build()
}

/// D: the lexicon transducer — the closure of the union of word models. A
/// word model maps each listed phone sequence to the word symbol, emitted on
/// the first arc with the pronunciation weight; later arcs emit ε at weight
/// one.
pub fn lexicon(
    sem: Semiring,
    entries: &[LexEntry],
    phone_syms: &SymbolTable,
    word_syms: &SymbolTable,
) -> Result<Fst> {
    if entries.is_empty() {
        return Err(Error::InvalidInput("empty lexicon".to_string()));
    }
    let mut models = Vec::new();
    for entry in entries {
        let word = word_syms
            .find(&entry.word)
            .ok_or_else(|| Error::InvalidInput(format!("unknown word `{}`", entry.word)))?;
        let mut b = FstBuilder::with_symbols(sem, phone_syms.clone(), word_syms.clone());
        let start = b.add_state();
        b.set_start(start);
        for (phones, p) in &entry.prons {
            if phones.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "empty pronunciation for `{}`",
                    entry.word
                )));
            }
            let mut cur = start;
            for (i, ph) in phones.iter().enumerate() {
                let phone = phone_syms
                    .find(ph)
                    .ok_or_else(|| Error::InvalidInput(format!("unknown phone `{ph}`")))?;
                let next = b.add_state();
                let (olabel, w) = if i == 0 {
                    (word, prob_weight(sem, *p))
                } else {
                    (EPSILON, sem.one())
                };
                b.add_arc(cur, Arc::new(phone, olabel, w, next));
                cur = next;
            }
            b.set_final(cur, sem.one());
        }
        models.push(b.build()?);
    }
    let (first, rest) = models.split_first().unwrap();
    let mut u = first.clone();
    for m in rest {
        u = union(&u, m)?;
    }
    closure(&u)
}

/// M: a bigram acceptor over the vocabulary, estimated by maximum
/// likelihood. One state per conditioning word plus a start state; the arc
/// `w1 → w2` reads `w2` at weight −ln(count(w1,w2)/Σ count(w1,·)); the start
/// state reaches every word state at weight one, and every state is final at
/// weight one.
pub fn ngram_model(
    sem: Semiring,
    counts: &[(String, String, f64)],
    vocab: &[&str],
    word_syms: &SymbolTable,
) -> Result<Fst> {
    let mut word_state: HashMap<&str, StateId> = HashMap::new();
    let mut b = FstBuilder::with_symbols(sem, word_syms.clone(), word_syms.clone());
    let start = b.add_state();
    b.set_start(start);
    b.set_final(start, sem.one());
    for w in vocab {
        let label = word_syms
            .find(w)
            .ok_or_else(|| Error::InvalidInput(format!("unknown word `{w}`")))?;
        let s = b.add_state();
        word_state.insert(w, s);
        b.set_final(s, sem.one());
        b.add_arc(start, Arc::new(label, label, sem.one(), s));
    }
    let mut totals: HashMap<&str, f64> = HashMap::new();
    for (w1, w2, c) in counts {
        if *c < 0.0 {
            return Err(Error::InvalidInput(format!(
                "negative count for ({w1}, {w2})"
            )));
        }
        if !word_state.contains_key(w1.as_str()) || !word_state.contains_key(w2.as_str()) {
            return Err(Error::InvalidInput(format!(
                "bigram ({w1}, {w2}) mentions a word outside the vocabulary"
            )));
        }
        *totals.entry(w1.as_str()).or_insert(0.0) += c;
    }
    for (w1, w2, c) in counts {
        if *c == 0.0 {
            continue;
        }
        let total = totals[w1.as_str()];
        if total == 0.0 {
            return Err(Error::InvalidInput(format!(
                "zero total count for conditioning word `{w1}`"
            )));
        }
        let label = word_syms.find(w2).unwrap();
        b.add_arc(
            word_state[w1.as_str()],
            Arc::new(label, label, prob_weight(sem, c / total), word_state[w2.as_str()]),
        );
    }
    b.build()
}

/// Runs the cascade: lazily composes O ∘ A ∘ C ∘ D ∘ M, extracts the best
/// path, and returns the decoded word sequence with its total weight.
pub fn decode(o: &Fst, a: &Fst, c: &Fst, d: &Fst, m: &Fst) -> Result<(Vec<String>, Weight)> {
    let oa = LazyFst::new(o, a)?;
    let oac = LazyFst::new(&oa, c)?;
    let oacd = LazyFst::new(&oac, d)?;
    let full = LazyFst::new(&oacd, m)?;
    let g = full.expand_all()?;
    let (_, out, w) = shortest_path(&g)?.ok_or(Error::NoPath)?;
    let words = out
        .iter()
        .map(|&l| g.osyms().name(l).unwrap().to_string())
        .collect();
    Ok((words, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::compose_eager;
    use crate::fst::{enumerate_transductions, transduction_weight, Label};

    fn model(
        sem: Semiring,
        obs_syms: &SymbolTable,
        unit_syms: &SymbolTable,
        obs: &[&str],
        unit: &str,
        w: Weight,
    ) -> Fst {
        let mut b = FstBuilder::with_symbols(sem, obs_syms.clone(), unit_syms.clone());
        let states = b.add_states(obs.len() + 1);
        b.set_start(states[0]);
        for (i, o) in obs.iter().enumerate() {
            let il = obs_syms.find(o).unwrap();
            let (ol, aw) = if i == 0 {
                (unit_syms.find(unit).unwrap(), w)
            } else {
                (EPSILON, sem.one())
            };
            b.add_arc(states[i], Arc::new(il, ol, aw, states[i + 1]));
        }
        b.set_final(states[obs.len()], sem.one());
        b.build().unwrap()
    }

    #[test]
    fn observation_acceptor_is_a_unit_chain() {
        let sem = Semiring::Probability;
        let t = SymbolTable::from_symbols(["o1", "o2"]);
        let o = observation_acceptor(sem, &["o1", "o2"], &t).unwrap();
        assert_eq!(o.num_states(), 3);
        let all = enumerate_transductions(&o, 5).unwrap();
        assert_eq!(all.len(), 1);
        let key: Vec<Label> = vec![t.find("o1").unwrap(), t.find("o2").unwrap()];
        assert_eq!(all[&(key.clone(), key)], sem.one());
    }

    #[test]
    fn observation_acceptor_rejects_bad_input() {
        let sem = Semiring::Tropical;
        let t = SymbolTable::from_symbols(["o1"]);
        assert!(observation_acceptor(sem, &[], &t).is_err());
        assert!(observation_acceptor(sem, &["nope"], &t).is_err());
    }

    #[test]
    fn phone_models_close_over_segments() {
        // One model "o1 o1" → γ at 0.8; the closure scores two repetitions
        // at 0.64 and the empty pair at one.
        let sem = Semiring::Probability;
        let obs = SymbolTable::from_symbols(["o1"]);
        let units = SymbolTable::from_symbols(["g"]);
        let m = model(sem, &obs, &units, &["o1", "o1"], "g", Weight::new(0.8));
        let a = phone_model_transducer(&[m]).unwrap();
        let o1 = obs.find("o1").unwrap();
        let g = units.find("g").unwrap();
        let w = transduction_weight(&a, &[o1, o1, o1, o1], &[g, g], 20).unwrap();
        assert!(sem.approx_eq(w, Weight::new(0.64)));
        assert!(sem.approx_eq(
            transduction_weight(&a, &[], &[], 20).unwrap(),
            sem.one()
        ));
        assert!(phone_model_transducer(&[]).is_err());
    }

    #[test]
    fn context_dependency_state_count() {
        let c = context_dependency(Semiring::Tropical, &["p", "q"]).unwrap();
        assert_eq!(c.num_states(), 9);
        for s in c.state_ids() {
            for a in c.arcs(s) {
                assert_eq!(a.weight, Weight::new(0.0));
            }
        }
    }

    #[test]
    fn context_dependency_shifts_through_boundaries() {
        // Unit string "#-p+#" maps to phone string "p".
        let sem = Semiring::Tropical;
        let c = context_dependency(sem, &["p"]).unwrap();
        let units = cd_unit_symbols(&["p"]);
        let acc = observation_acceptor(sem, &["#-p+#"], &units).unwrap();
        let out = compose_eager(&acc, &c).unwrap();
        let unit = units.find("#-p+#").unwrap();
        let p = phone_symbols(&["p"]).find("p").unwrap();
        assert_eq!(
            transduction_weight(&out, &[unit], &[p], 10).unwrap(),
            Weight::new(0.0)
        );
    }

    #[test]
    fn context_dependency_two_phone_string() {
        // "#-p+q p-q+#" maps to "p q".
        let sem = Semiring::Tropical;
        let c = context_dependency(sem, &["p", "q"]).unwrap();
        let units = cd_unit_symbols(&["p", "q"]);
        let acc = observation_acceptor(sem, &["#-p+q", "p-q+#"], &units).unwrap();
        let out = compose_eager(&acc, &c).unwrap();
        let input: Vec<Label> = ["#-p+q", "p-q+#"]
            .iter()
            .map(|u| units.find(u).unwrap())
            .collect();
        let phones = phone_symbols(&["p", "q"]);
        let output: Vec<Label> = ["p", "q"].iter().map(|p| phones.find(p).unwrap()).collect();
        assert_eq!(
            transduction_weight(&out, &input, &output, 10).unwrap(),
            Weight::new(0.0)
        );
    }

    #[test]
    fn lexicon_weights_pronunciations() {
        let sem = Semiring::Probability;
        let phones = phone_symbols(&["d", "ae", "ey", "t", "ax"]);
        let words = word_symbols(&["data"]);
        let d = lexicon(
            sem,
            &[LexEntry {
                word: "data".to_string(),
                prons: vec![
                    (vec!["d".into(), "ae".into(), "t".into(), "ax".into()], 0.6),
                    (vec!["d".into(), "ey".into(), "t".into(), "ax".into()], 0.4),
                ],
            }],
            &phones,
            &words,
        )
        .unwrap();
        let pron: Vec<Label> = ["d", "ey", "t", "ax"]
            .iter()
            .map(|p| phones.find(p).unwrap())
            .collect();
        let w = transduction_weight(&d, &pron, &[words.find("data").unwrap()], 20).unwrap();
        assert!(sem.approx_eq(w, Weight::new(0.4)));
        // Two-word sequence weight is the product of per-word weights.
        let two: Vec<Label> = pron.iter().chain(pron.iter()).copied().collect();
        let data2 = vec![words.find("data").unwrap(); 2];
        let w2 = transduction_weight(&d, &two, &data2, 30).unwrap();
        assert!(sem.approx_eq(w2, Weight::new(0.16)));
    }

    #[test]
    fn lexicon_rejects_bad_entries() {
        let sem = Semiring::Tropical;
        let phones = phone_symbols(&["d"]);
        let words = word_symbols(&["w"]);
        assert!(lexicon(sem, &[], &phones, &words).is_err());
        assert!(lexicon(
            sem,
            &[LexEntry {
                word: "w".to_string(),
                prons: vec![(vec![], 1.0)],
            }],
            &phones,
            &words
        )
        .is_err());
        assert!(lexicon(
            sem,
            &[LexEntry {
                word: "w".to_string(),
                prons: vec![(vec!["zz".into()], 1.0)],
            }],
            &phones,
            &words
        )
        .is_err());
    }

    #[test]
    fn ngram_model_mle_weights() {
        let sem = Semiring::Tropical;
        let words = word_symbols(&["A", "B"]);
        let m = ngram_model(
            sem,
            &[
                ("A".to_string(), "B".to_string(), 3.0),
                ("A".to_string(), "A".to_string(), 1.0),
            ],
            &["A", "B"],
            &words,
        )
        .unwrap();
        // States: 0 start, 1 = A, 2 = B.
        let b_label = words.find("B").unwrap();
        let arc = m
            .arcs(StateId(1))
            .iter()
            .find(|a| a.ilabel == b_label)
            .copied()
            .unwrap();
        assert!((arc.weight.value() - 0.2876820724517809).abs() < 1e-12);
        let a_label = words.find("A").unwrap();
        let self_arc = m
            .arcs(StateId(1))
            .iter()
            .find(|a| a.ilabel == a_label)
            .copied()
            .unwrap();
        assert!((self_arc.weight.value() - (0.25f64).ln().abs()).abs() < 1e-12);
        // Word-string weight is the sum of bigram arc weights.
        let ab = vec![a_label, b_label];
        let w = transduction_weight(&m, &ab, &ab, 10).unwrap();
        assert!((w.value() - 0.2876820724517809).abs() < 1e-12);
    }

    #[test]
    fn ngram_model_single_word_zero_weight() {
        let sem = Semiring::Tropical;
        let words = word_symbols(&["A"]);
        let m = ngram_model(
            sem,
            &[("A".to_string(), "A".to_string(), 1.0)],
            &["A"],
            &words,
        )
        .unwrap();
        let a_label = words.find("A").unwrap();
        let arc = m.arcs(StateId(1))[0];
        assert_eq!(arc.ilabel, a_label);
        assert_eq!(arc.weight, Weight::new(0.0));
    }

    fn toy_cascade(obs: &[&str]) -> (Fst, Fst, Fst, Fst, Fst) {
        let sem = Semiring::Tropical;
        let inventory = ["p", "q"];
        let obs_syms = SymbolTable::from_symbols(["o1", "o2"]);
        let units = cd_unit_symbols(&inventory);
        let phones = phone_symbols(&inventory);
        let words = word_symbols(&["X", "Y"]);

        let o = observation_acceptor(sem, obs, &obs_syms).unwrap();
        // X sounds like "p" (cheap), Y like "q" (expensive), both on "o1".
        let m1 = model(sem, &obs_syms, &units, &["o1"], "#-p+#", Weight::new(1.0));
        let m2 = model(sem, &obs_syms, &units, &["o1"], "#-q+#", Weight::new(3.0));
        let a = phone_model_transducer(&[m1, m2]).unwrap();
        let c = context_dependency(sem, &inventory).unwrap();
        let d = lexicon(
            sem,
            &[
                LexEntry {
                    word: "X".to_string(),
                    prons: vec![(vec!["p".into()], 1.0)],
                },
                LexEntry {
                    word: "Y".to_string(),
                    prons: vec![(vec!["q".into()], 1.0)],
                },
            ],
            &phones,
            &words,
        )
        .unwrap();
        let m = ngram_model(
            sem,
            &[
                ("X".to_string(), "X".to_string(), 1.0),
                ("X".to_string(), "Y".to_string(), 1.0),
            ],
            &["X", "Y"],
            &words,
        )
        .unwrap();
        (o, a, c, d, m)
    }

    #[test]
    fn decode_picks_the_cheaper_word() {
        let (o, a, c, d, m) = toy_cascade(&["o1"]);
        let (words, w) = decode(&o, &a, &c, &d, &m).unwrap();
        assert_eq!(words, vec!["X".to_string()]);
        // Only the acoustic model contributes weight on this path.
        assert_eq!(w, Weight::new(1.0));
    }

    #[test]
    fn decode_matches_eager_chain_and_reassociation() {
        let (o, a, c, d, m) = toy_cascade(&["o1"]);
        let (words, w) = decode(&o, &a, &c, &d, &m).unwrap();

        // Left-to-right eager chain.
        let left = compose_eager(
            &compose_eager(&compose_eager(&compose_eager(&o, &a).unwrap(), &c).unwrap(), &d)
                .unwrap(),
            &m,
        )
        .unwrap();
        let (_, out, we) = shortest_path(&left).unwrap().unwrap();
        assert_eq!(we, w);
        let eager_words: Vec<String> = out
            .iter()
            .map(|&l| left.osyms().name(l).unwrap().to_string())
            .collect();
        assert_eq!(eager_words, words);

        // A different association order.
        let cd = compose_eager(&c, &d).unwrap();
        let cdm = compose_eager(&cd, &m).unwrap();
        let oa = compose_eager(&o, &a).unwrap();
        let right = compose_eager(&oa, &cdm).unwrap();
        let (_, out2, wr) = shortest_path(&right).unwrap().unwrap();
        assert_eq!(wr, w);
        let right_words: Vec<String> = out2
            .iter()
            .map(|&l| right.osyms().name(l).unwrap().to_string())
            .collect();
        assert_eq!(right_words, words);
    }

    #[test]
    fn decode_reports_no_path() {
        // "o2" matches no acoustic model.
        let (o, a, c, d, m) = toy_cascade(&["o2"]);
        assert!(matches!(decode(&o, &a, &c, &d, &m), Err(Error::NoPath)));
    }
}
