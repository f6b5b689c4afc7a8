//! Weighted determinization, weight pushing and minimization, plus the
//! ε-removal pass that determinization requires.
//!
//! Determinization is the residual-weight subset construction: a state of the
//! result is a set of source states each carrying the weight left over after
//! the common prefix weight was emitted early. Classical determinization over
//! `(label, weight)` pairs would not help — the pairs are all distinct — and
//! minimization first moves weights (pushing) so that states whose raw
//! weights differ but whose weighted futures agree become mergeable.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fst::{Arc, Fst, FstBuilder, Label, StateId};
use crate::search::{shortest_distance, Direction};
use crate::semiring::{Semiring, Weight};

/// Default bound on the number of subsets the determinizer may create.
pub const DEFAULT_MAX_STATES: usize = 10_000;

fn accessible(f: &Fst) -> Vec<bool> {
    let mut seen = vec![false; f.num_states()];
    let mut stack = vec![f.start()];
    seen[f.start().0] = true;
    while let Some(q) = stack.pop() {
        for a in f.arcs(q) {
            if !seen[a.nextstate.0] {
                seen[a.nextstate.0] = true;
                stack.push(a.nextstate);
            }
        }
    }
    seen
}

fn coaccessible(f: &Fst) -> Vec<bool> {
    let n = f.num_states();
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in f.state_ids() {
        for a in f.arcs(s) {
            rev[a.nextstate.0].push(s.0);
        }
    }
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = f.finals().map(|(s, _)| s.0).collect();
    for &s in &stack {
        seen[s] = true;
    }
    while let Some(q) = stack.pop() {
        for &p in &rev[q] {
            if !seen[p] {
                seen[p] = true;
                stack.push(p);
            }
        }
    }
    seen
}

/// ε:ε arcs between useful (accessible and co-accessible) states, as a cost
/// graph where a cycle of non-positive total cost means the ⊕-sum over
/// repetitions is undefined.
fn epsilon_cost_graph(f: &Fst) -> Vec<(usize, usize, f64)> {
    let sem = f.semiring();
    let acc = accessible(f);
    let coacc = coaccessible(f);
    let mut edges = Vec::new();
    for s in f.state_ids() {
        if !acc[s.0] || !coacc[s.0] {
            continue;
        }
        for a in f.arcs(s) {
            if !a.ilabel.is_epsilon() || !a.olabel.is_epsilon() {
                continue;
            }
            if !acc[a.nextstate.0] || !coacc[a.nextstate.0] {
                continue;
            }
            if sem.is_zero(a.weight) {
                continue;
            }
            let cost = match sem {
                // Divergent iff a cycle's cost sum is negative (tropical: the
                // min over n-fold repetition has no lower bound) or, for the
                // summing semirings, non-positive (repetition mass >= 1).
                // The tiny shift turns the "<= 0" test into a plain
                // negative-cycle test.
                Semiring::Tropical => a.weight.value(),
                Semiring::Log => a.weight.value() - 1e-12,
                Semiring::Probability => -a.weight.value().ln() - 1e-12,
            };
            edges.push((s.0, a.nextstate.0, cost));
        }
    }
    edges
}

/// Conservative divergence test for ε:ε cycles on useful states. Returns a
/// description of the problem, or `None` when every closure sum is defined.
pub(crate) fn epsilon_divergence(f: &Fst) -> Option<String> {
    let edges = epsilon_cost_graph(f);
    if edges.is_empty() {
        return None;
    }
    let n = f.num_states();
    // Bellman-Ford from a virtual source connected to everything.
    let mut dist = vec![0.0f64; n];
    for pass in 0..n {
        let mut relaxed = false;
        for &(u, v, c) in &edges {
            if dist[u] + c < dist[v] {
                dist[v] = dist[u] + c;
                relaxed = true;
            }
        }
        if !relaxed {
            return None;
        }
        if pass == n - 1 && relaxed {
            return Some("epsilon cycle with a divergent repetition sum".to_string());
        }
    }
    None
}

/// Per-source ε-closure weights: `closure[q][p]` is the ⊕-sum over all
/// ε:ε paths from `q` to `p` (the empty path included).
fn epsilon_closures(f: &Fst) -> Result<Vec<Vec<Weight>>> {
    let sem = f.semiring();
    let n = f.num_states();
    let mut eps_arcs: Vec<Vec<(usize, Weight)>> = vec![Vec::new(); n];
    let mut has_eps = false;
    for s in f.state_ids() {
        for a in f.arcs(s) {
            if a.ilabel.is_epsilon() && a.olabel.is_epsilon() && !sem.is_zero(a.weight) {
                eps_arcs[s.0].push((a.nextstate.0, a.weight));
                has_eps = true;
            }
        }
    }

    // Topological order of the ε-subgraph, if it is acyclic.
    let topo = {
        let mut indeg = vec![0usize; n];
        for arcs in &eps_arcs {
            for &(v, _) in arcs {
                indeg[v] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = queue.pop() {
            order.push(u);
            for &(v, _) in &eps_arcs[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push(v);
                }
            }
        }
        if order.len() == n {
            Some(order)
        } else {
            None
        }
    };

    if topo.is_none() && has_eps && sem != Semiring::Tropical {
        return Err(Error::Unsupported(
            "epsilon cycles can only be summed in the tropical semiring".to_string(),
        ));
    }

    let mut closures = Vec::with_capacity(n);
    for q in 0..n {
        let mut dist = vec![sem.zero(); n];
        dist[q] = sem.one();
        match &topo {
            Some(order) => {
                for &u in order {
                    if sem.is_zero(dist[u]) {
                        continue;
                    }
                    let du = dist[u];
                    for &(v, w) in &eps_arcs[u] {
                        dist[v] = sem.plus(dist[v], sem.times(du, w));
                    }
                }
            }
            None => {
                // Tropical with cycles: Bellman-Ford, divergence was already
                // ruled out by the caller.
                for _ in 0..n {
                    let mut relaxed = false;
                    for u in 0..n {
                        if sem.is_zero(dist[u]) {
                            continue;
                        }
                        let du = dist[u];
                        for &(v, w) in &eps_arcs[u] {
                            let cand = sem.times(du, w);
                            if cand < dist[v] {
                                dist[v] = cand;
                                relaxed = true;
                            }
                        }
                    }
                    if !relaxed {
                        break;
                    }
                }
            }
        }
        closures.push(dist);
    }
    Ok(closures)
}

/// Removes ε:ε arcs, folding ⊕-summed closure weights into successor arcs
/// and final weights. The result denotes the same transduction.
pub fn rm_epsilon(f: &Fst) -> Result<Fst> {
    if let Some(msg) = epsilon_divergence(f) {
        return Err(Error::Divergent(msg));
    }
    let sem = f.semiring();
    let closures = epsilon_closures(f)?;
    let mut b = FstBuilder::with_symbols(sem, f.isyms().clone(), f.osyms().clone());
    b.add_states(f.num_states());
    b.set_start(f.start());
    b.set_initial_weight(f.initial_weight());
    for q in f.state_ids() {
        // ⊕-merge parallel arcs that agree on labels and target.
        let mut merged: HashMap<(Label, Label, StateId), Weight> = HashMap::new();
        let mut order: Vec<(Label, Label, StateId)> = Vec::new();
        let mut final_w = sem.zero();
        for (p, &cw) in closures[q.0].iter().enumerate() {
            if sem.is_zero(cw) {
                continue;
            }
            for a in f.arcs(StateId(p)) {
                if a.ilabel.is_epsilon() && a.olabel.is_epsilon() {
                    continue;
                }
                let key = (a.ilabel, a.olabel, a.nextstate);
                let w = sem.times(cw, a.weight);
                match merged.get_mut(&key) {
                    Some(old) => *old = sem.plus(*old, w),
                    None => {
                        merged.insert(key, w);
                        order.push(key);
                    }
                }
            }
            if let Some(fw) = f.final_weight(StateId(p)) {
                final_w = sem.plus(final_w, sem.times(cw, fw));
            }
        }
        for key in order {
            b.add_arc(q, Arc::new(key.0, key.1, merged[&key], key.2));
        }
        b.set_final(q, final_w);
    }
    b.build()
}

/// A determinization state: source states with their residual weights,
/// sorted by state id and normalized so the residuals ⊕-sum to one.
pub type WeightedSubset = Vec<(StateId, Weight)>;

fn subsets_equal(sem: Semiring, a: &[(StateId, Weight)], b: &[(StateId, Weight)]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.0 == y.0 && sem.approx_eq(x.1, y.1))
}

/// Weighted subset-construction determinization for ε-free acceptors.
///
/// The result has at most one arc per (state, label) and denotes the same
/// weighted language. Some weighted acceptors admit no deterministic
/// equivalent; that case surfaces operationally as the subset count passing
/// `max_states`.
pub fn determinize(f: &Fst, max_states: usize) -> Result<Fst> {
    if !f.is_acceptor() {
        return Err(Error::NotAcceptor);
    }
    if !f.is_epsilon_free() {
        return Err(Error::HasEpsilon);
    }
    let sem = f.semiring();
    let mut b = FstBuilder::with_symbols(sem, f.isyms().clone(), f.osyms().clone());
    b.set_initial_weight(f.initial_weight());

    // Interned subsets, bucketed by their state-id skeleton; residuals are
    // compared with tolerance so floating-point noise cannot fragment the
    // subset space.
    let mut buckets: HashMap<Vec<StateId>, Vec<(usize, WeightedSubset)>> = HashMap::new();
    let mut subsets: Vec<WeightedSubset> = Vec::new();

    let start_subset: WeightedSubset = vec![(f.start(), sem.one())];
    let s0 = b.add_state();
    b.set_start(s0);
    buckets
        .entry(vec![f.start()])
        .or_default()
        .push((0, start_subset.clone()));
    subsets.push(start_subset);

    let mut next = 0usize;
    while next < subsets.len() {
        let subset = subsets[next].clone();
        let here = StateId(next);
        next += 1;

        let mut final_w = sem.zero();
        for &(q, v) in &subset {
            if let Some(fw) = f.final_weight(q) {
                final_w = sem.plus(final_w, sem.times(v, fw));
            }
        }
        b.set_final(here, final_w);

        // Group outgoing mass by label.
        let mut by_label: HashMap<Label, Vec<(StateId, Weight)>> = HashMap::new();
        for &(q, v) in &subset {
            for a in f.arcs(q) {
                by_label
                    .entry(a.ilabel)
                    .or_default()
                    .push((a.nextstate, sem.times(v, a.weight)));
            }
        }
        let mut labels: Vec<Label> = by_label.keys().copied().collect();
        labels.sort();

        for label in labels {
            let moves = &by_label[&label];
            let mut total = sem.zero();
            for &(_, w) in moves {
                total = sem.plus(total, w);
            }
            if sem.is_zero(total) {
                continue;
            }
            let mut acc: HashMap<StateId, Weight> = HashMap::new();
            for &(q, w) in moves {
                let e = acc.entry(q).or_insert_with(|| sem.zero());
                *e = sem.plus(*e, w);
            }
            let mut target: WeightedSubset = acc
                .into_iter()
                .map(|(q, w)| Ok((q, sem.divide(w, total)?)))
                .collect::<Result<_>>()?;
            target.sort_by_key(|&(q, _)| q);

            let skeleton: Vec<StateId> = target.iter().map(|&(q, _)| q).collect();
            let bucket = buckets.entry(skeleton).or_default();
            let id = bucket
                .iter()
                .find(|(_, s)| subsets_equal(sem, s, &target))
                .map(|&(id, _)| id);
            let target_id = match id {
                Some(id) => StateId(id),
                None => {
                    if subsets.len() >= max_states {
                        return Err(Error::StateLimit { max_states });
                    }
                    let id = subsets.len();
                    bucket.push((id, target.clone()));
                    subsets.push(target);
                    b.add_state()
                }
            };
            b.add_arc(here, Arc::new(label, label, total, target_id));
        }
    }
    b.build()
}

/// Moves weight toward the initial state: every arc is reweighted by the
/// backward shortest-distance potentials `V`, the leftover `V(start)` lands
/// in the initial weight, and the weighted language is unchanged. In the
/// tropical semiring the result has, at every state, minimum zero over
/// outgoing-⊕-final weight.
pub fn push_weights(f: &Fst) -> Result<Fst> {
    let sem = f.semiring();
    let v = shortest_distance(f, Direction::Backward)?;
    for q in f.state_ids() {
        if sem.is_zero(v[q.0]) {
            return Err(Error::NotCoAccessible(q));
        }
    }
    let mut b = FstBuilder::with_symbols(sem, f.isyms().clone(), f.osyms().clone());
    b.add_states(f.num_states());
    b.set_start(f.start());
    b.set_initial_weight(sem.times(f.initial_weight(), v[f.start().0]));
    for q in f.state_ids() {
        for a in f.arcs(q) {
            let w = sem.divide(sem.times(a.weight, v[a.nextstate.0]), v[q.0])?;
            b.add_arc(q, Arc::new(a.ilabel, a.olabel, w, a.nextstate));
        }
        if let Some(fw) = f.final_weight(q) {
            b.set_final(q, sem.divide(fw, v[q.0])?);
        }
    }
    b.build()
}

fn quantize(w: Weight) -> i64 {
    let v = w.value();
    if v.is_infinite() {
        i64::MAX
    } else {
        (v * 1e9).round() as i64
    }
}

fn check_deterministic(f: &Fst) -> Result<()> {
    for q in f.state_ids() {
        let mut seen: Vec<Label> = Vec::new();
        for a in f.arcs(q) {
            if a.ilabel.is_epsilon() {
                return Err(Error::NotDeterministic { state: q });
            }
            if seen.contains(&a.ilabel) {
                return Err(Error::NotDeterministic { state: q });
            }
            seen.push(a.ilabel);
        }
    }
    Ok(())
}

/// Minimizes a deterministic weighted acceptor: weights are pushed first,
/// then classical partition refinement runs with `(label, pushed weight)` as
/// the transition signature and `(finality, pushed final weight)` as the
/// state signature. The result is the unique minimal deterministic machine
/// for the weighted language.
pub fn minimize(f: &Fst) -> Result<Fst> {
    if !f.is_acceptor() {
        return Err(Error::NotAcceptor);
    }
    check_deterministic(f)?;
    let pushed = push_weights(f)?;
    let sem = pushed.semiring();
    let n = pushed.num_states();

    // Initial partition by final signature.
    let mut class = vec![0usize; n];
    {
        let mut sig_ids: HashMap<Option<i64>, usize> = HashMap::new();
        for q in pushed.state_ids() {
            let sig = pushed.final_weight(q).map(quantize);
            let next_id = sig_ids.len();
            let id = *sig_ids.entry(sig).or_insert(next_id);
            class[q.0] = id;
        }
    }

    // Refine until a pass is a no-op. Class ids are assigned in
    // first-occurrence order, so a stable pass reproduces `class` exactly.
    loop {
        let mut sig_ids: HashMap<(usize, Vec<(Label, i64, usize)>), usize> = HashMap::new();
        let mut next_class = vec![0usize; n];
        for q in pushed.state_ids() {
            let mut arcs: Vec<(Label, i64, usize)> = pushed
                .arcs(q)
                .iter()
                .map(|a| (a.ilabel, quantize(a.weight), class[a.nextstate.0]))
                .collect();
            arcs.sort();
            let key = (class[q.0], arcs);
            let next_id = sig_ids.len();
            let id = *sig_ids.entry(key).or_insert(next_id);
            next_class[q.0] = id;
        }
        if next_class == class {
            break;
        }
        class = next_class;
    }

    // Emit reachable classes in BFS order from the start class.
    let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
    for q in 0..n {
        members.entry(class[q]).or_default().push(q);
    }
    let mut b = FstBuilder::with_symbols(sem, pushed.isyms().clone(), pushed.osyms().clone());
    b.set_initial_weight(pushed.initial_weight());
    let mut class_to_new: HashMap<usize, StateId> = HashMap::new();
    let start_class = class[pushed.start().0];
    let s0 = b.add_state();
    class_to_new.insert(start_class, s0);
    b.set_start(s0);
    let mut queue = vec![start_class];
    let mut qi = 0usize;
    while qi < queue.len() {
        let c = queue[qi];
        qi += 1;
        let here = class_to_new[&c];
        let rep = StateId(members[&c][0]);
        for a in pushed.arcs(rep) {
            let tc = class[a.nextstate.0];
            let target = match class_to_new.get(&tc) {
                Some(&t) => t,
                None => {
                    let t = b.add_state();
                    class_to_new.insert(tc, t);
                    queue.push(tc);
                    t
                }
            };
            b.add_arc(here, Arc::new(a.ilabel, a.olabel, a.weight, target));
        }
        if let Some(fw) = pushed.final_weight(rep) {
            b.set_final(here, fw);
        }
    }
    b.build()
}
