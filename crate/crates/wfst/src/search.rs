//! Single-source shortest distance and best-path extraction.
//!
//! `shortest_distance` computes, per state, the ⊕-sum over all path weights
//! from the start (forward) or to a final state (backward). Acyclic machines
//! are handled in any semiring by relaxing along a topological order; cyclic
//! machines only in the tropical semiring with non-negative arc weights,
//! where Dijkstra applies.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::fst::{Fst, Label};
use crate::semiring::{Semiring, Weight};

/// Which end of the paths is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Distances from the start state; `d[start]` is the initial weight.
    Forward,
    /// Distances to a final state; final weights are included.
    Backward,
}

/// Arcs indexed by source (forward) or by target (backward).
fn adjacency(f: &Fst, dir: Direction) -> Vec<Vec<(usize, Weight)>> {
    let mut adj: Vec<Vec<(usize, Weight)>> = vec![Vec::new(); f.num_states()];
    for s in f.state_ids() {
        for a in f.arcs(s) {
            match dir {
                Direction::Forward => adj[s.0].push((a.nextstate.0, a.weight)),
                Direction::Backward => adj[a.nextstate.0].push((s.0, a.weight)),
            }
        }
    }
    adj
}

/// ⊕-sum of all path weights between each state and the fixed end.
pub fn shortest_distance(f: &Fst, dir: Direction) -> Result<Vec<Weight>> {
    let sem = f.semiring();
    let n = f.num_states();
    let mut d = vec![sem.zero(); n];

    if let Some(topo) = f.topological_order() {
        match dir {
            Direction::Forward => {
                d[f.start().0] = f.initial_weight();
                for &q in &topo {
                    if sem.is_zero(d[q.0]) {
                        continue;
                    }
                    for a in f.arcs(q) {
                        d[a.nextstate.0] =
                            sem.plus(d[a.nextstate.0], sem.times(d[q.0], a.weight));
                    }
                }
            }
            Direction::Backward => {
                for &q in topo.iter().rev() {
                    let mut w = f.final_weight(q).unwrap_or_else(|| sem.zero());
                    for a in f.arcs(q) {
                        w = sem.plus(w, sem.times(a.weight, d[a.nextstate.0]));
                    }
                    d[q.0] = w;
                }
            }
        }
        return Ok(d);
    }

    if sem != Semiring::Tropical {
        return Err(Error::Unsupported(
            "shortest distance on a cyclic machine is only defined here in the tropical semiring"
                .to_string(),
        ));
    }
    for s in f.state_ids() {
        for a in f.arcs(s) {
            if a.weight.value() < 0.0 {
                return Err(Error::Unsupported(
                    "cyclic tropical machine with negative arc weights".to_string(),
                ));
            }
        }
    }

    // Dijkstra over the (min, +) structure.
    let adj = adjacency(f, dir);
    let mut heap: BinaryHeap<Reverse<(Weight, usize)>> = BinaryHeap::new();
    match dir {
        Direction::Forward => {
            d[f.start().0] = f.initial_weight();
            heap.push(Reverse((d[f.start().0], f.start().0)));
        }
        Direction::Backward => {
            for (q, w) in f.finals() {
                d[q.0] = sem.plus(d[q.0], w);
                heap.push(Reverse((d[q.0], q.0)));
            }
        }
    }
    while let Some(Reverse((dist, q))) = heap.pop() {
        if dist > d[q] {
            continue;
        }
        for &(r, w) in &adj[q] {
            let cand = sem.times(dist, w);
            if cand < d[r] {
                d[r] = cand;
                heap.push(Reverse((cand, r)));
            }
        }
    }
    Ok(d)
}

/// The minimum-weight accepting path of a tropical machine, as its
/// ε-stripped input and output label sequences and total weight
/// (initial ⊗ arcs ⊗ final). Returns `Ok(None)` when no accepting path
/// exists.
pub fn shortest_path(f: &Fst) -> Result<Option<(Vec<Label>, Vec<Label>, Weight)>> {
    let sem = f.semiring();
    if sem != Semiring::Tropical {
        return Err(Error::Unsupported(
            "shortest path is only defined here in the tropical semiring".to_string(),
        ));
    }
    let v = shortest_distance(f, Direction::Backward)?;
    if sem.is_zero(v[f.start().0]) || sem.is_zero(f.initial_weight()) {
        return Ok(None);
    }

    // Walk forward, at each state taking an arc on an optimal path
    // (w ⊗ V(next) minimal); stop at a final state once stopping is optimal.
    // Ties break toward stopping, then the lowest arc index.
    let mut input = Vec::new();
    let mut output = Vec::new();
    let mut total = f.initial_weight();
    let mut cur = f.start();
    let step_cap = 10 * f.num_states() + 10;
    for _ in 0..step_cap {
        let fin = f.final_weight(cur);
        let best_arc = f
            .arcs(cur)
            .iter()
            .map(|a| sem.times(a.weight, v[a.nextstate.0]))
            .min();
        let stop_here = match (fin, best_arc) {
            (Some(fw), Some(ba)) => fw <= ba,
            (Some(_), None) => true,
            (None, _) => false,
        };
        if stop_here {
            total = sem.times(total, fin.unwrap());
            return Ok(Some((input, output, total)));
        }
        let target = best_arc.expect("co-accessible state has an arc or is final");
        let a = f
            .arcs(cur)
            .iter()
            .find(|a| sem.times(a.weight, v[a.nextstate.0]) == target)
            .copied()
            .expect("minimum arc present");
        if !a.ilabel.is_epsilon() {
            input.push(a.ilabel);
        }
        if !a.olabel.is_epsilon() {
            output.push(a.olabel);
        }
        total = sem.times(total, a.weight);
        cur = a.nextstate;
    }
    Err(Error::Unsupported(
        "shortest path did not terminate (zero-weight cycle on an optimal path)".to_string(),
    ))
}
