//! Reference optimizers: an exhaustive search for tiny circuits and a
//! windowed permutation lookahead.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::{candidate_pairs, Pair};
use crate::circuit::{
    apply_merge_plan, canonicalize, merge, merge_check, Circuit, CliffordResidue, Column, MergePolicy, Order,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaselineError {
    #[error("circuit has T-depth {depth}, above the exhaustive-search limit of {limit}")]
    TooLarge { depth: usize, limit: usize },

    #[error("lookahead window must be in 2..=8, got {0}")]
    Window(usize),
}

pub const MAX_WINDOW: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceLimits {
    pub max_columns: usize,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        BruteForceLimits { max_columns: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceResult {
    pub min_t_depth: usize,
    /// One merge per step; indices refer to the circuit as it is at that step.
    pub witness: Vec<Pair>,
    pub states_visited: usize,
}

/// Minimum T-depth reachable through any sequence of single merges.
///
/// Under [`Order::StrictCommute`] states are memoized on the exact ordered
/// circuit; under [`Order::PaperOrder`] the search is a plain DFS.
pub fn brute_force_optimum(
    circuit: &Circuit,
    policy: MergePolicy,
    limits: BruteForceLimits,
) -> Result<BruteForceResult, BaselineError> {
    let start = canonicalize(circuit);
    if start.t_depth() > limits.max_columns {
        return Err(BaselineError::TooLarge { depth: start.t_depth(), limit: limits.max_columns });
    }
    let mut search = Exhaustive { policy, memo: HashMap::new(), visited: 0 };
    let (min_t_depth, witness) = search.best(&start);
    Ok(BruteForceResult { min_t_depth, witness, states_visited: search.visited })
}

struct Exhaustive {
    policy: MergePolicy,
    memo: HashMap<Circuit, (usize, Vec<Pair>)>,
    visited: usize,
}

impl Exhaustive {
    fn best(&mut self, state: &Circuit) -> (usize, Vec<Pair>) {
        let memoize = self.policy.order == Order::StrictCommute;
        if memoize {
            if let Some(hit) = self.memo.get(state) {
                return hit.clone();
            }
        }
        self.visited += 1;
        let mut best = (state.t_depth(), Vec::new());
        for pair in candidate_pairs(state, self.policy) {
            if best.0 == 0 {
                break;
            }
            let next = apply_merge_plan(state, &[pair], self.policy).expect("candidate pairs are valid");
            let (depth, tail) = self.best(&canonicalize(&next));
            if depth < best.0 {
                let mut witness = Vec::with_capacity(tail.len() + 1);
                witness.push(pair);
                witness.extend(tail);
                best = (depth, witness);
            }
        }
        if memoize {
            self.memo.insert(state.clone(), best.clone());
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LookaheadParams {
    pub window: usize,
    pub policy: MergePolicy,
}

impl Default for LookaheadParams {
    fn default() -> Self {
        LookaheadParams { window: 6, policy: MergePolicy::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LookaheadReport {
    pub windows: usize,
    pub merges: usize,
    pub permutations_tried: usize,
    pub t_depth_before: usize,
    pub t_depth_after: usize,
    pub t_count_before: usize,
    pub t_count_after: usize,
}

/// Lexicographic successor of `perm`; false when `perm` is the last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(k) = (1..perm.len()).rev().find(|&k| perm[k - 1] < perm[k]) else {
        return false;
    };
    let pivot = k - 1;
    let swap = (k..perm.len()).rev().find(|&l| perm[l] > perm[pivot]).unwrap();
    perm.swap(pivot, swap);
    perm[k..].reverse();
    true
}

struct Block {
    column: Column,
    residues: Vec<CliffordResidue>,
}

/// Merges neighbours of `order` greedily into blocks.
fn sweep(window: &[Column], order: &[usize], policy: MergePolicy) -> Vec<Block> {
    let mut blocks = Vec::new();
    let mut acc = Block { column: window[order[0]].clone(), residues: Vec::new() };
    for &k in &order[1..] {
        let next = &window[k];
        if mergeable(&acc.column, &acc.residues, next, policy) {
            let (m, extracted) = merge(&acc.column, next, policy).expect("checked");
            acc.column = m;
            acc.residues.extend(extracted);
        } else {
            blocks.push(std::mem::replace(&mut acc, Block { column: next.clone(), residues: Vec::new() }));
        }
    }
    blocks.push(acc);
    blocks
}

fn mergeable(acc: &Column, pending: &[CliffordResidue], next: &Column, policy: MergePolicy) -> bool {
    merge_check(acc, next, policy.overlap).is_ok()
        && (policy.order == Order::PaperOrder || pending.iter().all(|r| r.commutes_with(next)))
}

fn sweep_count(window: &[Column], order: &[usize], policy: MergePolicy) -> usize {
    let mut merges = 0;
    let mut acc = window[order[0]].clone();
    let mut pending: Vec<CliffordResidue> = Vec::new();
    for &k in &order[1..] {
        let next = &window[k];
        if mergeable(&acc, &pending, next, policy) {
            merges += 1;
            let (m, extracted) = merge(&acc, next, policy).expect("checked");
            acc = m;
            pending.extend(extracted);
        } else {
            acc = next.clone();
            pending.clear();
        }
    }
    merges
}

fn admissible(order: &[usize], commute: &[Vec<bool>]) -> bool {
    for a in 0..order.len() {
        for b in a + 1..order.len() {
            if order[a] > order[b] && !commute[order[a]][order[b]] {
                return false;
            }
        }
    }
    true
}

/// Best ordering of one window: `(merges, order)`, first in lexicographic
/// enumeration order on ties.
fn best_order(window: &[Column], policy: MergePolicy, tried: &mut usize) -> (usize, Vec<usize>) {
    let w = window.len();
    let commute: Vec<Vec<bool>> = (0..w)
        .map(|a| (0..w).map(|b| crate::circuit::columns_commute(&window[a], &window[b]).unwrap()).collect())
        .collect();
    let mut perm: Vec<usize> = (0..w).collect();
    let mut best = (0, perm.clone());
    let mut first = true;
    loop {
        if policy.order == Order::PaperOrder || admissible(&perm, &commute) {
            *tried += 1;
            let merges = sweep_count(window, &perm, policy);
            if first || merges > best.0 {
                best = (merges, perm.clone());
                first = false;
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best
}

/// Window-permutation lookahead: each block of `w` consecutive columns is
/// reordered in every admissible way, adjacent mergeable columns are merged
/// greedily, and the ordering with the most merges is kept.
///
/// Windows never span a slot that holds a residue.
pub fn lookahead_optimize(
    circuit: &Circuit,
    params: &LookaheadParams,
) -> Result<(Circuit, LookaheadReport), BaselineError> {
    if !(2..=MAX_WINDOW).contains(&params.window) {
        return Err(BaselineError::Window(params.window));
    }
    let input = canonicalize(circuit);
    let policy = params.policy;
    let by_slot = input.residues_by_slot();
    let residues = input.residues();
    let len = input.len();

    let mut columns: Vec<Column> = Vec::with_capacity(len);
    let mut out_residues: Vec<CliffordResidue> = Vec::new();
    let mut report = LookaheadReport {
        windows: 0,
        merges: 0,
        permutations_tried: 0,
        t_depth_before: input.t_depth(),
        t_depth_after: 0,
        t_count_before: input.t_count(),
        t_count_after: 0,
    };

    let mut start = 0;
    while start <= len {
        // residues sitting before column `start`
        for &r in &by_slot[start] {
            let slot = residues[r].slot.map(|_| columns.len());
            out_residues.push(CliffordResidue { slot, ..residues[r] });
        }
        if start == len {
            break;
        }
        let mut end = (start + params.window).min(len);
        if let Some(cut) = (start + 1..end).find(|&s| !by_slot[s].is_empty()) {
            end = cut;
        }
        let window = &input.columns()[start..end];
        report.windows += 1;
        let (merges, order) = best_order(window, policy, &mut report.permutations_tried);
        report.merges += merges;
        let blocks = sweep(window, &order, policy);
        for block in blocks {
            columns.push(block.column);
            let slot = columns.len();
            out_residues.extend(block.residues.into_iter().map(|r| CliffordResidue { slot: Some(slot), ..r }));
        }
        start = end;
    }

    let out = Circuit::with_residues(input.n(), columns, out_residues).expect("shape preserved");
    let out = canonicalize(&out);
    report.t_depth_after = out.t_depth();
    report.t_count_after = out.t_count();
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Overlap, PauliAxis, PhaseSign};
    use crate::oracle::verify_optimization;
    use PauliAxis::*;
    use PhaseSign::*;

    const STRICT: MergePolicy = MergePolicy { overlap: Overlap::EqualAxisOverlap, order: Order::StrictCommute };

    fn col(n: usize, gates: &[(usize, PauliAxis)], phase: PhaseSign) -> Column {
        Column::from_gates(n, gates.iter().copied(), phase).unwrap()
    }

    fn fig2() -> Circuit {
        Circuit::new(
            3,
            vec![
                col(3, &[(0, Z)], Plus),
                col(3, &[(1, X)], Minus),
                col(3, &[(2, Y)], Plus),
                col(3, &[(0, X), (2, Z)], Plus),
            ],
        )
        .unwrap()
    }

    #[test]
    fn permutations_enumerate_in_order() {
        let mut p = vec![0, 1, 2];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            seen.push(p.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![0, 2, 1]);
        assert_eq!(seen[5], vec![2, 1, 0]);
    }

    #[test]
    fn brute_force_no_merges() {
        let c = Circuit::new(1, vec![col(1, &[(0, Z)], Plus), col(1, &[(0, X)], Plus)]).unwrap();
        let r = brute_force_optimum(&c, STRICT, BruteForceLimits::default()).unwrap();
        assert_eq!((r.min_t_depth, r.witness), (2, vec![]));
    }

    #[test]
    fn brute_force_cancellation() {
        let a = col(2, &[(0, Z), (1, X)], Plus);
        let c = Circuit::new(2, vec![a.clone(), a]).unwrap();
        let r = brute_force_optimum(&c, STRICT, BruteForceLimits::default()).unwrap();
        assert!(r.min_t_depth < 2);
        let disjoint = MergePolicy::new(Overlap::DisjointOnly, Order::StrictCommute);
        assert_eq!(brute_force_optimum(&c, disjoint, BruteForceLimits::default()).unwrap().min_t_depth, 2);
    }

    #[test]
    fn brute_force_four_layer_instance() {
        let r = brute_force_optimum(&fig2(), STRICT, BruteForceLimits::default()).unwrap();
        assert_eq!((r.min_t_depth, r.witness), (3, vec![(0, 2)]));
    }

    #[test]
    fn brute_force_refuses_large_inputs() {
        let c = Circuit::new(1, vec![col(1, &[(0, Z)], Plus); 9]).unwrap();
        assert_eq!(
            brute_force_optimum(&c, STRICT, BruteForceLimits::default()),
            Err(BaselineError::TooLarge { depth: 9, limit: 8 })
        );
    }

    #[test]
    fn lookahead_finds_adjacent_merge() {
        let c = Circuit::new(2, vec![col(2, &[(0, Z)], Plus), col(2, &[(1, X)], Plus), col(2, &[(0, X)], Minus)]).unwrap();
        let (out, report) = lookahead_optimize(&c, &LookaheadParams { window: 2, policy: STRICT }).unwrap();
        assert_eq!(out.t_depth(), 2);
        assert_eq!(report.merges, 1);
    }

    #[test]
    fn lookahead_reorders_within_window() {
        let (out, report) = lookahead_optimize(&fig2(), &LookaheadParams { window: 4, policy: STRICT }).unwrap();
        assert_eq!(out.t_depth(), 3);
        assert_eq!(report.t_depth_after, 3);
        assert!(verify_optimization(&fig2(), &out, 1e-9).unwrap().is_equivalent());
    }

    #[test]
    fn lookahead_window_limits() {
        let c = fig2();
        assert_eq!(lookahead_optimize(&c, &LookaheadParams { window: 1, policy: STRICT }).unwrap_err(), BaselineError::Window(1));
        assert_eq!(lookahead_optimize(&c, &LookaheadParams { window: 9, policy: STRICT }).unwrap_err(), BaselineError::Window(9));
    }
}
