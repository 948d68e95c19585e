//! Merge-candidate enumeration, greedy filtering and initial population seeding.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{merge_check, Circuit, MergePolicy, Order};
use crate::ga::Chromosome;
use crate::rng;

pub type Pair = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GreedyParams {
    /// T budget of a merged column. `None` means the qubit count.
    pub t_max: Option<usize>,
    /// Largest allowed density gap between the two columns.
    pub delta_max: f64,
    /// Candidate sets of at most this size skip the filter.
    pub k_min: usize,
    /// Weight on the remaining T budget, in `[0, 1)`.
    pub beta: f64,
}

impl Default for GreedyParams {
    fn default() -> Self {
        GreedyParams { t_max: None, delta_max: 1.0, k_min: 8, beta: 0.8 }
    }
}

impl GreedyParams {
    pub fn t_max_for(&self, n: usize) -> usize {
        self.t_max.unwrap_or(n)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..1.0).contains(&self.beta) {
            return Err(format!("beta must be in [0, 1), got {}", self.beta));
        }
        if !(0.0..=1.0).contains(&self.delta_max) {
            return Err(format!("delta_max must be in [0, 1], got {}", self.delta_max));
        }
        if self.t_max == Some(0) {
            return Err("t_max must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub i: usize,
    pub j: usize,
    pub score: f64,
}

/// Every pair `i < j` that may merge, in lexicographic order.
///
/// Under [`Order::StrictCommute`] a pair also needs column `j` to commute with
/// every column and residue it would move across.
pub fn candidate_pairs(circuit: &Circuit, policy: MergePolicy) -> Vec<Pair> {
    let columns = circuit.columns();
    let mut pairs = Vec::new();
    match policy.order {
        Order::PaperOrder => {
            for i in 0..columns.len() {
                for j in i + 1..columns.len() {
                    if merge_check(&columns[i], &columns[j], policy.overlap).is_ok() {
                        pairs.push((i, j));
                    }
                }
            }
        }
        Order::StrictCommute => {
            let by_slot = circuit.residues_by_slot();
            let residues = circuit.residues();
            for (j, cj) in columns.iter().enumerate() {
                // Walk left from j until something refuses to commute with it.
                for i in (0..j).rev() {
                    if !by_slot[i + 1].iter().all(|&r| residues[r].commutes_with(cj)) {
                        break;
                    }
                    if i + 1 < j && !crate::circuit::columns_commute(&columns[i + 1], cj).unwrap_or(false) {
                        break;
                    }
                    if merge_check(&columns[i], cj, policy.overlap).is_ok() {
                        pairs.push((i, j));
                    }
                }
            }
            pairs.sort_unstable();
        }
    }
    pairs
}

fn score_pair(t: &[usize], n: usize, (i, j): Pair, params: &GreedyParams) -> Option<ScoredPair> {
    let t_max = params.t_max_for(n) as f64;
    let density = |k: usize| t[k] as f64 / n as f64;
    let gap = (density(i) - density(j)).abs();
    let t_sum = t[i] + t[j];
    if gap > params.delta_max || t_sum as f64 > t_max {
        return None;
    }
    Some(ScoredPair { i, j, score: 1.0 - gap + params.beta * (t_max - t_sum as f64) })
}

/// Scores the pairs that pass both thresholds, best first.
pub fn scored_pairs(circuit: &Circuit, pairs: &[Pair], params: &GreedyParams) -> Vec<ScoredPair> {
    let t: Vec<usize> = circuit.columns().iter().map(|c| c.t_count()).collect();
    let n = circuit.n().max(1);
    let mut scored: Vec<ScoredPair> = pairs.iter().filter_map(|&p| score_pair(&t, n, p, params)).collect();
    scored.sort_by(|a, b| b.score.total_cmp(&a.score).then((a.i, a.j).cmp(&(b.i, b.j))));
    scored
}

/// Greedy non-overlapping selection by descending score. Small candidate sets
/// (at most `k_min` pairs) are returned unchanged.
pub fn greedy_filter(circuit: &Circuit, pairs: &[Pair], params: &GreedyParams) -> Vec<Pair> {
    if pairs.len() <= params.k_min {
        return pairs.to_vec();
    }
    let mut used = HashSet::new();
    scored_pairs(circuit, pairs, params)
        .into_iter()
        .filter(|sp| {
            if used.contains(&sp.i) || used.contains(&sp.j) {
                return false;
            }
            used.insert(sp.i);
            used.insert(sp.j);
            true
        })
        .map(|sp| (sp.i, sp.j))
        .collect()
}

/// Maximal index-disjoint subset of `pool`, visiting pairs in random order.
pub fn random_disjoint_subset<R: Rng + ?Sized>(pool: &[Pair], rng: &mut R) -> Chromosome {
    let mut order: Vec<Pair> = pool.to_vec();
    order.shuffle(rng);
    let mut used = HashSet::new();
    let pairs = order
        .into_iter()
        .filter(|&(i, j)| {
            if used.contains(&i) || used.contains(&j) {
                return false;
            }
            used.insert(i);
            used.insert(j);
            true
        })
        .collect();
    Chromosome::new(pairs)
}

/// Pairs the densest columns with the sparsest partners available in `pool`.
pub fn density_pairing(circuit: &Circuit, pool: &[Pair]) -> Chromosome {
    let t: Vec<usize> = circuit.columns().iter().map(|c| c.t_count()).collect();
    let allowed: HashSet<Pair> = pool.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
    let mut members: Vec<usize> = pool.iter().flat_map(|&(i, j)| [i, j]).collect();
    members.sort_unstable();
    members.dedup();
    // densest first; ties by index
    members.sort_by(|&a, &b| t[b].cmp(&t[a]).then(a.cmp(&b)));

    let mut used = HashSet::new();
    let mut pairs = Vec::new();
    for &hi in &members {
        if used.contains(&hi) {
            continue;
        }
        // sparsest partner first; ties by index
        let partner = members
            .iter()
            .copied()
            .filter(|&lo| lo != hi && !used.contains(&lo))
            .filter(|&lo| allowed.contains(&(hi.min(lo), hi.max(lo))))
            .min_by(|&a, &b| t[a].cmp(&t[b]).then(a.cmp(&b)));
        if let Some(lo) = partner {
            used.insert(hi);
            used.insert(lo);
            pairs.push((hi.min(lo), hi.max(lo)));
        }
    }
    Chromosome::new(pairs)
}

/// Initial GA population: the density-pairing chromosome, then `size − 1`
/// random disjoint subsets of `filtered`.
pub fn seed_population(circuit: &Circuit, filtered: &[Pair], size: usize, seed: u64) -> Vec<Chromosome> {
    if filtered.is_empty() {
        return vec![Chromosome::default(); size];
    }
    let mut population = Vec::with_capacity(size);
    if size > 0 {
        population.push(density_pairing(circuit, filtered));
    }
    let mut rng = rng::seeded(seed);
    while population.len() < size {
        population.push(random_disjoint_subset(filtered, &mut rng));
    }
    population
}
