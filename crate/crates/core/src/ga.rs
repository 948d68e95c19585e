//! Genetic search over merge plans.
//!
//! One optimizer round enumerates mergeable pairs, filters them greedily,
//! evolves a population of disjoint merge plans and applies the best plan
//! found. Rounds repeat on the shrunken circuit until no merge is left.
//!
//! All randomness for round `r`, generation `g` and population slot `s` comes
//! from the sub-stream `(seed, r, g, s)`, so results do not depend on whether
//! fitness evaluation runs in parallel.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::{candidate_pairs, greedy_filter, random_disjoint_subset, seed_population, GreedyParams, Pair};
use crate::circuit::{apply_merge_plan, canonicalize, Circuit, CircuitError, CircuitResult, MergePolicy};
use crate::expansion::{expand_circuit, ExpansionParams};
use crate::rng;

/// An ordered list of index-disjoint column pairs, each stored as `(low, high)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chromosome {
    pairs: Vec<Pair>,
}

impl Chromosome {
    /// Normalizes each pair to `(low, high)` and drops self-pairs and any pair
    /// reusing an index of an earlier pair.
    pub fn new(pairs: Vec<Pair>) -> Self {
        let mut used = HashSet::new();
        let pairs = pairs
            .into_iter()
            .map(|(i, j)| (i.min(j), i.max(j)))
            .filter(|&(i, j)| i != j && !used.contains(&i) && !used.contains(&j) && used.insert(i) && used.insert(j))
            .collect();
        Chromosome { pairs }
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// True when no column index appears twice.
    pub fn is_disjoint(&self) -> bool {
        let mut seen = HashSet::new();
        self.pairs.iter().all(|&(i, j)| i != j && seen.insert(i) && seen.insert(j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaParams {
    pub population_size: usize,
    pub generations: usize,
    pub elite_k: usize,
    pub mutation_rate: f64,
    /// `None` runs until no merge is found.
    pub max_rounds: Option<usize>,
    pub rng_seed: u64,
    /// Evaluate fitness on the rayon pool.
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

fn default_parallel() -> bool {
    true
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population_size: 20,
            generations: 20,
            elite_k: 4,
            mutation_rate: 0.2,
            max_rounds: None,
            rng_seed: 0,
            parallel: true,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.population_size == 0 {
            return Err("population size must be at least 1".into());
        }
        if self.generations == 0 {
            return Err("generations must be at least 1".into());
        }
        if self.elite_k == 0 || self.elite_k > self.population_size {
            return Err(format!(
                "elite_k must be in 1..={}, got {}",
                self.population_size, self.elite_k
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(format!("mutation rate must be in [0, 1], got {}", self.mutation_rate));
        }
        Ok(())
    }
}

/// Number of pairs that are valid merges when processed in order, skipping
/// pairs that reuse a column already merged earlier in the chromosome.
pub fn fitness(chromosome: &Chromosome, circuit: &Circuit, policy: MergePolicy) -> CircuitResult<usize> {
    let mut used = HashSet::new();
    let mut count = 0;
    for &(i, j) in chromosome.pairs() {
        for idx in [i, j] {
            if idx >= circuit.len() {
                return Err(CircuitError::ColumnOutOfRange { index: idx, len: circuit.len() });
            }
        }
        if used.contains(&i) || used.contains(&j) {
            continue;
        }
        if circuit.pair_is_valid(i, j, policy) {
            used.insert(i);
            used.insert(j);
            count += 1;
        }
    }
    Ok(count)
}

/// Pairs counted by the fitness function, against a precomputed valid set.
fn counted_pairs(chromosome: &Chromosome, valid: &HashSet<Pair>) -> Vec<Pair> {
    let mut used = HashSet::new();
    chromosome
        .pairs()
        .iter()
        .copied()
        .filter(|&(i, j)| {
            if used.contains(&i) || used.contains(&j) || !valid.contains(&(i, j)) {
                return false;
            }
            used.insert(i);
            used.insert(j);
            true
        })
        .collect()
}

/// First half of `a` followed by the second half of `b` (both halves rounded
/// up), dropping pairs that reuse an index.
pub fn crossover(a: &Chromosome, b: &Chromosome) -> Chromosome {
    let head = a.pairs.len().div_ceil(2);
    let tail = b.pairs.len().div_ceil(2);
    let pairs = a.pairs[..head]
        .iter()
        .chain(&b.pairs[b.pairs.len() - tail..])
        .copied()
        .collect();
    Chromosome::new(pairs)
}

/// Reset mutation: with probability `rate` the offspring is replaced by a fresh
/// random disjoint subset of `pool`.
pub fn mutate<R: Rng + ?Sized>(offspring: Chromosome, pool: &[Pair], rate: f64, rng: &mut R) -> Chromosome {
    if rng.gen_bool(rate.clamp(0.0, 1.0)) {
        random_disjoint_subset(pool, rng)
    } else {
        offspring
    }
}

/// Result of one GA round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSearch {
    /// Best plan found, reduced to the pairs its fitness counts.
    pub best: Chromosome,
    pub candidates: usize,
    pub pool_size: usize,
    /// Best fitness of each generation's population.
    pub generation_best: Vec<usize>,
}

impl RoundSearch {
    pub fn fitness(&self) -> usize {
        self.best.len()
    }
}

/// Runs `G` generations on the current circuit. Returns `None` when there is
/// nothing to merge.
pub fn evolve_round(
    circuit: &Circuit,
    params: &GaParams,
    greedy: &GreedyParams,
    policy: MergePolicy,
    round: usize,
) -> Option<RoundSearch> {
    let candidates = candidate_pairs(circuit, policy);
    if candidates.is_empty() {
        return None;
    }
    let pool = greedy_filter(circuit, &candidates, greedy);
    if pool.is_empty() {
        return None;
    }
    let valid: HashSet<Pair> = candidates.iter().copied().collect();
    let round = round as u64;
    let n_pop = params.population_size;
    let elite_k = params.elite_k.min(n_pop);

    let mut population = seed_population(circuit, &pool, n_pop, rng::derive_seed(params.rng_seed, &[round, 0]));
    let mut best: Option<Vec<Pair>> = None;
    let mut generation_best = Vec::with_capacity(params.generations);

    for generation in 0..params.generations {
        let evaluate = |ch: &Chromosome| counted_pairs(ch, &valid);
        let scored: Vec<Vec<Pair>> = if params.parallel {
            population.par_iter().map(evaluate).collect()
        } else {
            population.iter().map(evaluate).collect()
        };
        let mut ranking: Vec<usize> = (0..population.len()).collect();
        // stable: earlier chromosomes win ties
        ranking.sort_by(|&a, &b| scored[b].len().cmp(&scored[a].len()));

        let top = &scored[ranking[0]];
        generation_best.push(top.len());
        if best.as_ref().map_or(true, |b| top.len() > b.len()) {
            best = Some(top.clone());
        }
        if generation + 1 == params.generations {
            break;
        }

        let elite: Vec<Chromosome> = ranking[..elite_k].iter().map(|&k| population[k].clone()).collect();
        let breed = |slot: usize| {
            let mut rng = rng::substream(params.rng_seed, &[round, generation as u64 + 1, slot as u64]);
            let a = &elite[rng.gen_range(0..elite_k)];
            let b = &elite[rng.gen_range(0..elite_k)];
            mutate(crossover(a, b), &pool, params.mutation_rate, &mut rng)
        };
        let offspring: Vec<Chromosome> = if params.parallel {
            (elite_k..n_pop).into_par_iter().map(breed).collect()
        } else {
            (elite_k..n_pop).map(breed).collect()
        };
        population = elite;
        population.extend(offspring);
    }

    Some(RoundSearch {
        best: Chromosome::new(best.unwrap_or_default()),
        candidates: candidates.len(),
        pool_size: pool.len(),
        generation_best,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub candidates: usize,
    pub pool_size: usize,
    pub best_fitness: usize,
    pub pairs: Vec<Pair>,
    pub t_depth: usize,
    pub t_count: usize,
    pub residues_extracted: usize,
    pub generation_best: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimization {
    pub circuit: Circuit,
    pub rounds: Vec<RoundLog>,
    /// T-depth right after the initial expansion pass.
    pub expanded_depth: usize,
    /// The expanded search ended deeper than the input, so the result comes
    /// from a run without expansion.
    pub expansion_fallback: bool,
}

impl Optimization {
    pub fn residues_extracted(&self) -> usize {
        self.rounds.iter().map(|r| r.residues_extracted).sum()
    }
}

fn run_rounds(
    start: Circuit,
    params: &GaParams,
    greedy: &GreedyParams,
    expansion: &ExpansionParams,
    policy: MergePolicy,
) -> CircuitResult<(Circuit, Vec<RoundLog>)> {
    let mut current = start;
    let mut rounds = Vec::new();
    let mut round = 0;
    while params.max_rounds.map_or(true, |m| round < m) {
        let before = current.clone();
        if expansion.enabled && expansion.every_round && round > 0 {
            current = expand_circuit(&current, expansion);
        }
        let Some(search) = evolve_round(&current, params, greedy, policy, round) else {
            current = before;
            break;
        };
        if search.best.is_empty() {
            current = before;
            break;
        }
        let next = canonicalize(&apply_merge_plan(&current, search.best.pairs(), policy)?);
        // Re-expansion can undo its own merges forever; stop once a round stops paying.
        if expansion.every_round && round > 0 && next.t_depth() >= before.t_depth() {
            current = before;
            break;
        }
        rounds.push(RoundLog {
            round,
            candidates: search.candidates,
            pool_size: search.pool_size,
            best_fitness: search.fitness(),
            pairs: search.best.pairs().to_vec(),
            t_depth: next.t_depth(),
            t_count: next.t_count(),
            residues_extracted: next.residues().len() - current.residues().len(),
            generation_best: search.generation_best,
        });
        current = next;
        round += 1;
    }
    Ok((current, rounds))
}

/// Full pipeline: optional expansion, then GA rounds until no merge remains.
///
/// The result never has a larger T-depth than the input: if the expanded
/// search ends deeper than it started, the search is rerun without expansion.
pub fn optimize(
    circuit: &Circuit,
    params: &GaParams,
    greedy: &GreedyParams,
    expansion: &ExpansionParams,
    policy: MergePolicy,
) -> CircuitResult<Optimization> {
    let input = canonicalize(circuit);
    let start = if expansion.enabled { expand_circuit(&input, expansion) } else { input.clone() };
    let expanded_depth = start.t_depth();
    let (out, rounds) = run_rounds(start, params, greedy, expansion, policy)?;
    if out.t_depth() <= input.t_depth() {
        return Ok(Optimization { circuit: out, rounds, expanded_depth, expansion_fallback: false });
    }
    let (out, rounds) = run_rounds(input, params, greedy, &ExpansionParams::disabled(), policy)?;
    Ok(Optimization { circuit: out, rounds, expanded_depth, expansion_fallback: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Column, Order, Overlap, PauliAxis, PhaseSign};
    use PauliAxis::*;
    use PhaseSign::*;

    const STRICT: MergePolicy = MergePolicy { overlap: Overlap::EqualAxisOverlap, order: Order::StrictCommute };

    fn col(n: usize, gates: &[(usize, PauliAxis)], phase: PhaseSign) -> Column {
        Column::from_gates(n, gates.iter().copied(), phase).unwrap()
    }

    fn ch(pairs: &[Pair]) -> Chromosome {
        Chromosome::new(pairs.to_vec())
    }

    #[test]
    fn chromosome_construction_enforces_disjointness() {
        let c = Chromosome::new(vec![(1, 0), (1, 2), (3, 3), (4, 5)]);
        assert_eq!(c.pairs(), &[(0, 1), (4, 5)]);
        assert!(c.is_disjoint());
    }

    #[test]
    fn fitness_counts_with_used_set() {
        let c = Circuit::new(3, vec![col(3, &[(0, Z)], Plus), col(3, &[(1, Z)], Plus), col(3, &[(2, Z)], Plus)]).unwrap();
        assert_eq!(fitness(&Chromosome::default(), &c, STRICT).unwrap(), 0);
        // the constructor would drop (1,2); build the raw list directly
        let raw = Chromosome { pairs: vec![(0, 1), (1, 2)] };
        assert_eq!(fitness(&raw, &c, STRICT).unwrap(), 1);
        let bad = Chromosome { pairs: vec![(0, 7)] };
        assert!(fitness(&bad, &c, STRICT).is_err());
    }

    #[test]
    fn crossover_examples() {
        let a = ch(&[(0, 1), (4, 5)]);
        let b = ch(&[(1, 2), (6, 7)]);
        let child = crossover(&a, &b);
        assert_eq!(child.pairs(), &[(0, 1), (6, 7)]);
        assert_eq!(crossover(&ch(&[(0, 1)]), &ch(&[(2, 3)])).pairs(), &[(0, 1), (2, 3)]);
        assert_eq!(crossover(&ch(&[(0, 1)]), &ch(&[(2, 3), (4, 5)])).pairs(), &[(0, 1), (4, 5)]);
        let self_cross = crossover(&a, &a);
        assert!(self_cross.pairs().iter().all(|p| a.pairs().contains(p)));
        assert!(self_cross.is_disjoint());
    }

    #[test]
    fn crossover_drops_reused_index() {
        let a = ch(&[(0, 1), (2, 3)]);
        let b = ch(&[(4, 5), (1, 6)]);
        assert_eq!(crossover(&a, &b).pairs(), &[(0, 1)]);
    }

    #[test]
    fn mutation_rates() {
        let pool = vec![(0, 1), (1, 2), (2, 3), (4, 5)];
        let offspring = ch(&[(0, 1)]);
        let mut r = rng::seeded(3);
        for _ in 0..50 {
            assert_eq!(mutate(offspring.clone(), &pool, 0.0, &mut r), offspring);
        }
        for _ in 0..50 {
            let m = mutate(offspring.clone(), &pool, 1.0, &mut r);
            assert!(m.is_disjoint());
            assert!(m.pairs().iter().all(|p| pool.contains(p)));
        }
        let run = |seed| {
            let mut r = rng::seeded(seed);
            (0..40).map(|_| mutate(offspring.clone(), &pool, 0.2, &mut r) != offspring).collect::<Vec<_>>()
        };
        assert_eq!(run(11), run(11));
    }

    #[test]
    fn single_pair_pool() {
        let c = Circuit::new(2, vec![col(2, &[(0, Z)], Plus), col(2, &[(1, Z)], Plus)]).unwrap();
        let search = evolve_round(&c, &GaParams::default(), &GreedyParams::default(), STRICT, 0).unwrap();
        assert_eq!(search.best.pairs(), &[(0, 1)]);
        assert_eq!(search.generation_best[0], 1);
        assert!(search.generation_best.windows(2).all(|w| w[0] <= w[1]) || search.fitness() == 1);
    }

    #[test]
    fn no_candidates_means_no_round() {
        let c = Circuit::new(1, vec![col(1, &[(0, Z)], Plus), col(1, &[(0, X)], Plus)]).unwrap();
        assert!(evolve_round(&c, &GaParams::default(), &GreedyParams::default(), STRICT, 0).is_none());
        let out = optimize(&c, &GaParams::default(), &GreedyParams::default(), &ExpansionParams::default(), STRICT).unwrap();
        assert_eq!(out.circuit, c);
        assert!(out.rounds.is_empty());
    }

    #[test]
    fn four_layers_one_merge() {
        let cols = vec![
            col(3, &[(0, Z)], Plus),
            col(3, &[(1, X)], Minus),
            col(3, &[(2, Y)], Plus),
            col(3, &[(0, X), (2, Z)], Plus),
        ];
        let c = Circuit::new(3, cols).unwrap();
        let out = optimize(&c, &GaParams::default(), &GreedyParams::default(), &ExpansionParams::default(), STRICT).unwrap();
        assert_eq!(out.circuit.t_depth(), 3);
        assert_eq!(out.rounds.len(), 1);
        assert_eq!(out.rounds[0].pairs, vec![(0, 2)]);
    }

    #[test]
    fn params_validation() {
        assert!(GaParams::default().validate().is_ok());
        assert!(GaParams { elite_k: 21, ..Default::default() }.validate().is_err());
        assert!(GaParams { generations: 0, ..Default::default() }.validate().is_err());
        assert!(GaParams { mutation_rate: 1.5, ..Default::default() }.validate().is_err());
    }
}
