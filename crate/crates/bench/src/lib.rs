//! Shared fixtures for the optimizer benchmarks.

use tmerge::{generate, Circuit, GaParams, GenSpec};

/// Random circuit with `density` of its `n × c` cells occupied.
pub fn fixture(n: usize, c: usize, density: f64, seed: u64) -> Circuit {
    let t_total = (density * (n * c) as f64).round() as usize;
    generate(&GenSpec { n, c, t_total, seed }).expect("fixture sizes are valid")
}

/// Small GA budget so one iteration stays in the millisecond range.
pub fn quick_ga(seed: u64) -> GaParams {
    GaParams { population_size: 16, generations: 5, elite_k: 2, rng_seed: seed, ..GaParams::default() }
}
