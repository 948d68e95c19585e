//! T-depth and T-count reduction for circuits of π/8 Pauli rotation layers.
//!
//! A circuit is a sequence of [`Column`]s. The optimizer splits dense columns
//! ([`expansion`]), enumerates and filters mergeable pairs ([`candidates`]) and
//! evolves merge plans with a genetic search ([`ga`]). [`oracle`] checks results
//! against dense unitaries on small registers.

pub mod baselines;
pub mod benchgen;
pub mod candidates;
pub mod circuit;
pub mod document;
pub mod estimate;
pub mod expansion;
pub mod ga;
pub mod oracle;
pub mod report;
pub mod rng;

pub use baselines::{brute_force_optimum, lookahead_optimize, BruteForceLimits, LookaheadParams};
pub use benchgen::{generate, generate_suite, GenSpec, ManifestEntry, SuiteProfile};
pub use candidates::{candidate_pairs, greedy_filter, seed_population, GreedyParams, Pair};
pub use circuit::{
    apply_merge_plan, can_merge, canonicalize, columns_commute, merge, Cell, Circuit, CircuitError, CliffordResidue,
    Column, MergeCheck, MergePolicy, Order, Overlap, PauliAxis, PhaseSign,
};
pub use document::{parse_circuit, serialize_circuit, CircuitDocument, DocumentError};
pub use estimate::{estimate, Protocol, ResourceEstimate};
pub use expansion::{expand_circuit, ExpansionParams};
pub use ga::{optimize, Chromosome, GaParams, Optimization, RoundLog};
pub use oracle::{verify_optimization, Verdict};
pub use report::{run_optimize, Config, CsvRow, OptimizationReport};
