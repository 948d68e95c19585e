//! Run configuration, optimization reports and CSV rows.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{lookahead_optimize, BaselineError, LookaheadParams, MAX_WINDOW};
use crate::candidates::GreedyParams;
use crate::circuit::{Circuit, CircuitResult, MergePolicy};
use crate::expansion::ExpansionParams;
use crate::ga::{optimize, GaParams, Optimization, RoundLog};

/// Every tunable of a run. Missing TOML sections take their defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub policy: MergePolicy,
    pub expansion: ExpansionParams,
    pub greedy: GreedyParams,
    pub ga: GaParams,
    pub lookahead_window: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            policy: MergePolicy::default(),
            expansion: ExpansionParams::default(),
            greedy: GreedyParams::default(),
            ga: GaParams::default(),
            lookahead_window: 6,
        }
    }
}

impl Config {
    /// Copy with the top-level seed pushed into the GA parameters.
    pub fn resolved(mut self) -> Self {
        self.ga.rng_seed = self.seed;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        self.expansion.validate().map_err(|e| e.to_string())?;
        self.greedy.validate()?;
        self.ga.validate()?;
        if !(2..=MAX_WINDOW).contains(&self.lookahead_window) {
            return Err(format!("lookahead window must be in 2..={MAX_WINDOW}, got {}", self.lookahead_window));
        }
        Ok(())
    }

    pub fn lookahead(&self) -> LookaheadParams {
        LookaheadParams { window: self.lookahead_window, policy: self.policy }
    }
}

/// `100 · (before − after) / before`, or 0 when `before` is 0.
pub fn percent_reduction(before: usize, after: usize) -> f64 {
    if before == 0 {
        0.0
    } else {
        100.0 * (before as f64 - after as f64) / before as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub t_depth: usize,
    pub t_count: usize,
}

impl Metrics {
    pub fn of(circuit: &Circuit) -> Self {
        Metrics { t_depth: circuit.t_depth(), t_count: circuit.t_count() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    /// Where the input circuit came from, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub input: Metrics,
    pub output: Metrics,
    pub t_depth_reduction_pct: f64,
    pub t_count_reduction_pct: f64,
    pub rounds: usize,
    pub residues_extracted: usize,
    pub expanded_depth: usize,
    pub expansion_fallback: bool,
    pub seed: u64,
    pub policy: MergePolicy,
    pub config: Config,
    pub round_logs: Vec<RoundLog>,
    /// Wall clock; the only field that differs between identical runs.
    pub seconds: f64,
}

impl OptimizationReport {
    pub fn new(input: &Circuit, result: &Optimization, config: &Config, seconds: f64) -> Self {
        let (before, after) = (Metrics::of(input), Metrics::of(&result.circuit));
        OptimizationReport {
            source: None,
            input: before,
            output: after,
            t_depth_reduction_pct: percent_reduction(before.t_depth, after.t_depth),
            t_count_reduction_pct: percent_reduction(before.t_count, after.t_count),
            rounds: result.rounds.len(),
            residues_extracted: result.residues_extracted(),
            expanded_depth: result.expanded_depth,
            expansion_fallback: result.expansion_fallback,
            seed: config.seed,
            policy: config.policy,
            config: *config,
            round_logs: result.rounds.clone(),
            seconds,
        }
    }

    /// The report with its timing zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        OptimizationReport { seconds: 0.0, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}

/// Runs the optimizer under `config` and times it.
pub fn run_optimize(circuit: &Circuit, config: &Config) -> CircuitResult<(Optimization, OptimizationReport)> {
    let config = config.resolved();
    let start = Instant::now();
    let result = optimize(circuit, &config.ga, &config.greedy, &config.expansion, config.policy)?;
    let seconds = start.elapsed().as_secs_f64();
    let report = OptimizationReport::new(circuit, &result, &config, seconds);
    Ok((result, report))
}

pub const CSV_HEADER: [&str; 12] =
    ["instance", "n", "c", "t_total", "method", "td_before", "td_after", "tc_before", "tc_after", "rounds", "seconds", "seed"];

/// One method on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub instance: String,
    pub n: usize,
    pub c: usize,
    pub t_total: usize,
    pub method: String,
    pub td_before: usize,
    pub td_after: usize,
    pub tc_before: usize,
    pub tc_after: usize,
    pub rounds: usize,
    pub seconds: f64,
    pub seed: u64,
}

impl CsvRow {
    pub fn t_depth_reduction_pct(&self) -> f64 {
        percent_reduction(self.td_before, self.td_after)
    }

    pub fn t_count_reduction_pct(&self) -> f64 {
        percent_reduction(self.tc_before, self.tc_after)
    }
}

pub const COMPARISON_HEADER: [&str; 10] = [
    "instance",
    "n",
    "c",
    "t_total",
    "ga_td_reduction_pct",
    "lookahead_td_reduction_pct",
    "ga_tc_reduction_pct",
    "lookahead_tc_reduction_pct",
    "ga_seconds",
    "lookahead_seconds",
];

/// Side-by-side summary of both methods on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub instance: String,
    pub n: usize,
    pub c: usize,
    pub t_total: usize,
    pub ga_td_reduction_pct: f64,
    pub lookahead_td_reduction_pct: f64,
    pub ga_tc_reduction_pct: f64,
    pub lookahead_tc_reduction_pct: f64,
    pub ga_seconds: f64,
    pub lookahead_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub ga: CsvRow,
    pub lookahead: CsvRow,
}

impl Comparison {
    pub fn summary(&self) -> ComparisonRow {
        ComparisonRow {
            instance: self.ga.instance.clone(),
            n: self.ga.n,
            c: self.ga.c,
            t_total: self.ga.t_total,
            ga_td_reduction_pct: self.ga.t_depth_reduction_pct(),
            lookahead_td_reduction_pct: self.lookahead.t_depth_reduction_pct(),
            ga_tc_reduction_pct: self.ga.t_count_reduction_pct(),
            lookahead_tc_reduction_pct: self.lookahead.t_count_reduction_pct(),
            ga_seconds: self.ga.seconds,
            lookahead_seconds: self.lookahead.seconds,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CompareError {
    #[error(transparent)]
    Circuit(#[from] crate::circuit::CircuitError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

/// Runs the GA and the lookahead baseline on the same circuit.
pub fn compare_instance(instance: &str, circuit: &Circuit, config: &Config) -> Result<Comparison, CompareError> {
    let config = config.resolved();
    let before = Metrics::of(circuit);
    let row = |method: &str, after: Metrics, rounds: usize, seconds: f64| CsvRow {
        instance: instance.to_string(),
        n: circuit.n(),
        c: circuit.len(),
        t_total: before.t_count,
        method: method.to_string(),
        td_before: before.t_depth,
        td_after: after.t_depth,
        tc_before: before.t_count,
        tc_after: after.t_count,
        rounds,
        seconds,
        seed: config.seed,
    };

    let (ga, report) = run_optimize(circuit, &config)?;
    let ga_row = row("ga", Metrics::of(&ga.circuit), report.rounds, report.seconds);

    let start = Instant::now();
    let (out, _) = lookahead_optimize(circuit, &config.lookahead())?;
    let seconds = start.elapsed().as_secs_f64();
    let la_row = row("lookahead", Metrics::of(&out), 1, seconds);
    Ok(Comparison { ga: ga_row, lookahead: la_row })
}
