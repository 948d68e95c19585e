//! Density-driven splitting of dense T-layers into disjoint sub-layers.
//!
//! Splitting a column along qubit lines never changes the circuit unitary: the
//! pieces act on disjoint qubits, so they commute and multiply back to the
//! original layer. Finer layers give the merge search more freedom.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Column};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpansionError {
    #[error("column statistics need at least one qubit")]
    NoQubits,

    #[error("every local density score is zero; nothing to split")]
    DegenerateScores,

    #[error("invalid expansion parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpansionParams {
    /// Exponent of `n` in the scaling term.
    pub alpha: f64,
    /// Neighborhood radius for local density.
    pub locality_k: usize,
    pub enabled: bool,
    /// Re-run expansion at the start of every optimizer round, not just the first.
    #[serde(default)]
    pub every_round: bool,
}

impl Default for ExpansionParams {
    fn default() -> Self {
        ExpansionParams { alpha: 0.3, locality_k: 5, enabled: true, every_round: false }
    }
}

impl ExpansionParams {
    pub fn disabled() -> Self {
        ExpansionParams { enabled: false, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), ExpansionError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(ExpansionError::InvalidParams(format!("alpha must be in (0, 1], got {}", self.alpha)));
        }
        if !(1..=9).contains(&self.locality_k) {
            return Err(ExpansionError::InvalidParams(format!(
                "locality_k must be in 1..=9, got {}",
                self.locality_k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub t_count: usize,
    /// Fraction of qubits carrying a rotation.
    pub gamma: f64,
    /// Population variance of the 0/1 placement vector, `γ(1−γ)`.
    pub mu: f64,
}

pub fn column_stats(column: &Column, n: usize) -> Result<ColumnStats, ExpansionError> {
    if n == 0 {
        return Err(ExpansionError::NoQubits);
    }
    let t_count = column.t_count();
    let gamma = t_count as f64 / n as f64;
    Ok(ColumnStats { t_count, gamma, mu: gamma * (1.0 - gamma) })
}

/// `max(1, n^α · e^{2γ})`
pub fn scaling_term(gamma: f64, n: usize, alpha: f64) -> f64 {
    f64::max(1.0, (n as f64).powf(alpha) * (2.0 * gamma).exp())
}

/// Unrounded expansion factor
/// `ln(n+1)(1−γ²)γ^{1+γ} + ⌈t/τ⌉`.
pub fn raw_expansion_factor(stats: &ColumnStats, n: usize, alpha: f64) -> f64 {
    let gamma = stats.gamma;
    let spread = ((n + 1) as f64).ln() * (1.0 - gamma * gamma) * gamma.powf(1.0 + gamma);
    let tau = scaling_term(gamma, n, alpha);
    spread + (stats.t_count as f64 / tau).ceil()
}

/// Number of sub-columns a column is split into: the raw factor rounded half
/// up and clamped to `[1, max(1, t_count)]`.
pub fn expansion_factor(stats: &ColumnStats, n: usize, alpha: f64) -> usize {
    let raw = raw_expansion_factor(stats, n, alpha);
    let rounded = (raw + 0.5).floor().max(0.0) as usize;
    rounded.clamp(1, stats.t_count.max(1))
}

/// Local density score for every qubit:
/// `g_i + μ(g_i − mean_{N(i)} g) + (1−γ) Σ_{N(i)} g`, where `N(i)` is every
/// qubit within distance `k` of `i` (including `i`).
pub fn local_density_scores(column: &Column, stats: &ColumnStats, locality_k: usize) -> Vec<f64> {
    let n = column.len();
    let g: Vec<f64> = column.cells().map(|c| if c.is_rotation() { 1.0 } else { 0.0 }).collect();
    // prefix[i] = g[0] + ... + g[i-1]
    let prefix: Vec<f64> = std::iter::once(0.0)
        .chain(g.iter().scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        }))
        .collect();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(locality_k);
            let hi = (i + locality_k).min(n - 1);
            let sum = prefix[hi + 1] - prefix[lo];
            let mean = sum / (hi - lo + 1) as f64;
            g[i] + stats.mu * (g[i] - mean) + (1.0 - stats.gamma) * sum
        })
        .collect()
}

/// Normalizes scores into a distribution.
pub fn split_scores(scores: &[f64]) -> Result<Vec<f64>, ExpansionError> {
    let total: f64 = scores.iter().sum();
    if total <= 0.0 {
        return Err(ExpansionError::DegenerateScores);
    }
    Ok(scores.iter().map(|p| p / total).collect())
}

/// Sizes of `parts` near-equal chunks of `len` items, larger chunks first.
fn chunk_sizes(len: usize, parts: usize) -> impl Iterator<Item = usize> {
    let (base, extra) = (len / parts, len % parts);
    (0..parts).map(move |k| base + usize::from(k < extra))
}

/// Splits one column. Rotation-bearing qubits are ordered by ascending split
/// score (ties by qubit index) and cut into contiguous near-equal chunks; each
/// chunk becomes a column with the parent's sign.
///
/// Columns without rotations, and columns whose factor is 1, come back as-is.
pub fn expand_column(column: &Column, params: &ExpansionParams) -> Vec<Column> {
    let n = column.len();
    let Ok(stats) = column_stats(column, n) else {
        return vec![column.clone()];
    };
    if stats.t_count == 0 {
        return vec![column.clone()];
    }
    let parts = expansion_factor(&stats, n, params.alpha);
    if parts <= 1 {
        return vec![column.clone()];
    }
    let scores = local_density_scores(column, &stats, params.locality_k);
    let Ok(split) = split_scores(&scores) else {
        return vec![column.clone()];
    };
    let mut order: Vec<(usize, _)> = column.gates().collect();
    order.sort_by(|a, b| split[a.0].total_cmp(&split[b.0]).then(a.0.cmp(&b.0)));

    let mut rest = order.as_slice();
    chunk_sizes(order.len(), parts)
        .map(|size| {
            let (chunk, tail) = rest.split_at(size);
            rest = tail;
            Column::from_gates(n, chunk.iter().copied(), column.phase()).expect("qubits come from the column")
        })
        .collect()
}

/// Replaces every column by its expansion, in place.
pub fn expand_circuit(circuit: &Circuit, params: &ExpansionParams) -> Circuit {
    if !params.enabled {
        return circuit.clone();
    }
    let mut columns = Vec::with_capacity(circuit.len());
    // Residue slots move with the number of columns preceding them.
    let mut new_slot = Vec::with_capacity(circuit.len() + 1);
    for col in circuit.columns() {
        new_slot.push(columns.len());
        columns.extend(expand_column(col, params));
    }
    new_slot.push(columns.len());
    let residues = circuit
        .residues()
        .iter()
        .map(|r| crate::circuit::CliffordResidue { slot: r.slot.map(|s| new_slot[s]), ..*r })
        .collect();
    Circuit::with_residues(circuit.n(), columns, residues).expect("expansion preserves shape")
}
