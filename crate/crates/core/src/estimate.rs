//! Magic-state resource estimate for an optimized circuit.
//!
//! The injection error budget follows `constant · p^exponent ≤ target`, so
//! `p_max = (target / constant)^(1/exponent)`. With the 15-to-1 numbers
//! (constant 41.25, exponent 4, target 1e-2) this is about 0.1248. A factory
//! of `tiles` surface-code tiles at distance `d` occupies `tiles · (2d² − 1)`
//! physical qubits: 11 tiles at d = 5 give 539. Published totals for the same
//! protocol quote other figures; both inputs are kept independent here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("target error must be positive and finite, got {0}")]
    Target(f64),

    #[error("invalid protocol: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub suppression_constant: f64,
    pub suppression_exponent: u32,
    pub tiles: u64,
    pub code_distance: u64,
}

impl Default for Protocol {
    /// 15-to-1 distillation.
    fn default() -> Self {
        Protocol { suppression_constant: 41.25, suppression_exponent: 4, tiles: 11, code_distance: 5 }
    }
}

impl Protocol {
    pub fn validate(&self) -> Result<(), EstimateError> {
        if !(self.suppression_constant > 0.0 && self.suppression_constant.is_finite()) {
            return Err(EstimateError::Protocol(format!(
                "suppression constant must be positive, got {}",
                self.suppression_constant
            )));
        }
        if self.suppression_exponent == 0 {
            return Err(EstimateError::Protocol("suppression exponent must be at least 1".into()));
        }
        if self.tiles == 0 || self.code_distance == 0 {
            return Err(EstimateError::Protocol("tiles and code distance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub protocol: Protocol,
    pub target_error: f64,
    pub t_count: usize,
    pub t_depth: usize,
    /// Largest injection error meeting the target.
    pub p_max: f64,
    pub factory_qubits: u64,
    /// One magic state per T gate.
    pub magic_states: usize,
    /// Sequential batches of magic states, one per T-layer.
    pub batches: usize,
    pub p_max_formula: String,
    pub factory_formula: String,
}

pub fn p_max(target_error: f64, protocol: &Protocol) -> Result<f64, EstimateError> {
    if !(target_error > 0.0 && target_error.is_finite()) {
        return Err(EstimateError::Target(target_error));
    }
    protocol.validate()?;
    Ok((target_error / protocol.suppression_constant).powf(1.0 / f64::from(protocol.suppression_exponent)))
}

pub fn factory_qubits(protocol: &Protocol) -> u64 {
    let d = protocol.code_distance;
    protocol.tiles * (2 * d * d - 1)
}

pub fn estimate(
    t_count: usize,
    t_depth: usize,
    target_error: f64,
    protocol: Protocol,
) -> Result<ResourceEstimate, EstimateError> {
    let p = p_max(target_error, &protocol)?;
    let qubits = factory_qubits(&protocol);
    Ok(ResourceEstimate {
        protocol,
        target_error,
        t_count,
        t_depth,
        p_max: p,
        factory_qubits: qubits,
        magic_states: t_count,
        batches: t_depth,
        p_max_formula: format!(
            "p_max = ({target_error:e} / {})^(1/{}) = {p:.6e}",
            protocol.suppression_constant, protocol.suppression_exponent
        ),
        factory_formula: format!(
            "factory_qubits = {} * (2*{}^2 - 1) = {qubits}",
            protocol.tiles, protocol.code_distance
        ),
    })
}
