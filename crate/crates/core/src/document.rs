//! JSON circuit documents.
//!
//! ```json
//! {"version": 1, "n": 3,
//!  "columns": [{"phase": "+", "gates": {"0": "Z", "2": "X"}}],
//!  "residues": [{"qubit": 0, "axis": "Z", "phase": "-", "slot": 1}]}
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, CliffordResidue, Column, PauliAxis, PhaseSign};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed circuit document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unsupported schema version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
}

mod sign {
    use super::*;

    pub fn serialize<S: Serializer>(phase: &PhaseSign, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(phase.symbol())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<PhaseSign, D::Error> {
        let raw = String::deserialize(d)?;
        match raw.as_str() {
            "+" => Ok(PhaseSign::Plus),
            "-" => Ok(PhaseSign::Minus),
            other => Err(de::Error::custom(format!("phase must be \"+\" or \"-\", got {other:?}"))),
        }
    }
}

/// Qubit → axis map that rejects repeated keys and serializes in qubit order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GateMap(pub BTreeMap<usize, PauliAxis>);

impl Serialize for GateMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(self.0.iter().map(|(q, a)| (q.to_string(), a)))
    }
}

impl<'de> Deserialize<'de> for GateMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct GateVisitor;

        impl<'de> Visitor<'de> for GateVisitor {
            type Value = GateMap;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from qubit index to \"X\", \"Y\" or \"Z\"")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<GateMap, A::Error> {
                let mut gates = BTreeMap::new();
                while let Some(key) = map.next_key::<String>()? {
                    let qubit: usize = key
                        .parse()
                        .map_err(|_| de::Error::custom(format!("gate key {key:?} is not a qubit index")))?;
                    let axis: PauliAxis = map.next_value()?;
                    if gates.insert(qubit, axis).is_some() {
                        return Err(de::Error::custom(format!("duplicate gate on qubit {qubit}")));
                    }
                }
                Ok(GateMap(gates))
            }
        }

        d.deserialize_map(GateVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnRecord {
    #[serde(with = "sign")]
    pub phase: PhaseSign,
    pub gates: GateMap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidueRecord {
    pub qubit: usize,
    pub axis: PauliAxis,
    #[serde(with = "sign")]
    pub phase: PhaseSign,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDocument {
    pub version: u32,
    pub n: usize,
    pub columns: Vec<ColumnRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residues: Vec<ResidueRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

impl CircuitDocument {
    pub fn from_circuit(circuit: &Circuit, provenance: Option<serde_json::Value>) -> Self {
        let columns = circuit
            .columns()
            .iter()
            .map(|c| ColumnRecord { phase: c.phase(), gates: GateMap(c.gates().collect()) })
            .collect();
        let residues = circuit
            .residues()
            .iter()
            .map(|r| ResidueRecord { qubit: r.qubit, axis: r.axis, phase: r.phase, slot: r.slot })
            .collect();
        CircuitDocument { version: SCHEMA_VERSION, n: circuit.n(), columns, residues, provenance }
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, DocumentError> {
        let probe: VersionProbe = serde_json::from_slice(bytes)?;
        if probe.version != SCHEMA_VERSION {
            return Err(DocumentError::Version { found: probe.version, expected: SCHEMA_VERSION });
        }
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn to_circuit(&self) -> Result<Circuit, DocumentError> {
        let n = self.n;
        let columns = self
            .columns
            .iter()
            .enumerate()
            .map(|(idx, rec)| {
                if let Some(&q) = rec.gates.0.keys().find(|&&q| q >= n) {
                    return Err(DocumentError::Invalid {
                        location: format!("columns[{idx}].gates[\"{q}\"]"),
                        message: format!("qubit {q} out of range for n = {n}"),
                    });
                }
                Ok(Column::from_gates(n, rec.gates.0.iter().map(|(&q, &a)| (q, a)), rec.phase).expect("checked"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let residues = self
            .residues
            .iter()
            .map(|r| CliffordResidue { qubit: r.qubit, axis: r.axis, phase: r.phase, slot: r.slot })
            .collect::<Vec<_>>();
        Circuit::with_residues(n, columns, residues.clone()).map_err(|e| {
            let idx = match e {
                CircuitError::QubitOutOfRange { qubit, .. } => residues.iter().position(|r| r.qubit == qubit),
                CircuitError::ColumnOutOfRange { index, .. } => residues.iter().position(|r| r.slot == Some(index)),
                _ => None,
            };
            DocumentError::Invalid {
                location: idx.map_or_else(|| "residues".to_string(), |i| format!("residues[{i}]")),
                message: e.to_string(),
            }
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }
}

pub fn parse_circuit(bytes: &[u8]) -> Result<Circuit, DocumentError> {
    CircuitDocument::parse(bytes)?.to_circuit()
}

pub fn serialize_circuit(circuit: &Circuit) -> String {
    CircuitDocument::from_circuit(circuit, None).to_json()
}
