//! Seeded random benchmark circuits and profile suites.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Cell, Circuit, Column, PauliAxis, PhaseSign};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("t_total {t_total} exceeds the {cells} cells of a {n}x{c} grid")]
    TooManyGates { t_total: usize, cells: usize, n: usize, c: usize },

    #[error("invalid suite profile: {0}")]
    Profile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub c: usize,
    pub t_total: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        let cells = self.n * self.c;
        if self.t_total > cells {
            return Err(GenError::TooManyGates { t_total: self.t_total, cells, n: self.n, c: self.c });
        }
        Ok(())
    }

    /// Spec whose gate count is `density · n · c`, rounded to nearest.
    pub fn with_density(n: usize, c: usize, density: f64, seed: u64) -> Self {
        let t_total = ((n * c) as f64 * density.clamp(0.0, 1.0)).round() as usize;
        GenSpec { n, c, t_total, seed }
    }
}

/// Places `t_total` rotations on distinct cells drawn uniformly from the
/// `n × c` grid, each with a uniform axis; every column's sign is a fair coin.
pub fn generate(spec: &GenSpec) -> Result<Circuit, GenError> {
    spec.validate()?;
    let GenSpec { n, c, t_total, .. } = *spec;
    let mut rng = rng::seeded(spec.seed);
    let phases: Vec<PhaseSign> =
        (0..c).map(|_| if rng.gen_bool(0.5) { PhaseSign::Plus } else { PhaseSign::Minus }).collect();
    let mut grid = vec![Cell::Identity; n * c];
    for cell in sample(&mut rng, n * c, t_total) {
        grid[cell] = Cell::Rotation(PauliAxis::ALL[rng.gen_range(0..3)]);
    }
    let columns = if n == 0 {
        vec![Column::identity(0); c]
    } else {
        grid.chunks(n).zip(phases).map(|(cells, phase)| Column::from_cells(cells, phase)).collect()
    };
    Ok(Circuit::new(n, columns).expect("generated columns share n"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteProfile {
    pub name: String,
    /// Inclusive qubit range.
    pub qubits: (usize, usize),
    /// Inclusive column range.
    pub columns: (usize, usize),
    /// Fractions of `n · c` that carry a rotation; assigned round-robin.
    pub densities: Vec<f64>,
    pub count: usize,
}

impl SuiteProfile {
    pub const NAMES: [&'static str; 3] = ["small", "moderate", "large"];

    pub fn small(count: usize) -> Self {
        Self::preset("small", (10, 20), (20, 50), count)
    }

    pub fn moderate(count: usize) -> Self {
        Self::preset("moderate", (60, 70), (100, 200), count)
    }

    pub fn large(count: usize) -> Self {
        Self::preset("large", (90, 100), (450, 550), count)
    }

    pub fn by_name(name: &str, count: usize) -> Option<Self> {
        match name {
            "small" => Some(Self::small(count)),
            "moderate" => Some(Self::moderate(count)),
            "large" => Some(Self::large(count)),
            _ => None,
        }
    }

    fn preset(name: &str, qubits: (usize, usize), columns: (usize, usize), count: usize) -> Self {
        SuiteProfile { name: name.into(), qubits, columns, densities: vec![0.1, 0.5, 1.0], count }
    }

    pub fn with_densities(mut self, densities: Vec<f64>) -> Self {
        self.densities = densities;
        self
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.qubits.0 > self.qubits.1 || self.columns.0 > self.columns.1 {
            return Err(GenError::Profile("range bounds are reversed".into()));
        }
        if self.densities.is_empty() {
            return Err(GenError::Profile("at least one density grade is required".into()));
        }
        if let Some(d) = self.densities.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            return Err(GenError::Profile(format!("density {d} is outside [0, 1]")));
        }
        Ok(())
    }
}

/// One row of a suite manifest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub instance: String,
    pub n: usize,
    pub c: usize,
    pub t_total: usize,
    pub seed: u64,
}

impl ManifestEntry {
    pub fn spec(&self) -> GenSpec {
        GenSpec { n: self.n, c: self.c, t_total: self.t_total, seed: self.seed }
    }
}

/// Instance specs of a suite. Instance `i` draws its shape and generator seed
/// from a sub-stream keyed by `(master_seed, i)` only.
pub fn suite_manifest(profile: &SuiteProfile, master_seed: u64) -> Result<Vec<ManifestEntry>, GenError> {
    profile.validate()?;
    Ok((0..profile.count)
        .map(|i| {
            let mut r = rng::substream(master_seed, &[i as u64]);
            let n = r.gen_range(profile.qubits.0..=profile.qubits.1);
            let c = r.gen_range(profile.columns.0..=profile.columns.1);
            let density = profile.densities[i % profile.densities.len()];
            let spec = GenSpec::with_density(n, c, density, r.gen());
            ManifestEntry { instance: format!("{}-{i:04}", profile.name), n, c, t_total: spec.t_total, seed: spec.seed }
        })
        .collect())
}

pub fn generate_suite(profile: &SuiteProfile, master_seed: u64) -> Result<Vec<(ManifestEntry, Circuit)>, GenError> {
    suite_manifest(profile, master_seed)?
        .into_par_iter()
        .map(|entry| {
            let circuit = generate(&entry.spec())?;
            Ok((entry, circuit))
        })
        .collect()
}
