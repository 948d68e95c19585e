//! Dense unitary construction and equivalence checking for small circuits.
//!
//! Qubit `q` is bit `q` of the computational-basis index. Matrices are stored
//! row-major. Column 0 of a circuit is applied first, so the circuit unitary is
//! `U_{m-1} ⋯ U_1 U_0`.

use std::f64::consts::FRAC_PI_8;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CliffordResidue, Column, PauliAxis, PhaseSign};

/// Largest qubit count the oracle will build a matrix for.
pub const MAX_QUBITS: usize = 12;

/// Default tolerance for equivalence checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{n} qubits exceeds the dense oracle limit of {MAX_QUBITS}")]
    Capacity { n: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is numerically zero")]
    Degenerate,
}

pub type OracleResult<T> = Result<T, OracleError>;

#[derive(Clone, PartialEq)]
pub struct DenseUnitary {
    n: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for DenseUnitary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DenseUnitary").field("n", &self.n).field("dim", &self.dim).finish()
    }
}

type Mat2 = [[Complex64; 2]; 2];

/// `exp(iθP) = cos θ·I + i sin θ·P`.
pub fn rotation_matrix(axis: PauliAxis, theta: f64) -> Mat2 {
    let c = Complex64::new(theta.cos(), 0.0);
    let s = theta.sin();
    let zero = Complex64::new(0.0, 0.0);
    match axis {
        // i sin θ X
        PauliAxis::X => [[c, Complex64::new(0.0, s)], [Complex64::new(0.0, s), c]],
        // i sin θ Y, Y = [[0, -i], [i, 0]]
        PauliAxis::Y => [[c, Complex64::new(s, 0.0)], [Complex64::new(-s, 0.0), c]],
        // i sin θ Z
        PauliAxis::Z => [
            [Complex64::new(theta.cos(), s), zero],
            [zero, Complex64::new(theta.cos(), -s)],
        ],
    }
}

impl DenseUnitary {
    pub fn identity(n: usize) -> OracleResult<Self> {
        if n > MAX_QUBITS {
            return Err(OracleError::Capacity { n });
        }
        let dim = 1usize << n;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for k in 0..dim {
            data[k * dim + k] = Complex64::new(1.0, 0.0);
        }
        Ok(DenseUnitary { n, dim, data })
    }

    /// Builds a matrix from row-major entries. `data.len()` must be `4^n`.
    pub fn from_rows(n: usize, data: Vec<Complex64>) -> OracleResult<Self> {
        if n > MAX_QUBITS {
            return Err(OracleError::Capacity { n });
        }
        let dim = 1usize << n;
        if data.len() != dim * dim {
            return Err(OracleError::DimensionMismatch(data.len(), dim * dim));
        }
        Ok(DenseUnitary { n, dim, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Left-multiplies by a single-qubit gate acting on `qubit`.
    pub fn apply_single(&mut self, qubit: usize, gate: &Mat2) {
        let dim = self.dim;
        let bit = 1usize << qubit;
        for r0 in (0..dim).filter(|r| r & bit == 0) {
            let r1 = r0 | bit;
            for c in 0..dim {
                let a = self.data[r0 * dim + c];
                let b = self.data[r1 * dim + c];
                self.data[r0 * dim + c] = gate[0][0] * a + gate[0][1] * b;
                self.data[r1 * dim + c] = gate[1][0] * a + gate[1][1] * b;
            }
        }
    }

    /// Left-multiplies by the unitary of `column`.
    pub fn apply_column(&mut self, column: &Column) {
        let theta = column.phase().factor() * FRAC_PI_8;
        for (q, axis) in column.gates() {
            self.apply_single(q, &rotation_matrix(axis, theta));
        }
    }

    /// Left-multiplies by the ±π/4 rotation of a residue.
    pub fn apply_residue(&mut self, residue: &CliffordResidue) {
        let theta = residue.phase.factor() * 2.0 * FRAC_PI_8;
        self.apply_single(residue.qubit, &rotation_matrix(residue.axis, theta));
    }

    /// `self · other`.
    pub fn matmul(&self, other: &DenseUnitary) -> OracleResult<DenseUnitary> {
        if self.dim != other.dim {
            return Err(OracleError::DimensionMismatch(self.dim, other.dim));
        }
        let dim = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let a = self.data[r * dim + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..dim {
                    data[r * dim + c] += a * other.data[k * dim + c];
                }
            }
        }
        Ok(DenseUnitary { n: self.n, dim, data })
    }

    pub fn adjoint(&self) -> DenseUnitary {
        let dim = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[c * dim + r] = self.data[r * dim + c].conj();
            }
        }
        DenseUnitary { n: self.n, dim, data }
    }

    /// Frobenius norm of `U·U† − I`.
    pub fn unitarity_error(&self) -> f64 {
        let prod = self.matmul(&self.adjoint()).expect("same dimension");
        let dim = self.dim;
        prod.data
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let expected = if k / dim == k % dim { 1.0 } else { 0.0 };
                (v - Complex64::new(expected, 0.0)).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }
}

pub fn column_unitary(column: &Column, n: usize) -> OracleResult<DenseUnitary> {
    if column.len() != n {
        return Err(OracleError::DimensionMismatch(column.len(), n));
    }
    let mut u = DenseUnitary::identity(n)?;
    u.apply_column(column);
    Ok(u)
}

/// Ordered product of column unitaries. With `include_residues`, each residue
/// is applied at its slot; residues without a slot are applied last.
pub fn circuit_unitary(circuit: &Circuit, include_residues: bool) -> OracleResult<DenseUnitary> {
    let mut u = DenseUnitary::identity(circuit.n())?;
    let len = circuit.len();
    let by_slot = if include_residues {
        circuit.residues_by_slot()
    } else {
        vec![Vec::new(); len + 1]
    };
    let residues = circuit.residues();
    for (slot, column) in circuit.columns().iter().enumerate() {
        for &r in &by_slot[slot] {
            u.apply_residue(&residues[r]);
        }
        u.apply_column(column);
    }
    for &r in &by_slot[len] {
        u.apply_residue(&residues[r]);
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub equivalent: bool,
    pub max_deviation: f64,
}

/// Compares `a` and `b` up to a global phase: `max |a − λb| ≤ tol`, where `λ`
/// aligns the largest-magnitude entry of `b` with the same entry of `a`.
pub fn equivalent(a: &DenseUnitary, b: &DenseUnitary, tol: f64) -> OracleResult<Equivalence> {
    if a.dim != b.dim {
        return Err(OracleError::DimensionMismatch(a.dim, b.dim));
    }
    let (k, pivot) = b
        .data
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm_sqr().total_cmp(&y.1.norm_sqr()))
        .ok_or(OracleError::Degenerate)?;
    if pivot.norm() < 1e-12 {
        return Err(OracleError::Degenerate);
    }
    let ratio = a.data[k] / pivot;
    let lambda = if ratio.norm() < 1e-12 {
        Complex64::new(1.0, 0.0)
    } else {
        ratio / ratio.norm()
    };
    let max_deviation = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - lambda * y).norm())
        .fold(0.0, f64::max);
    Ok(Equivalence { equivalent: max_deviation <= tol, max_deviation })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Equivalent { max_deviation: f64 },
    NotEquivalent { max_deviation: f64 },
    Unverifiable { reason: String },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Equivalent { .. } => "Equivalent",
            Verdict::NotEquivalent { .. } => "NotEquivalent",
            Verdict::Unverifiable { .. } => "Unverifiable",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Equivalent { max_deviation } | Verdict::NotEquivalent { max_deviation } => {
                write!(f, "{} (max deviation {max_deviation:.3e})", self.label())
            }
            Verdict::Unverifiable { reason } => write!(f, "Unverifiable: {reason}"),
        }
    }
}

/// A residue without a recorded slot only has a well-defined place in the
/// product if it commutes with every column.
fn unplaced_residue_problem(circuit: &Circuit) -> Option<String> {
    for (idx, r) in circuit.residues().iter().enumerate() {
        if r.slot.is_some() {
            continue;
        }
        if let Some(k) = circuit.columns().iter().position(|c| !r.commutes_with(c)) {
            return Some(format!(
                "residue {idx} ({}{} on qubit {}) has no recorded position and does not commute with column {k}",
                r.phase, r.axis, r.qubit
            ));
        }
    }
    None
}

pub fn verify_optimization(original: &Circuit, optimized: &Circuit, tol: f64) -> OracleResult<Verdict> {
    if original.n() != optimized.n() {
        return Err(OracleError::DimensionMismatch(original.n(), optimized.n()));
    }
    for c in [original, optimized] {
        if c.n() > MAX_QUBITS {
            return Err(OracleError::Capacity { n: c.n() });
        }
        if let Some(reason) = unplaced_residue_problem(c) {
            return Ok(Verdict::Unverifiable { reason });
        }
    }
    let a = circuit_unitary(original, true)?;
    let b = circuit_unitary(optimized, true)?;
    let eq = equivalent(&a, &b, tol)?;
    Ok(if eq.equivalent {
        Verdict::Equivalent { max_deviation: eq.max_deviation }
    } else {
        Verdict::NotEquivalent { max_deviation: eq.max_deviation }
    })
}

/// `exp(i·s·π/8·P)` for one qubit, mostly useful in tests.
pub fn t_rotation(axis: PauliAxis, phase: PhaseSign) -> Mat2 {
    rotation_matrix(axis, phase.factor() * FRAC_PI_8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Cell, Circuit, MergePolicy, Order, Overlap};
    use std::f64::consts::PI;
    use PauliAxis::*;
    use PhaseSign::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn col(n: usize, gates: &[(usize, PauliAxis)], phase: PhaseSign) -> Column {
        Column::from_gates(n, gates.iter().copied(), phase).unwrap()
    }

    fn pauli(axis: PauliAxis) -> Mat2 {
        let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
        match axis {
            X => [[o, l], [l, o]],
            Y => [[o, -i], [i, o]],
            Z => [[l, o], [o, -l]],
        }
    }

    fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
        let mut out = [[c(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for k in 0..2 {
                for col in 0..2 {
                    out[r][col] += a[r][k] * b[k][col];
                }
            }
        }
        out
    }

    #[test]
    fn rotation_matches_series_definition() {
        // exp(iθP) = cos θ I + i sin θ P, built from the Pauli matrix directly.
        for axis in PauliAxis::ALL {
            let theta = 0.37;
            let p = pauli(axis);
            let got = rotation_matrix(axis, theta);
            for r in 0..2 {
                for k in 0..2 {
                    let id = if r == k { 1.0 } else { 0.0 };
                    let want = c(theta.cos() * id, 0.0) + c(0.0, theta.sin()) * p[r][k];
                    assert!((got[r][k] - want).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn x_and_z_rotations_do_not_commute() {
        let x = t_rotation(X, Plus);
        let z = t_rotation(Z, Plus);
        let xz = mul2(&x, &z);
        let zx = mul2(&z, &x);
        let diff: f64 = (0..4).map(|k| (xz[k / 2][k % 2] - zx[k / 2][k % 2]).norm()).sum();
        assert!(diff > 0.1);
        let z2 = t_rotation(Z, Minus);
        let zz = mul2(&z, &z2);
        let zz2 = mul2(&z2, &z);
        let diff: f64 = (0..4).map(|k| (zz[k / 2][k % 2] - zz2[k / 2][k % 2]).norm()).sum();
        assert!(diff < 1e-15);
    }

    #[test]
    fn single_z_closed_form() {
        let u = column_unitary(&col(1, &[(0, Z)], Plus), 1).unwrap();
        let e = Complex64::from_polar(1.0, PI / 8.0);
        assert!((u.get(0, 0) - e).norm() < 1e-15);
        assert!((u.get(1, 1) - e.conj()).norm() < 1e-15);
        assert!(u.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn identity_column_and_empty_circuit() {
        let id = DenseUnitary::identity(3).unwrap();
        assert_eq!(column_unitary(&Column::identity(3), 3).unwrap(), id);
        assert_eq!(circuit_unitary(&Circuit::empty(3), true).unwrap(), id);
    }

    #[test]
    fn opposite_phase_same_axis_cancels() {
        let a = col(2, &[(0, Y), (1, X)], Plus);
        let b = col(2, &[(0, Y), (1, X)], Minus);
        let prod = column_unitary(&a, 2).unwrap().matmul(&column_unitary(&b, 2).unwrap()).unwrap();
        let eq = equivalent(&prod, &DenseUnitary::identity(2).unwrap(), 1e-12).unwrap();
        assert!(eq.equivalent, "{eq:?}");
    }

    #[test]
    fn tt_is_a_quarter_turn() {
        // exp(iπ/8 Z)^2 = exp(iπ/4 Z)
        let t = t_rotation(Z, Plus);
        let tt = mul2(&t, &t);
        let s = rotation_matrix(Z, PI / 4.0);
        for k in 0..4 {
            assert!((tt[k / 2][k % 2] - s[k / 2][k % 2]).norm() < 1e-15);
        }
    }

    #[test]
    fn equivalence_ignores_global_phase() {
        let u = circuit_unitary(
            &Circuit::new(2, vec![col(2, &[(0, X), (1, Y)], Plus), col(2, &[(1, Z)], Minus)]).unwrap(),
            false,
        )
        .unwrap();
        assert!(equivalent(&u, &u, 1e-12).unwrap().equivalent);
        let phase = Complex64::from_polar(1.0, PI / 3.0);
        let shifted = DenseUnitary::from_rows(2, u.entries().iter().map(|v| v * phase).collect()).unwrap();
        assert!(equivalent(&shifted, &u, 1e-12).unwrap().equivalent);
    }

    #[test]
    fn different_axes_are_not_equivalent() {
        let a = column_unitary(&col(1, &[(0, X)], Plus), 1).unwrap();
        let b = column_unitary(&col(1, &[(0, Z)], Plus), 1).unwrap();
        let eq = equivalent(&a, &b, 1e-6).unwrap();
        assert!(!eq.equivalent);
        assert!(eq.max_deviation > 0.1);
    }

    #[test]
    fn errors() {
        assert_eq!(DenseUnitary::identity(13).unwrap_err(), OracleError::Capacity { n: 13 });
        let a = DenseUnitary::identity(1).unwrap();
        let b = DenseUnitary::identity(2).unwrap();
        assert!(matches!(equivalent(&a, &b, 1e-9), Err(OracleError::DimensionMismatch(2, 4))));
        let zero = DenseUnitary::from_rows(1, vec![c(0.0, 0.0); 4]).unwrap();
        assert_eq!(equivalent(&a, &zero, 1e-9).unwrap_err(), OracleError::Degenerate);
    }

    #[test]
    fn column_unitaries_are_unitary() {
        let cells = [Cell::Rotation(X), Cell::Identity, Cell::Rotation(Y), Cell::Rotation(Z)];
        let u = column_unitary(&Column::from_cells(&cells, Minus), 4).unwrap();
        assert!(u.unitarity_error() < 1e-9);
    }

    #[test]
    fn verify_reports_each_verdict() {
        let a = col(2, &[(0, Z)], Plus);
        let b = col(2, &[(1, X)], Plus);
        let original = Circuit::new(2, vec![a.clone(), b.clone()]).unwrap();
        assert!(verify_optimization(&original, &original, 1e-9).unwrap().is_equivalent());

        let corrupted = Circuit::new(2, vec![col(2, &[(0, X), (1, X)], Plus)]).unwrap();
        assert!(matches!(
            verify_optimization(&original, &corrupted, 1e-9).unwrap(),
            Verdict::NotEquivalent { .. }
        ));

        let r = CliffordResidue { qubit: 0, axis: X, phase: Plus, slot: None };
        let unplaced = Circuit::with_residues(2, vec![a.clone()], vec![r]).unwrap();
        assert!(matches!(
            verify_optimization(&original, &unplaced, 1e-9).unwrap(),
            Verdict::Unverifiable { .. }
        ));

        let big = Circuit::empty(13);
        assert_eq!(verify_optimization(&big, &big, 1e-9).unwrap_err(), OracleError::Capacity { n: 13 });
    }

    #[test]
    fn paper_order_reordering_across_conflict_is_caught() {
        let a = col(1, &[(0, Z)], Plus);
        let b = col(1, &[(0, X)], Minus);
        let c2 = col(1, &[(0, Z)], Plus);
        let original = Circuit::new(1, vec![a, b, c2]).unwrap();
        let paper = MergePolicy::new(Overlap::EqualAxisOverlap, Order::PaperOrder);
        let out = crate::circuit::apply_merge_plan(&original, &[(0, 2)], paper).unwrap();
        let verdict = verify_optimization(&original, &out, 1e-9).unwrap();
        assert!(matches!(verdict, Verdict::NotEquivalent { .. }), "{verdict}");
    }
}
