//! Columnar T-layer circuits.
//!
//! A [`Circuit`] is an ordered list of [`Column`]s over `n` qubits. Each column
//! holds at most one π/8 Pauli rotation per qubit and a single sign shared by
//! every rotation in the column. Column 0 is applied first.
//!
//! Cells are stored as two bit planes per column (`x`, `z`), so that the merge
//! and commutation predicates reduce to word-wise bit operations:
//!
//! | cell     | x | z |
//! |----------|---|---|
//! | Identity | 0 | 0 |
//! | X        | 1 | 0 |
//! | Y        | 1 | 1 |
//! | Z        | 0 | 1 |

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("column has {found} cells, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("qubit index {qubit} out of range for {n} qubit(s)")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("column index {index} out of range for {len} column(s)")]
    ColumnOutOfRange { index: usize, len: usize },

    #[error("merge plan is invalid: {0}")]
    Plan(String),

    #[error("columns {i} and {j} cannot be merged: {reason}")]
    Unmergeable { i: usize, j: usize, reason: MergeCheck },

    #[error("column {j} cannot move next to column {i}: blocked by {blocker}")]
    Commutation { i: usize, j: usize, blocker: Blocker },
}

pub type CircuitResult<T> = Result<T, CircuitError>;

/// Rotation axis of a single-qubit π/8 rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            PauliAxis::X => (true, false),
            PauliAxis::Y => (true, true),
            PauliAxis::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Option<Self> {
        match (x, z) {
            (false, false) => None,
            (true, false) => Some(PauliAxis::X),
            (true, true) => Some(PauliAxis::Y),
            (false, true) => Some(PauliAxis::Z),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Sign of the rotation angle: `Plus` is +π/8 (T), `Minus` is −π/8 (T†).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PhaseSign {
    #[default]
    Plus,
    Minus,
}

impl PhaseSign {
    /// `+1.0` or `-1.0`.
    pub fn factor(self) -> f64 {
        match self {
            PhaseSign::Plus => 1.0,
            PhaseSign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            PhaseSign::Plus => "+",
            PhaseSign::Minus => "-",
        }
    }
}

impl std::ops::Neg for PhaseSign {
    type Output = Self;

    fn neg(self) -> Self {
        match self {
            PhaseSign::Plus => PhaseSign::Minus,
            PhaseSign::Minus => PhaseSign::Plus,
        }
    }
}

impl fmt::Display for PhaseSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Identity,
    Rotation(PauliAxis),
}

impl Cell {
    pub fn axis(self) -> Option<PauliAxis> {
        match self {
            Cell::Identity => None,
            Cell::Rotation(axis) => Some(axis),
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, Cell::Rotation(_))
    }
}

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// One T-layer: at most one π/8 rotation per qubit, with a shared sign.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Column {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: PhaseSign,
}

impl Column {
    /// The all-identity column on `n` qubits.
    pub fn identity(n: usize) -> Self {
        Column {
            n,
            x: vec![0; words_for(n)],
            z: vec![0; words_for(n)],
            phase: PhaseSign::Plus,
        }
    }

    pub fn from_cells(cells: &[Cell], phase: PhaseSign) -> Self {
        let mut col = Column::identity(cells.len());
        for (q, cell) in cells.iter().enumerate() {
            if let Cell::Rotation(axis) = cell {
                col.put(q, *axis);
            }
        }
        col.phase = phase;
        col.normalized()
    }

    /// Builds a column from `(qubit, axis)` pairs. Later pairs overwrite earlier
    /// ones on the same qubit.
    pub fn from_gates(
        n: usize,
        gates: impl IntoIterator<Item = (usize, PauliAxis)>,
        phase: PhaseSign,
    ) -> CircuitResult<Self> {
        let mut col = Column::identity(n);
        for (q, axis) in gates {
            if q >= n {
                return Err(CircuitError::QubitOutOfRange { qubit: q, n });
            }
            col.put(q, axis);
        }
        col.phase = phase;
        Ok(col.normalized())
    }

    fn put(&mut self, q: usize, axis: PauliAxis) {
        let (w, b) = (q / WORD, q % WORD);
        let (xb, zb) = axis.bits();
        let mask = 1u64 << b;
        self.x[w] = (self.x[w] & !mask) | if xb { mask } else { 0 };
        self.z[w] = (self.z[w] & !mask) | if zb { mask } else { 0 };
    }

    fn normalized(mut self) -> Self {
        if self.is_identity() {
            self.phase = PhaseSign::Plus;
        }
        self
    }

    /// Number of qubits (cells).
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn phase(&self) -> PhaseSign {
        self.phase
    }

    /// Returns a copy with the given sign (ignored for all-identity columns).
    pub fn with_phase(&self, phase: PhaseSign) -> Self {
        let mut c = self.clone();
        c.phase = phase;
        c.normalized()
    }

    pub fn cell(&self, q: usize) -> Cell {
        assert!(q < self.n, "qubit {q} out of range for {} qubit(s)", self.n);
        let (w, b) = (q / WORD, q % WORD);
        let xb = (self.x[w] >> b) & 1 == 1;
        let zb = (self.z[w] >> b) & 1 == 1;
        match PauliAxis::from_bits(xb, zb) {
            None => Cell::Identity,
            Some(axis) => Cell::Rotation(axis),
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.n).map(move |q| self.cell(q))
    }

    /// `(qubit, axis)` for every rotation, in ascending qubit order.
    pub fn gates(&self) -> impl Iterator<Item = (usize, PauliAxis)> + '_ {
        self.support().map(move |q| (q, self.cell(q).axis().unwrap()))
    }

    /// Qubits carrying a rotation, ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.x
            .iter()
            .zip(&self.z)
            .enumerate()
            .flat_map(|(w, (&x, &z))| {
                let mut bits = x | z;
                std::iter::from_fn(move || {
                    if bits == 0 {
                        return None;
                    }
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(w * WORD + b)
                })
            })
    }

    pub fn t_count(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// True when both columns carry a rotation on some common qubit.
    pub fn overlaps(&self, other: &Column) -> bool {
        self.words(other).any(|(xa, za, xb, zb)| (xa | za) & (xb | zb) != 0)
    }

    /// True when some qubit carries different axes in the two columns.
    fn axis_conflict(&self, other: &Column) -> bool {
        self.words(other)
            .any(|(xa, za, xb, zb)| ((xa | za) & (xb | zb)) & ((xa ^ xb) | (za ^ zb)) != 0)
    }

    fn words<'a>(&'a self, other: &'a Column) -> impl Iterator<Item = (u64, u64, u64, u64)> + 'a {
        self.x
            .iter()
            .zip(&self.z)
            .zip(other.x.iter().zip(&other.z))
            .map(|((&xa, &za), (&xb, &zb))| (xa, za, xb, zb))
    }

    /// Whether a single-qubit rotation about `axis` on `qubit` commutes with this column.
    pub fn commutes_with_rotation(&self, qubit: usize, axis: PauliAxis) -> bool {
        match self.cell(qubit) {
            Cell::Identity => true,
            Cell::Rotation(a) => a == axis,
        }
    }

    /// Compact text form, e.g. `+[Z.X]` for Z on qubit 0 and X on qubit 2 of three.
    pub fn to_compact(&self) -> String {
        let cells: String = self
            .cells()
            .map(|c| c.axis().map_or('.', PauliAxis::symbol))
            .collect();
        format!("{}[{}]", self.phase, cells)
    }
}

impl fmt::Debug for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_compact())
    }
}

/// A ±π/4 Clifford rotation left behind when two equal-axis π/8 rotations merge.
///
/// `slot` is the number of columns applied before this rotation; `None` means
/// the position is unknown and the rotation is taken to act after the last column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CliffordResidue {
    pub qubit: usize,
    pub axis: PauliAxis,
    pub phase: PhaseSign,
    pub slot: Option<usize>,
}

impl CliffordResidue {
    pub fn commutes_with(&self, column: &Column) -> bool {
        column.commutes_with_rotation(self.qubit, self.axis)
    }
}

/// How overlapping rotations are treated by [`can_merge`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overlap {
    /// Supports must be disjoint; T-count is invariant under merging.
    DisjointOnly,
    /// Equal-axis overlaps are allowed and extracted as π/4 residues.
    #[default]
    EqualAxisOverlap,
}

/// Where merged columns land in the next circuit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// Merged columns first (plan order), then unmerged columns in their old order.
    PaperOrder,
    /// The merged column replaces the earlier index; the later column must commute
    /// with everything it moves across.
    #[default]
    StrictCommute,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct MergePolicy {
    pub overlap: Overlap,
    pub order: Order,
}

impl MergePolicy {
    pub const ALL: [MergePolicy; 4] = [
        MergePolicy { overlap: Overlap::DisjointOnly, order: Order::PaperOrder },
        MergePolicy { overlap: Overlap::DisjointOnly, order: Order::StrictCommute },
        MergePolicy { overlap: Overlap::EqualAxisOverlap, order: Order::PaperOrder },
        MergePolicy { overlap: Overlap::EqualAxisOverlap, order: Order::StrictCommute },
    ];

    pub fn new(overlap: Overlap, order: Order) -> Self {
        MergePolicy { overlap, order }
    }
}

/// Reason code from [`can_merge`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MergeCheck {
    Ok,
    /// Column signs differ.
    PhaseMismatch,
    /// A qubit carries different axes in the two columns.
    AxisConflict,
    /// Equal-axis overlap under [`Overlap::DisjointOnly`].
    SupportOverlap,
}

impl MergeCheck {
    pub fn is_ok(self) -> bool {
        self == MergeCheck::Ok
    }
}

impl fmt::Display for MergeCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MergeCheck::Ok => "ok",
            MergeCheck::PhaseMismatch => "phase mismatch",
            MergeCheck::AxisConflict => "axis conflict",
            MergeCheck::SupportOverlap => "overlapping support",
        };
        f.write_str(s)
    }
}

/// What stops a column from moving left under [`Order::StrictCommute`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Blocker {
    Column(usize),
    Residue(usize),
}

impl fmt::Display for Blocker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Blocker::Column(k) => write!(f, "non-commuting column {k}"),
            Blocker::Residue(k) => write!(f, "non-commuting residue {k}"),
        }
    }
}

fn check_len(a: &Column, b: &Column) -> CircuitResult<()> {
    if a.len() != b.len() {
        return Err(CircuitError::LengthMismatch { expected: a.len(), found: b.len() });
    }
    Ok(())
}

/// Two columns commute iff on every qubit at least one is identity or the axes agree.
pub fn columns_commute(a: &Column, b: &Column) -> CircuitResult<bool> {
    check_len(a, b)?;
    Ok(!a.axis_conflict(b))
}

pub fn can_merge(a: &Column, b: &Column, policy: MergePolicy) -> CircuitResult<MergeCheck> {
    check_len(a, b)?;
    Ok(merge_check(a, b, policy.overlap))
}

pub(crate) fn merge_check(a: &Column, b: &Column, overlap: Overlap) -> MergeCheck {
    // The sign of an all-identity column carries no meaning.
    if a.phase != b.phase && !a.is_identity() && !b.is_identity() {
        return MergeCheck::PhaseMismatch;
    }
    if a.axis_conflict(b) {
        return MergeCheck::AxisConflict;
    }
    if overlap == Overlap::DisjointOnly && a.overlaps(b) {
        return MergeCheck::SupportOverlap;
    }
    MergeCheck::Ok
}

/// Merges two columns. Equal-axis overlaps cancel to identity in the merged
/// column and come back as residues (with `slot: None`).
pub fn merge(
    a: &Column,
    b: &Column,
    policy: MergePolicy,
) -> CircuitResult<(Column, Vec<CliffordResidue>)> {
    check_len(a, b)?;
    let reason = merge_check(a, b, policy.overlap);
    if !reason.is_ok() {
        return Err(CircuitError::Unmergeable { i: 0, j: 1, reason });
    }
    Ok(merge_unchecked(a, b))
}

fn merge_unchecked(a: &Column, b: &Column) -> (Column, Vec<CliffordResidue>) {
    let phase = if a.is_identity() { b.phase } else { a.phase };
    let mut residues = Vec::new();
    let mut merged = Column { n: a.n, x: Vec::with_capacity(a.x.len()), z: Vec::with_capacity(a.z.len()), phase };
    for (w, (xa, za, xb, zb)) in a.words(b).enumerate() {
        let mut both = (xa | za) & (xb | zb);
        while both != 0 {
            let bit = both.trailing_zeros() as usize;
            both &= both - 1;
            let axis = PauliAxis::from_bits((xa >> bit) & 1 == 1, (za >> bit) & 1 == 1).unwrap();
            residues.push(CliffordResidue { qubit: w * WORD + bit, axis, phase, slot: None });
        }
        // Equal-axis overlaps cancel, disjoint cells pass through.
        merged.x.push(xa ^ xb);
        merged.z.push(za ^ zb);
    }
    (merged.normalized(), residues)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    n: usize,
    columns: Vec<Column>,
    residues: Vec<CliffordResidue>,
}

impl Circuit {
    pub fn new(n: usize, columns: Vec<Column>) -> CircuitResult<Self> {
        Circuit::with_residues(n, columns, Vec::new())
    }

    pub fn with_residues(
        n: usize,
        columns: Vec<Column>,
        residues: Vec<CliffordResidue>,
    ) -> CircuitResult<Self> {
        if let Some(bad) = columns.iter().find(|c| c.len() != n) {
            return Err(CircuitError::LengthMismatch { expected: n, found: bad.len() });
        }
        if let Some(r) = residues.iter().find(|r| r.qubit >= n) {
            return Err(CircuitError::QubitOutOfRange { qubit: r.qubit, n });
        }
        if let Some(slot) = residues.iter().filter_map(|r| r.slot).find(|&s| s > columns.len()) {
            return Err(CircuitError::ColumnOutOfRange { index: slot, len: columns.len() });
        }
        let mut residues = residues;
        sort_by_slot(&mut residues);
        Ok(Circuit { n, columns, residues })
    }

    pub fn empty(n: usize) -> Self {
        Circuit { n, columns: Vec::new(), residues: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> CircuitResult<&Column> {
        self.columns
            .get(index)
            .ok_or(CircuitError::ColumnOutOfRange { index, len: self.columns.len() })
    }

    pub fn residues(&self) -> &[CliffordResidue] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn t_count(&self) -> usize {
        t_count(self)
    }

    pub fn t_depth(&self) -> usize {
        t_depth(self)
    }

    /// Residue slot with `None` resolved to the end of the circuit.
    pub(crate) fn residue_slot(&self, r: &CliffordResidue) -> usize {
        r.slot.unwrap_or(self.columns.len())
    }

    /// First obstacle met when moving column `j` left so that it sits right after
    /// column `i` (`i < j`), or `None` if the move preserves the unitary.
    pub fn strict_blocker(&self, i: usize, j: usize) -> Option<Blocker> {
        debug_assert!(i < j && j < self.columns.len());
        let cj = &self.columns[j];
        for k in i + 1..j {
            if self.columns[k].axis_conflict(cj) {
                return Some(Blocker::Column(k));
            }
        }
        self.residues
            .iter()
            .enumerate()
            .find(|(_, r)| {
                let s = self.residue_slot(r);
                s > i && s <= j && !r.commutes_with(cj)
            })
            .map(|(idx, _)| Blocker::Residue(idx))
    }

    /// Residue indices grouped by slot (`0..=len`).
    pub(crate) fn residues_by_slot(&self) -> Vec<Vec<usize>> {
        let mut slots = vec![Vec::new(); self.columns.len() + 1];
        for (idx, r) in self.residues.iter().enumerate() {
            slots[self.residue_slot(r)].push(idx);
        }
        slots
    }

    /// Checks one plan pair against the circuit without applying it.
    pub fn check_pair(&self, i: usize, j: usize, policy: MergePolicy) -> CircuitResult<()> {
        let len = self.columns.len();
        for idx in [i, j] {
            if idx >= len {
                return Err(CircuitError::ColumnOutOfRange { index: idx, len });
            }
        }
        if i == j {
            return Err(CircuitError::Plan(format!("pair ({i},{j}) merges a column with itself")));
        }
        let (i, j) = (i.min(j), i.max(j));
        let reason = merge_check(&self.columns[i], &self.columns[j], policy.overlap);
        if !reason.is_ok() {
            return Err(CircuitError::Unmergeable { i, j, reason });
        }
        if policy.order == Order::StrictCommute {
            if let Some(blocker) = self.strict_blocker(i, j) {
                return Err(CircuitError::Commutation { i, j, blocker });
            }
        }
        Ok(())
    }

    /// True when `(i, j)` passes [`Circuit::check_pair`].
    pub fn pair_is_valid(&self, i: usize, j: usize, policy: MergePolicy) -> bool {
        self.check_pair(i, j, policy).is_ok()
    }
}

pub fn t_count(circuit: &Circuit) -> usize {
    circuit.columns.iter().map(Column::t_count).sum()
}

pub fn t_depth(circuit: &Circuit) -> usize {
    circuit.columns.iter().filter(|c| !c.is_identity()).count()
}

/// Applies a set of index-disjoint merges in one step.
///
/// Pairs may be given in either index order; the lower index is the one kept
/// under [`Order::StrictCommute`]. New residues are placed right after their
/// merged column.
pub fn apply_merge_plan(
    circuit: &Circuit,
    plan: &[(usize, usize)],
    policy: MergePolicy,
) -> CircuitResult<Circuit> {
    let len = circuit.columns.len();
    let mut used = vec![false; len];
    let mut pairs = Vec::with_capacity(plan.len());
    for &(a, b) in plan {
        circuit.check_pair(a, b, policy)?;
        let (i, j) = (a.min(b), a.max(b));
        for idx in [i, j] {
            if used[idx] {
                return Err(CircuitError::Plan(format!("column {idx} appears in more than one pair")));
            }
            used[idx] = true;
        }
        pairs.push((i, j));
    }
    if pairs.is_empty() {
        return Ok(circuit.clone());
    }

    match policy.order {
        Order::StrictCommute => Ok(apply_strict(circuit, &pairs)),
        Order::PaperOrder => Ok(apply_paper(circuit, &pairs, &used)),
    }
}

fn apply_strict(circuit: &Circuit, pairs: &[(usize, usize)]) -> Circuit {
    let len = circuit.columns.len();
    let mut slots: Vec<Option<Column>> = circuit.columns.iter().cloned().map(Some).collect();
    let mut removed = vec![false; len];
    // (slot, fresh-first) keeps residues that share a slot in time order:
    // a new residue acts before any older one already sitting at its slot.
    let mut keyed: Vec<((usize, bool), CliffordResidue)> =
        circuit.residues.iter().map(|r| ((r.slot.unwrap_or(usize::MAX), true), *r)).collect();
    for &(i, j) in pairs {
        let (merged, extracted) = merge_unchecked(&circuit.columns[i], &circuit.columns[j]);
        slots[i] = Some(merged);
        slots[j] = None;
        removed[j] = true;
        keyed.extend(extracted.into_iter().map(|r| ((i + 1, false), CliffordResidue { slot: Some(i + 1), ..r })));
    }
    keyed.sort_by_key(|(key, _)| *key);
    let residues = keyed.into_iter().map(|(_, r)| r).collect();
    let columns = slots.into_iter().flatten().collect();
    let residues = remap_slots(residues, &removed, len);
    Circuit { n: circuit.n, columns, residues }
}

fn apply_paper(circuit: &Circuit, pairs: &[(usize, usize)], used: &[bool]) -> Circuit {
    let len = circuit.columns.len();
    let mut position = vec![0usize; len];
    let mut columns = Vec::with_capacity(len - pairs.len());
    let mut fresh = Vec::new();
    for &(i, j) in pairs {
        let (merged, extracted) = merge_unchecked(&circuit.columns[i], &circuit.columns[j]);
        let p = columns.len();
        position[i] = p;
        position[j] = p;
        fresh.extend(extracted.into_iter().map(|r| CliffordResidue { slot: Some(p + 1), ..r }));
        columns.push(merged);
    }
    for (k, col) in circuit.columns.iter().enumerate() {
        if !used[k] {
            position[k] = columns.len();
            columns.push(col.clone());
        }
    }
    // Existing residues follow the column they came after.
    let mut residues: Vec<CliffordResidue> = circuit
        .residues
        .iter()
        .map(|r| {
            let slot = r.slot.map(|s| if s == 0 { 0 } else { position[s - 1] + 1 });
            CliffordResidue { slot, ..*r }
        })
        .collect();
    residues.extend(fresh);
    sort_by_slot(&mut residues);
    Circuit { n: circuit.n, columns, residues }
}

/// Stable sort by slot with unplaced residues last. Residues sharing a slot
/// act in list order, so every circuit keeps its list in time order.
fn sort_by_slot(residues: &mut [CliffordResidue]) {
    residues.sort_by_key(|r| r.slot.unwrap_or(usize::MAX));
}

/// Shifts residue slots down past removed columns.
fn remap_slots(residues: Vec<CliffordResidue>, removed: &[bool], len: usize) -> Vec<CliffordResidue> {
    // removed_before[s] = number of removed columns with index < s
    let mut removed_before = Vec::with_capacity(len + 1);
    let mut acc = 0;
    removed_before.push(0);
    for &r in removed {
        acc += usize::from(r);
        removed_before.push(acc);
    }
    residues
        .into_iter()
        .map(|r| CliffordResidue { slot: r.slot.map(|s| s - removed_before[s]), ..r })
        .collect()
}

/// Drops all-identity columns, keeping residues at the same point in time.
pub fn canonicalize(circuit: &Circuit) -> Circuit {
    let removed: Vec<bool> = circuit.columns.iter().map(Column::is_identity).collect();
    if !removed.iter().any(|&r| r) {
        return circuit.clone();
    }
    let columns = circuit.columns.iter().filter(|c| !c.is_identity()).cloned().collect();
    let residues = remap_slots(circuit.residues.clone(), &removed, circuit.columns.len());
    Circuit { n: circuit.n, columns, residues }
}

#[cfg(test)]
mod tests {
    use super::*;
    use PauliAxis::*;
    use PhaseSign::*;

    const OVERLAP: MergePolicy = MergePolicy { overlap: Overlap::EqualAxisOverlap, order: Order::StrictCommute };
    const DISJOINT: MergePolicy = MergePolicy { overlap: Overlap::DisjointOnly, order: Order::StrictCommute };

    fn col(n: usize, gates: &[(usize, PauliAxis)], phase: PhaseSign) -> Column {
        Column::from_gates(n, gates.iter().copied(), phase).unwrap()
    }

    #[test]
    fn cells_round_trip_through_bit_planes() {
        let cells = [Cell::Rotation(X), Cell::Identity, Cell::Rotation(Y), Cell::Rotation(Z)];
        let c = Column::from_cells(&cells, Minus);
        assert_eq!(c.cells().collect::<Vec<_>>(), cells);
        assert_eq!(c.t_count(), 3);
        assert_eq!(c.support().collect::<Vec<_>>(), vec![0, 2, 3]);
        assert_eq!(c.to_compact(), "-[X.YZ]");
    }

    #[test]
    fn wide_columns_span_words() {
        let c = col(130, &[(0, X), (64, Y), (129, Z)], Plus);
        assert_eq!(c.gates().collect::<Vec<_>>(), vec![(0, X), (64, Y), (129, Z)]);
        assert_eq!(c.t_count(), 3);
    }

    #[test]
    fn empty_column_phase_is_normalized() {
        let c = Column::from_cells(&[Cell::Identity; 3], Minus);
        assert_eq!(c.phase(), Plus);
        assert_eq!(c, Column::identity(3));
    }

    #[test]
    fn counts() {
        assert_eq!(Circuit::empty(3).t_count(), 0);
        let c = Circuit::new(3, vec![col(3, &[(0, X), (1, Z)], Plus); 3]).unwrap();
        assert_eq!(c.t_count(), 6);
        let cols = vec![col(2, &[(0, X)], Plus), Column::identity(2), col(2, &[(1, X)], Plus), col(2, &[(1, Y)], Minus)];
        let c = Circuit::new(2, cols).unwrap();
        assert_eq!(c.t_depth(), 3);
    }

    #[test]
    fn commutation_cases() {
        let id = Column::identity(1);
        let z = col(1, &[(0, Z)], Plus);
        let zm = col(1, &[(0, Z)], Minus);
        let x = col(1, &[(0, X)], Plus);
        assert!(columns_commute(&id, &x).unwrap());
        assert!(columns_commute(&z, &zm).unwrap());
        assert!(!columns_commute(&x, &z).unwrap());
        assert_eq!(
            columns_commute(&x, &Column::identity(2)),
            Err(CircuitError::LengthMismatch { expected: 1, found: 2 })
        );
    }

    #[test]
    fn merge_checks() {
        let a = col(2, &[(0, Z)], Plus);
        let b = col(2, &[(1, X)], Plus);
        for p in MergePolicy::ALL {
            assert_eq!(can_merge(&a, &b, p).unwrap(), MergeCheck::Ok);
        }
        let conflict = col(2, &[(0, X)], Plus);
        assert_eq!(can_merge(&a, &conflict, OVERLAP).unwrap(), MergeCheck::AxisConflict);
        let same = col(2, &[(0, Z)], Plus);
        assert_eq!(can_merge(&a, &same, DISJOINT).unwrap(), MergeCheck::SupportOverlap);
        assert_eq!(can_merge(&a, &same, OVERLAP).unwrap(), MergeCheck::Ok);
        let minus = col(2, &[(1, X)], Minus);
        assert_eq!(can_merge(&a, &minus, OVERLAP).unwrap(), MergeCheck::PhaseMismatch);
    }

    #[test]
    fn merge_disjoint_union() {
        let a = col(2, &[(0, Z)], Plus);
        let b = col(2, &[(1, X)], Plus);
        let (m, r) = merge(&a, &b, DISJOINT).unwrap();
        assert_eq!(m, col(2, &[(0, Z), (1, X)], Plus));
        assert!(r.is_empty());
    }

    #[test]
    fn merge_extracts_equal_axis_overlap() {
        let a = col(2, &[(0, Z), (1, Y)], Plus);
        let b = col(2, &[(0, Z)], Plus);
        let (m, r) = merge(&a, &b, OVERLAP).unwrap();
        assert_eq!(m, col(2, &[(1, Y)], Plus));
        assert_eq!(r, vec![CliffordResidue { qubit: 0, axis: Z, phase: Plus, slot: None }]);
        assert_eq!(m.t_count(), a.t_count() + b.t_count() - 2 * r.len());
    }

    #[test]
    fn merge_with_identity_is_identity_element() {
        let a = col(3, &[(0, Z), (2, X)], Minus);
        let id = Column::identity(3);
        for p in MergePolicy::ALL {
            assert_eq!(merge(&a, &id, p).unwrap(), (a.clone(), vec![]));
            assert_eq!(merge(&id, &a, p).unwrap(), (a.clone(), vec![]));
        }
    }

    #[test]
    fn merge_rejects_unmergeable() {
        let a = col(1, &[(0, Z)], Plus);
        let b = col(1, &[(0, X)], Plus);
        assert!(matches!(
            merge(&a, &b, OVERLAP),
            Err(CircuitError::Unmergeable { reason: MergeCheck::AxisConflict, .. })
        ));
    }

    #[test]
    fn plan_application_strict_keeps_relative_order() {
        let a = col(2, &[(0, Z)], Plus);
        let b = col(2, &[(1, X)], Minus);
        let c = col(2, &[(1, Y)], Plus);
        let circuit = Circuit::new(2, vec![a.clone(), b.clone(), c.clone()]).unwrap();
        // c does not commute with b
        assert_eq!(
            apply_merge_plan(&circuit, &[(0, 2)], OVERLAP),
            Err(CircuitError::Commutation { i: 0, j: 2, blocker: Blocker::Column(1) })
        );
        let paper = MergePolicy::new(Overlap::EqualAxisOverlap, Order::PaperOrder);
        let out = apply_merge_plan(&circuit, &[(0, 2)], paper).unwrap();
        assert_eq!(out.columns(), &[col(2, &[(0, Z), (1, Y)], Plus), b.clone()]);

        let d = col(2, &[(0, Z)], Minus);
        let circuit = Circuit::new(2, vec![a.clone(), d.clone(), c.clone()]).unwrap();
        let out = apply_merge_plan(&circuit, &[(0, 2)], OVERLAP).unwrap();
        assert_eq!(out.columns(), &[col(2, &[(0, Z), (1, Y)], Plus), d]);
    }

    #[test]
    fn plan_application_errors() {
        let a = col(2, &[(0, Z)], Plus);
        let circuit = Circuit::new(2, vec![a.clone(); 4]).unwrap();
        assert!(matches!(
            apply_merge_plan(&circuit, &[(0, 1), (1, 2)], OVERLAP),
            Err(CircuitError::Plan(_))
        ));
        assert!(matches!(apply_merge_plan(&circuit, &[(0, 0)], OVERLAP), Err(CircuitError::Plan(_))));
        assert!(matches!(
            apply_merge_plan(&circuit, &[(0, 9)], OVERLAP),
            Err(CircuitError::ColumnOutOfRange { index: 9, len: 4 })
        ));
        assert!(matches!(
            apply_merge_plan(&circuit, &[(0, 1)], DISJOINT),
            Err(CircuitError::Unmergeable { reason: MergeCheck::SupportOverlap, .. })
        ));
        assert_eq!(apply_merge_plan(&circuit, &[], OVERLAP).unwrap(), circuit);
    }

    #[test]
    fn residue_slots_track_merged_column() {
        let z = col(2, &[(0, Z)], Plus);
        let x1 = col(2, &[(1, X)], Plus);
        let circuit = Circuit::new(2, vec![x1.clone(), z.clone(), x1.clone(), z.clone()]).unwrap();
        let out = apply_merge_plan(&circuit, &[(1, 3)], OVERLAP).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out.residues(), &[CliffordResidue { qubit: 0, axis: Z, phase: Plus, slot: Some(2) }]);
        let canon = canonicalize(&out);
        assert_eq!(canon.columns(), &[x1.clone(), x1.clone()]);
        assert_eq!(canon.residues()[0].slot, Some(1));
        // Moving an X on qubit 0 across the Z residue is blocked.
        let x0 = col(2, &[(0, X)], Plus);
        let c2 = Circuit::with_residues(2, vec![x1.clone(), x0], canon.residues().to_vec()).unwrap();
        assert_eq!(c2.strict_blocker(0, 1), Some(Blocker::Residue(0)));
    }

    #[test]
    fn canonicalize_drops_empty_columns() {
        let a = col(2, &[(0, Z)], Plus);
        let c = Circuit::new(2, vec![a.clone(), Column::identity(2), a.clone(), a.clone()]).unwrap();
        let canon = canonicalize(&c);
        assert_eq!(canon.len(), 3);
        assert_eq!(canon.t_count(), c.t_count());
        assert_eq!(canonicalize(&canon), canon);
    }

    #[test]
    fn circuit_validation() {
        assert!(Circuit::new(2, vec![Column::identity(3)]).is_err());
        let r = CliffordResidue { qubit: 5, axis: Z, phase: Plus, slot: None };
        assert!(Circuit::with_residues(2, vec![], vec![r]).is_err());
        let r = CliffordResidue { qubit: 0, axis: Z, phase: Plus, slot: Some(3) };
        assert!(Circuit::with_residues(2, vec![Column::identity(2)], vec![r]).is_err());
    }
}
