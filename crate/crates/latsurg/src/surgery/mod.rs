//! Patch-grid lattice-surgery instruction set.
//!
//! A [`Schedule`] is a list of round-stamped [`SurgeryOp`]s over a grid of
//! unit cells, each cell big enough for one rotated patch. Merges are modeled
//! as ideal joint Pauli-product measurements; physical-level stabilizer
//! choreography inside a cell is out of scope. Every measurement-like op
//! yields byproduct bits, and the conditional Pauli bookkeeping they imply is
//! carried next to the schedule as [`FrameUpdate`]s — corrections are never
//! scheduled as physical operations.
//!
//! Durations are in error-detection rounds:
//!
//! | op                            | rounds          |
//! |-------------------------------|-----------------|
//! | `InitZ`/`InitX` then stabilize| `d`             |
//! | `MergeMeasure`/`MultiBody…`   | `d`             |
//! | `MeasureZ`/`MeasureX`         | `1`             |
//! | `Split`                       | `0`             |
//! | `Rotate90`                    | `3·⌊d/2⌋`       |
//! | `Expand(d_from, d_to)`        | `d_to`          |
//! | `Contract`                    | `d`             |
//! | `Move` (one leg)              | `d`             |
//! | `InjectT` attempt             | `3` (2 + herald)|
//! | `GateS`                       | `15` (fixed-cycle corner construction) |
//! | `Hadamard` (transversal layer)| `1`             |
//!
//! Composite gadgets built by [`builders`](self) land on: CNOT/CZ `2d`
//! (the ancilla's transversal init/measure are absorbed into the merge
//! windows), Swap `3d`, Hadamard `4d+1` with return / `2d+1` without, and a
//! T gadget `d+1` plus `15` more when its S correction triggers.

mod builders;
mod export;

pub use builders::{macro_duration, Fragment, GadgetKind, ScheduleBuilder};
pub use export::{
    FrameUpdateRecord, GadgetRecord, GridRecord, OpRecord, PatchRecord, ScheduleRecords, SCHEMA,
};

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::CodeDistance;

pub type Rounds = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SurgeryError {
    #[error("patch {0} not on the grid")]
    UnknownPatch(PatchId),
    #[error("patch placement out of bounds or overlapping at {0}")]
    BadPlacement(Cell),
    #[error("no conflict-free ancilla route for {0}")]
    NoRoute(&'static str),
    #[error("operation needs at least one target")]
    NoTargets,
    #[error("control cannot also be a target")]
    ControlIsTarget,
    #[error("patch {0} is not a distilled magic state")]
    NoMagicState(PatchId),
    #[error("patch {0} listed twice")]
    DuplicateOperand(PatchId),
    #[error("patch {0} was already measured out")]
    PatchRetired(PatchId),
    #[error("patches must be horizontally adjacent 1x1 patches to swap")]
    SwapGeometry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub col: u32,
    pub row: u32,
}

impl Cell {
    pub fn new(col: u32, row: u32) -> Self {
        Cell { col, row }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.col, self.row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatchId(pub u32);

impl std::fmt::Display for PatchId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Identifier of one classical byproduct bit (a merge outcome, a split sign,
/// a destructive measurement, an injection herald, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchRole {
    Data,
    Ancilla,
    Factory,
    Workspace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patch {
    pub id: PatchId,
    pub d: CodeDistance,
    pub origin: Cell,
    pub extent: (u32, u32),
    pub role: PatchRole,
    /// Boundary type facing the routing channel; a merge in the other basis
    /// needs a `Rotate90` first.
    pub channel_basis: Basis,
    /// Set on factory outputs; `build_t_gadget` refuses anything else.
    pub distilled_magic: bool,
    /// Round after which the patch no longer exists (measured out / consumed).
    pub retired_round: Option<Rounds>,
}

impl Patch {
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity((self.extent.0 * self.extent.1) as usize);
        for dc in 0..self.extent.0 {
            for dr in 0..self.extent.1 {
                out.push(Cell::new(self.origin.col + dc, self.origin.row + dr));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpKind {
    InitZ,
    InitX,
    MeasureZ,
    MeasureX,
    /// Joint Pauli-product measurement of the operands; the per-operand
    /// bases live in [`SurgeryOp::bases`]. By convention the last operand is
    /// the routing hub (ancilla / magic state).
    MergeMeasure,
    /// Marks the end of a merge whose operands persist; its byproduct bits
    /// are the split signs of the non-hub operands.
    Split,
    MultiBodyMeasure,
    Rotate90,
    Expand {
        d_from: u32,
        d_to: u32,
    },
    Contract,
    Move {
        from: Cell,
        to: Cell,
    },
    InjectT,
    GateS {
        adjoint: bool,
    },
    Hadamard,
}

impl OpKind {
    pub fn name(&self) -> &'static str {
        match self {
            OpKind::InitZ => "init_z",
            OpKind::InitX => "init_x",
            OpKind::MeasureZ => "measure_z",
            OpKind::MeasureX => "measure_x",
            OpKind::MergeMeasure => "merge_measure",
            OpKind::Split => "split",
            OpKind::MultiBodyMeasure => "multi_body_measure",
            OpKind::Rotate90 => "rotate90",
            OpKind::Expand { .. } => "expand",
            OpKind::Contract => "contract",
            OpKind::Move { .. } => "move",
            OpKind::InjectT => "inject_t",
            OpKind::GateS { .. } => "gate_s",
            OpKind::Hadamard => "hadamard",
        }
    }
}

/// Stand-alone duration of one op at distance `d`, in rounds.
pub fn table_duration(kind: &OpKind, d: CodeDistance) -> Rounds {
    let d = d.get();
    match kind {
        OpKind::InitZ | OpKind::InitX => d,
        OpKind::MergeMeasure | OpKind::MultiBodyMeasure => d,
        OpKind::MeasureZ | OpKind::MeasureX => 1,
        OpKind::Split => 0,
        OpKind::Rotate90 => 3 * (d / 2),
        OpKind::Expand { d_to, .. } => *d_to,
        OpKind::Contract => d,
        OpKind::Move { .. } => d,
        OpKind::InjectT => 3,
        // the S construction is defined on a d=15 corner and always runs its
        // 15-cycle sequence; other distances are flagged by the builders
        OpKind::GateS { .. } => 15,
        OpKind::Hadamard => 1,
    }
}

/// Execute-if condition: a single byproduct bit compared against `trigger`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Condition {
    pub bit: BitId,
    pub trigger: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurgeryOp {
    pub kind: OpKind,
    pub operands: Vec<PatchId>,
    /// Per-operand measurement bases for merge/multi-body ops, else empty.
    pub bases: Vec<Basis>,
    pub start_round: Rounds,
    pub duration_rounds: Rounds,
    /// Cells occupied while the op runs: operands plus routing cells.
    pub cells: BTreeSet<Cell>,
    pub byproducts: Vec<BitId>,
    pub condition: Option<Condition>,
    pub flags: Vec<&'static str>,
}

impl SurgeryOp {
    pub fn end_round(&self) -> Rounds {
        self.start_round + self.duration_rounds
    }

    fn overlaps_in_time(&self, other: &SurgeryOp) -> bool {
        self.start_round < other.end_round() && other.start_round < self.end_round()
    }
}

/// A deferred Pauli correction: apply `pauli` to `patch` iff the XOR of the
/// listed byproduct bits is 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameUpdate {
    pub patch: PatchId,
    pub pauli: Pauli,
    pub bits: Vec<BitId>,
}

/// Per-patch sign bits plus the byproduct bits still waiting on outcomes.
///
/// `pending_x[p]` means an X correction is owed to patch `p` (its logical Z
/// readout sign is flipped until applied), and symmetrically for `pending_z`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PauliFrame {
    pending_x: BTreeMap<PatchId, bool>,
    pending_z: BTreeMap<PatchId, bool>,
    outcomes: BTreeMap<BitId, Option<bool>>,
    deferred: Vec<FrameUpdate>,
}

impl PauliFrame {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_bit(&mut self, bit: BitId) {
        self.outcomes.entry(bit).or_insert(None);
    }

    pub fn push_update(&mut self, update: FrameUpdate) {
        for bit in &update.bits {
            self.declare_bit(*bit);
        }
        self.deferred.push(update);
        self.drain_resolved();
    }

    /// Record a measured byproduct value and fold in every deferred update
    /// whose condition just became fully known.
    pub fn resolve(&mut self, bit: BitId, value: bool) {
        self.outcomes.insert(bit, Some(value));
        self.drain_resolved();
    }

    fn drain_resolved(&mut self) {
        let outcomes = &self.outcomes;
        let mut ready = Vec::new();
        self.deferred.retain(|update| {
            let known = update
                .bits
                .iter()
                .map(|b| outcomes.get(b).copied().flatten())
                .collect::<Option<Vec<bool>>>();
            match known {
                Some(values) => {
                    ready.push((update.clone(), values.iter().filter(|v| **v).count() % 2 == 1));
                    false
                }
                None => true,
            }
        });
        for (update, fire) in ready {
            if fire {
                match update.pauli {
                    Pauli::X => flip(&mut self.pending_x, update.patch),
                    Pauli::Z => flip(&mut self.pending_z, update.patch),
                    Pauli::Y => {
                        flip(&mut self.pending_x, update.patch);
                        flip(&mut self.pending_z, update.patch);
                    }
                }
            }
        }
    }

    /// Owed (X, Z) correction for a patch.
    pub fn correction(&self, patch: PatchId) -> (bool, bool) {
        (
            self.pending_x.get(&patch).copied().unwrap_or(false),
            self.pending_z.get(&patch).copied().unwrap_or(false),
        )
    }

    pub fn unresolved_updates(&self) -> usize {
        self.deferred.len()
    }
}

fn flip(map: &mut BTreeMap<PatchId, bool>, patch: PatchId) {
    let e = map.entry(patch).or_insert(false);
    *e = !*e;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conflict {
    /// Two ops hold the same cell during overlapping round windows.
    SpatialOverlap { op_a: usize, op_b: usize, cell: Cell },
    /// A conditional op starts before its condition bit is measured.
    CausalityViolation { op: usize, bit: BitId },
    /// A condition or frame update references a bit no op produces.
    UnknownBit { bit: BitId },
    /// Two ops claim to produce the same bit.
    DuplicateBit { bit: BitId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub cols: u32,
    pub rows: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub grid: GridSpec,
    pub patches: BTreeMap<PatchId, Patch>,
    pub ops: Vec<SurgeryOp>,
    pub frame_updates: Vec<FrameUpdate>,
    pub gadgets: Vec<(GadgetKind, Rounds, Rounds)>,
}

impl Schedule {
    pub fn total_rounds(&self) -> Rounds {
        self.ops.iter().map(SurgeryOp::end_round).max().unwrap_or(0)
    }

    /// Sum over ops of |cells| x duration, the patch-cell-rounds actually
    /// occupied. Run [`Schedule::validate`] first; volume on a conflicting
    /// schedule double-counts.
    pub fn spacetime_volume(&self) -> u64 {
        self.ops
            .iter()
            .map(|op| op.cells.len() as u64 * op.duration_rounds as u64)
            .sum()
    }

    pub fn validate(&self) -> Vec<Conflict> {
        let mut conflicts = Vec::new();

        let mut produced: BTreeMap<BitId, usize> = BTreeMap::new();
        for (i, op) in self.ops.iter().enumerate() {
            for bit in &op.byproducts {
                if produced.insert(*bit, i).is_some() {
                    conflicts.push(Conflict::DuplicateBit { bit: *bit });
                }
            }
        }

        for (i, a) in self.ops.iter().enumerate() {
            for (j, b) in self.ops.iter().enumerate().skip(i + 1) {
                if !a.overlaps_in_time(b) {
                    continue;
                }
                if let Some(cell) = a.cells.intersection(&b.cells).next() {
                    conflicts.push(Conflict::SpatialOverlap {
                        op_a: i,
                        op_b: j,
                        cell: *cell,
                    });
                }
            }
        }

        for (i, op) in self.ops.iter().enumerate() {
            if let Some(cond) = &op.condition {
                match produced.get(&cond.bit) {
                    None => conflicts.push(Conflict::UnknownBit { bit: cond.bit }),
                    Some(&src) => {
                        if self.ops[src].end_round() > op.start_round {
                            conflicts.push(Conflict::CausalityViolation { op: i, bit: cond.bit });
                        }
                    }
                }
            }
        }

        for update in &self.frame_updates {
            for bit in &update.bits {
                if !produced.contains_key(bit) {
                    conflicts.push(Conflict::UnknownBit { bit: *bit });
                }
            }
        }

        conflicts
    }
}
