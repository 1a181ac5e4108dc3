//! Gadget builders: each appends a self-contained op sequence at the
//! builder's cursor and returns a [`Fragment`] describing it.
//!
//! Conventions shared by all builders:
//!
//! * The last operand of a merge is the *hub* (routing ancilla or magic
//!   state). Split signs land on the non-hub operands, one coin bit each,
//!   paired with the frame update that repairs it: a `Z` byproduct for an
//!   operand measured in `Z`, an `X` byproduct for one measured in `X`.
//! * CNOT/CZ assume the standard two-row data layout where every patch
//!   reaches the access hallway with both boundary types (corner access), so
//!   no rotations are needed and the whole gadget takes `2d`. The ancilla
//!   strip's transversal init and readout ride inside the merge windows as
//!   zero-duration ops.
//! * `build_multibody` models the compact arrangement instead: operands
//!   whose requested basis differs from their `channel_basis` pay a
//!   `Rotate90` (3·⌊d/2⌋ rounds) before the joint measurement.
//! * Fragments are laid out sequentially; conditional branches reserve their
//!   worst case (a T gadget reserves `d+16` rounds even though the S
//!   correction fires only half the time).

use std::collections::{BTreeMap, BTreeSet, VecDeque};


use super::{
    Basis, BitId, Cell, Condition, FrameUpdate, GridSpec, OpKind, Patch, PatchId, PatchRole,
    Pauli, Rounds, Schedule, SurgeryError, SurgeryOp,
};
use crate::model::CodeDistance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetKind {
    Init,
    Measure,
    Cnot { targets: u32 },
    Cz { targets: u32 },
    TGadget { adjoint: bool },
    Hadamard { return_home: bool },
    Swap,
    MultiBody { operands: u32, rotated: u32 },
    InjectAttempt,
}

/// Reserved duration of a composite gadget at distance `d`.
pub fn macro_duration(gadget: GadgetKind, d: CodeDistance) -> Rounds {
    let d = d.get();
    match gadget {
        GadgetKind::Init => d,
        GadgetKind::Measure => 1,
        GadgetKind::Cnot { .. } | GadgetKind::Cz { .. } => 2 * d,
        GadgetKind::TGadget { .. } => d + 1 + 15,
        GadgetKind::Hadamard { return_home: true } => 4 * d + 1,
        GadgetKind::Hadamard { return_home: false } => 2 * d + 1,
        GadgetKind::Swap => 3 * d,
        GadgetKind::MultiBody { rotated, .. } => {
            if rotated > 0 {
                3 * (d / 2) + d
            } else {
                d
            }
        }
        GadgetKind::InjectAttempt => 3,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub gadget: GadgetKind,
    pub start_round: Rounds,
    /// End of the reserved window (worst-case branch).
    pub end_round: Rounds,
    /// Half-open index range into the schedule's op list.
    pub op_range: (usize, usize),
    /// Every bit this gadget produces, in emission order.
    pub byproducts: Vec<BitId>,
    /// Frame updates owed by this gadget (split coins and corrections).
    pub updates: Vec<FrameUpdate>,
}

impl Fragment {
    pub fn reserved_rounds(&self) -> Rounds {
        self.end_round - self.start_round
    }

    /// Rounds actually spent given concrete outcomes: conditional ops only
    /// count when their trigger matches.
    pub fn executed_rounds(&self, sched: &Schedule, outcomes: &BTreeMap<BitId, bool>) -> Rounds {
        let mut end = self.start_round;
        for op in &sched.ops[self.op_range.0..self.op_range.1] {
            let runs = match &op.condition {
                None => true,
                Some(c) => outcomes.get(&c.bit).copied() == Some(c.trigger),
            };
            if runs {
                end = end.max(op.end_round());
            }
        }
        end - self.start_round
    }
}

#[derive(Debug)]
pub struct ScheduleBuilder {
    grid: GridSpec,
    patches: BTreeMap<PatchId, Patch>,
    ops: Vec<SurgeryOp>,
    frame_updates: Vec<FrameUpdate>,
    gadgets: Vec<(GadgetKind, Rounds, Rounds)>,
    next_patch: u32,
    next_bit: u32,
    cursor: Rounds,
}

impl ScheduleBuilder {
    pub fn new(cols: u32, rows: u32) -> Self {
        ScheduleBuilder {
            grid: GridSpec { cols, rows },
            patches: BTreeMap::new(),
            ops: Vec::new(),
            frame_updates: Vec::new(),
            gadgets: Vec::new(),
            next_patch: 0,
            next_bit: 0,
            cursor: 0,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn cursor(&self) -> Rounds {
        self.cursor
    }

    /// Move the cursor forward (used to leave idle gaps); never backward.
    pub fn advance_to(&mut self, round: Rounds) {
        self.cursor = self.cursor.max(round);
    }

    pub fn patch(&self, id: PatchId) -> Result<&Patch, SurgeryError> {
        self.patches.get(&id).ok_or(SurgeryError::UnknownPatch(id))
    }

    pub fn patches(&self) -> impl Iterator<Item = &Patch> {
        self.patches.values()
    }

    pub fn add_patch(
        &mut self,
        d: CodeDistance,
        origin: Cell,
        extent: (u32, u32),
        role: PatchRole,
        channel_basis: Basis,
    ) -> Result<PatchId, SurgeryError> {
        let id = PatchId(self.next_patch);
        let patch = Patch {
            id,
            d,
            origin,
            extent,
            role,
            channel_basis,
            distilled_magic: false,
            retired_round: None,
        };
        let occupied = self.occupied_cells();
        for cell in patch.cells() {
            if cell.col >= self.grid.cols || cell.row >= self.grid.rows || occupied.contains(&cell)
            {
                return Err(SurgeryError::BadPlacement(cell));
            }
        }
        self.next_patch += 1;
        self.patches.insert(id, patch);
        Ok(id)
    }

    pub fn add_data(&mut self, d: CodeDistance, at: Cell) -> Result<PatchId, SurgeryError> {
        self.add_patch(d, at, (1, 1), PatchRole::Data, Basis::Z)
    }

    /// A distilled magic state parked in workspace, ready for a T gadget.
    pub fn add_magic(&mut self, d: CodeDistance, at: Cell) -> Result<PatchId, SurgeryError> {
        let id = self.add_patch(d, at, (1, 1), PatchRole::Workspace, Basis::Z)?;
        self.patches.get_mut(&id).unwrap().distilled_magic = true;
        Ok(id)
    }

    pub fn finish(self) -> Schedule {
        Schedule {
            grid: self.grid,
            patches: self.patches,
            ops: self.ops,
            frame_updates: self.frame_updates,
            gadgets: self.gadgets,
        }
    }

    // ---- gadgets ----

    pub fn init_patch(&mut self, id: PatchId, basis: Basis) -> Result<Fragment, SurgeryError> {
        let patch = self.alive(id)?;
        let d = patch.d;
        let cells = patch.cells().into_iter().collect();
        let start = self.cursor;
        let lo = self.ops.len();
        let kind = match basis {
            Basis::Z => OpKind::InitZ,
            Basis::X => OpKind::InitX,
        };
        self.push_op(SurgeryOp {
            kind,
            operands: vec![id],
            bases: vec![],
            start_round: start,
            duration_rounds: d.get(),
            cells,
            byproducts: vec![],
            condition: None,
            flags: vec![],
        });
        self.seal(GadgetKind::Init, start, start + d.get(), lo, vec![], vec![])
    }

    /// Destructive transversal logical measurement; retires the patch.
    pub fn measure_patch(&mut self, id: PatchId, basis: Basis) -> Result<Fragment, SurgeryError> {
        let patch = self.alive(id)?;
        let cells = patch.cells().into_iter().collect();
        let start = self.cursor;
        let lo = self.ops.len();
        let bit = self.fresh_bit();
        let kind = match basis {
            Basis::Z => OpKind::MeasureZ,
            Basis::X => OpKind::MeasureX,
        };
        self.push_op(SurgeryOp {
            kind,
            operands: vec![id],
            bases: vec![],
            start_round: start,
            duration_rounds: 1,
            cells,
            byproducts: vec![bit],
            condition: None,
            flags: vec![],
        });
        self.retire(id, start + 1);
        self.seal(GadgetKind::Measure, start, start + 1, lo, vec![bit], vec![])
    }

    /// One magic-state injection attempt: two rounds to grow the cluster
    /// plus one to read the herald bit.
    pub fn inject_attempt(&mut self, id: PatchId) -> Result<Fragment, SurgeryError> {
        let patch = self.alive(id)?;
        let cells = patch.cells().into_iter().collect();
        let start = self.cursor;
        let lo = self.ops.len();
        let herald = self.fresh_bit();
        self.push_op(SurgeryOp {
            kind: OpKind::InjectT,
            operands: vec![id],
            bases: vec![],
            start_round: start,
            duration_rounds: 3,
            cells,
            byproducts: vec![herald],
            condition: None,
            flags: vec![],
        });
        self.seal(
            GadgetKind::InjectAttempt,
            start,
            start + 3,
            lo,
            vec![herald],
            vec![],
        )
    }

    pub fn build_cnot(
        &mut self,
        control: PatchId,
        targets: &[PatchId],
    ) -> Result<Fragment, SurgeryError> {
        self.build_controlled(control, targets, Basis::X)
    }

    pub fn build_cz(
        &mut self,
        control: PatchId,
        targets: &[PatchId],
    ) -> Result<Fragment, SurgeryError> {
        self.build_controlled(control, targets, Basis::Z)
    }

    /// |+>-ancilla construction shared by CNOT and CZ. Measures Z_C Z_A
    /// (bit `a`), then the joint X_A x (target basis) product (bit `b`),
    /// then Z_A transversally (bit `c`). Corrections: Z^b on the control,
    /// and on every target X^(a xor c) for CNOT or Z^(a xor c) for CZ.
    fn build_controlled(
        &mut self,
        control: PatchId,
        targets: &[PatchId],
        target_basis: Basis,
    ) -> Result<Fragment, SurgeryError> {
        if targets.is_empty() {
            return Err(SurgeryError::NoTargets);
        }
        if targets.contains(&control) {
            return Err(SurgeryError::ControlIsTarget);
        }
        let mut seen = BTreeSet::new();
        for t in targets {
            if !seen.insert(*t) {
                return Err(SurgeryError::DuplicateOperand(*t));
            }
        }
        let mut d = self.alive(control)?.d;
        for t in targets {
            d = d.max(self.alive(*t)?.d);
        }
        let dd = d.get();

        let mut anchors = vec![control];
        anchors.extend_from_slice(targets);
        let region = self.route_web(&anchors, "cnot ancilla strip")?;
        let region_set: BTreeSet<Cell> = region.iter().copied().collect();

        let ancilla = self.add_patch(d, region[0], (1, 1), PatchRole::Ancilla, Basis::X)?;
        // the patches map marks only the strip head; op footprints carry the
        // full strip
        let start = self.cursor;
        let lo = self.ops.len();

        let a = self.fresh_bit();
        let e1 = self.fresh_bit();
        let b = self.fresh_bit();
        let coins: Vec<BitId> = targets.iter().map(|_| self.fresh_bit()).collect();
        let c = self.fresh_bit();

        self.push_op(SurgeryOp {
            kind: OpKind::InitX,
            operands: vec![ancilla],
            bases: vec![],
            start_round: start,
            duration_rounds: 0,
            cells: region_set.clone(),
            byproducts: vec![],
            condition: None,
            flags: vec!["transversal"],
        });

        let mut zz_cells = region_set.clone();
        zz_cells.extend(self.patches[&control].cells());
        self.push_op(SurgeryOp {
            kind: OpKind::MergeMeasure,
            operands: vec![control, ancilla],
            bases: vec![Basis::Z, Basis::Z],
            start_round: start,
            duration_rounds: dd,
            cells: zz_cells.clone(),
            byproducts: vec![a],
            condition: None,
            flags: vec![],
        });
        self.push_op(SurgeryOp {
            kind: OpKind::Split,
            operands: vec![control, ancilla],
            bases: vec![],
            start_round: start + dd,
            duration_rounds: 0,
            cells: zz_cells,
            byproducts: vec![e1],
            condition: None,
            flags: vec![],
        });

        let mut xx_cells = region_set.clone();
        let mut operands: Vec<PatchId> = targets.to_vec();
        for t in targets {
            xx_cells.extend(self.patches[t].cells());
        }
        operands.push(ancilla);
        let mut bases = vec![target_basis; targets.len()];
        bases.push(Basis::X);
        self.push_op(SurgeryOp {
            kind: OpKind::MergeMeasure,
            operands: operands.clone(),
            bases,
            start_round: start + dd,
            duration_rounds: dd,
            cells: xx_cells.clone(),
            byproducts: vec![b],
            condition: None,
            flags: vec![],
        });
        self.push_op(SurgeryOp {
            kind: OpKind::Split,
            operands,
            bases: vec![],
            start_round: start + 2 * dd,
            duration_rounds: 0,
            cells: xx_cells,
            byproducts: coins.clone(),
            condition: None,
            flags: vec![],
        });
        self.push_op(SurgeryOp {
            kind: OpKind::MeasureZ,
            operands: vec![ancilla],
            bases: vec![],
            start_round: start + 2 * dd,
            duration_rounds: 0,
            cells: region_set,
            byproducts: vec![c],
            condition: None,
            flags: vec!["transversal"],
        });
        self.retire(ancilla, start + 2 * dd);

        let coin_pauli = match target_basis {
            Basis::X => Pauli::X,
            Basis::Z => Pauli::Z,
        };
        let mut updates = vec![FrameUpdate {
            patch: control,
            pauli: Pauli::Z,
            bits: vec![e1],
        }];
        for (t, coin) in targets.iter().zip(&coins) {
            updates.push(FrameUpdate {
                patch: *t,
                pauli: coin_pauli,
                bits: vec![*coin],
            });
        }
        updates.push(FrameUpdate {
            patch: control,
            pauli: Pauli::Z,
            bits: vec![b],
        });
        for t in targets {
            updates.push(FrameUpdate {
                patch: *t,
                pauli: coin_pauli,
                bits: vec![a, c],
            });
        }

        let mut byproducts = vec![a, e1, b];
        byproducts.extend(coins);
        byproducts.push(c);
        let gadget = match target_basis {
            Basis::X => GadgetKind::Cnot {
                targets: targets.len() as u32,
            },
            Basis::Z => GadgetKind::Cz {
                targets: targets.len() as u32,
            },
        };
        self.seal(gadget, start, start + 2 * dd, lo, byproducts, updates)
    }

    /// Teleported T (or T-dagger) via a ZZ merge with a distilled magic
    /// state. The S correction is scheduled conditionally and reserves its
    /// 15 rounds whether or not it fires.
    pub fn build_t_gadget(
        &mut self,
        target: PatchId,
        magic: PatchId,
        adjoint: bool,
    ) -> Result<Fragment, SurgeryError> {
        if target == magic {
            return Err(SurgeryError::DuplicateOperand(target));
        }
        let d = self.alive(target)?.d.max(self.alive(magic)?.d);
        if !self.patches[&magic].distilled_magic {
            return Err(SurgeryError::NoMagicState(magic));
        }
        let dd = d.get();
        let region = self.route_web_allow_adjacent(&[magic, target], "t-gadget merge")?;

        let start = self.cursor;
        let lo = self.ops.len();
        let a = self.fresh_bit();
        let coin = self.fresh_bit();
        let e = self.fresh_bit();

        let mut cells: BTreeSet<Cell> = region.iter().copied().collect();
        cells.extend(self.patches[&target].cells());
        cells.extend(self.patches[&magic].cells());
        self.push_op(SurgeryOp {
            kind: OpKind::MergeMeasure,
            operands: vec![target, magic],
            bases: vec![Basis::Z, Basis::Z],
            start_round: start,
            duration_rounds: dd,
            cells: cells.clone(),
            byproducts: vec![a],
            condition: None,
            flags: vec![],
        });
        self.push_op(SurgeryOp {
            kind: OpKind::Split,
            operands: vec![target, magic],
            bases: vec![],
            start_round: start + dd,
            duration_rounds: 0,
            cells,
            byproducts: vec![coin],
            condition: None,
            flags: vec![],
        });
        self.push_op(SurgeryOp {
            kind: OpKind::MeasureX,
            operands: vec![magic],
            bases: vec![],
            start_round: start + dd,
            duration_rounds: 1,
            cells: self.patches[&magic].cells().into_iter().collect(),
            byproducts: vec![e],
            condition: None,
            flags: vec![],
        });
        self.retire(magic, start + dd + 1);

        let mut flags = vec![];
        if dd != 15 {
            flags.push("d15-fixed-sequence");
        }
        self.push_op(SurgeryOp {
            kind: OpKind::GateS { adjoint },
            operands: vec![target],
            bases: vec![],
            start_round: start + dd + 1,
            duration_rounds: 15,
            cells: self.patches[&target].cells().into_iter().collect(),
            byproducts: vec![],
            condition: Some(Condition {
                bit: a,
                trigger: !adjoint,
            }),
            flags,
        });

        let updates = vec![
            FrameUpdate {
                patch: target,
                pauli: Pauli::Z,
                bits: vec![coin],
            },
            FrameUpdate {
                patch: target,
                pauli: Pauli::Z,
                bits: vec![e],
            },
        ];
        self.seal(
            GadgetKind::TGadget { adjoint },
            start,
            start + dd + 16,
            lo,
            vec![a, coin, e],
            updates,
        )
    }

    /// Transversal H then a grow/shrink sequence to restore the patch
    /// orientation, using the free cell below (or above) the patch. With
    /// `return_home` the patch also moves back to its original cell.
    pub fn build_hadamard(
        &mut self,
        target: PatchId,
        return_home: bool,
    ) -> Result<Fragment, SurgeryError> {
        let patch = self.alive(target)?;
        if patch.extent != (1, 1) {
            return Err(SurgeryError::NoRoute("hadamard workspace"));
        }
        let d = patch.d;
        let dd = d.get();
        let home = patch.origin;
        let occupied = self.occupied_cells();
        let spare = [
            Cell::new(home.col, home.row + 1),
            Cell::new(home.col, home.row.wrapping_sub(1)),
        ]
        .into_iter()
        .find(|c| self.in_grid(*c) && !occupied.contains(c))
        .ok_or(SurgeryError::NoRoute("hadamard workspace"))?;

        let start = self.cursor;
        let lo = self.ops.len();
        let one: BTreeSet<Cell> = [home].into();
        let pair: BTreeSet<Cell> = [home, spare].into();

        self.push_op(SurgeryOp {
            kind: OpKind::Hadamard,
            operands: vec![target],
            bases: vec![],
            start_round: start,
            duration_rounds: 1,
            cells: one.clone(),
            byproducts: vec![],
            condition: None,
            flags: vec![],
        });
        self.push_op(SurgeryOp {
            kind: OpKind::Expand {
                d_from: dd,
                d_to: dd,
            },
            operands: vec![target],
            bases: vec![],
            start_round: start + 1,
            duration_rounds: dd,
            cells: pair.clone(),
            byproducts: vec![],
            condition: None,
            flags: vec![],
        });
        let g1 = self.fresh_bit();
        self.push_op(SurgeryOp {
            kind: OpKind::Contract,
            operands: vec![target],
            bases: vec![],
            start_round: start + 1 + dd,
            duration_rounds: dd,
            cells: pair.clone(),
            byproducts: vec![g1],
            condition: None,
            flags: vec![],
        });
        self.patches.get_mut(&target).unwrap().origin = spare;
        let mut byproducts = vec![g1];
        let mut updates = vec![FrameUpdate {
            patch: target,
            pauli: Pauli::Z,
            bits: vec![g1],
        }];
        let mut end = start + 1 + 2 * dd;

        if return_home {
            let g2 = self.fresh_bit();
            self.push_op(SurgeryOp {
                kind: OpKind::Move {
                    from: spare,
                    to: home,
                },
                operands: vec![target],
                bases: vec![],
                start_round: end,
                duration_rounds: dd,
                cells: pair,
                byproducts: vec![g2],
                condition: None,
                flags: vec![],
            });
            let g3 = self.fresh_bit();
            self.push_op(SurgeryOp {
                kind: OpKind::Contract,
                operands: vec![target],
                bases: vec![],
                start_round: end + dd,
                duration_rounds: dd,
                cells: one,
                byproducts: vec![g3],
                condition: None,
                flags: vec!["trim"],
            });
            self.patches.get_mut(&target).unwrap().origin = home;
            byproducts.extend([g2, g3]);
            updates.push(FrameUpdate {
                patch: target,
                pauli: Pauli::Z,
                bits: vec![g2],
            });
            updates.push(FrameUpdate {
                patch: target,
                pauli: Pauli::Z,
                bits: vec![g3],
            });
            end += 2 * dd;
        }

        let p = self.patches.get_mut(&target).unwrap();
        p.channel_basis = p.channel_basis.other();
        self.seal(
            GadgetKind::Hadamard { return_home },
            start,
            end,
            lo,
            byproducts,
            updates,
        )
    }

    /// Exchange two horizontally adjacent 1x1 patches through the free strip
    /// below (or above) them: three move legs of `d` rounds each.
    pub fn build_swap(&mut self, a: PatchId, b: PatchId) -> Result<Fragment, SurgeryError> {
        if a == b {
            return Err(SurgeryError::DuplicateOperand(a));
        }
        let pa = self.alive(a)?.clone();
        let pb = self.alive(b)?.clone();
        if pa.extent != (1, 1)
            || pb.extent != (1, 1)
            || pa.origin.row != pb.origin.row
            || pa.origin.col.abs_diff(pb.origin.col) != 1
        {
            return Err(SurgeryError::SwapGeometry);
        }
        let d = pa.d.max(pb.d);
        let dd = d.get();
        let (ca, cb) = (pa.origin, pb.origin);
        let occupied = self.occupied_cells();
        let row = ca.row;
        let spare_row = [row + 1, row.wrapping_sub(1)]
            .into_iter()
            .find(|r| {
                let s1 = Cell::new(ca.col, *r);
                let s2 = Cell::new(cb.col, *r);
                self.in_grid(s1)
                    && self.in_grid(s2)
                    && !occupied.contains(&s1)
                    && !occupied.contains(&s2)
            })
            .ok_or(SurgeryError::NoRoute("swap workspace strip"))?;
        let sa = Cell::new(ca.col, spare_row);
        let sb = Cell::new(cb.col, spare_row);

        let start = self.cursor;
        let lo = self.ops.len();
        let mut byproducts = Vec::new();
        let mut updates = Vec::new();

        // leg 1: a steps aside; leg 2: b crosses; leg 3: a takes b's cell
        let legs: [(PatchId, Cell, Cell, BTreeSet<Cell>); 3] = [
            (a, ca, sa, [ca, sa].into()),
            (b, cb, ca, [cb, ca].into()),
            (a, sa, cb, [sa, sb, cb].into()),
        ];
        for (i, (patch, from, to, cells)) in legs.into_iter().enumerate() {
            let coin = self.fresh_bit();
            self.push_op(SurgeryOp {
                kind: OpKind::Move { from, to },
                operands: vec![patch],
                bases: vec![],
                start_round: start + i as u32 * dd,
                duration_rounds: dd,
                cells,
                byproducts: vec![coin],
                condition: None,
                flags: vec![],
            });
            self.patches.get_mut(&patch).unwrap().origin = to;
            byproducts.push(coin);
            updates.push(FrameUpdate {
                patch,
                pauli: Pauli::Z,
                bits: vec![coin],
            });
        }

        self.seal(
            GadgetKind::Swap,
            start,
            start + 3 * dd,
            lo,
            byproducts,
            updates,
        )
    }

    /// Joint Pauli-product measurement of arbitrarily many operands in the
    /// compact layout. Operands whose requested basis is not the boundary
    /// facing the channel first pay a `Rotate90`; the last operand is the
    /// hub. A single operand degenerates to a transversal measurement.
    pub fn build_multibody(
        &mut self,
        operands: &[(PatchId, Basis)],
    ) -> Result<Fragment, SurgeryError> {
        if operands.is_empty() {
            return Err(SurgeryError::NoTargets);
        }
        let mut seen = BTreeSet::new();
        for (p, _) in operands {
            if !seen.insert(*p) {
                return Err(SurgeryError::DuplicateOperand(*p));
            }
            self.alive(*p)?;
        }
        if let [(patch, basis)] = operands {
            return self.measure_patch(*patch, *basis);
        }
        let d = operands
            .iter()
            .map(|(p, _)| self.patches[p].d)
            .max()
            .unwrap();
        let dd = d.get();

        let start = self.cursor;
        let lo = self.ops.len();
        let occupied = self.occupied_cells();
        let mut claimed: BTreeSet<Cell> = BTreeSet::new();
        let mut rotated = 0u32;
        let mut rot_end = start;
        for (p, basis) in operands {
            if *basis == self.patches[p].channel_basis {
                continue;
            }
            let patch = self.patches[p].clone();
            let workspace = patch
                .cells()
                .iter()
                .flat_map(|c| self.neighbors(*c))
                .find(|c| !occupied.contains(c) && !claimed.contains(c))
                .ok_or(SurgeryError::NoRoute("rotation workspace"))?;
            claimed.insert(workspace);
            let dur = 3 * (patch.d.get() / 2);
            let mut cells: BTreeSet<Cell> = patch.cells().into_iter().collect();
            cells.insert(workspace);
            self.push_op(SurgeryOp {
                kind: OpKind::Rotate90,
                operands: vec![*p],
                bases: vec![],
                start_round: start,
                duration_rounds: dur,
                cells,
                byproducts: vec![],
                condition: None,
                flags: vec![],
            });
            let pm = self.patches.get_mut(p).unwrap();
            pm.channel_basis = pm.channel_basis.other();
            rotated += 1;
            rot_end = rot_end.max(start + dur);
        }

        let anchors: Vec<PatchId> = operands
            .iter()
            .rev()
            .map(|(p, _)| *p)
            .collect();
        let region = self.route_web_allow_adjacent(&anchors, "multi-body web")?;

        let m = self.fresh_bit();
        let mut cells: BTreeSet<Cell> = region.iter().copied().collect();
        for (p, _) in operands {
            cells.extend(self.patches[p].cells());
        }
        self.push_op(SurgeryOp {
            kind: OpKind::MultiBodyMeasure,
            operands: operands.iter().map(|(p, _)| *p).collect(),
            bases: operands.iter().map(|(_, b)| *b).collect(),
            start_round: rot_end,
            duration_rounds: dd,
            cells: cells.clone(),
            byproducts: vec![m],
            condition: None,
            flags: vec![],
        });

        let hub = operands.last().unwrap().0;
        let mut coins = Vec::new();
        let mut updates = Vec::new();
        for (p, basis) in operands {
            if *p == hub {
                continue;
            }
            let coin = self.fresh_bit();
            coins.push(coin);
            updates.push(FrameUpdate {
                patch: *p,
                pauli: match basis {
                    Basis::X => Pauli::X,
                    Basis::Z => Pauli::Z,
                },
                bits: vec![coin],
            });
        }
        self.push_op(SurgeryOp {
            kind: OpKind::Split,
            operands: operands.iter().map(|(p, _)| *p).collect(),
            bases: vec![],
            start_round: rot_end + dd,
            duration_rounds: 0,
            cells,
            byproducts: coins.clone(),
            condition: None,
            flags: vec![],
        });

        let mut byproducts = vec![m];
        byproducts.extend(coins);
        self.seal(
            GadgetKind::MultiBody {
                operands: operands.len() as u32,
                rotated,
            },
            start,
            rot_end + dd,
            lo,
            byproducts,
            updates,
        )
    }

    // ---- internals ----

    fn alive(&self, id: PatchId) -> Result<&Patch, SurgeryError> {
        let patch = self.patch(id)?;
        match patch.retired_round {
            Some(r) if r <= self.cursor => Err(SurgeryError::PatchRetired(id)),
            _ => Ok(patch),
        }
    }

    fn retire(&mut self, id: PatchId, round: Rounds) {
        self.patches.get_mut(&id).unwrap().retired_round = Some(round);
    }

    pub(crate) fn fresh_bit(&mut self) -> BitId {
        let b = BitId(self.next_bit);
        self.next_bit += 1;
        b
    }

    pub(crate) fn push_op(&mut self, op: SurgeryOp) -> usize {
        self.ops.push(op);
        self.ops.len() - 1
    }

    fn seal(
        &mut self,
        gadget: GadgetKind,
        start: Rounds,
        end: Rounds,
        lo: usize,
        byproducts: Vec<BitId>,
        updates: Vec<FrameUpdate>,
    ) -> Result<Fragment, SurgeryError> {
        self.frame_updates.extend(updates.iter().cloned());
        self.gadgets.push((gadget, start, end));
        self.cursor = end;
        Ok(Fragment {
            gadget,
            start_round: start,
            end_round: end,
            op_range: (lo, self.ops.len()),
            byproducts,
            updates,
        })
    }

    fn in_grid(&self, c: Cell) -> bool {
        c.col < self.grid.cols && c.row < self.grid.rows
    }

    fn occupied_cells(&self) -> BTreeSet<Cell> {
        self.patches
            .values()
            .filter(|p| p.retired_round.map_or(true, |r| r > self.cursor))
            .flat_map(|p| p.cells())
            .collect()
    }

    fn neighbors(&self, c: Cell) -> Vec<Cell> {
        // lexicographic (col, row) order keeps routing deterministic
        let mut out = Vec::with_capacity(4);
        if c.col > 0 {
            out.push(Cell::new(c.col - 1, c.row));
        }
        if c.row > 0 {
            out.push(Cell::new(c.col, c.row - 1));
        }
        if c.row + 1 < self.grid.rows {
            out.push(Cell::new(c.col, c.row + 1));
        }
        if c.col + 1 < self.grid.cols {
            out.push(Cell::new(c.col + 1, c.row));
        }
        out
    }

    /// Free-cell web touching every anchor patch; always at least one cell
    /// (the web is a distinct logical qubit even between adjacent anchors).
    fn route_web(
        &self,
        anchors: &[PatchId],
        what: &'static str,
    ) -> Result<Vec<Cell>, SurgeryError> {
        self.route_web_inner(anchors, false, what)
    }

    /// Like [`route_web`], but directly adjacent anchors merge with no
    /// routing cells (the operands themselves fuse).
    fn route_web_allow_adjacent(
        &self,
        anchors: &[PatchId],
        what: &'static str,
    ) -> Result<Vec<Cell>, SurgeryError> {
        self.route_web_inner(anchors, true, what)
    }

    fn route_web_inner(
        &self,
        anchors: &[PatchId],
        allow_adjacent: bool,
        what: &'static str,
    ) -> Result<Vec<Cell>, SurgeryError> {
        let occupied = self.occupied_cells();
        let hub_cells: BTreeSet<Cell> = self.patches[&anchors[0]].cells().into_iter().collect();
        let mut region: Vec<Cell> = Vec::new();
        let mut region_set: BTreeSet<Cell> = BTreeSet::new();

        for goal_patch in &anchors[1..] {
            let goal: BTreeSet<Cell> = self.patches[goal_patch].cells().into_iter().collect();
            let touches_region = region_set
                .iter()
                .any(|c| self.neighbors(*c).iter().any(|n| goal.contains(n)));
            let touches_hub = allow_adjacent
                && hub_cells
                    .iter()
                    .any(|c| self.neighbors(*c).iter().any(|n| goal.contains(n)));
            if touches_region || touches_hub {
                continue;
            }

            // seed with the current web, else with free cells around the hub
            let sources: Vec<Cell> = if region.is_empty() {
                hub_cells
                    .iter()
                    .flat_map(|c| self.neighbors(*c))
                    .filter(|c| !occupied.contains(c))
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect()
            } else {
                region.clone()
            };
            let path = self
                .bfs(&occupied, &region_set, &sources, &goal)
                .ok_or(SurgeryError::NoRoute(what))?;
            for cell in path {
                if region_set.insert(cell) {
                    region.push(cell);
                }
            }
        }
        if region.is_empty() && !allow_adjacent {
            // merge via a separate ancilla web: claim one free cell even for
            // adjacent anchors
            let occupied2 = occupied;
            let goal: BTreeSet<Cell> = self.patches[&anchors[1]].cells().into_iter().collect();
            let sources: Vec<Cell> = hub_cells
                .iter()
                .flat_map(|c| self.neighbors(*c))
                .filter(|c| !occupied2.contains(c))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let path = self
                .bfs(&occupied2, &BTreeSet::new(), &sources, &goal)
                .ok_or(SurgeryError::NoRoute(what))?;
            return Ok(path);
        }
        Ok(region)
    }

    /// Shortest free-cell path from any source to a cell adjacent to the
    /// goal patch; deterministic lexicographic tie-breaking.
    fn bfs(
        &self,
        occupied: &BTreeSet<Cell>,
        already_in_web: &BTreeSet<Cell>,
        sources: &[Cell],
        goal: &BTreeSet<Cell>,
    ) -> Option<Vec<Cell>> {
        let is_goal = |c: Cell| self.neighbors(c).iter().any(|n| goal.contains(n));
        let mut parent: BTreeMap<Cell, Option<Cell>> = BTreeMap::new();
        let mut queue = VecDeque::new();
        for s in sources {
            if parent.contains_key(s) {
                continue;
            }
            parent.insert(*s, None);
            if is_goal(*s) {
                return Some(if already_in_web.contains(s) {
                    vec![]
                } else {
                    vec![*s]
                });
            }
            queue.push_back(*s);
        }
        while let Some(cur) = queue.pop_front() {
            for next in self.neighbors(cur) {
                if occupied.contains(&next) || parent.contains_key(&next) {
                    continue;
                }
                parent.insert(next, Some(cur));
                if is_goal(next) {
                    let mut path = vec![next];
                    let mut back = cur;
                    loop {
                        if !already_in_web.contains(&back) {
                            path.push(back);
                        }
                        match parent[&back] {
                            Some(prev) => back = prev,
                            None => break,
                        }
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(next);
            }
        }
        None
    }
}
