//! Schedule serialization: a typed record set with a fixed field order so
//! identical schedules always serialize to identical bytes, plus a coarse
//! text Gantt view for eyeballing cell occupancy.

use serde::{Deserialize, Serialize};

use super::{Basis, GadgetKind, OpKind, Pauli, Schedule};

pub const SCHEMA: &str = "latsurg/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleRecords {
    pub schema: String,
    pub grid: GridRecord,
    pub total_rounds: u32,
    pub spacetime_volume: u64,
    pub patches: Vec<PatchRecord>,
    pub ops: Vec<OpRecord>,
    pub frame_updates: Vec<FrameUpdateRecord>,
    pub gadgets: Vec<GadgetRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridRecord {
    pub cols: u32,
    pub rows: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchRecord {
    pub id: u32,
    pub d: u32,
    pub origin: [u32; 2],
    pub extent: [u32; 2],
    pub role: String,
    pub channel_basis: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub distilled_magic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retired_round: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpRecord {
    pub kind: String,
    pub operands: Vec<u32>,
    pub start_round: u32,
    pub duration_rounds: u32,
    pub cells: Vec<[u32; 2]>,
    pub byproduct_ids: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_trigger: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bases: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub move_from: Option<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub move_to: Option<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expand_to: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjoint: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameUpdateRecord {
    pub patch: u32,
    pub pauli: String,
    pub condition_bits: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetRecord {
    pub kind: String,
    pub start_round: u32,
    pub end_round: u32,
}

fn basis_str(b: Basis) -> String {
    match b {
        Basis::X => "X".into(),
        Basis::Z => "Z".into(),
    }
}

fn pauli_str(p: Pauli) -> String {
    match p {
        Pauli::X => "X",
        Pauli::Y => "Y",
        Pauli::Z => "Z",
    }
    .into()
}

fn gadget_str(g: GadgetKind) -> String {
    match g {
        GadgetKind::Init => "init".into(),
        GadgetKind::Measure => "measure".into(),
        GadgetKind::Cnot { targets } => format!("cnot x{targets}"),
        GadgetKind::Cz { targets } => format!("cz x{targets}"),
        GadgetKind::TGadget { adjoint: false } => "t".into(),
        GadgetKind::TGadget { adjoint: true } => "t_dagger".into(),
        GadgetKind::Hadamard { return_home } => {
            if return_home {
                "hadamard_return".into()
            } else {
                "hadamard".into()
            }
        }
        GadgetKind::Swap => "swap".into(),
        GadgetKind::MultiBody { operands, rotated } => {
            format!("multi_body x{operands} rot{rotated}")
        }
        GadgetKind::InjectAttempt => "inject_attempt".into(),
    }
}

impl Schedule {
    pub fn to_records(&self) -> ScheduleRecords {
        let patches = self
            .patches
            .values()
            .map(|p| PatchRecord {
                id: p.id.0,
                d: p.d.get(),
                origin: [p.origin.col, p.origin.row],
                extent: [p.extent.0, p.extent.1],
                role: format!("{:?}", p.role).to_lowercase(),
                channel_basis: basis_str(p.channel_basis),
                distilled_magic: p.distilled_magic,
                retired_round: p.retired_round,
            })
            .collect();

        let ops = self
            .ops
            .iter()
            .map(|op| {
                let (move_from, move_to) = match op.kind {
                    OpKind::Move { from, to } => {
                        (Some([from.col, from.row]), Some([to.col, to.row]))
                    }
                    _ => (None, None),
                };
                OpRecord {
                    kind: op.kind.name().into(),
                    operands: op.operands.iter().map(|p| p.0).collect(),
                    start_round: op.start_round,
                    duration_rounds: op.duration_rounds,
                    cells: op.cells.iter().map(|c| [c.col, c.row]).collect(),
                    byproduct_ids: op.byproducts.iter().map(|b| b.0).collect(),
                    condition_id: op.condition.map(|c| c.bit.0),
                    condition_trigger: op.condition.map(|c| c.trigger),
                    bases: op.bases.iter().map(|b| basis_str(*b)).collect(),
                    move_from,
                    move_to,
                    expand_to: match op.kind {
                        OpKind::Expand { d_to, .. } => Some(d_to),
                        _ => None,
                    },
                    adjoint: match op.kind {
                        OpKind::GateS { adjoint } => Some(adjoint),
                        _ => None,
                    },
                    flags: op.flags.iter().map(|f| f.to_string()).collect(),
                }
            })
            .collect();

        ScheduleRecords {
            schema: SCHEMA.into(),
            grid: GridRecord {
                cols: self.grid.cols,
                rows: self.grid.rows,
            },
            total_rounds: self.total_rounds(),
            spacetime_volume: self.spacetime_volume(),
            patches,
            ops,
            frame_updates: self
                .frame_updates
                .iter()
                .map(|u| FrameUpdateRecord {
                    patch: u.patch.0,
                    pauli: pauli_str(u.pauli),
                    condition_bits: u.bits.iter().map(|b| b.0).collect(),
                })
                .collect(),
            gadgets: self
                .gadgets
                .iter()
                .map(|(g, s, e)| GadgetRecord {
                    kind: gadget_str(*g),
                    start_round: *s,
                    end_round: *e,
                })
                .collect(),
        }
    }

    /// One line per occupied cell, time left to right, one op-kind letter
    /// per bucket of rounds. `.` = idle, `#` = two ops in one bucket
    /// (fine-grained overlap checking is `validate`'s job).
    pub fn render_gantt(&self, width: usize) -> String {
        let total = self.total_rounds().max(1);
        let width = width.clamp(10, 200) as u32;
        let bucket = total.div_ceil(width).max(1);
        let cols = (total.div_ceil(bucket)) as usize;

        let mut cells: Vec<super::Cell> = self
            .ops
            .iter()
            .flat_map(|op| op.cells.iter().copied())
            .collect();
        cells.sort_by_key(|c| (c.row, c.col));
        cells.dedup();

        let mut out = String::new();
        out.push_str(&format!(
            "rounds 0..{total}, {} per char\n",
            bucket
        ));
        for cell in cells {
            let mut track = vec!['.'; cols];
            for op in &self.ops {
                if op.duration_rounds == 0 || !op.cells.contains(&cell) {
                    continue;
                }
                let glyph = op_glyph(&op.kind);
                let first = (op.start_round / bucket) as usize;
                let last = ((op.end_round() - 1) / bucket) as usize;
                for slot in track.iter_mut().take(last + 1).skip(first) {
                    *slot = if *slot == '.' { glyph } else { '#' };
                }
            }
            out.push_str(&format!(
                "r{:<3} c{:<3} |{}|\n",
                cell.row,
                cell.col,
                track.iter().collect::<String>()
            ));
        }
        out
    }
}

fn op_glyph(kind: &OpKind) -> char {
    match kind {
        OpKind::InitZ | OpKind::InitX => 'I',
        OpKind::MeasureZ | OpKind::MeasureX => 'm',
        OpKind::MergeMeasure => 'M',
        OpKind::Split => '|',
        OpKind::MultiBodyMeasure => 'W',
        OpKind::Rotate90 => 'R',
        OpKind::Expand { .. } => 'E',
        OpKind::Contract => 'C',
        OpKind::Move { .. } => '>',
        OpKind::InjectT => 'T',
        OpKind::GateS { .. } => 'S',
        OpKind::Hadamard => 'H',
    }
}
