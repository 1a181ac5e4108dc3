//! Two-level magic-state factory: error chain, throughput, footprint, and a
//! steady-state window schedule.
//!
//! Eight level-1 blocks run in parallel lanes and feed one level-2 block.
//! A lane produces one output per layer of `6.5 d` rounds; sixteen lane
//! outputs (fifteen needed plus one spare) supply the fifteen inputs of a
//! level-2 run, which spans two layers. The whole structure runs at one
//! *structural* distance `d_struct >= 15`; the level-1 blocks are defined on
//! a distance-15 corner and do not shrink below it.
//!
//! Cell layout, one cell = one distance-`d_struct` patch site
//! (`2 d^2 - 1` physical qubits):
//!
//! ```text
//! cols  0..24   eight level-1 lanes, 3x8 cells each      rows 0..8
//! cols 24..27   level-2 block, 3x8                       rows 0..8
//! rows  8..10   injection apron (heralded |A> attempts)
//! row   10      staging / delivery hallway
//! ```
//!
//! 27 x 11 = 297 cells in total, idle hallway included.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CodeDistance, PhysicalAssumptions};
use crate::num::Real;
use crate::rates::{
    cascade, injection_cluster_failure, logical_error_per_round, CascadeLevel, RateError,
};
use crate::surgery::{
    Basis, Cell, GridSpec, OpKind, PatchRole, Rounds, Schedule, ScheduleBuilder, SurgeryError,
    SurgeryOp,
};

/// Lanes of level-1 blocks feeding the level-2 block.
pub const L1_LANES: u32 = 8;
/// Level-1 runs provisioned per level-2 output: 15 inputs plus one spare.
pub const L1_RUNS_PER_OUTPUT: u32 = 16;
/// Layers a level-2 run occupies.
pub const L2_LAYERS: u32 = 2;
/// Injection slots consumed per level-2 output: 16 runs x 15 inputs.
pub const INJECTION_SLOTS_PER_OUTPUT: u32 = L1_RUNS_PER_OUTPUT * 15;

const LANE_COLS: u32 = 3;
const LANE_ROWS: u32 = 8;
/// 6 injection sites per lane (3 cols x 2 apron rows); 3 production cycles
/// per site per layer gives 18 clusters for 15 slots, i.e. 3 spares.
const APRON_SITES_PER_LANE: u32 = 6;
const CYCLES_PER_LAYER: u32 = 3;

#[derive(Debug, Error, PartialEq)]
pub enum FactoryError {
    #[error("structural distance {0} is below the level-1 block distance 15")]
    DistanceBelowLevel1(u32),
    #[error(transparent)]
    Rate(#[from] RateError),
}

/// Heralded injection of one |A> state.
///
/// A *cluster* is the attempt budget one input slot draws on before its
/// first rebuild: `waves` herald waves, each trying `locations_per_wave`
/// spots in the cell simultaneously. A failed cluster is rebuilt from spare
/// site-cycles; only `1 + retries_within_slack` consecutive cluster failures
/// lose the slot (simultaneous multi-slot failures are higher order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionCluster {
    pub waves: u32,
    pub locations_per_wave: u32,
    pub rounds_per_wave: Rounds,
    pub retries_within_slack: u32,
}

impl Default for InjectionCluster {
    fn default() -> Self {
        InjectionCluster {
            waves: 5,
            locations_per_wave: 4,
            rounds_per_wave: 3,
            retries_within_slack: 2,
        }
    }
}

impl InjectionCluster {
    pub fn attempts(&self) -> u32 {
        self.waves * self.locations_per_wave
    }

    pub fn cluster_rounds(&self) -> Rounds {
        self.waves as Rounds * self.rounds_per_wave
    }

    /// Probability that all attempts of one cluster fail: `(1-q)^attempts`.
    pub fn failure_prob<F: Real>(&self, q_inject: F) -> Result<F, RateError> {
        injection_cluster_failure(self.attempts(), q_inject)
    }

    /// Probability a slot is lost outright: the cluster and every rebuild
    /// the schedule slack affords all fail.
    pub fn loss_beyond_slack<F: Real>(&self, q_inject: F) -> Result<F, RateError> {
        let f = self.failure_prob(q_inject)?;
        Ok(f.powi(1 + self.retries_within_slack as i32))
    }
}

/// The factory, parametrised by machine assumptions and the structural
/// distance its patches run at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactoryModel<F> {
    pub assumptions: PhysicalAssumptions<F>,
    /// Level-1 block distance, pinned to 15 by the S-gadget corner.
    pub d1: CodeDistance,
    pub d_struct: CodeDistance,
    pub injection: InjectionCluster,
    /// Rounds by which consecutive windows overlap at the output junction.
    pub junction_overlap: Rounds,
}

impl<F: Real> FactoryModel<F> {
    pub fn new(
        assumptions: PhysicalAssumptions<F>,
        d_struct: CodeDistance,
    ) -> Result<Self, FactoryError> {
        if d_struct.get() < 15 {
            return Err(FactoryError::DistanceBelowLevel1(d_struct.get()));
        }
        Ok(FactoryModel {
            assumptions,
            d1: CodeDistance::new(15).unwrap(),
            d_struct,
            injection: InjectionCluster::default(),
            junction_overlap: d_struct.get() as Rounds,
        })
    }

    /// Rounds per block layer: `6.5 d`.
    pub fn layer_rounds(&self) -> F {
        F::of(6.5) * F::of(self.d_struct.get() as f64)
    }

    /// Surgery error a state accumulates while parked for one layer.
    pub fn interlevel_storage_error(&self) -> Result<F, RateError> {
        let p_l = logical_error_per_round(self.assumptions.p, self.d_struct)?;
        Ok(p_l * self.layer_rounds())
    }

    /// Both distillation levels. Level 1 consumes injected states in place;
    /// level-2 inputs sit in the structure for about one layer first, so
    /// they pick up [`Self::interlevel_storage_error`] on top.
    pub fn chain(&self) -> Result<[CascadeLevel<F>; 2], RateError> {
        let levels = cascade(
            2,
            self.assumptions.p_inject,
            &[F::zero(), self.interlevel_storage_error()?],
        )?;
        Ok([levels[0], levels[1]])
    }

    /// Probability that rejects leave fewer than 15 usable level-1 outputs
    /// among the 16 provisioned runs: `P(Binomial(16, r1) >= 2)`.
    pub fn shortfall_prob(&self) -> Result<F, RateError> {
        let r1 = self.chain()?[0].p_reject;
        let q = F::one() - r1;
        let n = F::of(L1_RUNS_PER_OUTPUT as f64);
        Ok(F::one() - q.powi(L1_RUNS_PER_OUTPUT as i32) - n * r1 * q.powi(L1_RUNS_PER_OUTPUT as i32 - 1))
    }

    /// Steady-state rounds per output T state.
    ///
    /// A window spans two layers plus the output junction, minus the
    /// pipelining overlap with the next window; shortfalls and level-2
    /// rejects stretch the average.
    pub fn rounds_per_t(&self) -> Result<F, FactoryError> {
        let chain = self.chain()?;
        let d = F::of(self.d_struct.get() as f64);
        let stride = F::of(2.0) * self.layer_rounds() + d - F::of(self.junction_overlap as f64);
        let derate = (F::one() - self.shortfall_prob()?) * (F::one() - chain[1].p_reject);
        Ok(stride / derate)
    }

    pub fn t_per_second(&self) -> Result<F, FactoryError> {
        Ok(F::one() / (self.rounds_per_t()? * self.assumptions.t_round_seconds))
    }

    /// Error rate of a delivered T state.
    pub fn output_error(&self) -> Result<F, RateError> {
        Ok(self.chain()?[1].p_out)
    }

    /// Probability that an output is spoiled by injection slots lost beyond
    /// the rebuild slack: `240 f^3` at defaults.
    pub fn injection_loss_per_output(&self) -> Result<F, RateError> {
        let per_slot = self.injection.loss_beyond_slack(self.assumptions.q_inject)?;
        Ok(F::of(INJECTION_SLOTS_PER_OUTPUT as f64) * per_slot)
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            cols: LANE_COLS * L1_LANES + LANE_COLS,
            rows: LANE_ROWS + 3,
        }
    }

    pub fn cells(&self) -> u64 {
        let g = self.grid();
        g.cols as u64 * g.rows as u64
    }

    /// Physical qubits under the whole footprint, idle hallway included:
    /// `cells * (2 d^2 - 1)`.
    pub fn physical_qubits(&self) -> u64 {
        let d = self.d_struct.get() as u64;
        self.cells() * (2 * d * d - 1)
    }

    /// Injection to first level-1 output, no rejects: one herald wave, a
    /// move into the lane, one layer.
    pub fn level1_latency_rounds(&self) -> F {
        F::of(self.injection.rounds_per_wave as f64)
            + F::of(self.d_struct.get() as f64)
            + self.layer_rounds()
    }

    /// Injection to delivered T state. With `rejection_adjusted` the herald,
    /// shortfall, and level-2 reject rates stretch their segments.
    pub fn output_latency_rounds(&self, rejection_adjusted: bool) -> Result<F, FactoryError> {
        let d = F::of(self.d_struct.get() as f64);
        let layer = self.layer_rounds();
        let wave = F::of(self.injection.rounds_per_wave as f64);
        let (inject, l1, l2) = if rejection_adjusted {
            let q = self.assumptions.q_inject;
            let wave_success =
                F::one() - (F::one() - q).powi(self.injection.locations_per_wave as i32);
            let r2 = self.chain()?[1].p_reject;
            (
                wave / wave_success,
                layer / (F::one() - self.shortfall_prob()?),
                F::of(L2_LAYERS as f64) * layer / (F::one() - r2),
            )
        } else {
            (wave, layer, F::of(L2_LAYERS as f64) * layer)
        };
        // move into lane + transfer to level 2 + delivery
        Ok(inject + d + l1 + d + l2 + d)
    }

    /// One steady-state window of the pipeline as an explicit schedule.
    ///
    /// Layer boundaries fall at `round(k * 6.5 d)`. The window shows:
    /// the level-2 block processing the *previous* window's inputs for both
    /// layers, every lane running one coarse block op per layer (standing in
    /// for the 15-to-1 merge sequence), the apron producing injection
    /// clusters cycle by cycle, the conditional S correction each lane
    /// output needs in staging, and the finished T state's own S correction
    /// and delivery move. Corrections internal to the blocks stay below this
    /// abstraction, so the window carries no frame updates of its own.
    ///
    /// `total_rounds` exceeds the two-layer stride by the output junction;
    /// consecutive windows overlap by exactly that much.
    pub fn window_schedule(&self) -> Result<Schedule, SurgeryError> {
        let d = self.d_struct;
        let dr = d.get() as Rounds;
        let g = self.grid();
        let mut b = ScheduleBuilder::new(g.cols, g.rows);
        let boundary =
            |k: u32| -> Rounds { (k as f64 * 6.5 * d.get() as f64).round() as Rounds };

        let mut lanes = Vec::new();
        let mut stagings = Vec::new();
        for l in 0..L1_LANES {
            lanes.push(b.add_patch(
                d,
                Cell::new(LANE_COLS * l, 0),
                (LANE_COLS, LANE_ROWS),
                PatchRole::Factory,
                Basis::Z,
            )?);
            stagings.push(b.add_patch(
                d,
                Cell::new(LANE_COLS * l + 1, LANE_ROWS + 2),
                (1, 1),
                PatchRole::Workspace,
                Basis::Z,
            )?);
        }
        let l2 = b.add_patch(
            d,
            Cell::new(LANE_COLS * L1_LANES, 0),
            (LANE_COLS, LANE_ROWS),
            PatchRole::Factory,
            Basis::Z,
        )?;
        let out_cell = Cell::new(LANE_COLS * L1_LANES + 1, LANE_ROWS + 2);
        let output = b.add_patch(d, out_cell, (1, 1), PatchRole::Workspace, Basis::Z)?;

        // level-2 block, both layers, on the previous window's inputs
        let l2_cells: BTreeSet<Cell> = b.patch(l2)?.cells().into_iter().collect();
        let l2_bit = b.fresh_bit();
        b.push_op(SurgeryOp {
            kind: OpKind::MultiBodyMeasure,
            operands: vec![l2],
            bases: vec![Basis::Z],
            start_round: 0,
            duration_rounds: boundary(L2_LAYERS),
            cells: l2_cells,
            byproducts: vec![l2_bit],
            condition: None,
            flags: vec!["pipelined-previous-window"],
        });

        for (l, &lane) in lanes.iter().enumerate() {
            let lane_cells: BTreeSet<Cell> = b.patch(lane)?.cells().into_iter().collect();
            for k in 0..L2_LAYERS {
                let bit = b.fresh_bit();
                b.push_op(SurgeryOp {
                    kind: OpKind::MultiBodyMeasure,
                    operands: vec![lane],
                    bases: vec![Basis::Z],
                    start_round: boundary(k),
                    duration_rounds: boundary(k + 1) - boundary(k),
                    cells: lane_cells.clone(),
                    byproducts: vec![bit],
                    condition: None,
                    flags: vec!["lane-layer"],
                });
                // the layer's output waits in staging for its S correction
                let staging = stagings[l];
                let cell = b.patch(staging)?.origin;
                b.push_op(SurgeryOp {
                    kind: OpKind::GateS { adjoint: false },
                    operands: vec![staging],
                    bases: vec![],
                    start_round: boundary(k + 1),
                    duration_rounds: 15,
                    cells: BTreeSet::from([cell]),
                    byproducts: vec![],
                    condition: Some(crate::surgery::Condition { bit, trigger: true }),
                    flags: vec!["s-correction"],
                });
            }
        }

        // apron: injection clusters, wave by wave, then grow to d_struct
        let cycle = self.injection.cluster_rounds() + dr;
        for l in 0..L1_LANES {
            for s in 0..APRON_SITES_PER_LANE {
                let cell = Cell::new(LANE_COLS * l + s % LANE_COLS, LANE_ROWS + s / LANE_COLS);
                let site = b.add_patch(d, cell, (1, 1), PatchRole::Workspace, Basis::Z)?;
                for k in 0..L2_LAYERS {
                    for c in 0..CYCLES_PER_LAYER {
                        let base = boundary(k) + cycle * c as Rounds;
                        for w in 0..self.injection.waves {
                            let herald = b.fresh_bit();
                            b.push_op(SurgeryOp {
                                kind: OpKind::InjectT,
                                operands: vec![site],
                                bases: vec![],
                                start_round: base + self.injection.rounds_per_wave * w as Rounds,
                                duration_rounds: self.injection.rounds_per_wave,
                                cells: BTreeSet::from([cell]),
                                byproducts: vec![herald],
                                condition: None,
                                flags: vec!["herald-wave"],
                            });
                        }
                        b.push_op(SurgeryOp {
                            kind: OpKind::Expand {
                                d_from: 3,
                                d_to: d.get(),
                            },
                            operands: vec![site],
                            bases: vec![],
                            start_round: base + self.injection.cluster_rounds(),
                            duration_rounds: dr,
                            cells: BTreeSet::from([cell]),
                            byproducts: vec![],
                            condition: None,
                            flags: vec![],
                        });
                    }
                }
            }
        }

        // finished T state: conditional S, then delivery off the east edge
        b.push_op(SurgeryOp {
            kind: OpKind::GateS { adjoint: false },
            operands: vec![output],
            bases: vec![],
            start_round: boundary(L2_LAYERS),
            duration_rounds: 15,
            cells: BTreeSet::from([out_cell]),
            byproducts: vec![],
            condition: Some(crate::surgery::Condition {
                bit: l2_bit,
                trigger: true,
            }),
            flags: vec!["s-correction"],
        });
        let exit = Cell::new(out_cell.col + 1, out_cell.row);
        b.push_op(SurgeryOp {
            kind: OpKind::Move {
                from: out_cell,
                to: exit,
            },
            operands: vec![output],
            bases: vec![],
            start_round: boundary(L2_LAYERS) + 15,
            duration_rounds: dr,
            cells: BTreeSet::from([out_cell, exit]),
            byproducts: vec![],
            condition: None,
            flags: vec!["delivery"],
        });

        Ok(b.finish())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn headline() -> FactoryModel<f64> {
        let a = PhysicalAssumptions::new(1e-3, 1e-6).unwrap();
        FactoryModel::new(a, CodeDistance::new(15).unwrap()).unwrap()
    }

    #[test]
    fn rejects_distances_below_level1() {
        let a = PhysicalAssumptions::new(1e-3, 1e-6).unwrap();
        let d = CodeDistance::new(13).unwrap();
        assert_eq!(
            FactoryModel::new(a, d).unwrap_err(),
            FactoryError::DistanceBelowLevel1(13)
        );
    }

    #[test]
    fn error_chain_at_headline_assumptions() {
        let f = headline();
        let chain = f.chain().unwrap();
        assert_relative_eq!(chain[0].p_in, 1e-3);
        assert_relative_eq!(chain[0].p_out, 3.5e-8, max_relative = 1e-12);
        // level-2 inputs wait one layer: 35 p^3 + 1e-9 * 97.5
        assert_relative_eq!(chain[1].p_in, 1.325e-7, max_relative = 1e-12);
        assert_relative_eq!(chain[1].p_out, 8.14171093750001e-20, max_relative = 1e-9);
        assert_relative_eq!(f.output_error().unwrap(), chain[1].p_out);
    }

    #[test]
    fn shortfall_matches_direct_binomial_sum() {
        let f = headline();
        let got = f.shortfall_prob().unwrap();
        // independent route: sum the binomial tail term by term
        let r1: f64 = 15.0 * 1e-3;
        let binom = |n: u64, k: u64| -> f64 {
            let mut acc = 1.0;
            for i in 0..k {
                acc = acc * (n - i) as f64 / (i + 1) as f64;
            }
            acc
        };
        let tail: f64 = (2..=16)
            .map(|k| binom(16, k) * r1.powi(k as i32) * (1.0 - r1).powi(16 - k as i32))
            .sum();
        assert_relative_eq!(got, tail, max_relative = 1e-10);
        assert_relative_eq!(got, 0.023483589280251432, max_relative = 1e-12);
    }

    #[test]
    fn throughput_at_headline_assumptions() {
        let f = headline();
        // stride 2 * 97.5 = 195 rounds, derated by shortfall and level-2 rejects
        assert_relative_eq!(f.rounds_per_t().unwrap(), 199.6898213103698, max_relative = 1e-12);
        assert_relative_eq!(f.t_per_second().unwrap(), 5007.766512273755, max_relative = 1e-12);
    }

    #[test]
    fn throughput_never_beats_the_raw_stride() {
        // distances rise with p so each point is a sane operating regime
        for (p, d) in [(1e-4, 15), (1e-3, 15), (3e-3, 17), (6e-3, 41)] {
            let a = PhysicalAssumptions::new(p, 1e-6).unwrap();
            let f = FactoryModel::new(a, CodeDistance::new(d).unwrap()).unwrap();
            let stride = 2.0 * f.layer_rounds();
            let rpt = f.rounds_per_t().unwrap();
            assert!(rpt >= stride, "p={p} d={d}: {rpt} < {stride}");
            assert!(rpt < 2.0 * stride, "derating blew up at p={p} d={d}");
        }
    }

    #[test]
    fn footprint_cell_accounting() {
        let f = headline();
        assert_eq!(f.grid(), GridSpec { cols: 27, rows: 11 });
        assert_eq!(f.cells(), 297);
        // 297 cells * (2 * 15^2 - 1) qubits
        assert_eq!(f.physical_qubits(), 297 * 449);
        assert_eq!(f.physical_qubits(), 133_353);
    }

    #[test]
    fn injection_cluster_budget() {
        let c = InjectionCluster::default();
        assert_eq!(c.attempts(), 20);
        assert_eq!(c.cluster_rounds(), 15);
        // (1/2)^20 and its cube, both exact dyadics
        assert_eq!(c.failure_prob(0.5).unwrap(), 9.5367431640625e-7);
        assert_relative_eq!(
            c.loss_beyond_slack(0.5).unwrap(),
            8.673617379884035e-19,
            max_relative = 1e-15
        );
        let f = headline();
        assert_relative_eq!(
            f.injection_loss_per_output().unwrap(),
            240.0 * 8.673617379884035e-19,
            max_relative = 1e-15
        );
    }

    #[test]
    fn latency_examples() {
        let f = headline();
        // one herald wave + move + one layer
        assert_relative_eq!(f.level1_latency_rounds(), 115.5);
        assert_relative_eq!(f.output_latency_rounds(false).unwrap(), 340.5);
        assert_relative_eq!(
            f.output_latency_rounds(true).unwrap(),
            343.0450997766953,
            max_relative = 1e-12
        );
    }

    #[test]
    fn window_schedule_shape_at_15() {
        let f = headline();
        let s = f.window_schedule().unwrap();
        assert!(s.validate().is_empty());
        // two layers (98 + 97) + output S (15) + delivery move (15)
        assert_eq!(s.total_rounds(), 225);
        let count = |name: &str| s.ops.iter().filter(|o| o.kind.name() == name).count();
        // 8 lanes x 6 sites x 2 layers x 3 cycles x 5 waves
        assert_eq!(count("inject_t"), 1440);
        assert_eq!(count("expand"), 288);
        assert_eq!(count("multi_body_measure"), 17); // 16 lane-layers + level 2
        assert_eq!(count("gate_s"), 17); // 16 staging + 1 output
        assert_eq!(count("move"), 1);
        // hand count: lanes 8*24*195 + level2 24*195 + inject 1440*3
        //           + expand 288*15 + gate_s 17*15 + move 15*2
        assert_eq!(s.spacetime_volume(), 51_045);
        assert_eq!(s.patches.len(), 8 + 8 + 1 + 1 + 48);
    }

    #[test]
    fn window_schedule_every_s_correction_is_conditional() {
        let s = headline().window_schedule().unwrap();
        for op in &s.ops {
            if op.kind.name() == "gate_s" {
                assert!(op.condition.is_some());
            }
        }
    }

    #[test]
    fn window_schedule_valid_at_larger_distances() {
        let a = PhysicalAssumptions::new(1e-3, 1e-6).unwrap();
        for d in [17u32, 19, 25] {
            let f = FactoryModel::new(a, CodeDistance::new(d).unwrap()).unwrap();
            let s = f.window_schedule().unwrap();
            assert!(s.validate().is_empty(), "conflicts at d={d}");
            let two_layers = (2.0 * 6.5 * d as f64).round() as Rounds;
            assert_eq!(s.total_rounds(), two_layers + 15 + d);
        }
    }

    #[test]
    fn window_schedule_is_deterministic() {
        let a = headline().window_schedule().unwrap();
        let b = headline().window_schedule().unwrap();
        assert_eq!(a.to_records(), b.to_records());
    }

    #[test]
    fn rounds_per_t_grows_with_noise() {
        let d = CodeDistance::new(15).unwrap();
        let mut prev = 0.0f64;
        for p in [1e-4, 3e-4, 1e-3, 3e-3] {
            let a = PhysicalAssumptions::new(p, 1e-6).unwrap();
            let rpt = FactoryModel::new(a, d).unwrap().rounds_per_t().unwrap();
            assert!(rpt > prev);
            prev = rpt;
        }
    }
}
