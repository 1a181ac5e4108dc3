//! Replay scheduled gadgets as wire-level circuits and compare them against
//! their target operations, branch by measurement branch.
//!
//! A [`Fragment`](crate::surgery::Fragment) is lowered to a [`TraceEvent`]
//! list: merges become joint Pauli-product measurements, split signs become
//! fair coins paired with the frame update that repairs them, and moves,
//! expands, contracts and rotations are identity on the encoded qubit (the
//! wire follows the patch, not the cell). Replay enumerates every outcome
//! branch with its probability, applies the gadget's deferred frame
//! corrections, and only then compares states — so a sign error in the
//! correction algebra shows up as a mismatch in some branch.
//!
//! Clifford gadgets are checked exactly on a stabilizer [`tableau`] via their
//! Choi state (Bell pair per data wire); the non-Clifford T gadget runs on a
//! [`dense`] state vector.

pub mod dense;
pub mod gadgets;
pub mod tableau;

pub use gadgets::{
    verify_cnot, verify_cz, verify_hadamard, verify_multibody, verify_swap, verify_t_gadget,
    GadgetCheck,
};
pub use tableau::{PauliOp, Tableau};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::surgery::{
    Basis, BitId, Condition, FrameUpdate, Fragment, OpKind, PatchId, Pauli, Schedule,
};

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("gadget contains a non-Clifford op; use the dense checker")]
    NonClifford,
    #[error("op kind `{0}` has no trace semantics")]
    UnsupportedOp(&'static str),
    #[error("condition bit b{} unresolved when consumed", (.0).0)]
    UnresolvedBit(BitId),
    #[error("split coin b{} has no matching frame update", (.0).0)]
    OrphanCoin(BitId),
    #[error("patch {0} not mapped to a wire")]
    UnmappedPatch(PatchId),
    #[error("branch probabilities sum to {0}, expected 1")]
    ProbabilityLeak(f64),
    #[error("stabilizer mismatch in branch [{0}]")]
    StabilizerMismatch(String),
    #[error("branch [{bits}]: deviation {deviation:.3e} exceeds tolerance")]
    BranchMismatch { bits: String, deviation: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    H,
    S,
    Sdg,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    /// Put a fresh wire in |0> or |+>; only valid before the wire is touched.
    Init { wire: usize, basis: Basis },
    /// Joint +1/-1 measurement of a Pauli product; outcome bit 0 means the
    /// +1 eigenspace.
    MeasurePauli {
        paulis: Vec<(usize, Pauli)>,
        bit: BitId,
    },
    Gate {
        gate: Gate,
        wire: usize,
        condition: Option<Condition>,
    },
    /// A split/move sign: a fair coin; on 1 the Pauli hits the wire. The
    /// paired frame update cancels it once outcomes are known.
    Coin {
        wire: usize,
        pauli: Pauli,
        bit: BitId,
    },
}

fn basis_pauli(b: Basis) -> Pauli {
    match b {
        Basis::X => Pauli::X,
        Basis::Z => Pauli::Z,
    }
}

/// Lower a fragment's ops to trace events. `wire_of` must cover every patch
/// the fragment touches.
pub fn trace_from_fragment(
    sched: &Schedule,
    frag: &Fragment,
    wire_of: &BTreeMap<PatchId, usize>,
) -> Result<Vec<TraceEvent>, VerifyError> {
    let wire = |p: PatchId| wire_of.get(&p).copied().ok_or(VerifyError::UnmappedPatch(p));
    let mut trace = Vec::new();
    for op in &sched.ops[frag.op_range.0..frag.op_range.1] {
        match &op.kind {
            OpKind::InitZ | OpKind::InitX => trace.push(TraceEvent::Init {
                wire: wire(op.operands[0])?,
                basis: if matches!(op.kind, OpKind::InitX) {
                    Basis::X
                } else {
                    Basis::Z
                },
            }),
            OpKind::MeasureZ | OpKind::MeasureX => {
                let pauli = if matches!(op.kind, OpKind::MeasureX) {
                    Pauli::X
                } else {
                    Pauli::Z
                };
                trace.push(TraceEvent::MeasurePauli {
                    paulis: vec![(wire(op.operands[0])?, pauli)],
                    bit: op.byproducts[0],
                });
            }
            OpKind::MergeMeasure | OpKind::MultiBodyMeasure => {
                let mut paulis = Vec::new();
                for (p, b) in op.operands.iter().zip(&op.bases) {
                    paulis.push((wire(*p)?, basis_pauli(*b)));
                }
                trace.push(TraceEvent::MeasurePauli {
                    paulis,
                    bit: op.byproducts[0],
                });
            }
            OpKind::Split | OpKind::Contract | OpKind::Move { .. } => {
                // identity on the encoded state apart from the sign coins;
                // each coin's Pauli comes from its paired frame update
                for coin in &op.byproducts {
                    let update = frag
                        .updates
                        .iter()
                        .find(|u| u.bits.as_slice() == [*coin])
                        .ok_or(VerifyError::OrphanCoin(*coin))?;
                    trace.push(TraceEvent::Coin {
                        wire: wire(update.patch)?,
                        pauli: update.pauli,
                        bit: *coin,
                    });
                }
            }
            OpKind::GateS { adjoint } => trace.push(TraceEvent::Gate {
                gate: if *adjoint { Gate::Sdg } else { Gate::S },
                wire: wire(op.operands[0])?,
                condition: op.condition,
            }),
            OpKind::Hadamard => trace.push(TraceEvent::Gate {
                gate: Gate::H,
                wire: wire(op.operands[0])?,
                condition: op.condition,
            }),
            // spatial reshaping only; the encoded state is untouched
            OpKind::Expand { .. } | OpKind::Rotate90 => {}
            OpKind::InjectT => return Err(VerifyError::UnsupportedOp("inject_t")),
        }
    }
    Ok(trace)
}

/// Simulator back-end for branch replay.
pub trait Replay: Clone {
    fn init_wire(&mut self, wire: usize, basis: Basis);
    fn gate(&mut self, gate: Gate, wire: usize) -> Result<(), VerifyError>;
    fn pauli(&mut self, wire: usize, pauli: Pauli);
    /// Project onto the `want` outcome of the +1/-1 Pauli-product
    /// measurement and return its probability.
    fn measure(&mut self, paulis: &[(usize, Pauli)], want: bool) -> f64;
}

#[derive(Debug, Clone)]
pub struct Branch<S> {
    pub state: S,
    pub prob: f64,
    pub outcomes: BTreeMap<BitId, bool>,
}

impl<S> Branch<S> {
    pub fn label(&self) -> String {
        self.outcomes
            .iter()
            .map(|(b, v)| format!("b{}={}", b.0, u8::from(*v)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

const MIN_BRANCH_PROB: f64 = 1e-14;

/// Enumerate all measurement/coin branches of a trace.
pub fn replay<S: Replay>(initial: S, trace: &[TraceEvent]) -> Result<Vec<Branch<S>>, VerifyError> {
    let mut branches = vec![Branch {
        state: initial,
        prob: 1.0,
        outcomes: BTreeMap::new(),
    }];
    for event in trace {
        match event {
            TraceEvent::Init { wire, basis } => {
                for b in &mut branches {
                    b.state.init_wire(*wire, *basis);
                }
            }
            TraceEvent::Gate {
                gate,
                wire,
                condition,
            } => {
                for b in &mut branches {
                    let fire = match condition {
                        None => true,
                        Some(c) => {
                            *b.outcomes
                                .get(&c.bit)
                                .ok_or(VerifyError::UnresolvedBit(c.bit))?
                                == c.trigger
                        }
                    };
                    if fire {
                        b.state.gate(*gate, *wire)?;
                    }
                }
            }
            TraceEvent::Coin { wire, pauli, bit } => {
                let mut next = Vec::with_capacity(branches.len() * 2);
                for b in branches {
                    let mut heads = b.clone();
                    heads.prob *= 0.5;
                    heads.outcomes.insert(*bit, false);
                    next.push(heads);
                    let mut tails = b;
                    tails.prob *= 0.5;
                    tails.state.pauli(*wire, *pauli);
                    tails.outcomes.insert(*bit, true);
                    next.push(tails);
                }
                branches = next;
            }
            TraceEvent::MeasurePauli { paulis, bit } => {
                let mut next = Vec::with_capacity(branches.len() * 2);
                for b in branches {
                    for want in [false, true] {
                        let mut s = b.state.clone();
                        let p = s.measure(paulis, want);
                        if b.prob * p < MIN_BRANCH_PROB {
                            continue;
                        }
                        let mut outcomes = b.outcomes.clone();
                        outcomes.insert(*bit, want);
                        next.push(Branch {
                            state: s,
                            prob: b.prob * p,
                            outcomes,
                        });
                    }
                }
                branches = next;
            }
        }
    }
    Ok(branches)
}

/// Fold a gadget's deferred corrections into a branch state.
pub fn apply_frame<S: Replay>(
    state: &mut S,
    updates: &[FrameUpdate],
    wire_of: &BTreeMap<PatchId, usize>,
    outcomes: &BTreeMap<BitId, bool>,
) -> Result<(), VerifyError> {
    for update in updates {
        let mut parity = false;
        for bit in &update.bits {
            parity ^= *outcomes.get(bit).ok_or(VerifyError::UnresolvedBit(*bit))?;
        }
        if parity {
            let wire = wire_of
                .get(&update.patch)
                .copied()
                .ok_or(VerifyError::UnmappedPatch(update.patch))?;
            state.pauli(wire, update.pauli);
        }
    }
    Ok(())
}
