//! Z-error response of the 15-to-1 magic-state distillation circuit.
//!
//! The circuit prepares a logical |T> on one output qubit while measuring
//! four weight-8 X stabilizers over 15 input qubits. Input qubit `i`
//! (1-based) participates in stabilizer `j` exactly when bit `j` of `i` is
//! set, so the syndrome of a Z-error pattern is simply the XOR of the binary
//! indices of the errored qubits — that identity is the independent oracle
//! the tests lean on. A pattern slips through undetected when the XOR is
//! zero; it corrupts the output when additionally its weight is odd.
//!
//! Two routes to the same numbers live here: exact enumeration over all
//! 2^15 patterns, and a seeded Monte-Carlo sampler whose batching is fixed
//! by trial index so results do not depend on the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DistillError {
    #[error("pattern {0:#x} has bits outside the {1}-qubit block")]
    PatternOutOfRange(u32, u32),
    #[error("sampling probability must be in [0, 1], got {0}")]
    BadProbability(f64),
}

/// An X-stabilizer/logical-support description of a distillation block.
///
/// Stabilizer supports and the logical support are bitmasks over the input
/// qubits (bit `i-1` for qubit `i`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistillationCode {
    pub qubits: u32,
    pub stabilizers: Vec<u32>,
    pub logical: u32,
}

/// How one Z-error pattern interacts with the checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternClass {
    pub syndrome: u32,
    pub detected: bool,
    /// Whether the output magic state picks up a logical Z.
    pub logical_flip: bool,
}

/// Counts for a fixed error weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightRow {
    pub weight: u32,
    pub patterns: u64,
    pub undetected: u64,
    pub undetected_flip: u64,
}

impl DistillationCode {
    /// The standard 15-qubit block.
    pub fn fifteen_to_one() -> Self {
        let stabilizers = (0..4)
            .map(|j| {
                (1..=15u32)
                    .filter(|i| (i >> j) & 1 == 1)
                    .fold(0u32, |m, i| m | 1 << (i - 1))
            })
            .collect();
        DistillationCode {
            qubits: 15,
            stabilizers,
            logical: (1 << 15) - 1,
        }
    }

    pub fn classify(&self, pattern: u32) -> Result<PatternClass, DistillError> {
        if pattern >= 1u32 << self.qubits {
            return Err(DistillError::PatternOutOfRange(pattern, self.qubits));
        }
        let mut syndrome = 0u32;
        for (j, stab) in self.stabilizers.iter().enumerate() {
            if (pattern & stab).count_ones() & 1 == 1 {
                syndrome |= 1 << j;
            }
        }
        Ok(PatternClass {
            syndrome,
            detected: syndrome != 0,
            logical_flip: (pattern & self.logical).count_ones() & 1 == 1,
        })
    }

    /// Full enumeration over all 2^qubits patterns, bucketed by weight.
    pub fn enumerate_undetected(&self) -> Vec<WeightRow> {
        let mut rows: Vec<WeightRow> = (0..=self.qubits)
            .map(|w| WeightRow {
                weight: w,
                patterns: 0,
                undetected: 0,
                undetected_flip: 0,
            })
            .collect();
        for pattern in 0..1u32 << self.qubits {
            let w = pattern.count_ones() as usize;
            rows[w].patterns += 1;
            let class = self.classify(pattern).expect("pattern in range");
            if !class.detected {
                rows[w].undetected += 1;
                if class.logical_flip {
                    rows[w].undetected_flip += 1;
                }
            }
        }
        rows
    }

    /// Smallest nonzero weight whose undetected patterns flip the output,
    /// with the pattern count at that weight — the `c` in `p_o ~ c p^w`.
    /// The standard block gives (3, 35).
    pub fn leading_error_coefficient(&self) -> Option<(u32, u64)> {
        self.enumerate_undetected()
            .iter()
            .skip(1)
            .find(|r| r.undetected_flip > 0)
            .map(|r| (r.weight, r.undetected_flip))
    }
}

/// Tallies from [`sample_distillation`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistillationStats {
    pub trials: u64,
    pub rejected: u64,
    pub accepted_ok: u64,
    pub accepted_bad: u64,
}

impl DistillationStats {
    pub fn reject_rate(&self) -> f64 {
        self.rejected as f64 / self.trials as f64
    }

    /// Undetected-error rate conditioned on acceptance.
    pub fn bad_rate(&self) -> f64 {
        self.accepted_bad as f64 / (self.accepted_ok + self.accepted_bad) as f64
    }

    fn add(self, other: Self) -> Self {
        DistillationStats {
            trials: self.trials + other.trials,
            rejected: self.rejected + other.rejected,
            accepted_ok: self.accepted_ok + other.accepted_ok,
            accepted_bad: self.accepted_bad + other.accepted_bad,
        }
    }
}

// Trials are carved into fixed-size blocks, one RNG stream per block, so the
// totals are a pure function of (p_in, trials, seed) no matter how rayon
// schedules them.
const TRIALS_PER_STREAM: u64 = 1 << 16;

/// Samples i.i.d. Z errors at rate `p_in` on the 15 inputs and classifies
/// each trial. Deterministic for a fixed seed.
pub fn sample_distillation(
    code: &DistillationCode,
    p_in: f64,
    trials: u64,
    seed: u64,
) -> Result<DistillationStats, DistillError> {
    if !(0.0..=1.0).contains(&p_in) {
        return Err(DistillError::BadProbability(p_in));
    }
    let streams = trials.div_ceil(TRIALS_PER_STREAM);
    let stats = (0..streams)
        .into_par_iter()
        .map(|stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let block = TRIALS_PER_STREAM.min(trials - stream * TRIALS_PER_STREAM);
            let mut acc = DistillationStats::default();
            for _ in 0..block {
                let mut pattern = 0u32;
                for q in 0..code.qubits {
                    if rng.random::<f64>() < p_in {
                        pattern |= 1 << q;
                    }
                }
                let class = code.classify(pattern).expect("pattern in range");
                acc.trials += 1;
                if class.detected {
                    acc.rejected += 1;
                } else if class.logical_flip {
                    acc.accepted_bad += 1;
                } else {
                    acc.accepted_ok += 1;
                }
            }
            acc
        })
        .reduce(DistillationStats::default, DistillationStats::add);
    Ok(stats)
}

/// Exact acceptance-conditioned bad rate from the enumeration table at
/// error rate `p` — the analytic curve the sampler must converge to.
pub fn exact_bad_rate(rows: &[WeightRow], p: f64) -> f64 {
    let n = rows.len() as i32 - 1;
    let mut accept = 0.0;
    let mut bad = 0.0;
    for row in rows {
        let weight_prob = p.powi(row.weight as i32) * (1.0 - p).powi(n - row.weight as i32);
        accept += row.undetected as f64 * weight_prob;
        bad += row.undetected_flip as f64 * weight_prob;
    }
    bad / accept
}
