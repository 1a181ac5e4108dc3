//! Code distances, patch footprints, and physical-machine assumptions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Real;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("code distance must be an odd integer >= 3, got {0}")]
    InvalidDistance(u32),
    #[error("defect footprint requires d >= 3, got {0}")]
    DefectDistanceTooSmall(u32),
    #[error("{name} must be in {range}, got {value}")]
    OutOfRange {
        name: &'static str,
        range: &'static str,
        value: f64,
    },
}

/// Surface-code distance. Rotated patches need `d` odd and at least 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CodeDistance(u32);

impl CodeDistance {
    pub fn new(d: u32) -> Result<Self, ModelError> {
        if d < 3 || d % 2 == 0 {
            return Err(ModelError::InvalidDistance(d));
        }
        Ok(CodeDistance(d))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Next valid (odd) distance up.
    pub fn next_up(self) -> CodeDistance {
        CodeDistance(self.0 + 2)
    }
}

impl std::fmt::Display for CodeDistance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Physical-qubit cost of one rotated patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchFootprint {
    pub data: u64,
    pub measure: u64,
    /// Leading-order per-logical-qubit cost once routing space is included.
    pub total_with_routing: u64,
}

/// d^2 data qubits, d^2-1 measurement qubits, 3d^2 with routing share.
pub fn patch_footprint(d: CodeDistance) -> PatchFootprint {
    let d = d.get() as u64;
    PatchFootprint {
        data: d * d,
        measure: d * d - 1,
        total_with_routing: 3 * d * d,
    }
}

/// Physical qubits per logical qubit for the double-defect encoding this
/// layout replaces: ceil(12.5 d^2). Defect distances are not constrained to
/// odd values, so any d >= 3 is accepted.
pub fn defect_footprint(d: u32) -> Result<u64, ModelError> {
    if d < 3 {
        return Err(ModelError::DefectDistanceTooSmall(d));
    }
    let d = d as u64;
    // 12.5 d^2 = 25 d^2 / 2, exact in integers
    Ok((25 * d * d).div_ceil(2))
}

/// Machine-level error and timing assumptions.
///
/// `p` is the per-operation physical error rate (the formulas below are fits
/// valid only for 100p < 1), `t_round_seconds` the duration of one error
/// detection round, `p_inject` the error on a heralded injected state, and
/// `q_inject` the herald acceptance probability of a single injection attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalAssumptions<F> {
    pub p: F,
    pub t_round_seconds: F,
    pub p_inject: F,
    pub q_inject: F,
}

impl<F: Real> PhysicalAssumptions<F> {
    /// Defaults `p_inject = p` and `q_inject = 1/2`.
    pub fn new(p: F, t_round_seconds: F) -> Result<Self, ModelError> {
        Self::with_injection(p, t_round_seconds, p, F::of(0.5))
    }

    pub fn with_injection(
        p: F,
        t_round_seconds: F,
        p_inject: F,
        q_inject: F,
    ) -> Result<Self, ModelError> {
        if !(p > F::zero() && p < F::of(0.01)) {
            return Err(ModelError::OutOfRange {
                name: "p",
                range: "(0, 0.01)",
                value: p.as_f64(),
            });
        }
        if !(t_round_seconds > F::zero()) {
            return Err(ModelError::OutOfRange {
                name: "t_round_seconds",
                range: "(0, inf)",
                value: t_round_seconds.as_f64(),
            });
        }
        if !(p_inject >= F::zero() && p_inject < F::one()) {
            return Err(ModelError::OutOfRange {
                name: "p_inject",
                range: "[0, 1)",
                value: p_inject.as_f64(),
            });
        }
        if !(q_inject > F::zero() && q_inject <= F::one()) {
            return Err(ModelError::OutOfRange {
                name: "q_inject",
                range: "(0, 1]",
                value: q_inject.as_f64(),
            });
        }
        Ok(PhysicalAssumptions {
            p,
            t_round_seconds,
            p_inject,
            q_inject,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_validation() {
        assert!(CodeDistance::new(3).is_ok());
        assert!(CodeDistance::new(15).is_ok());
        assert_eq!(CodeDistance::new(4), Err(ModelError::InvalidDistance(4)));
        assert_eq!(CodeDistance::new(1), Err(ModelError::InvalidDistance(1)));
        assert_eq!(CodeDistance::new(0), Err(ModelError::InvalidDistance(0)));
    }

    #[test]
    fn footprints_at_15() {
        let f = patch_footprint(CodeDistance::new(15).unwrap());
        assert_eq!(f.data, 225);
        assert_eq!(f.measure, 224);
        assert_eq!(f.total_with_routing, 675);
    }

    #[test]
    fn defect_footprints() {
        assert_eq!(defect_footprint(15).unwrap(), 2813); // ceil(2812.5)
        assert_eq!(defect_footprint(31).unwrap(), 12013);
        assert_eq!(defect_footprint(4).unwrap(), 200); // even distances allowed here
        assert!(defect_footprint(2).is_err());
    }

    #[test]
    fn footprints_strictly_increase() {
        let mut prev = patch_footprint(CodeDistance::new(3).unwrap());
        let mut prev_defect = defect_footprint(3).unwrap();
        for d in (5..=99).step_by(2) {
            let f = patch_footprint(CodeDistance::new(d).unwrap());
            assert!(f.data > prev.data && f.measure > prev.measure);
            assert!(f.total_with_routing > prev.total_with_routing);
            prev = f;
        }
        for d in 4..=99 {
            let def = defect_footprint(d).unwrap();
            assert!(def > prev_defect);
            prev_defect = def;
        }
    }

    #[test]
    fn routing_ratio_approaches_024() {
        // 3d^2 / ceil(12.5 d^2) -> 0.24, i.e. better than 4x over defects
        let d = CodeDistance::new(101).unwrap();
        let ratio = patch_footprint(d).total_with_routing as f64
            / defect_footprint(d.get()).unwrap() as f64;
        assert!((ratio - 0.24).abs() < 1e-4);
        assert!(1.0 / ratio > 4.0);
    }

    #[test]
    fn assumptions_validation() {
        assert!(PhysicalAssumptions::new(1e-3, 1e-6).is_ok());
        assert!(PhysicalAssumptions::new(0.01, 1e-6).is_err()); // boundary excluded
        assert!(PhysicalAssumptions::new(0.0, 1e-6).is_err());
        assert!(PhysicalAssumptions::new(1e-3, 0.0).is_err());
        let a = PhysicalAssumptions::new(1e-3, 1e-6).unwrap();
        assert_eq!(a.p_inject, 1e-3);
        assert_eq!(a.q_inject, 0.5);
    }

    #[test]
    fn assumptions_f32_smoke() {
        let a = PhysicalAssumptions::<f32>::new(1e-3, 1e-6).unwrap();
        assert_eq!(a.q_inject, 0.5f32);
    }
}
