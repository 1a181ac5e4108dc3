//! Closed-form error-rate laws.
//!
//! Everything here is a small algebraic fit, kept separate from the
//! combinatorial machinery in [`crate::distill`] so the two can be checked
//! against each other.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::CodeDistance;
use crate::num::Real;

#[derive(Debug, Error, PartialEq)]
pub enum RateError {
    #[error("logical error fit requires 100p < 1, got p = {0}")]
    FitOutOfRange(f64),
    #[error("probability must be nonnegative, got {0}")]
    NegativeProbability(f64),
    #[error("cubic distillation law is only trusted for p_in <= 0.1, got {0}")]
    DistillInputTooNoisy(f64),
    #[error("cascade supports 1 or 2 levels, got {0}")]
    UnsupportedLevels(u8),
    #[error("cascade needs one circuit-error term per level ({levels}), got {given}")]
    CircuitTermMismatch { levels: u8, given: usize },
}

/// Per-round logical error rate of a distance-`d` patch:
/// `0.1 * (100 p)^((d+1)/2)`.
///
/// Computed by repeated multiplication so that
/// `logical_error_per_round(p, d + 2) == logical_error_per_round(p, d) * 100p`
/// holds bit-exactly.
pub fn logical_error_per_round<F: Real>(p: F, d: CodeDistance) -> Result<F, RateError> {
    if p < F::zero() {
        return Err(RateError::NegativeProbability(p.as_f64()));
    }
    let hundred_p = F::of(100.0) * p;
    if hundred_p >= F::one() {
        return Err(RateError::FitOutOfRange(p.as_f64()));
    }
    let mut acc = F::of(0.1);
    for _ in 0..(d.get() + 1) / 2 {
        acc = acc * hundred_p;
    }
    Ok(acc)
}

/// Output error of one 15-to-1 distillation round: `35 p_in^3`.
pub fn distill_output_error<F: Real>(p_in: F) -> Result<F, RateError> {
    check_distill_input(p_in)?;
    Ok(F::of(35.0) * p_in * p_in * p_in)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectModel {
    /// `15 p_in`; what provisioning calculations use.
    FirstOrder,
    /// `1 - (1 - p_in)^15` for independent input errors.
    ExactIid,
}

/// Probability a 15-to-1 round detects an error and discards its output.
pub fn distill_reject_prob<F: Real>(p_in: F, model: RejectModel) -> Result<F, RateError> {
    check_distill_input(p_in)?;
    Ok(match model {
        RejectModel::FirstOrder => F::of(15.0) * p_in,
        RejectModel::ExactIid => F::one() - (F::one() - p_in).powi(15),
    })
}

fn check_distill_input<F: Real>(p_in: F) -> Result<(), RateError> {
    if p_in < F::zero() {
        return Err(RateError::NegativeProbability(p_in.as_f64()));
    }
    if p_in > F::of(0.1) {
        return Err(RateError::DistillInputTooNoisy(p_in.as_f64()));
    }
    Ok(())
}

/// Error book-keeping for one distillation level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeLevel<F> {
    pub p_in: F,
    pub p_out: F,
    /// First-order rejection probability, the provisioning quantity.
    pub p_reject: F,
}

/// Chains one or two 15-to-1 levels. Level k sees
/// `p_in(k) = p_out(k-1) + circuit[k-1]`, with `p_out(0) = p_base`;
/// `circuit` carries the lattice-surgery error accumulated while that level's
/// inputs sit in the structure (pass zeros for the bare cascade).
pub fn cascade<F: Real>(levels: u8, p_base: F, circuit: &[F]) -> Result<Vec<CascadeLevel<F>>, RateError> {
    if !(1..=2).contains(&levels) {
        return Err(RateError::UnsupportedLevels(levels));
    }
    if circuit.len() != levels as usize {
        return Err(RateError::CircuitTermMismatch {
            levels,
            given: circuit.len(),
        });
    }
    let mut out = Vec::with_capacity(levels as usize);
    let mut carry = p_base;
    for &c in circuit {
        if c < F::zero() {
            return Err(RateError::NegativeProbability(c.as_f64()));
        }
        let p_in = carry + c;
        let level = CascadeLevel {
            p_in,
            p_out: distill_output_error(p_in)?,
            p_reject: distill_reject_prob(p_in, RejectModel::FirstOrder)?,
        };
        out.push(level);
        carry = level.p_out;
    }
    Ok(out)
}

/// Probability that every attempt in an injection cluster fails:
/// `(1 - q)^attempts`.
pub fn injection_cluster_failure<F: Real>(attempts: u32, q_inject: F) -> Result<F, RateError> {
    if !(q_inject >= F::zero() && q_inject <= F::one()) {
        return Err(RateError::NegativeProbability(q_inject.as_f64()));
    }
    Ok((F::one() - q_inject).powi(attempts as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(n: u32) -> CodeDistance {
        CodeDistance::new(n).unwrap()
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(a.abs())
    }

    #[test]
    fn logical_rate_examples() {
        assert!(rel_close(
            logical_error_per_round(1e-3, d(7)).unwrap(),
            1e-5,
            1e-12
        ));
        assert!(rel_close(
            logical_error_per_round(1e-3, d(11)).unwrap(),
            1e-7,
            1e-12
        ));
        // 100p = 1 is outside the fit; just below it the rate approaches 0.1
        assert_eq!(
            logical_error_per_round(0.01, d(3)),
            Err(RateError::FitOutOfRange(0.01))
        );
        let near = logical_error_per_round(0.01 * (1.0 - 1e-9), d(3)).unwrap();
        assert!(near < 0.1 && near > 0.1 * (1.0 - 1e-8));
    }

    #[test]
    fn distill_examples() {
        assert!(rel_close(distill_output_error(1e-3).unwrap(), 3.5e-8, 1e-12));
        assert!(rel_close(distill_output_error(1e-2).unwrap(), 3.5e-5, 1e-12));
        assert!(distill_output_error(0.2).is_err());
        assert!(rel_close(
            distill_reject_prob(1e-2, RejectModel::FirstOrder).unwrap(),
            0.15,
            1e-12
        ));
        let exact = distill_reject_prob(1e-2, RejectModel::ExactIid).unwrap();
        assert!(rel_close(exact, 0.13994164535871156, 1e-12));
    }

    #[test]
    fn cascade_examples() {
        let one = cascade(1, 1e-3, &[0.0]).unwrap();
        assert!(rel_close(one[0].p_out, 3.5e-8, 1e-12));

        let two = cascade(2, 1e-3, &[0.0, 0.0]).unwrap();
        assert!(rel_close(two[1].p_out, 1.500625e-21, 1e-12));

        assert_eq!(cascade(3, 1e-3, &[0.0; 3]), Err(RateError::UnsupportedLevels(3)));
        assert!(matches!(
            cascade(2, 1e-3, &[0.0]),
            Err(RateError::CircuitTermMismatch { .. })
        ));

        // circuit error feeds the next level's input
        let noisy = cascade(2, 1e-3, &[1e-4, 2e-5]).unwrap();
        assert!(rel_close(noisy[0].p_in, 1.1e-3, 1e-12));
        assert!(rel_close(noisy[1].p_in, noisy[0].p_out + 2e-5, 1e-12));
    }

    #[test]
    fn injection_cluster_examples() {
        // 20 attempts at q = 1/2: exactly 2^-20
        assert_eq!(
            injection_cluster_failure(20, 0.5).unwrap(),
            9.5367431640625e-7
        );
        let f = injection_cluster_failure(20, 0.5).unwrap();
        assert!(f > 1e-7 && f < 1e-5); // "order 1e-6"
        assert_eq!(injection_cluster_failure(0, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn recurrence_is_bit_exact() {
        for p in [1e-4, 3.3e-4, 1e-3, 7e-3, 9.9e-3] {
            for dd in (3..=29).step_by(2) {
                let lo = logical_error_per_round(p, d(dd)).unwrap();
                let hi = logical_error_per_round(p, d(dd + 2)).unwrap();
                assert_eq!(hi, lo * (100.0 * p));
            }
        }
    }

    #[test]
    fn f32_instantiation() {
        let r = logical_error_per_round(1e-3f32, d(7)).unwrap();
        assert!((r - 1e-5f32).abs() < 1e-9);
    }

    proptest! {
        #[test]
        // cap at 1e-2/1.5 so the p*1.5 probe below stays in the fit domain
        fn logical_rate_monotone(p in 1e-6f64..6.6e-3, step in 1u32..5) {
            let d1 = d(3 + 2 * step);
            let d2 = d(3 + 2 * step + 2);
            let r1 = logical_error_per_round(p, d1).unwrap();
            let r2 = logical_error_per_round(p, d2).unwrap();
            prop_assert!(r2 < r1);
            let worse = logical_error_per_round(p * 1.5, d1).unwrap();
            prop_assert!(worse > r1);
        }

        #[test]
        fn reject_models_agree_to_first_order(p in 1e-9f64..=1e-2) {
            let fo = distill_reject_prob(p, RejectModel::FirstOrder).unwrap();
            let exact = distill_reject_prob(p, RejectModel::ExactIid).unwrap();
            prop_assert!(fo >= exact);
            prop_assert!((fo - exact) / exact <= 0.075);
        }

        #[test]
        fn distill_output_below_input_when_useful(p in 1e-6f64..=0.1) {
            let out = distill_output_error(p).unwrap();
            if p < 0.16 { // 35p^3 < p iff p < sqrt(1/35)
                prop_assert!(out < p);
            }
        }
    }
}
