//! Scalar abstraction for the closed-form layers.

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the rate formulas and estimator are generic over.
///
/// `f64` is what the CLI uses; `f32` works for the formulas but loses the
/// headroom needed below ~1e-38 (deep distillation cascades underflow there).
pub trait Real: Float + FromPrimitive + ToPrimitive + std::fmt::Debug + Send + Sync + 'static {
    /// Lossless-enough conversion for constants written as `f64` literals.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
