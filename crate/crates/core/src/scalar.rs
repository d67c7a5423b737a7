//! Scalar abstraction: every geometric routine in this crate is generic over
//! a real scalar so the same code runs in f32 or f64.

use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable by all geometry and solver code: f32 or f64.
pub trait Real: nalgebra::RealField + Copy + FromPrimitive + ToPrimitive {
    /// Lossless-enough conversion from an f64 literal.
    fn c(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant must convert to scalar")
    }

    /// Widen to f64 for reporting and error messages.
    fn to_double(self) -> f64 {
        self.to_f64().expect("scalar must widen to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
