use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar type the numeric audits are generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to a float")
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to a float")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
