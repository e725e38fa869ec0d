//! Scalar abstraction for the numeric kernels.
//!
//! Everything that touches embeddings is generic over [`Real`], so the same
//! code runs in `f32` and `f64`. Shortest-path counting in the centrality code
//! only needs field arithmetic and ordering, which the looser [`Accum`] bound
//! captures; exact rational types satisfy it too, which is how the test suite
//! checks betweenness with zero tolerance.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used for embeddings, losses and gradients.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant or random draw into this scalar type.
    ///
    /// Random numbers are always drawn in `f64` and then converted, so a run
    /// visits the same underlying draws regardless of the scalar type.
    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).expect("every finite f64 maps into a Real type")
    }

    /// Widens to `f64` for reporting and serialization.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("every Real value maps into f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Scalar usable as a shortest-path accumulator: ring arithmetic with
/// division, an order, and conversion from small integers.
pub trait Accum: Clone + PartialOrd + NumAssign + FromPrimitive {}

impl<T> Accum for T where T: Clone + PartialOrd + NumAssign + FromPrimitive {}

/// Dot product of two equally sized slices.
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Euclidean norm of a slice.
pub fn l2_norm<T: Real>(v: &[T]) -> T {
    dot(v, v).sqrt()
}
