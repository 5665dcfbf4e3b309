//! Numeric abstraction for coordinates.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point coordinate type accepted by the geometry layer.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Debug + Default + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + FromPrimitive + ToPrimitive + Debug + Default + Send + Sync + 'static {}
