use std::ops::{AddAssign, MulAssign};

use num_traits::Float;

/// Floating-point type the kernels are instantiated for (`f32` or `f64`).
pub(crate) trait Real: Float + AddAssign + MulAssign + Send + Sync + Default + 'static {
    fn cast(v: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Real for f64 {
    #[inline]
    fn cast(v: f64) -> Self {
        v
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn cast(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

pub(crate) fn convert<T: Real>(values: &[f64]) -> Vec<T> {
    values.iter().map(|&v| T::cast(v)).collect()
}

pub(crate) fn widen<T: Real>(values: &[T]) -> Vec<f64> {
    values.iter().map(|v| v.as_f64()).collect()
}
