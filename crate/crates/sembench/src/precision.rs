//! Floating-point precision as a benchmark axis.
//!
//! Kernels are generic over [`Scalar`] so the same source compiles to an
//! FP32 and an FP64 pipeline. Reference quantities (basis tables, metric
//! terms, initial conditions) are always computed in `f64` and down-cast
//! once, outside any timed region.

use std::fmt;
use std::ops::AddAssign;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

/// Runtime tag for the two supported floating-point widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Fp32,
    Fp64,
}

impl Precision {
    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Fp32 => "fp32",
            Precision::Fp64 => "fp64",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fp32" => Ok(Precision::Fp32),
            "fp64" => Ok(Precision::Fp64),
            other => Err(format!("unknown precision {other:?} (expected fp32 or fp64)")),
        }
    }
}

/// Atomic cell capable of relaxed floating-point accumulation, used by the
/// atomic scatter mode. Implemented by bit-casting through the same-width
/// atomic integer.
pub trait AtomicCell: Sync {
    type Value;
    fn fetch_add_value(&self, v: Self::Value);
    fn load_value(&self) -> Self::Value;
}

impl AtomicCell for AtomicU64 {
    type Value = f64;
    #[inline]
    fn fetch_add_value(&self, v: f64) {
        let mut cur = self.load(Ordering::Relaxed);
        loop {
            let next = f64::from_bits(cur) + v;
            match self.compare_exchange_weak(
                cur,
                next.to_bits(),
                Ordering::Relaxed,
                Ordering::Relaxed,
            ) {
                Ok(_) => return,
                Err(actual) => cur = actual,
            }
        }
    }
    #[inline]
    fn load_value(&self) -> f64 {
        f64::from_bits(self.load(Ordering::Relaxed))
    }
}

impl AtomicCell for AtomicU32 {
    type Value = f32;
    #[inline]
    fn fetch_add_value(&self, v: f32) {
        let mut cur = self.load(Ordering::Relaxed);
        loop {
            let next = f32::from_bits(cur) + v;
            match self.compare_exchange_weak(
                cur,
                next.to_bits(),
                Ordering::Relaxed,
                Ordering::Relaxed,
            ) {
                Ok(_) => return,
                Err(actual) => cur = actual,
            }
        }
    }
    #[inline]
    fn load_value(&self) -> f32 {
        f32::from_bits(self.load(Ordering::Relaxed))
    }
}

/// Floating-point scalar usable inside the kernels.
///
/// The bound set is deliberately small: arithmetic, comparison, and
/// conversions to and from `f64`. Kernels never rely on transcendental
/// functions, so everything trigonometric stays on the `f64` setup path.
pub trait Scalar:
    num_traits::Float + AddAssign + Send + Sync + fmt::Debug + fmt::Display + Default + 'static
{
    /// Runtime tag matching this type.
    const PRECISION: Precision;

    /// Machine epsilon.
    const EPS: Self;

    /// Atomic cell with identical size and alignment, for bit-cast views.
    type Atomic: AtomicCell<Value = Self>;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;

    /// Reinterpret a mutable scalar slice as a slice of atomic cells.
    ///
    /// Sound because the atomic integer types are `repr(transparent)` over
    /// their integer, which shares size and alignment with the float, and
    /// the `&mut` receiver guarantees the caller holds the only reference.
    fn as_atomic(slice: &mut [Self]) -> &[Self::Atomic] {
        unsafe { &*(slice as *mut [Self] as *const [Self::Atomic]) }
    }
}

impl Scalar for f64 {
    const PRECISION: Precision = Precision::Fp64;
    const EPS: f64 = f64::EPSILON;
    type Atomic = AtomicU64;
    #[inline]
    fn from_f64(x: f64) -> f64 {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    const PRECISION: Precision = Precision::Fp32;
    const EPS: f32 = f32::EPSILON;
    type Atomic = AtomicU32;
    #[inline]
    fn from_f64(x: f64) -> f32 {
        x as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

/// Cast an `f64` slice down to the kernel scalar type.
pub fn cast_slice<S: Scalar>(src: &[f64]) -> Vec<S> {
    src.iter().map(|&x| S::from_f64(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_add_roundtrip() {
        let mut data = vec![1.0f64, 2.0, 3.0];
        {
            let cells = f64::as_atomic(&mut data);
            cells[1].fetch_add_value(0.5);
            assert_eq!(cells[1].load_value(), 2.5);
        }
        assert_eq!(data, vec![1.0, 2.5, 3.0]);
    }

    #[test]
    fn atomic_add_f32_concurrent_sums_all_contributions() {
        let mut data = vec![0.0f32; 4];
        {
            let cells = f32::as_atomic(&mut data);
            std::thread::scope(|s| {
                for _ in 0..8 {
                    s.spawn(|| {
                        for _ in 0..1000 {
                            cells[2].fetch_add_value(1.0);
                        }
                    });
                }
            });
        }
        assert_eq!(data[2], 8000.0);
    }

    #[test]
    fn precision_tags() {
        assert_eq!(f32::PRECISION.to_string(), "fp32");
        assert_eq!(f64::PRECISION.to_string(), "fp64");
        assert_eq!("fp64".parse::<Precision>().unwrap(), Precision::Fp64);
        assert!("fp16".parse::<Precision>().is_err());
    }

    #[test]
    fn cast_preserves_f64_and_rounds_f32() {
        let src = vec![1.0, std::f64::consts::PI];
        let as64: Vec<f64> = cast_slice(&src);
        assert_eq!(as64, src);
        let as32: Vec<f32> = cast_slice(&src);
        assert_eq!(as32[1], std::f64::consts::PI as f32);
    }
}
