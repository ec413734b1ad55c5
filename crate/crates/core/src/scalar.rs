//! Floating-point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar the solver and simulator are generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform draw on the open interval (0, 1).
    fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Default absolute tolerance for quadrature and root residuals.
    ///
    /// `1e-10` for `f64`; scaled up from machine epsilon for narrower types.
    fn default_tolerance() -> Self {
        Self::lit(1e-10).max(Self::epsilon() * Self::lit(500.0))
    }
}

impl Scalar for f32 {
    #[inline]
    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Open01.sample(rng)
    }
}

impl Scalar for f64 {
    #[inline]
    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Open01.sample(rng)
    }
}

/// A nonnegative quantity that may be `+∞`.
///
/// Used for the infinitesimal-order setup rate and for average costs that
/// diverge (a base-stock policy when small orders carry a fixed fee).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum Extended<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Extended<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }

    /// `self · c + offset` for `c ≥ 0`, with `∞ · 0 = 0`.
    pub fn scale_add(self, c: T, offset: T) -> Self {
        match self {
            Extended::Finite(v) => Extended::Finite(v * c + offset),
            Extended::Infinite if c == T::zero() => Extended::Finite(offset),
            Extended::Infinite => Extended::Infinite,
        }
    }

    /// Lossy view as a float, mapping `Infinite` to `+∞`. For output only.
    pub fn to_float(self) -> T {
        self.finite().unwrap_or_else(T::infinity)
    }
}

impl<T: Serialize> Serialize for Extended<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(v) => v.serialize(serializer),
            Extended::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de, T: serde::Deserialize<'de>> serde::Deserialize<'de> for Extended<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Repr<T> {
            Num(T),
            Str(String),
        }
        match Repr::<T>::deserialize(deserializer)? {
            Repr::Num(v) => Ok(Extended::Finite(v)),
            Repr::Str(s) if s == "inf" => Ok(Extended::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_times_zero_is_zero() {
        let inf = Extended::<f64>::Infinite;
        assert_eq!(inf.scale_add(0.0, 3.0), Extended::Finite(3.0));
        assert!(inf.scale_add(2.0, 3.0).is_infinite());
        assert_eq!(Extended::Finite(2.0).scale_add(2.0, 1.0), Extended::Finite(5.0));
    }

    #[test]
    fn ordering_puts_infinity_last() {
        assert!(Extended::Finite(1e300_f64) < Extended::Infinite);
        assert!(Extended::Finite(1.0_f64) < Extended::Finite(2.0));
    }

    #[test]
    fn serde_round_trip() {
        let v: Vec<Extended<f64>> = vec![Extended::Finite(1.5), Extended::Infinite];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[1.5,"inf"]"#);
        let back: Vec<Extended<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn tolerance_scales_with_precision() {
        assert_eq!(f64::default_tolerance(), 1e-10);
        assert!(f32::default_tolerance() < 1e-4 && f32::default_tolerance() > 1e-6);
    }
}
