//! Scalar abstraction shared by every solver in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Infallible for the two implementors.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Serde adapter that keeps non-finite values lossless (JSON has no `inf`).
pub mod serde_real {
    use super::Real;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer, T: Real>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        let x = v.as_f64();
        let repr = if x.is_finite() {
            Repr::Num(x)
        } else if x.is_nan() {
            Repr::Text("nan".into())
        } else if x > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        };
        repr.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, T: Real>(d: D) -> Result<T, D::Error> {
        let x = match Repr::deserialize(d)? {
            Repr::Num(x) => x,
            Repr::Text(t) => match t.as_str() {
                "inf" => f64::INFINITY,
                "-inf" => f64::NEG_INFINITY,
                "nan" => f64::NAN,
                other => {
                    return Err(serde::de::Error::custom(format!("bad real `{other}`")));
                }
            },
        };
        T::from_f64(x).ok_or_else(|| serde::de::Error::custom("real out of range"))
    }
}
