use std::fmt::{Debug, Display};

/// Floating-point scalar used for contour strengths and hierarchy levels.
///
/// The in-memory pipeline is generic over this type; `f64` is the default
/// everywhere and what the CLI instantiates. On-disk float payloads are
/// always stored as `f32` and widened on load.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    fn of_f64(v: f64) -> Self {
        num_traits::FromPrimitive::from_f64(v).expect("finite f64 converts to scalar")
    }

    fn of_usize(v: usize) -> Self {
        num_traits::FromPrimitive::from_usize(v).expect("usize converts to scalar")
    }

    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Total order for scalars known to be NaN-free (all toolkit values live in
/// [0, 1] or are finite levels derived from them).
pub fn cmp<S: Scalar>(a: S, b: S) -> std::cmp::Ordering {
    a.partial_cmp(&b).expect("boundary strengths are never NaN")
}
