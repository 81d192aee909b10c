//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Real field the simulator is generic over. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, panicking only if the target cannot represent finite values.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("scalar conversion from f64")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar conversion to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex sample type over a scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn czero<T: Scalar>() -> C<T> {
    C::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Scalar>() -> C<T> {
    C::new(T::one(), T::zero())
}

/// Table of the `len`-th roots of unity, `e^{j2πq/len}` for `q ∈ Z_len`.
///
/// Entries are computed in `f64` and narrowed, so `f32` tables carry no accumulated phase error.
#[derive(Debug, Clone)]
pub struct Twiddles<T> {
    roots: Vec<C<T>>,
}

impl<T: Scalar> Twiddles<T> {
    pub fn new(len: usize) -> Self {
        let roots = (0..len).map(|q| root_of_unity(q as i64, len)).collect();
        Self { roots }
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// `e^{j2π q/len}` for any (possibly negative) integer `q`.
    #[inline]
    pub fn at(&self, q: i64) -> C<T> {
        let n = self.roots.len() as i64;
        self.roots[q.rem_euclid(n) as usize]
    }

    /// Table entry for an already reduced index `q < len`.
    #[inline]
    pub fn reduced(&self, q: usize) -> C<T> {
        self.roots[q]
    }
}

/// `e^{j2π num/den}`, exact when the angle is a multiple of a quarter turn.
pub fn root_of_unity<T: Scalar>(num: i64, den: usize) -> C<T> {
    let r = num.rem_euclid(den as i64) as usize;
    if (4 * r).is_multiple_of(den) {
        let (re, im) = match 4 * r / den {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        };
        return C::new(T::lit(re), T::lit(im));
    }
    cis(2.0 * std::f64::consts::PI * r as f64 / den as f64)
}

/// Phase factor `e^{jθ}` evaluated in `f64`.
#[inline]
pub(crate) fn cis<T: Scalar>(theta: f64) -> C<T> {
    C::new(T::lit(theta.cos()), T::lit(theta.sin()))
}

#[inline]
pub(crate) fn modulo(x: i64, n: usize) -> usize {
    x.rem_euclid(n as i64) as usize
}

/// Signed representative of `x mod n` in `[-⌊n/2⌋, ⌈n/2⌉)`.
#[inline]
pub(crate) fn signed_rep(x: i64, n: usize) -> i64 {
    let n = n as i64;
    let half = n / 2;
    (x + half).rem_euclid(n) - half
}
