//! Scalar abstractions shared by the numerical modules.
//!
//! `Real` covers the floating point types the solvers run in (`f32`, `f64`).
//! `Amplitude` covers what an MPS tensor may hold: a real type, used for
//! ground states of real Hamiltonians, or its complex counterpart, used for
//! time evolution.

use nalgebra::{ComplexField, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point type usable by every solver in the crate.
pub trait Real:
    RealField + FromPrimitive + ToPrimitive + Copy + Default + std::fmt::Display + std::str::FromStr + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the supported types.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative tolerance used when deciding that a coefficient vanished.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// Entry type of matrix product states and operators.
pub trait Amplitude: ComplexField<RealField = <Self as Amplitude>::Re> + Copy + Default + Send + Sync + 'static {
    /// The real type underneath; equal to `RealField`.
    type Re: Real;

    const IS_COMPLEX: bool;

    /// Builds an amplitude from a complex number, failing if the imaginary
    /// part cannot be represented.
    fn from_complex(c: Complex<Self::Re>) -> Option<Self>;

    /// Drops the imaginary part silently. Used for random initialisation.
    fn from_parts(re: Self::Re, im: Self::Re) -> Self;

    fn to_complex(self) -> Complex<Self::Re>;
}

macro_rules! real_amplitude {
    ($t:ty) => {
        impl Amplitude for $t {
            type Re = $t;
            const IS_COMPLEX: bool = false;

            fn from_complex(c: Complex<$t>) -> Option<Self> {
                let scale = c.re.abs().max(1.0);
                if c.im.abs() <= 1e3 * <$t>::EPSILON * scale {
                    Some(c.re)
                } else {
                    None
                }
            }

            fn from_parts(re: $t, _im: $t) -> Self {
                re
            }

            fn to_complex(self) -> Complex<$t> {
                Complex::new(self, 0.0)
            }
        }
    };
}

real_amplitude!(f32);
real_amplitude!(f64);

impl<T: Real> Amplitude for Complex<T> {
    type Re = T;
    const IS_COMPLEX: bool = true;

    fn from_complex(c: Complex<T>) -> Option<Self> {
        Some(c)
    }

    fn from_parts(re: T, im: T) -> Self {
        Complex::new(re, im)
    }

    fn to_complex(self) -> Complex<T> {
        self
    }
}

/// Imaginary unit.
#[inline]
pub fn i<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Real number as a complex number.
#[inline]
pub fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// `2π`, the factor between MHz and angular frequency in rad/μs.
#[inline]
pub fn two_pi<T: Real>() -> T {
    T::two_pi()
}
