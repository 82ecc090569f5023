//! Scalar abstraction for the numeric core.
//!
//! Everything numeric in this crate is generic over [`Scalar`], which is any
//! IEEE float that the `rand_distr` samplers and `rustfft` know how to drive.
//! In practice that means `f32` and `f64`; the crate root exports concrete
//! aliases for both.

use rand::distr::uniform::SampleUniform;
use rand::Rng;
use rand_distr::Distribution;

/// Floating-point scalar usable throughout the pipeline.
///
/// The draw methods bridge to `rand_distr` without forcing distribution
/// bounds onto every generic signature in the crate.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + std::iter::Sum<Self>
    + for<'a> std::iter::Sum<&'a Self>
    + std::fmt::Display
    + std::fmt::Debug
    + std::fmt::LowerExp
    + Default
    + SampleUniform
    + rustfft::FftNum
    + Send
    + Sync
    + 'static
{
    /// Draw from the standard normal distribution.
    fn draw_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Draw from Gamma(shape, scale). Panics on non-positive parameters.
    fn draw_gamma<R: Rng + ?Sized>(rng: &mut R, shape: Self, scale: Self) -> Self;

    /// Draw from Beta(a, b). Panics on non-positive parameters.
    fn draw_beta<R: Rng + ?Sized>(rng: &mut R, a: Self, b: Self) -> Self;

    /// Draw from Exponential(rate). Panics on a non-positive rate.
    fn draw_exp<R: Rng + ?Sized>(rng: &mut R, rate: Self) -> Self;

    /// Draw uniformly from the half-open unit interval `[0, 1)`.
    fn draw_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossless-enough conversion from `f64` literals and defaults.
    #[inline]
    fn from_f64_lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 literal converts to any Scalar")
    }

    /// Conversion from counts and sizes.
    #[inline]
    fn from_usize_lit(v: usize) -> Self {
        Self::from_usize(v).expect("usize converts to any Scalar")
    }
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn draw_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(rand_distr::StandardNormal)
            }

            #[inline]
            fn draw_gamma<R: Rng + ?Sized>(rng: &mut R, shape: Self, scale: Self) -> Self {
                rand_distr::Gamma::new(shape, scale)
                    .expect("gamma parameters must be positive")
                    .sample(rng)
            }

            #[inline]
            fn draw_beta<R: Rng + ?Sized>(rng: &mut R, a: Self, b: Self) -> Self {
                rand_distr::Beta::new(a, b)
                    .expect("beta parameters must be positive")
                    .sample(rng)
            }

            #[inline]
            fn draw_exp<R: Rng + ?Sized>(rng: &mut R, rate: Self) -> Self {
                rand_distr::Exp::new(rate)
                    .expect("exponential rate must be positive")
                    .sample(rng)
            }

            #[inline]
            fn draw_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random()
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Shorthand for `T::from_f64_lit`, used pervasively in numeric code.
#[inline]
pub fn lit<T: Scalar>(v: f64) -> T {
    T::from_f64_lit(v)
}

/// Shorthand for converting a count to the scalar type.
#[inline]
pub fn cnt<T: Scalar>(v: usize) -> T {
    T::from_usize_lit(v)
}
