//! Second-order autoregressive building blocks: pole placement from a peak
//! frequency, stationarity checks, closed-form spectra and simulation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Samples discarded before a realization is considered stationary.
pub const BURN_IN: usize = 512;

/// AR(2) coefficients `x_t = phi1 x_{t-1} + phi2 x_{t-2} + e_t`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Ar2<T> {
    pub phi1: T,
    pub phi2: T,
}

impl<T: Scalar> Ar2<T> {
    /// Place a conjugate pole pair at modulus `r` and angle `2*pi*peak_hz/fs`,
    /// giving a spectral peak near `peak_hz`.
    pub fn from_peak(peak_hz: T, modulus: T, fs_hz: T) -> Self {
        let two: T = lit(2.0);
        let omega = two * lit::<T>(std::f64::consts::PI) * peak_hz / fs_hz;
        Ar2 {
            phi1: two * modulus * omega.cos(),
            phi2: -(modulus * modulus),
        }
    }

    /// Stationarity triangle for AR(2).
    pub fn is_stationary(&self) -> bool {
        let one = T::one();
        self.phi1 + self.phi2 < one && self.phi2 - self.phi1 < one && self.phi2.abs() < one
    }

    pub fn check_stationary(&self) -> Result<()> {
        if self.is_stationary() {
            Ok(())
        } else {
            Err(Error::NonStationaryAr {
                phi1: self.phi1.to_f64().unwrap_or(f64::NAN),
                phi2: self.phi2.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    /// Spectral density (unit innovation variance) at frequency `f_hz`:
    /// `1 / (2 pi |1 - phi1 e^{-iw} - phi2 e^{-2iw}|^2)` with `w = 2 pi f / fs`.
    pub fn spectrum(&self, f_hz: T, fs_hz: T) -> T {
        let two: T = lit(2.0);
        let pi: T = lit(std::f64::consts::PI);
        let w = two * pi * f_hz / fs_hz;
        let re = T::one() - self.phi1 * w.cos() - self.phi2 * (two * w).cos();
        let im = self.phi1 * w.sin() + self.phi2 * (two * w).sin();
        T::one() / (two * pi * (re * re + im * im))
    }

    /// Simulate `n` samples with unit-variance Gaussian innovations,
    /// discarding [`BURN_IN`] warm-up samples.
    pub fn simulate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<T> {
        let mut prev1 = T::zero();
        let mut prev2 = T::zero();
        let mut out = Vec::with_capacity(n);
        for t in 0..(n + BURN_IN) {
            let e = T::draw_std_normal(rng);
            let x = self.phi1 * prev1 + self.phi2 * prev2 + e;
            prev2 = prev1;
            prev1 = x;
            if t >= BURN_IN {
                out.push(x);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn pole_placement_is_stationary() {
        let a: Ar2<f64> = Ar2::from_peak(10.0, 0.95, 250.0);
        assert!(a.is_stationary());
        assert!((a.phi2 + 0.9025).abs() < 1e-12);
    }

    #[test]
    fn unit_modulus_is_rejected() {
        let a: Ar2<f64> = Ar2::from_peak(10.0, 1.0, 250.0);
        assert!(a.check_stationary().is_err());
    }

    #[test]
    fn spectrum_peaks_near_the_placed_pole() {
        let a: Ar2<f64> = Ar2::from_peak(10.0, 0.95, 250.0);
        let grid: Vec<f64> = (0..1250).map(|k| k as f64 * 0.1).collect();
        let (argmax, _) = grid
            .iter()
            .map(|&f| a.spectrum(f, 250.0))
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        assert!((grid[argmax] - 10.0).abs() <= 0.5, "peak at {}", grid[argmax]);
    }

    #[test]
    fn white_noise_when_coeffs_vanish() {
        let a = Ar2 { phi1: 0.0f64, phi2: 0.0 };
        let s1 = a.spectrum(3.0, 250.0);
        let s2 = a.spectrum(97.0, 250.0);
        assert!((s1 - s2).abs() < 1e-15);
        let mut r = rng::seeded(3);
        let xs = a.simulate(1000, &mut r);
        let mean: f64 = xs.iter().sum::<f64>() / 1000.0;
        assert!(mean.abs() < 0.15);
    }
}
