pub mod error;
pub mod mat;
pub mod rng;
pub mod model;
pub mod scalar;
pub mod sim;
pub mod spectral;
pub mod special;

pub use error::{Error, Result};
pub use mat::Mat;
pub use scalar::Scalar;

#[cfg(test)]
mod probe {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn draw_mixed<T: Scalar>(seed: u64) -> (T, T, T) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let z = T::draw_std_normal(&mut rng);
        let g = T::draw_gamma(&mut rng, scalar::lit(2.0), scalar::lit(0.5));
        let u: T = rng.random_range(T::zero()..T::one());
        (z, g, u)
    }

    #[test]
    fn scalar_trait_drives_distributions() {
        let (a, b, c) = draw_mixed::<f64>(7);
        let (x, y, z) = draw_mixed::<f32>(7);
        assert!(a.is_finite() && b > 0.0 && (0.0..1.0).contains(&c));
        assert!(x.is_finite() && y > 0.0 && (0.0..1.0).contains(&z));
    }
}
