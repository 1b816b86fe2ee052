//! Seeded samplers for test functions, shifts and complex scalars.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hermite::SchwartzFn;
use crate::tensor;

pub type SampleRng = ChaCha8Rng;

/// Deterministic generator for a named check under a run seed.
pub fn rng_for(seed: u64, label: &str) -> SampleRng {
    // FNV-1a: stable across toolchains, unlike the std hasher.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

/// Random complex coefficients under a Gaussian envelope
/// `exp(−|k|²/(2·width²))` in the multi-index, normalized to unit L2 norm.
pub fn profile_fn<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    degree: usize,
    width: f64,
) -> SchwartzFn {
    let shape = vec![degree + 1; dim];
    let mut coeffs = vec![Complex64::new(0.0, 0.0); tensor::volume(&shape)];
    tensor::for_each_index(&shape, |flat, idx| {
        let r2: f64 = idx.iter().map(|&k| (k * k) as f64).sum();
        let env = (-r2 / (2.0 * width * width)).exp();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        coeffs[flat] = Complex64::new(re, im) * env;
    });
    let f = SchwartzFn::new(dim, degree, coeffs).expect("finite coefficients");
    let n = f.norm();
    f.scale_real(1.0 / n)
}

/// Like [`profile_fn`] with real coefficients.
pub fn real_profile_fn<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    degree: usize,
    width: f64,
) -> SchwartzFn {
    let f = profile_fn(rng, dim, degree, width);
    let real: Vec<Complex64> = f
        .coeffs()
        .iter()
        .map(|c| Complex64::new(c.re, 0.0))
        .collect();
    let f = SchwartzFn::new(dim, degree, real).expect("finite coefficients");
    let n = f.norm();
    f.scale_real(1.0 / n)
}

/// Uniform vector in the box `[−r, r]ⁿ`, rescaled into the ball `|x| <= r`.
pub fn shift_in_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..dim)
        .map(|_| rng.random_range(-radius..=radius))
        .collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > radius {
        x.iter_mut().for_each(|v| *v *= radius / norm);
    }
    x
}

/// Nonzero complex scalar with modulus in `[0.1, 3]`.
pub fn complex_scalar<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r = rng.random_range(0.1..3.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, phase)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_streams_are_reproducible() {
        let a = profile_fn(&mut rng_for(7, "x"), 1, 10, 3.0);
        let b = profile_fn(&mut rng_for(7, "x"), 1, 10, 3.0);
        let c = profile_fn(&mut rng_for(7, "y"), 1, 10, 3.0);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn shifts_stay_in_ball() {
        let mut rng = rng_for(1, "shift");
        for _ in 0..100 {
            let x = shift_in_ball(&mut rng, 3, 1.5);
            assert!(x.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1.5 + 1e-12);
        }
    }
}
