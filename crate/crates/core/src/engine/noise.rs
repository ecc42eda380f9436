//! White-noise lattices and the phase-sensitive signal noise.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

/// Per-trajectory random stream.
pub type TrajectoryRng = Xoshiro256PlusPlus;

/// Stream `index` of the generator seeded by `master_seed`: the master state
/// advanced by `index` jumps of 2^128 draws, so streams never overlap and do
/// not depend on the order in which trajectories are scheduled.
pub fn trajectory_rng(master_seed: u64, index: u64) -> TrajectoryRng {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(master_seed);
    for _ in 0..index {
        rng.jump();
    }
    rng
}

/// One time step of white noise. Each cell sample has variance `1 / (dx dt)`
/// so that `xi dt` approximates the increment of a unit delta-correlated process.
#[derive(Debug, Clone)]
pub struct NoiseDraw {
    /// Complex pump noise, `<xi0 xi0*> = 1/(dx dt)`, `<xi0 xi0> = 0`.
    pub xi0: Vec<Complex64>,
    /// Real signal noises, mutually uncorrelated.
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl NoiseDraw {
    pub fn zeros(n: usize) -> Self {
        NoiseDraw {
            xi0: vec![Complex64::new(0.0, 0.0); n],
            phi: vec![0.0; n],
            psi: vec![0.0; n],
        }
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R, n: usize, dx: f64, dt: f64) -> Self {
        let mut draw = Self::zeros(n);
        draw.refill(rng, dx, dt);
        draw
    }

    pub fn refill<R: Rng + ?Sized>(&mut self, rng: &mut R, dx: f64, dt: f64) {
        let sigma = 1.0 / (dx * dt).sqrt();
        let half = sigma * std::f64::consts::FRAC_1_SQRT_2;
        for z in self.xi0.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z = Complex64::new(re * half, im * half);
        }
        for (p, q) in self.phi.iter_mut().zip(self.psi.iter_mut()) {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            *p = a * sigma;
            *q = b * sigma;
        }
    }
}

/// Phase-sensitive multiplicative signal noise built from two real white
/// noises; its correlators are `<xi1 xi1*> = 1` and `<xi1 xi1> = -alpha0 / 2`
/// per unit delta normalization.
pub fn synth_signal_noise(alpha0: Complex64, phi: f64, psi: f64) -> Result<Complex64> {
    if !(alpha0.norm_sqr() < 4.0) || !(alpha0.re > -2.0) {
        return Err(Error::GuardViolation {
            modulus: alpha0.norm(),
        });
    }
    Ok(synth_unchecked(alpha0, phi, psi))
}

/// Coefficients `(c_phi, c_psi)` with `xi1 = c_phi phi + c_psi psi`.
/// Valid for `|alpha0| <= 2`; the `psi` coefficient vanishes on the boundary.
#[inline]
pub fn signal_noise_coefficients(alpha0: Complex64) -> (Complex64, f64) {
    // (1 - |a|^2/4) / (2 + a_re) = (4 - |a|^2) / (4 (2 + a_re))
    let root = (2.0 + alpha0.re).sqrt();
    let half_inv = 0.5 / root;
    let c_phi = Complex64::new(-alpha0.im * half_inv, 0.5 * root);
    let c_psi = (4.0 - alpha0.norm_sqr()).max(0.0).sqrt() * half_inv;
    (c_phi, c_psi)
}

#[inline]
pub(crate) fn synth_unchecked(alpha0: Complex64, phi: f64, psi: f64) -> Complex64 {
    let (c_phi, c_psi) = signal_noise_coefficients(alpha0);
    c_phi * phi + c_psi * psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Sample correlators of xi1 over unit-variance phi, psi.
    fn correlators(alpha0: Complex64, n: usize) -> (f64, Complex64) {
        let mut rng = trajectory_rng(7, 0);
        let mut abs2 = 0.0;
        let mut sq = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            let phi: f64 = rng.sample(StandardNormal);
            let psi: f64 = rng.sample(StandardNormal);
            let xi = synth_signal_noise(alpha0, phi, psi).unwrap();
            abs2 += xi.norm_sqr();
            sq += xi * xi;
        }
        (abs2 / n as f64, sq / n as f64)
    }

    #[test]
    fn zero_pump_reduces_to_circular_noise() {
        let xi = synth_signal_noise(Complex64::new(0.0, 0.0), 0.7, -1.3).unwrap();
        let want = (Complex64::new(0.0, 0.7) - 1.3) / 2f64.sqrt();
        assert!((xi - want).norm() < 1e-15);
        let (abs2, sq) = correlators(Complex64::new(0.0, 0.0), 1_000_000);
        assert!((abs2 - 1.0).abs() < 5e-3);
        assert!(sq.norm() < 5e-3);
    }

    #[test]
    fn unit_pump_correlators() {
        let (abs2, sq) = correlators(Complex64::new(1.0, 0.0), 1_000_000);
        assert!((abs2 - 1.0).abs() < 5e-3);
        assert!((sq - Complex64::new(-0.5, 0.0)).norm() < 5e-3);
    }

    #[test]
    fn closed_form_correlators() {
        for &a0 in &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.3, -1.1),
            Complex64::new(-1.2, 0.4),
            Complex64::new(1.5, 0.2),
        ] {
            let (c_phi, c_psi) = signal_noise_coefficients(a0);
            let abs2 = c_phi.norm_sqr() + c_psi * c_psi;
            let sq = c_phi * c_phi + c_psi * c_psi;
            assert_relative_eq!(abs2, 1.0, epsilon = 1e-14);
            assert!((sq + a0 / 2.0).norm() < 1e-14);
        }
    }

    #[test]
    fn boundary_kills_psi_coefficient() {
        for &theta in &[0.0, 0.4, 1.7, 3.0] {
            let (_, c_psi) = signal_noise_coefficients(Complex64::from_polar(2.0, theta));
            assert!(c_psi.abs() < 1e-7);
        }
        let (_, c_psi) = signal_noise_coefficients(Complex64::new(2.0, 0.0));
        assert_eq!(c_psi, 0.0);
        assert!(synth_signal_noise(Complex64::new(2.0, 0.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn draw_variances() {
        let (dx, dt) = (1.3, 0.01);
        let mut rng = trajectory_rng(3, 1);
        let mut draw = NoiseDraw::zeros(64);
        let (mut s0, mut q0, mut sp, mut spq) = (0.0, Complex64::new(0.0, 0.0), 0.0, 0.0);
        let reps = 4000;
        for _ in 0..reps {
            draw.refill(&mut rng, dx, dt);
            for j in 0..64 {
                s0 += draw.xi0[j].norm_sqr();
                q0 += draw.xi0[j] * draw.xi0[j];
                sp += draw.phi[j] * draw.phi[j];
                spq += draw.phi[j] * draw.psi[j];
            }
        }
        let n = (reps * 64) as f64;
        let unit = dx * dt;
        assert!((s0 / n * unit - 1.0).abs() < 0.02);
        assert!((q0 / n * unit).norm() < 0.02);
        assert!((sp / n * unit - 1.0).abs() < 0.02);
        assert!((spq / n * unit).abs() < 0.02);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| trajectory_rng(11, 2).random()).collect();
        let b: u64 = trajectory_rng(11, 2).random();
        let c: u64 = trajectory_rng(11, 3).random();
        assert!(a.iter().all(|&x| x == b));
        assert_ne!(b, c);
    }
}
