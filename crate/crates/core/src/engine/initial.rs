use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::lattice::{FieldState, Grid, InitKind, Params};
use crate::linear::critical_wavenumber;

const SEED_AMPLITUDE: f64 = 1e-5;

/// Draws a circular unit-variance Gaussian `eps(x)` and builds the
/// requested initial condition. The pump starts at zero for every kind.
pub fn make_initial_condition<R: Rng + ?Sized>(
    kind: InitKind,
    params: &Params,
    grid: &Grid,
    rng: &mut R,
) -> Result<FieldState> {
    let eps: Vec<Complex64> = (0..grid.n_points)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect();
    initial_condition_from(kind, params, grid, &eps)
}

pub fn initial_condition_from(
    kind: InitKind,
    params: &Params,
    grid: &Grid,
    eps: &[Complex64],
) -> Result<FieldState> {
    let n = grid.n_points;
    let mut state = FieldState::zeros(n);
    match kind {
        InitKind::PaperModulated => {
            let kc = pattern_wavenumber(params)?;
            for ((a1, x), e) in state.alpha1.iter_mut().zip(&grid.x).zip(eps) {
                *a1 = SEED_AMPLITUDE * (e + 10.0 * (kc * x).sin());
            }
        }
        InitKind::Noise => {
            for (a1, e) in state.alpha1.iter_mut().zip(eps) {
                *a1 = SEED_AMPLITUDE * e;
            }
        }
        InitKind::Step => {
            for (j, a1) in state.alpha1.iter_mut().enumerate() {
                *a1 = Complex64::new(if j < n / 2 { -1.0 } else { 1.0 }, 0.0);
            }
        }
        InitKind::Rolls => {
            let kc = pattern_wavenumber(params)?;
            for (a1, x) in state.alpha1.iter_mut().zip(&grid.x) {
                *a1 = Complex64::new(params.roll_amplitude * (kc * x).cos(), 0.0);
            }
        }
    }
    Ok(state)
}

fn pattern_wavenumber(params: &Params) -> Result<f64> {
    critical_wavenumber(params.delta1)
        .map_err(|_| invalid("init_kind", "modulated initial conditions need delta1 < 0"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::noise::trajectory_rng;
    use crate::lattice::build_grid;

    #[test]
    fn modulated_without_noise_is_pure_sine() {
        let p = Params::default();
        let g = build_grid(&p).unwrap();
        let zeros = vec![Complex64::new(0.0, 0.0); g.n_points];
        let s = initial_condition_from(InitKind::PaperModulated, &p, &g, &zeros).unwrap();
        for (a1, x) in s.alpha1.iter().zip(&g.x) {
            assert!((a1.re - 1e-4 * (0.3 * x).sin()).abs() < 1e-18);
            assert_eq!(a1.im, 0.0);
        }
        assert!(s.alpha0.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn step_halves() {
        let p = Params::default();
        let g = build_grid(&p).unwrap();
        let s = initial_condition_from(InitKind::Step, &p, &g, &[]).unwrap();
        let neg = s.alpha1.iter().filter(|z| z.re == -1.0).count();
        let pos = s.alpha1.iter().filter(|z| z.re == 1.0).count();
        assert_eq!((neg, pos), (32, 32));
    }

    #[test]
    fn rolls_amplitude() {
        let mut p = Params::default();
        p.roll_amplitude = 0.8;
        let g = build_grid(&p).unwrap();
        let s = initial_condition_from(InitKind::Rolls, &p, &g, &[]).unwrap();
        assert!((s.alpha1[0].re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let p = Params::default();
        let g = build_grid(&p).unwrap();
        let a = make_initial_condition(InitKind::Noise, &p, &g, &mut trajectory_rng(5, 0)).unwrap();
        let b = make_initial_condition(InitKind::Noise, &p, &g, &mut trajectory_rng(5, 0)).unwrap();
        let c = make_initial_condition(InitKind::Noise, &p, &g, &mut trajectory_rng(5, 1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unknown_kind_rejected() {
        assert!("spiral".parse::<InitKind>().is_err());
        assert_eq!("rolls".parse::<InitKind>().unwrap(), InitKind::Rolls);
    }
}
