use num_complex::Complex64;

use crate::error::Result;
use crate::lattice::{FieldState, Grid, Params, Spectral};

/// Far-field amplitudes in unit-commutator units, `beta_k = (sqrt(dx) / c) F[alpha]_k`,
/// so that a vacuum mode has `<|beta_k|^2>_Q = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAmplitudes {
    pub signal: Vec<Complex64>,
    pub pump: Vec<Complex64>,
}

/// Factor converting raw unitary-DFT modes into unit-commutator amplitudes.
pub fn mode_scale(params: &Params) -> f64 {
    params.dx().sqrt() / params.noise_c
}

pub fn mode_amplitudes(
    state: &FieldState,
    params: &Params,
    grid: &Grid,
    spectral: &mut Spectral,
) -> Result<ModeAmplitudes> {
    let scale = grid.dx.sqrt() / params.noise_c;
    let mut signal = spectral.forward_transform(&state.alpha1)?;
    let mut pump = spectral.forward_transform(&state.alpha0)?;
    signal
        .iter_mut()
        .chain(pump.iter_mut())
        .for_each(|z| *z *= scale);
    Ok(ModeAmplitudes { signal, pump })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_grid;
    use approx::assert_relative_eq;

    #[test]
    fn plane_wave_amplitude() {
        let p = Params::default();
        let g = build_grid(&p).unwrap();
        let kc = 4.0 * g.dk;
        let a = 2e-3;
        let mut s = FieldState::zeros(64);
        s.alpha1 =
            g.x.iter()
                .map(|x| Complex64::from_polar(a, kc * x))
                .collect();
        let beta = mode_amplitudes(&s, &p, &g, &mut Spectral::new(64)).unwrap();
        let want = 64.0 * g.dx * a * a / (p.noise_c * p.noise_c);
        for (j, b) in beta.signal.iter().enumerate() {
            if j == g.index_of(4) {
                assert_relative_eq!(b.norm_sqr(), want, max_relative = 1e-12);
            } else {
                assert!(b.norm_sqr() < 1e-18 * want);
            }
        }
    }

    #[test]
    fn zero_field() {
        let p = Params::default();
        let g = build_grid(&p).unwrap();
        let beta = mode_amplitudes(&FieldState::zeros(64), &p, &g, &mut Spectral::new(64)).unwrap();
        assert!(beta
            .signal
            .iter()
            .chain(&beta.pump)
            .all(|z| z.norm() == 0.0));
    }
}
