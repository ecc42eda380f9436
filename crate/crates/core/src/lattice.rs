//! Transverse lattice, model parameters, field containers and the unitary
//! discrete Fourier transform shared by every other module.
//!
//! Boundary conditions are periodic. Mode arrays are stored in FFT order:
//! index `j` holds signed mode `m = j` for `j < N/2` and `m = j - N` otherwise,
//! so the single unpaired Nyquist mode sits at `j = N/2` with `m = -N/2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Initial-condition selector for a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    /// Signal `1e-5 (eps(x) + 10 sin(k_c x))`, pump zero.
    PaperModulated,
    /// Signal `1e-5 eps(x)`, pump zero.
    Noise,
    /// Signal -1 on the first half of the domain and +1 on the second.
    Step,
    /// Signal `A cos(k_c x)`.
    Rolls,
}

impl InitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InitKind::PaperModulated => "paper-modulated",
            InitKind::Noise => "noise",
            InitKind::Step => "step",
            InitKind::Rolls => "rolls",
        }
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-modulated" | "modulated" => Ok(InitKind::PaperModulated),
            "noise" => Ok(InitKind::Noise),
            "step" => Ok(InitKind::Step),
            "rolls" => Ok(InitKind::Rolls),
            other => Err(Error::UnknownInitKind(other.to_string())),
        }
    }
}

/// Physical and numerical parameters of one run, in scaled units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Pump cavity detuning.
    pub delta0: f64,
    /// Signal cavity detuning.
    pub delta1: f64,
    /// External pump amplitude (threshold is 1 for zero pump detuning).
    pub pump_e: f64,
    /// Dimensionless noise strength `g / (sqrt(a) gamma)`.
    pub noise_c: f64,
    /// When false the stochastic terms are dropped (classical equations).
    pub noise_enabled: bool,
    pub n_points: usize,
    pub length_l: f64,
    pub dt: f64,
    pub t_total: f64,
    /// Initial interval excluded from statistics.
    pub t_transient: f64,
    /// Interval between statistics samples.
    pub sample_stride: f64,
    pub seed: u64,
    pub init_kind: InitKind,
    /// Amplitude of the `rolls` initial condition.
    pub roll_amplitude: f64,
}

impl Default for Params {
    fn default() -> Self {
        let delta1 = -0.18;
        Params {
            delta0: 0.0,
            delta1,
            pump_e: 0.99,
            noise_c: 1e-4,
            noise_enabled: true,
            n_points: 64,
            length_l: four_critical_wavelengths(delta1),
            dt: 0.01,
            t_total: 1.1e4,
            t_transient: 1e3,
            sample_stride: 1.0,
            seed: 1,
            init_kind: InitKind::PaperModulated,
            roll_amplitude: 1.0,
        }
    }
}

/// System length of four critical wavelengths, `4 * 2 pi / k_c`.
/// Falls back to the default detuning's value when `delta1 >= 0`.
pub fn four_critical_wavelengths(delta1: f64) -> f64 {
    let kc = if delta1 < 0.0 {
        (-delta1 / 2.0).sqrt()
    } else {
        0.3
    };
    4.0 * 2.0 * PI / kc
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        if !self.n_points.is_power_of_two() || self.n_points < 8 {
            return Err(invalid("n_points", "must be a power of two and at least 8"));
        }
        if !(self.length_l > 0.0) || !self.length_l.is_finite() {
            return Err(invalid("length_l", "must be positive"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.noise_c > 0.0) || !self.noise_c.is_finite() {
            return Err(invalid("noise_c", "must be positive"));
        }
        if !(self.t_transient >= 0.0) {
            return Err(invalid("t_transient", "must be non-negative"));
        }
        if !(self.t_total > self.t_transient) || !self.t_total.is_finite() {
            return Err(invalid("t_total", "must exceed t_transient"));
        }
        if !(self.sample_stride > 0.0) {
            return Err(invalid("sample_stride", "must be positive"));
        }
        for (name, v) in [
            ("delta0", self.delta0),
            ("delta1", self.delta1),
            ("pump_e", self.pump_e),
            ("roll_amplitude", self.roll_amplitude),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length_l / self.n_points as f64
    }

    /// Number of integration steps for `t_total`.
    pub fn total_steps(&self) -> u64 {
        (self.t_total / self.dt).round() as u64
    }

    pub fn transient_steps(&self) -> u64 {
        (self.t_transient / self.dt).round() as u64
    }

    /// Steps between statistics samples (at least one).
    pub fn stride_steps(&self) -> u64 {
        ((self.sample_stride / self.dt).round() as u64).max(1)
    }
}

/// Periodic 1-D lattice and its wavenumber ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n_points: usize,
    pub length_l: f64,
    pub dx: f64,
    pub dk: f64,
    /// Positions `x_j = j dx`.
    pub x: Vec<f64>,
    /// Wavenumbers in FFT storage order.
    pub k: Vec<f64>,
}

pub fn build_grid(params: &Params) -> Result<Grid> {
    Grid::new(params.n_points, params.length_l)
}

impl Grid {
    pub fn new(n_points: usize, length_l: f64) -> Result<Self> {
        if n_points < 8 {
            return Err(invalid("n_points", format!("{n_points} < 8")));
        }
        if !(length_l > 0.0) || !length_l.is_finite() {
            return Err(invalid("length_l", format!("{length_l} is not positive")));
        }
        let dx = length_l / n_points as f64;
        let dk = 2.0 * PI / length_l;
        let x = (0..n_points).map(|j| j as f64 * dx).collect();
        let k = (0..n_points)
            .map(|j| signed_mode(j, n_points) as f64 * dk)
            .collect();
        Ok(Grid {
            n_points,
            length_l,
            dx,
            dk,
            x,
            k,
        })
    }

    /// Storage index of signed mode `m`, for `-N/2 <= m < N/2`.
    pub fn index_of(&self, m: i64) -> usize {
        let n = self.n_points as i64;
        debug_assert!(m >= -n / 2 && m < n / 2);
        m.rem_euclid(n) as usize
    }

    pub fn signed_mode(&self, j: usize) -> i64 {
        signed_mode(j, self.n_points)
    }

    /// Signed modes in ascending order, `-N/2 .. N/2`.
    pub fn ascending_modes(&self) -> impl Iterator<Item = i64> {
        let half = self.n_points as i64 / 2;
        -half..half
    }

    /// Storage-index pairs `(m, -m)` for `m = 1 .. N/2 - 1`. Zero and Nyquist are excluded.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (1..self.n_points as i64 / 2)
            .map(|m| (self.index_of(m), self.index_of(-m)))
            .collect()
    }

    /// Mode number nearest to wavenumber `k`.
    pub fn nearest_mode(&self, k: f64) -> i64 {
        (k / self.dk).round() as i64
    }
}

fn signed_mode(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Pump and signal fields on the lattice at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub alpha0: Vec<Complex64>,
    pub alpha1: Vec<Complex64>,
    pub time: f64,
}

impl FieldState {
    pub fn zeros(n_points: usize) -> Self {
        FieldState {
            alpha0: vec![Complex64::new(0.0, 0.0); n_points],
            alpha1: vec![Complex64::new(0.0, 0.0); n_points],
            time: 0.0,
        }
    }

    pub fn uniform(n_points: usize, alpha0: Complex64, alpha1: Complex64) -> Self {
        FieldState {
            alpha0: vec![alpha0; n_points],
            alpha1: vec![alpha1; n_points],
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.alpha0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.alpha0
            .iter()
            .chain(self.alpha1.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Unitary DFT pair (`1/sqrt(N)` both ways) with cached plans.
#[derive(Clone)]
pub struct Spectral {
    n: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Spectral {
            n,
            scale: 1.0 / (n as f64).sqrt(),
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward transform, `F[f]_m = N^{-1/2} sum_j f_j e^{-2 pi i j m / N}`.
    pub fn forward_in_place(&mut self, data: &mut [Complex64]) -> Result<()> {
        self.check(data.len())?;
        self.forward.process_with_scratch(data, &mut self.scratch);
        data.iter_mut().for_each(|z| *z *= self.scale);
        Ok(())
    }

    pub fn inverse_in_place(&mut self, data: &mut [Complex64]) -> Result<()> {
        self.check(data.len())?;
        self.inverse.process_with_scratch(data, &mut self.scratch);
        data.iter_mut().for_each(|z| *z *= self.scale);
        Ok(())
    }

    /// Unnormalized forward transform (no `1/sqrt(N)`).
    pub(crate) fn forward_raw(&mut self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n);
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    /// Unnormalized inverse transform (no `1/sqrt(N)`).
    pub(crate) fn inverse_raw(&mut self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n);
        self.inverse.process_with_scratch(data, &mut self.scratch);
    }

    pub fn forward_transform(&mut self, field: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = field.to_vec();
        self.forward_in_place(&mut out)?;
        Ok(out)
    }

    pub fn inverse_transform(&mut self, modes: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = modes.to_vec();
        self.inverse_in_place(&mut out)?;
        Ok(out)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn direct_dft(f: &[Complex64]) -> Vec<Complex64> {
        let n = f.len();
        (0..n)
            .map(|m| {
                f.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        v * Complex64::from_polar(1.0, -2.0 * PI * (j * m) as f64 / n as f64)
                    })
                    .sum::<Complex64>()
                    / (n as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn default_grid_wavenumbers() {
        let grid = build_grid(&Params::default()).unwrap();
        assert_relative_eq!(grid.dk, 0.075, epsilon = 1e-14);
        let kmin = grid.k.iter().cloned().fold(f64::INFINITY, f64::min);
        let kmax = grid.k.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(kmin, -2.4, epsilon = 1e-12);
        assert_relative_eq!(kmax, 2.325, epsilon = 1e-12);
        assert_relative_eq!(grid.k[grid.index_of(4)], 0.3, epsilon = 1e-14);
    }

    #[test]
    fn unit_spacing_grid() {
        let grid = Grid::new(8, 2.0 * PI).unwrap();
        let ks: Vec<f64> = grid
            .ascending_modes()
            .map(|m| grid.k[grid.index_of(m)])
            .collect();
        for (k, want) in ks.iter().zip(-4..4) {
            assert_relative_eq!(*k, want as f64, epsilon = 1e-14);
        }
    }

    #[test]
    fn degenerate_grid_rejected() {
        assert!(matches!(
            Grid::new(4, 0.0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(Grid::new(64, -1.0).is_err());
    }

    #[test]
    fn pairs_skip_zero_and_nyquist() {
        let grid = Grid::new(8, 1.0).unwrap();
        assert_eq!(grid.pairs(), vec![(1, 7), (2, 6), (3, 5)]);
    }

    #[test]
    fn constant_field_goes_to_zero_mode() {
        let mut sp = Spectral::new(64);
        let c0 = Complex64::new(0.3, -1.2);
        let modes = sp.forward_transform(&vec![c0; 64]).unwrap();
        assert_relative_eq!((modes[0] - c0 * 8.0).norm(), 0.0, epsilon = 1e-13);
        assert!(modes[1..].iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn plane_wave_single_mode() {
        let grid = build_grid(&Params::default()).unwrap();
        let mut sp = Spectral::new(64);
        let k4 = 4.0 * grid.dk;
        let f: Vec<Complex64> = grid
            .x
            .iter()
            .map(|x| Complex64::from_polar(1.0, k4 * x))
            .collect();
        let modes = sp.forward_transform(&f).unwrap();
        for (j, z) in modes.iter().enumerate() {
            if j == grid.index_of(4) {
                assert_relative_eq!(z.norm(), 8.0, epsilon = 1e-12);
            } else {
                assert!(z.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn matches_direct_summation() {
        let f: Vec<Complex64> = (0..16)
            .map(|j| Complex64::new((j as f64 * 0.7).sin(), (j as f64).cos() * 0.3))
            .collect();
        let mut sp = Spectral::new(16);
        let fast = sp.forward_transform(&f).unwrap();
        for (a, b) in fast.iter().zip(direct_dft(&f)) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn length_mismatch() {
        let mut sp = Spectral::new(8);
        assert!(matches!(
            sp.forward_transform(&[Complex64::new(1.0, 0.0); 4]),
            Err(Error::LengthMismatch {
                expected: 8,
                got: 4
            })
        ));
    }

    #[test]
    fn params_validation() {
        let mut p = Params::default();
        assert!(p.validate().is_ok());
        p.dt = -0.01;
        assert!(p.validate().is_err());
        let mut p = Params::default();
        p.n_points = 48;
        assert!(p.validate().is_err());
        let mut p = Params::default();
        p.t_transient = p.t_total;
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_and_parseval(
            log_n in 3u32..9,
            seed in proptest::collection::vec(-1.0f64..1.0, 512),
        ) {
            let n = 1usize << log_n;
            let f: Vec<Complex64> = (0..n).map(|j| Complex64::new(seed[2 * j % 512], seed[(2 * j + 1) % 512] + j as f64 * 1e-3)).collect();
            let mut sp = Spectral::new(n);
            let modes = sp.forward_transform(&f).unwrap();
            let back = sp.inverse_transform(&modes).unwrap();
            let norm: f64 = f.iter().map(|z| z.norm_sqr()).sum();
            let err: f64 = f.iter().zip(&back).map(|(a, b)| (a - b).norm_sqr()).sum();
            prop_assert!(err.sqrt() <= 1e-12 * norm.sqrt().max(1e-300));
            let mode_norm: f64 = modes.iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((mode_norm - norm).abs() <= 1e-12 * norm);
        }
    }
}
