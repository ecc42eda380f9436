//! Split-step integration of the Q-representation Langevin equations.
//!
//! The linear part (damping, detuning, diffraction) is propagated exactly in
//! mode space; the nonlinear drift is advanced with an explicit midpoint rule
//! and the noise with an Ito (Euler-Maruyama) increment, in the Strang order
//! linear(dt/2) / nonlinear+noise(dt) / linear(dt/2).

pub mod checkpoint;
pub mod guard;
pub mod initial;
pub mod noise;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_grid, FieldState, Grid, Params, Spectral};

pub use guard::{guard_diffusion, GuardStatus};
pub use initial::{initial_condition_from, make_initial_condition};
pub use noise::{synth_signal_noise, trajectory_rng, NoiseDraw, TrajectoryRng};

/// Field modes at a synchronized time, in raw units of the unitary DFT.
#[derive(Debug, Clone, Copy)]
pub struct ModeSnapshot<'a> {
    pub time: f64,
    pub pump: &'a [Complex64],
    pub signal: &'a [Complex64],
}

/// Receives post-transient snapshots from a running trajectory.
pub trait Sampler {
    fn sample(&mut self, snapshot: &ModeSnapshot<'_>);
}

impl<S: Sampler> Sampler for Option<S> {
    fn sample(&mut self, snapshot: &ModeSnapshot<'_>) {
        if let Some(s) = self {
            s.sample(snapshot)
        }
    }
}

impl<A: Sampler, B: Sampler> Sampler for (A, B) {
    fn sample(&mut self, snapshot: &ModeSnapshot<'_>) {
        self.0.sample(snapshot);
        self.1.sample(snapshot);
    }
}

/// Discards everything.
pub struct NullSampler;

impl Sampler for NullSampler {
    fn sample(&mut self, _: &ModeSnapshot<'_>) {}
}

/// Adapts a closure into a sampler.
pub struct FnSampler<F>(pub F);

impl<F: FnMut(&ModeSnapshot<'_>)> Sampler for FnSampler<F> {
    fn sample(&mut self, snapshot: &ModeSnapshot<'_>) {
        (self.0)(snapshot)
    }
}

impl<S: Sampler + ?Sized> Sampler for &mut S {
    fn sample(&mut self, snapshot: &ModeSnapshot<'_>) {
        (**self).sample(snapshot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryStatus {
    Completed,
    Rejected,
}

#[derive(Debug, Clone)]
pub struct TrajectoryOutcome {
    pub status: TrajectoryStatus,
    pub rejection_time: Option<f64>,
    pub samples_contributed: u64,
    pub steps: u64,
    /// Field at the end of the run (or at the guard trip).
    pub final_state: FieldState,
}

impl TrajectoryOutcome {
    pub fn is_rejected(&self) -> bool {
        self.status == TrajectoryStatus::Rejected
    }
}

/// Split-step propagator bound to one parameter set.
#[derive(Debug, Clone)]
pub struct Integrator {
    params: Params,
    grid: Grid,
    spectral: Spectral,
    pump_half: Vec<Complex64>,
    signal_half: Vec<Complex64>,
    noise: NoiseDraw,
    /// `sqrt(2) c dt`, the weight of `xi dt` in the field increments.
    noise_weight: f64,
}

impl Integrator {
    pub fn new(params: &Params) -> Result<Self> {
        params.validate()?;
        let grid = build_grid(params)?;
        let (pump_half, signal_half) = linear_factors(params, &grid, params.dt / 2.0);
        Ok(Integrator {
            spectral: Spectral::new(grid.n_points),
            noise: NoiseDraw::zeros(grid.n_points),
            noise_weight: 2f64.sqrt() * params.noise_c * params.dt,
            pump_half,
            signal_half,
            grid,
            params: params.clone(),
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Exact propagation of the linear terms over `dt` (any sign).
    pub fn linear_step(&mut self, state: &mut FieldState, dt: f64) -> Result<()> {
        let (pump, signal) = linear_factors(&self.params, &self.grid, dt);
        self.check_len(state)?;
        self.spectral.forward_in_place(&mut state.alpha0)?;
        self.spectral.forward_in_place(&mut state.alpha1)?;
        mul_assign(&mut state.alpha0, &pump);
        mul_assign(&mut state.alpha1, &signal);
        self.spectral.inverse_in_place(&mut state.alpha0)?;
        self.spectral.inverse_in_place(&mut state.alpha1)?;
        state.time += dt;
        Ok(())
    }

    /// Nonlinear drift (explicit midpoint) plus noise increment over `dt`.
    /// With `noise = None` the classical equations are advanced.
    pub fn nonlinear_noise_step(
        &self,
        state: &mut FieldState,
        noise: Option<&NoiseDraw>,
        dt: f64,
    ) -> Result<()> {
        self.check_len(state)?;
        let limit = guard::PUMP_MODULUS_LIMIT * guard::PUMP_MODULUS_LIMIT;
        let max = guard::max_norm_sqr(&state.alpha0);
        if noise.is_some() && !(max < limit) {
            if max.is_nan() {
                return Err(Error::NonFinite { time: state.time });
            }
            return Err(Error::GuardViolation {
                modulus: max.sqrt(),
            });
        }
        let weight = 2f64.sqrt() * self.params.noise_c * dt;
        nonlinear_kernel(
            &mut state.alpha0,
            &mut state.alpha1,
            self.params.pump_e,
            dt,
            noise.map(|n| (n, weight)),
        );
        if !state.is_finite() {
            return Err(Error::NonFinite { time: state.time });
        }
        Ok(())
    }

    /// Integrates `state` for `params.total_steps()` steps, forwarding
    /// post-transient snapshots to `sampler` every `stride_steps()` steps.
    /// A guard trip ends the run with a rejected outcome.
    pub fn run<R, S>(
        &mut self,
        mut state: FieldState,
        rng: &mut R,
        sampler: &mut S,
    ) -> Result<TrajectoryOutcome>
    where
        R: rand::Rng + ?Sized,
        S: Sampler + ?Sized,
    {
        self.check_len(&state)?;
        let total = self.params.total_steps();
        let transient = self.params.transient_steps();
        let stride = self.params.stride_steps();
        let dt = self.params.dt;
        let dx = self.grid.dx;
        let noise_on = self.params.noise_enabled;
        let pump_e = self.params.pump_e;
        let t0 = state.time;
        let limit = guard::PUMP_MODULUS_LIMIT * guard::PUMP_MODULUS_LIMIT;
        let mut samples = 0u64;

        // Leading half step; later half steps are fused pairwise. The unitary
        // normalization is folded into the mode multipliers.
        let norm = 1.0 / (self.grid.n_points as f64).sqrt();
        let pump_half: Vec<Complex64> = self.pump_half.iter().map(|f| f * norm).collect();
        let signal_half: Vec<Complex64> = self.signal_half.iter().map(|f| f * norm).collect();
        self.spectral.forward_raw(&mut state.alpha0);
        self.spectral.forward_raw(&mut state.alpha1);
        mul_assign(&mut state.alpha0, &pump_half);
        mul_assign(&mut state.alpha1, &signal_half);
        self.spectral.inverse_raw(&mut state.alpha0);
        self.spectral.inverse_raw(&mut state.alpha1);
        state
            .alpha0
            .iter_mut()
            .chain(state.alpha1.iter_mut())
            .for_each(|z| *z *= norm);

        for step in 1..=total {
            let max = guard::max_norm_sqr(&state.alpha0);
            let signal_power: f64 = state.alpha1.iter().map(|z| z.norm_sqr()).sum();
            if max.is_nan() || !signal_power.is_finite() {
                return Err(Error::NonFinite { time: state.time });
            }
            if !(max < limit) {
                state.time = t0 + (step - 1) as f64 * dt;
                return Ok(TrajectoryOutcome {
                    status: TrajectoryStatus::Rejected,
                    rejection_time: Some(state.time),
                    samples_contributed: samples,
                    steps: step - 1,
                    final_state: state,
                });
            }
            let noise = if noise_on {
                self.noise.refill(rng, dx, dt);
                Some((&self.noise, self.noise_weight))
            } else {
                None
            };
            nonlinear_kernel(&mut state.alpha0, &mut state.alpha1, pump_e, dt, noise);

            self.spectral.forward_raw(&mut state.alpha0);
            self.spectral.forward_raw(&mut state.alpha1);
            mul_assign(&mut state.alpha0, &pump_half);
            mul_assign(&mut state.alpha1, &signal_half);
            state.time = t0 + step as f64 * dt;
            if step > transient && (step - transient) % stride == 0 {
                sampler.sample(&ModeSnapshot {
                    time: state.time,
                    pump: &state.alpha0,
                    signal: &state.alpha1,
                });
                samples += 1;
            }
            if step < total {
                mul_assign(&mut state.alpha0, &pump_half);
                mul_assign(&mut state.alpha1, &signal_half);
            } else {
                state
                    .alpha0
                    .iter_mut()
                    .chain(state.alpha1.iter_mut())
                    .for_each(|z| *z *= norm);
            }
            self.spectral.inverse_raw(&mut state.alpha0);
            self.spectral.inverse_raw(&mut state.alpha1);
        }
        if !state.is_finite() {
            return Err(Error::NonFinite { time: state.time });
        }
        Ok(TrajectoryOutcome {
            status: TrajectoryStatus::Completed,
            rejection_time: None,
            samples_contributed: samples,
            steps: total,
            final_state: state,
        })
    }

    fn check_len(&self, state: &FieldState) -> Result<()> {
        for len in [state.alpha0.len(), state.alpha1.len()] {
            if len != self.grid.n_points {
                return Err(Error::LengthMismatch {
                    expected: self.grid.n_points,
                    got: len,
                });
            }
        }
        Ok(())
    }
}

/// Mode multipliers `exp(-(1 + i d0 + i k^2) dt)` and `exp(-(1 + i d1 + 2 i k^2) dt)`.
pub fn linear_factors(params: &Params, grid: &Grid, dt: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let pump = grid
        .k
        .iter()
        .map(|k| (-Complex64::new(1.0, params.delta0 + k * k) * dt).exp())
        .collect();
    let signal = grid
        .k
        .iter()
        .map(|k| (-Complex64::new(1.0, params.delta1 + 2.0 * k * k) * dt).exp())
        .collect();
    (pump, signal)
}

#[inline]
fn mul_assign(field: &mut [Complex64], factors: &[Complex64]) {
    for (z, f) in field.iter_mut().zip(factors) {
        *z *= f;
    }
}

/// Pointwise update: midpoint rule for `(E - a1^2/2, a0 a1*)`, then the noise
/// increments `w xi0` and `w xi1(a0)` evaluated at the start of the step.
#[inline]
fn nonlinear_kernel(
    alpha0: &mut [Complex64],
    alpha1: &mut [Complex64],
    pump_e: f64,
    dt: f64,
    noise: Option<(&NoiseDraw, f64)>,
) {
    let half = 0.5 * dt;
    match noise {
        Some((draw, weight)) => {
            let n = alpha0.len();
            let (a0s, a1s) = (&mut alpha0[..n], &mut alpha1[..n]);
            let (xi0, phi, psi) = (&draw.xi0[..n], &draw.phi[..n], &draw.psi[..n]);
            for j in 0..n {
                let (a0, a1) = (a0s[j], a1s[j]);
                let xi1 = noise::synth_unchecked(a0, phi[j], psi[j]);
                let (n0, n1) = midpoint(a0, a1, pump_e, dt, half);
                a0s[j] = n0 + weight * xi0[j];
                a1s[j] = n1 + weight * xi1;
            }
        }
        None => {
            for j in 0..alpha0.len() {
                let (n0, n1) = midpoint(alpha0[j], alpha1[j], pump_e, dt, half);
                alpha0[j] = n0;
                alpha1[j] = n1;
            }
        }
    }
}

#[inline(always)]
fn midpoint(
    a0: Complex64,
    a1: Complex64,
    pump_e: f64,
    dt: f64,
    half: f64,
) -> (Complex64, Complex64) {
    let m0 = a0 + half * (pump_e - 0.5 * a1 * a1);
    let m1 = a1 + half * (a0 * a1.conj());
    (
        a0 + dt * (pump_e - 0.5 * m1 * m1),
        a1 + dt * (m0 * m1.conj()),
    )
}

/// Runs trajectory `index` of an ensemble: derives its random stream from
/// `(params.seed, index)`, builds the initial condition and integrates.
pub fn run_trajectory<S: Sampler + ?Sized>(
    params: &Params,
    index: u64,
    sampler: &mut S,
) -> Result<TrajectoryOutcome> {
    let mut integrator = Integrator::new(params)?;
    let mut rng = trajectory_rng(params.seed, index);
    let state = make_initial_condition(params.init_kind, params, integrator.grid(), &mut rng)?;
    integrator.run(state, &mut rng, sampler)
}
