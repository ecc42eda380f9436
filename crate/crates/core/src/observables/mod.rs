//! Shot-noise normalized observables from Q-representation samples.
//!
//! Samples of the field are antinormally ordered. Number moments pick up
//! `+1` per mode and quadrature second moments `+2` per mode when converted
//! to normal order; the conversion is applied only when estimates are read
//! out, the accumulators stay in Q units.

mod accumulator;
mod modes;
mod report;

pub use accumulator::{Block, Field, MomentAccumulator, Moments, PairSeries, SeriesLayout};
pub use modes::{mode_amplitudes, mode_scale, ModeAmplitudes};
pub use report::{ReportMetadata, SpectraReport, SpectraRow};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of jackknife groups.
pub const JACKKNIFE_GROUPS: usize = 64;

/// Shot-noise level of the two-mode quadratures `X(k) +- X(-k)`.
pub const QUADRATURE_SHOT_NOISE: f64 = 2.0;

/// A value with its statistical standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(value: f64, stderr: f64) -> Self {
        Estimate { value, stderr }
    }

    /// Distance from `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target) / self.stderr
    }
}

/// Delete-one-group jackknife of `f` over the totals of `slots`.
///
/// `f` receives the merged moments of each slot (in the order given) and
/// returns `None` where it is undefined. The returned value is `f` on the
/// full data; the error is NaN with fewer than two groups.
pub fn jackknife<F>(acc: &MomentAccumulator, slots: &[usize], f: F) -> Option<Estimate>
where
    F: Fn(&[Moments]) -> Option<f64>,
{
    let groups = acc.grouped(slots, JACKKNIFE_GROUPS);
    let totals: Vec<Moments> = (0..slots.len())
        .map(|s| {
            groups
                .iter()
                .fold(Moments::default(), |a, g| a.merge(&g[s]))
        })
        .collect();
    let value = f(&totals)?;
    let g = groups.len();
    if g < 2 {
        return Some(Estimate::new(value, f64::NAN));
    }
    let mut leave_out = Vec::with_capacity(g);
    for group in &groups {
        let rest: Vec<Moments> = totals
            .iter()
            .zip(group)
            .map(|(t, part)| t.remove(part))
            .collect();
        leave_out.push(f(&rest)?);
    }
    let mean = leave_out.iter().sum::<f64>() / g as f64;
    let ss: f64 = leave_out.iter().map(|v| (v - mean).powi(2)).sum();
    let stderr = ((g as f64 - 1.0) / g as f64 * ss).sqrt();
    Some(Estimate::new(value, stderr))
}

/// Converts the Q moments of `|beta|^2`, `m1 = <|beta|^2>` and
/// `m2 = <|beta|^4>`, into the normal-ordered mean occupation and number
/// variance.
///
/// Undershoot of the vacuum level is tolerated up to five standard errors of
/// `m1` and the mean is clipped at zero.
pub fn reorder_number_moments(m1: f64, m2: f64, m1_stderr: f64) -> Result<(f64, f64)> {
    let tolerance = if m1_stderr.is_finite() {
        5.0 * m1_stderr
    } else {
        0.0
    };
    if !(m1 >= 1.0 - tolerance) {
        return Err(Error::UnphysicalMoments { m1 });
    }
    let mean_n = (m1 - 1.0).max(0.0);
    let var_n = (m2 - m1 * m1) - 2.0 * mean_n - 1.0;
    Ok((mean_n, var_n))
}

fn need_samples(acc: &MomentAccumulator, min_samples: u64) -> Result<()> {
    let have = acc.samples();
    if have < min_samples.max(2) {
        return Err(Error::InsufficientSamples {
            have,
            need: min_samples.max(2),
        });
    }
    Ok(())
}

fn pair_index(acc: &MomentAccumulator, m: i64) -> Result<usize> {
    let n = acc.layout().n_points as i64;
    let p = m.unsigned_abs() as i64;
    if p == 0 || p >= n / 2 {
        return Err(Error::Unpaired(m));
    }
    Ok(p as usize - 1)
}

/// Normal-ordered mean occupation of the storage-order mode `j`.
pub fn mean_occupation(acc: &MomentAccumulator, field: Field, j: usize) -> Option<Estimate> {
    let slot = acc.layout().intensity(field, j);
    jackknife(acc, &[slot], |t| Some(t[0].mean - 1.0))
}

/// Normal-ordered mean occupation and number variance of storage-order mode `j`.
pub fn number_moments(
    acc: &MomentAccumulator,
    field: Field,
    j: usize,
) -> Result<(Estimate, Estimate)> {
    need_samples(acc, 2)?;
    let slot = acc.layout().intensity(field, j);
    let m1 = jackknife(acc, &[slot], |t| Some(t[0].mean)).expect("defined");
    let total = acc.total(slot);
    let (mean_n, _) = reorder_number_moments(m1.value, total.raw_second(), m1.stderr)?;
    let var = jackknife(acc, &[slot], |t| {
        let mean_n = (t[0].mean - 1.0).max(0.0);
        Some(t[0].variance() - 2.0 * mean_n - 1.0)
    })
    .expect("defined");
    Ok((Estimate::new(mean_n, m1.stderr), var))
}

/// Twin-beam variance of the signal (or pump) pair `+-m`: the normal-ordered
/// variance of `N(k) - N(-k)` relative to its shot-noise level
/// `<:N(k):> + <:N(-k):>`.
pub fn twin_variance(acc: &MomentAccumulator, field: Field, m: i64) -> Result<Estimate> {
    let p = pair_index(acc, m)?;
    need_samples(acc, 2)?;
    let layout = acc.layout();
    let (jp, jm) = layout.pairs[p];
    let slots = [
        layout.pair(field, p, PairSeries::Difference),
        layout.intensity(field, jp),
        layout.intensity(field, jm),
    ];
    let denominator = |t: &[Moments]| t[1].mean + t[2].mean - 2.0;
    let sum = jackknife(acc, &slots, |t| Some(denominator(t))).expect("defined");
    let floor = if sum.stderr.is_finite() {
        3.0 * sum.stderr
    } else {
        0.0
    };
    if !(sum.value > floor) {
        return Err(Error::UndefinedForVacuum {
            sum: sum.value,
            floor,
        });
    }
    jackknife(acc, &slots, |t| {
        let d = denominator(t);
        (d > 0.0).then(|| (t[0].variance() - 2.0 * d - 2.0) / d)
    })
    .ok_or(Error::UndefinedForVacuum {
        sum: sum.value,
        floor,
    })
}

/// Shot-noise normalized normal-ordered variances of `X(k) - X(-k)` and
/// `X(k) + X(-k)` for the signal pair `+-m`, with `X = beta + beta*`.
pub fn quadrature_variances(
    acc: &MomentAccumulator,
    m: i64,
    min_samples: u64,
) -> Result<(Estimate, Estimate)> {
    let p = pair_index(acc, m)?;
    need_samples(acc, min_samples)?;
    let layout = acc.layout();
    let normalized = |series| {
        let slot = layout.pair(Field::Signal, p, series);
        jackknife(acc, &[slot], |t| {
            Some((t[0].variance() - 2.0 * QUADRATURE_SHOT_NOISE) / QUADRATURE_SHOT_NOISE)
        })
        .expect("defined")
    };
    Ok((
        normalized(PairSeries::XMinus),
        normalized(PairSeries::XPlus),
    ))
}

/// Circular mean of `theta_+ + theta_-` for the signal pair `+-m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSum {
    /// `arg <exp(i(theta_+ + theta_-))>` in `(-pi, pi]`.
    pub mean: Estimate,
    /// Length of the mean resultant vector.
    pub resultant: Estimate,
    /// False when the resultant is within three standard errors of zero,
    /// i.e. the phases are not locked and `mean` carries no information.
    pub locked: bool,
}

pub fn phase_sum(acc: &MomentAccumulator, m: i64) -> Result<PhaseSum> {
    let p = pair_index(acc, m)?;
    need_samples(acc, 2)?;
    let layout = acc.layout();
    let slots = [
        layout.pair(Field::Signal, p, PairSeries::PhaseCos),
        layout.pair(Field::Signal, p, PairSeries::PhaseSin),
    ];
    let resultant = jackknife(acc, &slots, |t| Some(t[0].mean.hypot(t[1].mean))).expect("defined");
    let centre = {
        let t: Vec<Moments> = slots.iter().map(|&s| acc.total(s)).collect();
        t[1].mean.atan2(t[0].mean)
    };
    // Wrap leave-one-out angles around the full-data angle before averaging.
    let mean = jackknife(acc, &slots, |t| {
        let a = t[1].mean.atan2(t[0].mean);
        let d = (a - centre + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU)
            - std::f64::consts::PI;
        Some(centre + d)
    })
    .expect("defined");
    let locked = resultant.stderr.is_finite() && resultant.value > 3.0 * resultant.stderr;
    Ok(PhaseSum {
        mean,
        resultant,
        locked,
    })
}

/// Normal-ordered mean occupations of every mode in storage order, signal
/// then pump.
pub fn mean_intensity_spectra(acc: &MomentAccumulator) -> (Vec<Estimate>, Vec<Estimate>) {
    let n = acc.layout().n_points;
    let spectrum = |field| {
        (0..n)
            .map(|j| mean_occupation(acc, field, j).expect("defined"))
            .collect()
    };
    (spectrum(Field::Signal), spectrum(Field::Pump))
}

/// Integrated autocorrelation time of one series, in samples, from the
/// spread of block means: `tau = B Var(block mean) / (2 Var(sample))`.
/// Meaningful only when blocks are much longer than `tau`.
pub fn autocorrelation_time(acc: &MomentAccumulator, slot: usize) -> Option<f64> {
    let blocks: Vec<&Moments> = acc
        .blocks()
        .iter()
        .filter(|b| b.count == acc.block_len())
        .map(|b| &b.stats[slot])
        .collect();
    if blocks.len() < 2 {
        return None;
    }
    let mut means = Moments::default();
    blocks.iter().for_each(|m| means.push(m.mean));
    let total = acc.total(slot);
    let var = total.variance();
    if !(var > 0.0) {
        return None;
    }
    Some((acc.block_len() as f64 * means.variance() / var - 1.0).max(0.0) / 2.0)
}
