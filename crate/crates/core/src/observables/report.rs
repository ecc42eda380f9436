use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    autocorrelation_time, number_moments, phase_sum, quadrature_variances, twin_variance, Estimate,
    Field, MomentAccumulator, PhaseSum,
};
use crate::error::Result;
use crate::lattice::{Grid, Params};
use crate::linear::critical_wavenumber;

/// One CSV row: all observables of the mode `m` (wavenumber `k = m dk`).
///
/// Occupations are normal ordered, in photons per mode. Twin and quadrature
/// variances are normal ordered and divided by their shot-noise level, so 0
/// is the coherent-state value and negative values are non-classical. Pair
/// quantities are repeated on the `+m` and `-m` rows and left empty where
/// undefined (unpaired modes, vacuum pairs). Phases are in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraRow {
    pub k: f64,
    pub m: i64,
    pub mean_n1: f64,
    pub mean_n1_stderr: f64,
    pub mean_n0: f64,
    pub mean_n0_stderr: f64,
    pub var_n1: f64,
    pub var_n1_stderr: f64,
    pub v_twin: Option<f64>,
    pub v_twin_stderr: Option<f64>,
    pub v_twin_pump: Option<f64>,
    pub v_twin_pump_stderr: Option<f64>,
    pub xminus_var: Option<f64>,
    pub xminus_var_stderr: Option<f64>,
    pub xplus_var: Option<f64>,
    pub xplus_var_stderr: Option<f64>,
    pub phase_sum: Option<f64>,
    pub phase_sum_stderr: Option<f64>,
    pub phase_locked: Option<bool>,
    pub samples: u64,
}

/// JSON sidecar of a spectra table. Holds nothing that varies between two
/// runs of the same configuration; wall-clock figures go to the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub code_version: String,
    pub config_hash: Option<String>,
    pub preset: Option<String>,
    pub params: Params,
    pub seed: u64,
    pub trajectories: u64,
    pub rejected: u64,
    pub rejected_indices: Vec<u64>,
    pub partial: bool,
    pub samples: u64,
    pub samples_per_block: u64,
    pub k_c: Option<f64>,
    pub k_c_mode: Option<i64>,
    /// Of `|beta_{k_c}|^2`, in samples.
    pub autocorrelation_samples: Option<f64>,
    pub phase_sum_k_c: Option<PhaseSum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraReport {
    pub rows: Vec<SpectraRow>,
    pub metadata: ReportMetadata,
}

fn split(e: Option<Estimate>) -> (Option<f64>, Option<f64>) {
    match e {
        Some(e) => (Some(e.value), Some(e.stderr)),
        None => (None, None),
    }
}

impl SpectraReport {
    /// Evaluates every observable on `acc`. Run bookkeeping (seed, counts,
    /// hash) is left at neutral values for the caller to fill in.
    pub fn from_accumulator(acc: &MomentAccumulator, grid: &Grid, params: &Params) -> Self {
        let samples = acc.samples();
        let mut rows = Vec::with_capacity(grid.n_points);
        for m in grid.ascending_modes() {
            let j = grid.index_of(m);
            let (n1, v1) = number_moments(acc, Field::Signal, j).unwrap_or((
                super::mean_occupation(acc, Field::Signal, j)
                    .unwrap_or(Estimate::new(f64::NAN, f64::NAN)),
                Estimate::new(f64::NAN, f64::NAN),
            ));
            let (n0, _) = number_moments(acc, Field::Pump, j).unwrap_or((
                super::mean_occupation(acc, Field::Pump, j)
                    .unwrap_or(Estimate::new(f64::NAN, f64::NAN)),
                Estimate::new(f64::NAN, f64::NAN),
            ));
            let (v_twin, v_twin_stderr) = split(twin_variance(acc, Field::Signal, m).ok());
            let (v_pump, v_pump_stderr) = split(twin_variance(acc, Field::Pump, m).ok());
            let quad = quadrature_variances(acc, m, 2).ok();
            let (xm, xm_se) = split(quad.map(|q| q.0));
            let (xp, xp_se) = split(quad.map(|q| q.1));
            let phase = phase_sum(acc, m).ok();
            let (ph, ph_se) = split(phase.map(|p| p.mean));
            rows.push(SpectraRow {
                k: m as f64 * grid.dk,
                m,
                mean_n1: n1.value,
                mean_n1_stderr: n1.stderr,
                mean_n0: n0.value,
                mean_n0_stderr: n0.stderr,
                var_n1: v1.value,
                var_n1_stderr: v1.stderr,
                v_twin,
                v_twin_stderr,
                v_twin_pump: v_pump,
                v_twin_pump_stderr: v_pump_stderr,
                xminus_var: xm,
                xminus_var_stderr: xm_se,
                xplus_var: xp,
                xplus_var_stderr: xp_se,
                phase_sum: ph,
                phase_sum_stderr: ph_se,
                phase_locked: phase.map(|p| p.locked),
                samples,
            });
        }

        let k_c = critical_wavenumber(params.delta1).ok();
        let k_c_mode = k_c
            .map(|k| grid.nearest_mode(k))
            .filter(|&m| m > 0 && m < grid.n_points as i64 / 2);
        let autocorrelation_samples = k_c_mode.and_then(|m| {
            autocorrelation_time(acc, acc.layout().intensity(Field::Signal, grid.index_of(m)))
        });
        let metadata = ReportMetadata {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: None,
            preset: None,
            params: params.clone(),
            seed: params.seed,
            trajectories: acc.trajectories(),
            rejected: 0,
            rejected_indices: Vec::new(),
            partial: false,
            samples,
            samples_per_block: acc.block_len(),
            k_c,
            k_c_mode,
            autocorrelation_samples,
            phase_sum_k_c: k_c_mode.and_then(|m| phase_sum(acc, m).ok()),
        };
        SpectraReport { rows, metadata }
    }

    pub fn row(&self, m: i64) -> Option<&SpectraRow> {
        self.rows.iter().find(|r| r.m == m)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<SpectraRow>> {
        let mut r = csv::Reader::from_reader(input);
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<SpectraRow>, _>>()?;
        Ok(rows)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.metadata)?;
        Ok(())
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(std::fs::File::create(dir.join(format!("{stem}.csv")))?)?;
        let mut json = std::fs::File::create(dir.join(format!("{stem}.json")))?;
        self.write_json(&mut json)?;
        json.write_all(b"\n")?;
        Ok(())
    }
}
