//! Ensembles of independent trajectories and their output files.
//!
//! Trajectory `i` draws from the `i`-th jump of the master seed's stream,
//! runs on the rayon pool, and fills its own accumulator. Completed
//! accumulators are merged in index order, so the result does not depend on
//! the number of threads. Trajectories stopped by the positivity guard are
//! left out of every statistic.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::engine::checkpoint::{read_checkpoint, CheckpointHeader, CheckpointWriter};
use crate::engine::{
    make_initial_condition, trajectory_rng, Integrator, ModeSnapshot, Sampler, TrajectoryOutcome,
};
use crate::error::{Error, Result};
use crate::lattice::{build_grid, FieldState, Grid, Params, Spectral};
use crate::observables::{
    mean_occupation, mode_amplitudes, mode_scale, Estimate, Field, MomentAccumulator, SpectraReport,
};

/// Records near- and far-field snapshots as CSV text.
pub struct SnapshotRecorder {
    every: u64,
    seen: u64,
    scale: f64,
    grid: Grid,
    spectral: Spectral,
    near: String,
    far: String,
}

impl SnapshotRecorder {
    pub fn new(params: &Params, every: u64) -> Result<Self> {
        let grid = build_grid(params)?;
        Ok(SnapshotRecorder {
            every: every.max(1),
            seen: 0,
            scale: mode_scale(params),
            spectral: Spectral::new(grid.n_points),
            grid,
            near: "time,x,alpha1_re,alpha1_im,alpha0_re,alpha0_im\n".into(),
            far: "time,k,m,q1,q0\n".into(),
        })
    }

    /// Near-field CSV: fields on the lattice.
    pub fn near_field(&self) -> &str {
        &self.near
    }

    /// Far-field CSV: Q-sample intensities `|beta|^2` per mode, ascending `k`.
    pub fn far_field(&self) -> &str {
        &self.far
    }
}

impl Sampler for SnapshotRecorder {
    fn sample(&mut self, snap: &ModeSnapshot<'_>) {
        self.seen += 1;
        if (self.seen - 1) % self.every != 0 {
            return;
        }
        let t = snap.time;
        let (Ok(a1), Ok(a0)) = (
            self.spectral.inverse_transform(snap.signal),
            self.spectral.inverse_transform(snap.pump),
        ) else {
            return;
        };
        for (j, x) in self.grid.x.iter().enumerate() {
            let _ = writeln!(
                self.near,
                "{t},{x},{},{},{},{}",
                a1[j].re, a1[j].im, a0[j].re, a0[j].im
            );
        }
        for m in self.grid.ascending_modes() {
            let j = self.grid.index_of(m);
            let k = m as f64 * self.grid.dk;
            let q1 = (snap.signal[j] * self.scale).norm_sqr();
            let q0 = (snap.pump[j] * self.scale).norm_sqr();
            let _ = writeln!(self.far, "{t},{k},{m},{q1},{q0}");
        }
    }
}

/// Per-trajectory bookkeeping.
#[derive(Debug, Clone)]
pub struct TrajectorySummary {
    pub index: u64,
    pub rejected: bool,
    pub rejection_time: Option<f64>,
    pub samples: u64,
    pub steps: u64,
    pub final_state: FieldState,
}

pub struct EnsembleRun {
    pub config: RunConfig,
    pub report: SpectraReport,
    pub accumulator: MomentAccumulator,
    pub trajectories: Vec<TrajectorySummary>,
    pub snapshots: Option<SnapshotRecorder>,
    pub wall_seconds: f64,
}

impl EnsembleRun {
    pub fn rejected(&self) -> usize {
        self.trajectories.iter().filter(|t| t.rejected).count()
    }

    pub fn steps(&self) -> u64 {
        self.trajectories.iter().map(|t| t.steps).sum()
    }

    /// Final state of the first completed trajectory.
    pub fn final_state(&self) -> Option<&FieldState> {
        self.trajectories
            .iter()
            .find(|t| !t.rejected)
            .map(|t| &t.final_state)
    }
}

/// File name of trajectory `index`'s checkpoint.
pub fn checkpoint_path(dir: &Path, index: u64) -> PathBuf {
    dir.join(format!("checkpoint_{index:04}.bin"))
}

struct TrajectoryResult {
    acc: MomentAccumulator,
    outcome: TrajectoryOutcome,
    snapshots: Option<SnapshotRecorder>,
}

fn run_one(cfg: &RunConfig, index: u64, grid: &Grid) -> Result<TrajectoryResult> {
    let params = &cfg.params;
    let mut integrator = Integrator::new(params)?;
    let mut rng = trajectory_rng(params.seed, index);
    let state = make_initial_condition(params.init_kind, params, grid, &mut rng)?;
    let mut acc = MomentAccumulator::new(grid, mode_scale(params), cfg.block_samples());
    let mut snapshots = if cfg.snapshot_every > 0 && index == 0 {
        Some(SnapshotRecorder::new(params, cfg.snapshot_every)?)
    } else {
        None
    };
    let outcome = if cfg.checkpoint_every > 0 {
        std::fs::create_dir_all(&cfg.output_dir)?;
        let file = BufWriter::new(File::create(checkpoint_path(&cfg.output_dir, index))?);
        let header = CheckpointHeader::from_params(params, index);
        let mut writer = CheckpointWriter::new(file, &header, cfg.checkpoint_every)?;
        let outcome = integrator.run(
            state,
            &mut rng,
            &mut (&mut acc, (&mut writer, &mut snapshots)),
        )?;
        writer.finish()?.flush()?;
        outcome
    } else {
        integrator.run(state, &mut rng, &mut (&mut acc, &mut snapshots))?
    };
    acc.end_trajectory();
    Ok(TrajectoryResult {
        acc,
        outcome,
        snapshots,
    })
}

/// Runs `cfg.n_trajectories` trajectories and evaluates the observables.
///
/// Checkpoints (if enabled) are written while running; everything else stays
/// in memory until [`write_artifacts`].
pub fn run_ensemble(cfg: &RunConfig) -> Result<EnsembleRun> {
    cfg.validate()?;
    let params = &cfg.params;
    let grid = build_grid(params)?;
    let started = Instant::now();
    let results: Vec<Result<TrajectoryResult>> = (0..cfg.n_trajectories as u64)
        .into_par_iter()
        .map(|i| run_one(cfg, i, &grid))
        .collect();
    let wall_seconds = started.elapsed().as_secs_f64();

    let mut acc = MomentAccumulator::new(&grid, mode_scale(params), cfg.block_samples());
    let mut trajectories = Vec::with_capacity(results.len());
    let mut snapshots = None;
    for (i, r) in results.into_iter().enumerate() {
        let r = r?;
        let rejected = r.outcome.is_rejected();
        if !rejected {
            acc.merge(&r.acc);
        }
        if r.snapshots.is_some() {
            snapshots = r.snapshots;
        }
        trajectories.push(TrajectorySummary {
            index: i as u64,
            rejected,
            rejection_time: r.outcome.rejection_time,
            samples: r.outcome.samples_contributed,
            steps: r.outcome.steps,
            final_state: r.outcome.final_state,
        });
    }
    let n_rejected = trajectories.iter().filter(|t| t.rejected).count();
    if n_rejected == trajectories.len() {
        return Err(Error::AllRejected(n_rejected));
    }

    let mut report = SpectraReport::from_accumulator(&acc, &grid, params);
    let meta = &mut report.metadata;
    meta.config_hash = Some(cfg.hash());
    meta.preset = cfg.preset.clone();
    meta.rejected = n_rejected as u64;
    meta.rejected_indices = trajectories
        .iter()
        .filter(|t| t.rejected)
        .map(|t| t.index)
        .collect();
    meta.partial = n_rejected > 0;
    meta.trajectories = trajectories.len() as u64;

    Ok(EnsembleRun {
        config: cfg.clone(),
        report,
        accumulator: acc,
        trajectories,
        snapshots,
        wall_seconds,
    })
}

/// Human-readable run log. The only output that carries wall-clock figures.
pub fn run_log(run: &EnsembleRun) -> String {
    let mut s = String::new();
    let cfg = &run.config;
    let m = &run.report.metadata;
    let _ = writeln!(s, "dopoq {}", m.code_version);
    let _ = writeln!(s, "config_hash {}", cfg.hash());
    if let Some(p) = &cfg.preset {
        let _ = writeln!(s, "preset {p}");
    }
    for t in &run.trajectories {
        match t.rejection_time {
            Some(time) if t.rejected => {
                let _ = writeln!(
                    s,
                    "trajectory {} rejected at t = {time} (positivity guard)",
                    t.index
                );
            }
            _ => {
                let _ = writeln!(s, "trajectory {} completed, {} samples", t.index, t.samples);
            }
        }
    }
    let steps = run.steps();
    let _ = writeln!(
        s,
        "trajectories {} rejected {}",
        run.trajectories.len(),
        run.rejected()
    );
    let _ = writeln!(s, "partial {}", m.partial);
    let _ = writeln!(s, "samples {}", m.samples);
    let _ = writeln!(s, "steps {steps}");
    let _ = writeln!(s, "wall_seconds {:.3}", run.wall_seconds);
    let _ = writeln!(
        s,
        "steps_per_second {:.0}",
        steps as f64 / run.wall_seconds.max(1e-9)
    );
    if let Some(tau) = m.autocorrelation_samples {
        let _ = writeln!(
            s,
            "autocorrelation_samples {tau:.3} (block length {} samples)",
            m.samples_per_block
        );
    }
    s
}

fn write_state_csv<W: Write>(mut out: W, grid: &Grid, state: &FieldState) -> Result<()> {
    writeln!(out, "x,alpha1_re,alpha1_im,alpha0_re,alpha0_im")?;
    for (j, x) in grid.x.iter().enumerate() {
        let (a1, a0) = (state.alpha1[j], state.alpha0[j]);
        writeln!(out, "{x},{},{},{},{}", a1.re, a1.im, a0.re, a0.im)?;
    }
    Ok(())
}

/// Writes `spectra.csv`, `spectra.json`, `run.log`, `config.txt`,
/// `final_state.csv` and, when recorded, `near_field.csv`/`far_field.csv`
/// into the configured output directory.
pub fn write_artifacts(run: &EnsembleRun) -> Result<()> {
    let dir = &run.config.output_dir;
    std::fs::create_dir_all(dir)?;
    run.report.save(dir, "spectra")?;
    std::fs::write(dir.join("run.log"), run_log(run))?;
    std::fs::write(dir.join("config.txt"), run.config.to_text())?;
    if let Some(state) = run.final_state() {
        let grid = build_grid(&run.config.params)?;
        write_state_csv(
            BufWriter::new(File::create(dir.join("final_state.csv"))?),
            &grid,
            state,
        )?;
    }
    if let Some(snap) = &run.snapshots {
        std::fs::write(dir.join("near_field.csv"), snap.near_field())?;
        std::fs::write(dir.join("far_field.csv"), snap.far_field())?;
    }
    Ok(())
}

/// Rebuilds a spectra report from checkpoint files. Statistics use the
/// stored frames only; `block_frames` frames form one statistics block.
pub fn analyze_checkpoints(paths: &[PathBuf], block_frames: u64) -> Result<SpectraReport> {
    let mut params: Option<Params> = None;
    let mut acc: Option<MomentAccumulator> = None;
    let mut spectral = None;
    let mut seed = 0;
    for path in paths {
        let (header, frames) = read_checkpoint(&mut BufReader::new(File::open(path)?))?;
        let p = Params {
            n_points: header.n_points as usize,
            length_l: header.length_l,
            noise_c: header.noise_c,
            dt: header.dt,
            pump_e: header.pump_e,
            delta0: header.delta0,
            delta1: header.delta1,
            seed: header.seed,
            ..Params::default()
        };
        match &params {
            None => {
                let grid = build_grid(&p)?;
                acc = Some(MomentAccumulator::new(&grid, 1.0, block_frames));
                spectral = Some(Spectral::new(grid.n_points));
                seed = header.seed;
                params = Some(p.clone());
            }
            Some(first) if first.n_points != p.n_points || first.length_l != p.length_l => {
                return Err(Error::Checkpoint(format!(
                    "{} has a different lattice than the first file",
                    path.display()
                )));
            }
            Some(_) => {}
        }
        let (params, acc, spectral) = (
            params.as_ref().expect("set"),
            acc.as_mut().expect("set"),
            spectral.as_mut().expect("set"),
        );
        let grid = build_grid(params)?;
        for state in &frames {
            let beta = mode_amplitudes(state, params, &grid, spectral)?;
            acc.push_amplitudes(&beta.signal, &beta.pump);
        }
        acc.end_trajectory();
    }
    let (params, acc) = match (params, acc) {
        (Some(p), Some(a)) => (p, a),
        _ => return Err(Error::Checkpoint("no checkpoint files given".into())),
    };
    if acc.samples() == 0 {
        return Err(Error::Checkpoint("checkpoints contain no frames".into()));
    }
    let grid = build_grid(&params)?;
    let mut report = SpectraReport::from_accumulator(&acc, &grid, &params);
    report.metadata.seed = seed;
    Ok(report)
}

/// Result of an `E = 0` vacuum run: the Q-representation mean `<|beta_k|^2>`
/// of every signal mode, which should be 1.
pub struct Calibration {
    pub run: EnsembleRun,
    /// Ascending `m`, paired with `<|beta|^2>`.
    pub modes: Vec<(i64, Estimate)>,
}

impl Calibration {
    /// Largest `|<|beta|^2> - 1|` over all modes.
    pub fn max_deviation(&self) -> f64 {
        self.modes
            .iter()
            .map(|(_, e)| (e.value - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Runs `cfg` with the pump switched off and noise on.
pub fn calibrate(cfg: &RunConfig) -> Result<Calibration> {
    let mut cfg = cfg.clone();
    cfg.params.pump_e = 0.0;
    cfg.params.noise_enabled = true;
    let run = run_ensemble(&cfg)?;
    let grid = build_grid(&cfg.params)?;
    let modes = grid
        .ascending_modes()
        .map(|m| {
            let e = mean_occupation(&run.accumulator, Field::Signal, grid.index_of(m))
                .expect("defined");
            (m, Estimate::new(e.value + 1.0, e.stderr))
        })
        .collect();
    Ok(Calibration { run, modes })
}
