//! Run configuration files and figure presets.
//!
//! The format is one `key = value` per line; `#` starts a comment. Keys not
//! given keep their defaults. When `length_L` is omitted the system size is
//! four critical wavelengths of the configured `delta1`.
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `delta0`, `delta1` | cavity detunings | 0, -0.18 |
//! | `pump_E` | pump amplitude | 0.99 |
//! | `noise_c` | noise strength | 1e-4 |
//! | `noise` | `on` / `off` | on |
//! | `n_points` | lattice points, power of two | 64 |
//! | `length_L` | system size | 4 * 2 pi / k_c |
//! | `dt` | time step | 0.01 |
//! | `t_total` | trajectory length, transient included | 11000 |
//! | `t_transient` | discarded start | 1000 |
//! | `sample_stride` | time between samples | 1 |
//! | `seed` | master seed | 1 |
//! | `init` | `paper-modulated`, `noise`, `step`, `rolls` | paper-modulated |
//! | `roll_amplitude` | amplitude of `rolls` | 1 |
//! | `n_trajectories` | ensemble size | 8 |
//! | `output_dir` | artifact directory | `out` |
//! | `block_time` | statistics block length (time) | 1000 |
//! | `snapshot_every` | near/far-field record cadence in samples, 0 = off | 0 |
//! | `checkpoint_every` | checkpoint frame cadence in samples, 0 = off | 0 |
//! | `preset` | label of the preset this came from | none |

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::{four_critical_wavelengths, InitKind, Params};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: Params,
    pub n_trajectories: usize,
    pub output_dir: PathBuf,
    /// Statistics block length in time units.
    pub block_time: f64,
    /// Near- and far-field records of trajectory 0 every this many samples.
    pub snapshot_every: u64,
    /// Checkpoint frames every this many samples, one file per trajectory.
    pub checkpoint_every: u64,
    pub preset: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: Params::default(),
            n_trajectories: 8,
            output_dir: PathBuf::from("out"),
            block_time: 1000.0,
            snapshot_every: 0,
            checkpoint_every: 0,
            preset: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("`{key}`: cannot parse `{value}`"),
    })
}

fn parse_switch(line: usize, key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse {
            line,
            msg: format!("`{key}`: expected on/off, got `{value}`"),
        }),
    }
}

/// Parses and validates a configuration file.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut length_given = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(Error::Parse {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let p = &mut cfg.params;
        match key.to_ascii_lowercase().as_str() {
            "delta0" => p.delta0 = parse_num(line, key, value)?,
            "delta1" => p.delta1 = parse_num(line, key, value)?,
            "pump_e" | "e" => p.pump_e = parse_num(line, key, value)?,
            "noise_c" | "c" => p.noise_c = parse_num(line, key, value)?,
            "noise" => p.noise_enabled = parse_switch(line, key, value)?,
            "n_points" | "n" => p.n_points = parse_num(line, key, value)?,
            "length_l" | "l" => {
                p.length_l = parse_num(line, key, value)?;
                length_given = true;
            }
            "dt" => p.dt = parse_num(line, key, value)?,
            "t_total" => p.t_total = parse_num(line, key, value)?,
            "t_transient" => p.t_transient = parse_num(line, key, value)?,
            "sample_stride" => p.sample_stride = parse_num(line, key, value)?,
            "seed" => p.seed = parse_num(line, key, value)?,
            "init" | "init_kind" => {
                p.init_kind = value.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("`{key}`: unknown initial condition `{value}`"),
                })?
            }
            "roll_amplitude" => p.roll_amplitude = parse_num(line, key, value)?,
            "n_trajectories" => cfg.n_trajectories = parse_num(line, key, value)?,
            "output_dir" => cfg.output_dir = PathBuf::from(value),
            "block_time" => cfg.block_time = parse_num(line, key, value)?,
            "snapshot_every" => cfg.snapshot_every = parse_num(line, key, value)?,
            "checkpoint_every" => cfg.checkpoint_every = parse_num(line, key, value)?,
            "preset" => cfg.preset = Some(value.to_string()),
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key `{key}`"),
                })
            }
        }
    }
    if !length_given {
        cfg.params.length_l = four_critical_wavelengths(cfg.params.delta1);
    }
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_trajectories == 0 {
            return Err(crate::error::invalid(
                "n_trajectories",
                "must be at least 1",
            ));
        }
        if !(self.block_time > 0.0) || !self.block_time.is_finite() {
            return Err(crate::error::invalid("block_time", "must be positive"));
        }
        Ok(())
    }

    /// Canonical text form; `parse_config(cfg.to_text())` returns `cfg`.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("delta0", format!("{:?}", p.delta0));
        put("delta1", format!("{:?}", p.delta1));
        put("pump_E", format!("{:?}", p.pump_e));
        put("noise_c", format!("{:?}", p.noise_c));
        put("noise", if p.noise_enabled { "on" } else { "off" }.into());
        put("n_points", p.n_points.to_string());
        put("length_L", format!("{:?}", p.length_l));
        put("dt", format!("{:?}", p.dt));
        put("t_total", format!("{:?}", p.t_total));
        put("t_transient", format!("{:?}", p.t_transient));
        put("sample_stride", format!("{:?}", p.sample_stride));
        put("seed", p.seed.to_string());
        put("init", p.init_kind.to_string());
        put("roll_amplitude", format!("{:?}", p.roll_amplitude));
        put("n_trajectories", self.n_trajectories.to_string());
        put("output_dir", self.output_dir.display().to_string());
        put("block_time", format!("{:?}", self.block_time));
        put("snapshot_every", self.snapshot_every.to_string());
        put("checkpoint_every", self.checkpoint_every.to_string());
        if let Some(name) = &self.preset {
            put("preset", name.clone());
        }
        s
    }

    /// SHA-256 of the canonical text without `output_dir`, hex encoded, so
    /// that the same run written to two places carries the same hash.
    pub fn hash(&self) -> String {
        let text: String = self
            .to_text()
            .lines()
            .filter(|l| !l.starts_with("output_dir"))
            .flat_map(|l| [l, "\n"])
            .collect();
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    /// Samples per statistics block.
    pub fn block_samples(&self) -> u64 {
        let per_sample = self.params.stride_steps() as f64 * self.params.dt;
        ((self.block_time / per_sample).round() as u64).max(1)
    }
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 11] = [
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9a", "fig9b", "fig10", "fig11",
];

/// Desk-scale recipes for the figures of the reference study.
///
/// The study averages single trajectories over 1e7 time units; the presets
/// use ensembles of 8 to 16 shorter trajectories instead. A figure that
/// scans a parameter returns one config per point, labelled
/// `<name>-<point>`. Rough single-core cost is 4 us per step at 64 points,
/// so e.g. one `fig2` point (8 x 5.1e7 steps) takes about half an hour.
pub fn preset(name: &str) -> Result<Vec<RunConfig>> {
    let base = |label: String, e: f64| {
        let mut c = RunConfig::default();
        c.params.pump_e = e;
        c.preset = Some(label);
        c
    };
    // Below threshold the relevant quantities decorrelate slowly as E -> 1;
    // dt = 1e-3 keeps the time-step bias of the squeezed quadrature small.
    let below = |label: String, e: f64| {
        let mut c = base(label, e);
        c.params.dt = 1e-3;
        c.params.t_total = 5.1e4;
        c.params.sample_stride = 0.25;
        c
    };
    let above = |label: String, e: f64, init: InitKind| {
        let mut c = base(label, e);
        c.params.init_kind = init;
        c.params.t_total = 5.5e4;
        c.params.t_transient = 5e3;
        c
    };
    let scan = |name: &str, points: &[f64], make: &dyn Fn(String, f64) -> RunConfig| {
        points
            .iter()
            .map(|&e| make(format!("{name}-e{e}"), e))
            .collect::<Vec<_>>()
    };
    let configs = match name {
        "fig2" => scan(name, &[0.5, 0.9, 0.99, 0.999], &below),
        "fig3" => scan(name, &[0.5, 0.9, 0.99, 1.0], &below),
        "fig4" => {
            let mut c = below(name.into(), 0.99);
            c.n_trajectories = 16;
            vec![c]
        }
        "fig5" => scan(name, &[0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5], &|label, e| {
            if e <= 1.0 {
                below(label, e)
            } else {
                above(label, e, InitKind::PaperModulated)
            }
        }),
        "fig6" => scan(name, &[0.99, 1.02, 1.05, 1.1, 1.2], &|label, e| {
            above(label, e, InitKind::PaperModulated)
        }),
        "fig7" | "fig8" => scan(name, &[1.02, 1.1], &|label, e| {
            let mut c = above(label, e, InitKind::PaperModulated);
            c.snapshot_every = 1000;
            c
        }),
        "fig9a" | "fig9b" => {
            let init = if name == "fig9a" {
                InitKind::Rolls
            } else {
                InitKind::Step
            };
            let mut c = above(name.into(), 1.5, init);
            c.snapshot_every = 1000;
            vec![c]
        }
        "fig10" => {
            let rolls = above("fig10-rolls".into(), 1.5, InitKind::Rolls);
            let step = above("fig10-step".into(), 1.5, InitKind::Step);
            let mut fine = above("fig10-n128".into(), 1.5, InitKind::Rolls);
            fine.params.n_points = 128;
            vec![rolls, step, fine]
        }
        "fig11" => [
            ("step", InitKind::Step),
            ("noise", InitKind::Noise),
            ("rolls", InitKind::Rolls),
        ]
        .into_iter()
        .map(|(tag, init)| above(format!("fig11-{tag}"), 1.3, init))
        .collect(),
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    Ok(configs)
}
