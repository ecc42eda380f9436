//! Binary trajectory records.
//!
//! Layout, all little-endian:
//!
//! ```text
//! header   magic  b"DOPOQCKP"          8 bytes
//!          version u32 (= 1)
//!          n_points u32
//!          length_l, noise_c, dt, pump_e, delta0, delta1   6 x f64
//!          seed u64, trajectory u64
//! frame*   time f64
//!          alpha0  n_points x (re f64, im f64)
//!          alpha1  n_points x (re f64, im f64)
//! ```
//!
//! Frames hold the near field at synchronized times and run to end of file.

use std::io::{self, Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;

use super::{ModeSnapshot, Sampler};
use crate::error::{Error, Result};
use crate::lattice::{FieldState, Params, Spectral};

pub const MAGIC: &[u8; 8] = b"DOPOQCKP";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointHeader {
    pub n_points: usize,
    pub length_l: f64,
    pub noise_c: f64,
    pub dt: f64,
    pub pump_e: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub seed: u64,
    pub trajectory: u64,
}

impl CheckpointHeader {
    pub fn from_params(params: &Params, trajectory: u64) -> Self {
        CheckpointHeader {
            n_points: params.n_points,
            length_l: params.length_l,
            noise_c: params.noise_c,
            dt: params.dt,
            pump_e: params.pump_e,
            delta0: params.delta0,
            delta1: params.delta1,
            seed: params.seed,
            trajectory,
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u32::<LittleEndian>(self.n_points as u32)?;
        for v in [
            self.length_l,
            self.noise_c,
            self.dt,
            self.pump_e,
            self.delta0,
            self.delta1,
        ] {
            w.write_f64::<LittleEndian>(v)?;
        }
        w.write_u64::<LittleEndian>(self.seed)?;
        w.write_u64::<LittleEndian>(self.trajectory)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let n_points = r.read_u32::<LittleEndian>()? as usize;
        let mut f = [0.0; 6];
        for v in f.iter_mut() {
            *v = r.read_f64::<LittleEndian>()?;
        }
        Ok(CheckpointHeader {
            n_points,
            length_l: f[0],
            noise_c: f[1],
            dt: f[2],
            pump_e: f[3],
            delta0: f[4],
            delta1: f[5],
            seed: r.read_u64::<LittleEndian>()?,
            trajectory: r.read_u64::<LittleEndian>()?,
        })
    }
}

pub fn write_frame<W: Write>(w: &mut W, state: &FieldState) -> io::Result<()> {
    w.write_f64::<LittleEndian>(state.time)?;
    for z in state.alpha0.iter().chain(&state.alpha1) {
        w.write_f64::<LittleEndian>(z.re)?;
        w.write_f64::<LittleEndian>(z.im)?;
    }
    Ok(())
}

/// Reads the next frame; `Ok(None)` at a clean end of file.
pub fn read_frame<R: Read>(r: &mut R, n_points: usize) -> Result<Option<FieldState>> {
    let time = match r.read_f64::<LittleEndian>() {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let read_field = |r: &mut R| -> Result<Vec<Complex64>> {
        (0..n_points)
            .map(|_| {
                let re = r.read_f64::<LittleEndian>()?;
                let im = r.read_f64::<LittleEndian>()?;
                Ok(Complex64::new(re, im))
            })
            .collect::<std::result::Result<_, io::Error>>()
            .map_err(|e| Error::Checkpoint(format!("truncated frame: {e}")))
    };
    let alpha0 = read_field(r)?;
    let alpha1 = read_field(r)?;
    Ok(Some(FieldState {
        alpha0,
        alpha1,
        time,
    }))
}

/// Reads a whole checkpoint stream.
pub fn read_checkpoint<R: Read>(r: &mut R) -> Result<(CheckpointHeader, Vec<FieldState>)> {
    let header = CheckpointHeader::read_from(r)?;
    let mut frames = Vec::new();
    while let Some(frame) = read_frame(r, header.n_points)? {
        frames.push(frame);
    }
    Ok((header, frames))
}

/// Sampler that records every `every`-th snapshot as a near-field frame.
pub struct CheckpointWriter<W: Write> {
    out: W,
    spectral: Spectral,
    every: u64,
    seen: u64,
    frames: u64,
    error: Option<io::Error>,
}

impl<W: Write> CheckpointWriter<W> {
    pub fn new(mut out: W, header: &CheckpointHeader, every: u64) -> Result<Self> {
        header.write_to(&mut out)?;
        Ok(CheckpointWriter {
            out,
            spectral: Spectral::new(header.n_points),
            every: every.max(1),
            seen: 0,
            frames: 0,
            error: None,
        })
    }

    pub fn frames(&self) -> u64 {
        self.frames
    }

    pub fn finish(mut self) -> Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e.into());
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> Sampler for CheckpointWriter<W> {
    fn sample(&mut self, snapshot: &ModeSnapshot<'_>) {
        self.seen += 1;
        if self.error.is_some() || (self.seen - 1) % self.every != 0 {
            return;
        }
        let near = |sp: &mut Spectral, modes: &[Complex64]| sp.inverse_transform(modes);
        let state = match (
            near(&mut self.spectral, snapshot.pump),
            near(&mut self.spectral, snapshot.signal),
        ) {
            (Ok(alpha0), Ok(alpha1)) => FieldState {
                alpha0,
                alpha1,
                time: snapshot.time,
            },
            _ => {
                self.error = Some(io::Error::new(io::ErrorKind::InvalidData, "frame length"));
                return;
            }
        };
        match write_frame(&mut self.out, &state) {
            Ok(()) => self.frames += 1,
            Err(e) => self.error = Some(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_trajectory, FnSampler};

    #[test]
    fn header_layout_is_fixed() {
        let header = CheckpointHeader::from_params(&Params::default(), 3);
        let mut buf = Vec::new();
        header.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 4 + 6 * 8 + 8 + 8);
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(&buf[8..12], &1u32.to_le_bytes());
        assert_eq!(&buf[12..16], &64u32.to_le_bytes());
        assert_eq!(&buf[buf.len() - 8..], &3u64.to_le_bytes());
    }

    #[test]
    fn trajectory_record_roundtrip() {
        let params = Params {
            pump_e: 0.9,
            t_total: 6.0,
            t_transient: 1.0,
            sample_stride: 1.0,
            ..Params::default()
        };
        let header = CheckpointHeader::from_params(&params, 0);
        let mut writer = CheckpointWriter::new(Vec::new(), &header, 2).unwrap();
        let mut modes = Vec::new();
        let mut both = (
            &mut writer,
            FnSampler(|s: &ModeSnapshot<'_>| modes.push(s.signal.to_vec())),
        );
        run_trajectory(&params, 0, &mut both).unwrap();
        assert_eq!(writer.frames(), 3);
        let bytes = writer.finish().unwrap();
        let (h, frames) = read_checkpoint(&mut bytes.as_slice()).unwrap();
        assert_eq!(h, header);
        assert_eq!(frames.len(), 3);
        assert!((frames[1].time - 4.0).abs() < 1e-9);
        let back = Spectral::new(64)
            .forward_transform(&frames[1].alpha1)
            .unwrap();
        for (a, b) in back.iter().zip(&modes[2]) {
            assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(matches!(
            read_checkpoint(&mut &b"NOTACKPTxxxxxxxxxxxxxxxxxxx"[..]),
            Err(Error::Checkpoint(_))
        ));
    }
}
