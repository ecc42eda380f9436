//! Streaming Q-moment statistics of far-field amplitudes.
//!
//! Samples are grouped into blocks of fixed length; each block keeps a
//! Welford mean and central second moment for every tracked series. Blocks
//! never span two trajectories, so merging accumulators by concatenating
//! their block lists reproduces single-stream accumulation exactly. Standard
//! errors come from a delete-one-group jackknife over contiguous groups of
//! blocks.

use num_complex::Complex64;

use crate::engine::{ModeSnapshot, Sampler};
use crate::lattice::Grid;

/// Count, mean and central second moment of one scalar series.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: f64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if other.n == 0.0 {
            return *self;
        }
        if self.n == 0.0 {
            return *other;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }

    /// Inverse of [`merge`](Self::merge): the moments of `self` without `part`.
    pub fn remove(&self, part: &Moments) -> Moments {
        let n = self.n - part.n;
        if n <= 0.0 {
            return Moments::default();
        }
        let mean = (self.n * self.mean - part.n * part.mean) / n;
        let delta = part.mean - mean;
        Moments {
            n,
            mean,
            m2: (self.m2 - part.m2 - delta * delta * part.n * n / self.n).max(0.0),
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2.0 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1.0)
        }
    }

    /// Raw second moment `<x^2>`.
    pub fn raw_second(&self) -> f64 {
        self.variance() + self.mean * self.mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Signal,
    Pump,
}

/// Per-pair series, in layout order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSeries {
    /// `|beta_k|^2 - |beta_-k|^2`.
    Difference,
    /// `X(k) - X(-k)` with `X = beta + beta*`.
    XMinus,
    XPlus,
    /// `cos` and `sin` of `arg beta_k + arg beta_-k`.
    PhaseCos,
    PhaseSin,
}

const PAIR_SERIES: usize = 5;

/// Index map from (field, mode or pair, quantity) to a flat series slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesLayout {
    pub n_points: usize,
    /// Storage indices `(m, -m)` for `m = 1 .. N/2 - 1`.
    pub pairs: Vec<(usize, usize)>,
}

impl SeriesLayout {
    pub fn new(grid: &Grid) -> Self {
        SeriesLayout {
            n_points: grid.n_points,
            pairs: grid.pairs(),
        }
    }

    fn per_field(&self) -> usize {
        self.n_points + PAIR_SERIES * self.pairs.len()
    }

    pub fn len(&self) -> usize {
        2 * self.per_field()
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    fn field_offset(&self, field: Field) -> usize {
        match field {
            Field::Signal => 0,
            Field::Pump => self.per_field(),
        }
    }

    /// Slot of `|beta_j|^2` for storage index `j`.
    pub fn intensity(&self, field: Field, j: usize) -> usize {
        self.field_offset(field) + j
    }

    /// Slot of a pair series; `pair` indexes [`pairs`](Self::pairs), i.e. `m - 1`.
    pub fn pair(&self, field: Field, pair: usize, series: PairSeries) -> usize {
        self.field_offset(field) + self.n_points + PAIR_SERIES * pair + series as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub count: u64,
    pub stats: Vec<Moments>,
}

impl Block {
    fn new(len: usize) -> Self {
        Block {
            count: 0,
            stats: vec![Moments::default(); len],
        }
    }
}

/// Mergeable Q-moment accumulator over unit-commutator amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentAccumulator {
    layout: SeriesLayout,
    /// Raw unitary-DFT modes are multiplied by this to get `beta`.
    scale: f64,
    block_len: u64,
    blocks: Vec<Block>,
    current: Block,
    trajectories: u64,
}

impl MomentAccumulator {
    /// `scale` converts raw modes to unit-commutator amplitudes (see
    /// [`mode_scale`](super::mode_scale)); `block_len` is in samples.
    pub fn new(grid: &Grid, scale: f64, block_len: u64) -> Self {
        let layout = SeriesLayout::new(grid);
        let len = layout.len();
        MomentAccumulator {
            layout,
            scale,
            block_len: block_len.max(1),
            blocks: Vec::new(),
            current: Block::new(len),
            trajectories: 0,
        }
    }

    pub fn layout(&self) -> &SeriesLayout {
        &self.layout
    }

    pub fn block_len(&self) -> u64 {
        self.block_len
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn trajectories(&self) -> u64 {
        self.trajectories
    }

    pub fn samples(&self) -> u64 {
        self.blocks.iter().map(|b| b.count).sum::<u64>() + self.current.count
    }

    /// Adds one sample of unit-commutator amplitudes.
    pub fn push_amplitudes(&mut self, signal: &[Complex64], pump: &[Complex64]) {
        debug_assert_eq!(signal.len(), self.layout.n_points);
        debug_assert_eq!(pump.len(), self.layout.n_points);
        self.push_scaled(signal, pump, 1.0);
    }

    fn push_scaled(&mut self, signal: &[Complex64], pump: &[Complex64], scale: f64) {
        let layout = &self.layout;
        let stats = &mut self.current.stats;
        for (field, modes) in [(Field::Signal, signal), (Field::Pump, pump)] {
            let off = layout.field_offset(field);
            for (j, z) in modes.iter().enumerate() {
                stats[off + j].push((z * scale).norm_sqr());
            }
            for (p, &(jp, jm)) in layout.pairs.iter().enumerate() {
                let (bp, bm) = (modes[jp] * scale, modes[jm] * scale);
                let base = layout.pair(field, p, PairSeries::Difference);
                stats[base].push(bp.norm_sqr() - bm.norm_sqr());
                stats[base + 1].push(2.0 * (bp.re - bm.re));
                stats[base + 2].push(2.0 * (bp.re + bm.re));
                let prod = bp * bm;
                let norm = prod.norm();
                let unit = if norm > 0.0 {
                    prod / norm
                } else {
                    Complex64::new(0.0, 0.0)
                };
                stats[base + 3].push(unit.re);
                stats[base + 4].push(unit.im);
            }
        }
        self.current.count += 1;
        if self.current.count >= self.block_len {
            self.close_block();
        }
    }

    fn close_block(&mut self) {
        if self.current.count > 0 {
            let fresh = Block::new(self.layout.len());
            self.blocks
                .push(std::mem::replace(&mut self.current, fresh));
        }
    }

    /// Closes the partial block at the end of a trajectory.
    pub fn end_trajectory(&mut self) {
        self.close_block();
        self.trajectories += 1;
    }

    /// Appends `other`'s blocks after this accumulator's. Both must have
    /// ended their trajectories.
    pub fn merge(&mut self, other: &MomentAccumulator) {
        assert_eq!(
            self.layout, other.layout,
            "accumulators over different grids"
        );
        self.close_block();
        self.blocks.extend(other.blocks.iter().cloned());
        if other.current.count > 0 {
            self.blocks.push(other.current.clone());
        }
        self.trajectories += other.trajectories;
    }

    /// Totals of one series over all closed blocks, folded in block order.
    pub fn total(&self, slot: usize) -> Moments {
        self.blocks
            .iter()
            .fold(Moments::default(), |acc, b| acc.merge(&b.stats[slot]))
    }

    /// Contiguous groups of closed blocks, at most `max_groups` of them,
    /// each reduced to one `Moments` per requested slot.
    pub fn grouped(&self, slots: &[usize], max_groups: usize) -> Vec<Vec<Moments>> {
        let n_blocks = self.blocks.len();
        let groups = max_groups.min(n_blocks).max(1);
        let mut out = vec![vec![Moments::default(); slots.len()]; groups];
        for (b, block) in self.blocks.iter().enumerate() {
            let g = b * groups / n_blocks.max(1);
            for (k, &slot) in slots.iter().enumerate() {
                out[g][k] = out[g][k].merge(&block.stats[slot]);
            }
        }
        out
    }
}

/// Feeds raw engine snapshots, scaled to unit-commutator amplitudes.
impl Sampler for MomentAccumulator {
    fn sample(&mut self, snapshot: &ModeSnapshot<'_>) {
        let scale = self.scale;
        self.push_scaled(snapshot.signal, snapshot.pump, scale);
    }
}
