//! Uniform and adaptive dyadic partitions of `[0,1]^D`.
//!
//! Cells are half-open boxes, with the top face of the unit cube closed.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

/// Deepest representable level; corners are `u32` indices below `2^level`.
pub const MAX_LEVEL: u8 = 31;

pub type Corner = SmallVec<[u32; 4]>;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("cannot split level {0}: children would exceed level {MAX_LEVEL}")]
    LevelOverflow(u8),
    #[error("no active cell contains {0}; coverage invariant broken")]
    NotCovered(String),
    #[error("cell {0} is not active")]
    NotActive(Hypercube),
    #[error("point has dimension {got}, partition has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("malformed cell `{0}`")]
    Parse(String),
}

/// `∏_d [corner_d · 2^-level, (corner_d + 1) · 2^-level)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Hypercube {
    level: u8,
    corner: Corner,
}

fn axis_index(x: f64, slices: u64) -> u64 {
    let k = (x * slices as f64).floor();
    if k < 0.0 {
        0
    } else {
        (k as u64).min(slices - 1)
    }
}

impl Hypercube {
    pub fn root(dim: usize) -> Self {
        Self {
            level: 0,
            corner: smallvec::smallvec![0; dim],
        }
    }

    pub fn new(level: u8, corner: impl IntoIterator<Item = u32>) -> Result<Self, PartitionError> {
        let corner: Corner = corner.into_iter().collect();
        if level > MAX_LEVEL {
            return Err(PartitionError::LevelOverflow(level));
        }
        let span = 1u64 << level;
        if corner.is_empty() || corner.iter().any(|&c| c as u64 >= span) {
            return Err(PartitionError::Parse(format!("{level}:{corner:?}")));
        }
        Ok(Self { level, corner })
    }

    /// The level-`level` cell containing `x`.
    pub fn containing(x: &[f64], level: u8) -> Self {
        let span = 1u64 << level;
        Self {
            level,
            corner: x.iter().map(|&xi| axis_index(xi, span) as u32).collect(),
        }
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn corner(&self) -> &[u32] {
        &self.corner
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }

    pub fn edge(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn lower(&self) -> SmallVec<[f64; 4]> {
        let e = self.edge();
        self.corner.iter().map(|&c| c as f64 * e).collect()
    }

    pub fn center(&self) -> SmallVec<[f64; 4]> {
        let e = self.edge();
        self.corner.iter().map(|&c| (c as f64 + 0.5) * e).collect()
    }

    pub fn volume(&self) -> f64 {
        self.edge().powi(self.dim() as i32)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && Self::containing(x, self.level) == *self
    }

    /// Ancestor at `level` (must not exceed this cell's level).
    pub fn ancestor(&self, level: u8) -> Self {
        let shift = self.level - level;
        Self {
            level,
            corner: self.corner.iter().map(|&c| c >> shift).collect(),
        }
    }

    pub fn parent(&self) -> Option<Self> {
        (self.level > 0).then(|| self.ancestor(self.level - 1))
    }

    /// The `2^D` children in lexicographic corner order.
    pub fn children(&self) -> Result<Vec<Self>, PartitionError> {
        if self.level >= MAX_LEVEL {
            return Err(PartitionError::LevelOverflow(self.level));
        }
        let dim = self.dim();
        let mut out = Vec::with_capacity(1 << dim);
        for bits in 0..(1u32 << dim) {
            let corner = (0..dim)
                .map(|d| (self.corner[d] << 1) | ((bits >> (dim - 1 - d)) & 1))
                .collect();
            out.push(Self {
                level: self.level + 1,
                corner,
            });
        }
        Ok(out)
    }
}

impl fmt::Display for Hypercube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.level)?;
        for (i, c) in self.corner.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Hypercube {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PartitionError::Parse(s.to_string());
        let (level, corner) = s.split_once(':').ok_or_else(bad)?;
        let level: u8 = level.parse().map_err(|_| bad())?;
        let corner = corner
            .split(',')
            .map(|c| c.parse::<u32>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        Hypercube::new(level, corner).map_err(|_| bad())
    }
}

/// `(m_T)^D` equal boxes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformPartition {
    slices: u32,
    dim: usize,
}

impl UniformPartition {
    pub fn new(slices: u32, dim: usize) -> Self {
        assert!(slices >= 1 && dim >= 1, "uniform partition needs m_T >= 1 and D >= 1");
        Self { slices, dim }
    }

    pub fn slices(&self) -> u32 {
        self.slices
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_count(&self) -> u64 {
        (self.slices as u64).saturating_pow(self.dim as u32)
    }

    pub fn uniform_cell(&self, x: &[f64]) -> Corner {
        x.iter().map(|&xi| axis_index(xi, self.slices as u64) as u32).collect()
    }
}

/// A learner's cell: a uniform box index or a dyadic hypercube.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cell {
    Uniform(Corner),
    Cube(Hypercube),
}

impl Cell {
    pub fn as_cube(&self) -> Option<&Hypercube> {
        match self {
            Cell::Cube(h) => Some(h),
            Cell::Uniform(_) => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Uniform(idx) => {
                write!(f, "u:")?;
                for (i, c) in idx.iter().enumerate() {
                    if i > 0 {
                        write!(f, "-")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            Cell::Cube(h) => h.fmt(f),
        }
    }
}

impl FromStr for Cell {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.strip_prefix("u:") {
            Some(rest) => rest
                .split('-')
                .map(|c| c.parse::<u32>())
                .collect::<Result<Corner, _>>()
                .map(Cell::Uniform)
                .map_err(|_| PartitionError::Parse(s.to_string())),
            None => s.parse().map(Cell::Cube),
        }
    }
}

/// A set of active dyadic cells covering `[0,1]^D`, with activation history.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptivePartition {
    dim: usize,
    active: BTreeSet<Hypercube>,
    activated_at: BTreeMap<Hypercube, u64>,
    deactivated_at: BTreeMap<Hypercube, u64>,
    max_active_level: u8,
}

impl AdaptivePartition {
    /// Just the root, activated at slot 1.
    pub fn new(dim: usize) -> Self {
        let root = Hypercube::root(dim);
        Self {
            dim,
            active: BTreeSet::from([root.clone()]),
            activated_at: BTreeMap::from([(root, 1)]),
            deactivated_at: BTreeMap::new(),
            max_active_level: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn active(&self) -> impl Iterator<Item = &Hypercube> {
        self.active.iter()
    }

    pub fn active_len(&self) -> usize {
        self.active.len()
    }

    pub fn is_active(&self, p: &Hypercube) -> bool {
        self.active.contains(p)
    }

    pub fn activated_at(&self, p: &Hypercube) -> Option<u64> {
        self.activated_at.get(p).copied()
    }

    pub fn deactivated_at(&self, p: &Hypercube) -> Option<u64> {
        self.deactivated_at.get(p).copied()
    }

    /// Every cell ever activated, with its activation slot.
    pub fn activations(&self) -> impl Iterator<Item = (&Hypercube, u64)> {
        self.activated_at.iter().map(|(p, &t)| (p, t))
    }

    /// The unique active cell containing `x`.
    pub fn locate(&self, x: &[f64]) -> Result<Hypercube, PartitionError> {
        if x.len() != self.dim {
            return Err(PartitionError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        for level in 0..=self.max_active_level {
            let p = Hypercube::containing(x, level);
            if self.active.contains(&p) {
                return Ok(p);
            }
        }
        Err(PartitionError::NotCovered(format!("{x:?}")))
    }

    /// Replaces active `p` by its children, all activated at slot `t`.
    pub fn split(&mut self, p: &Hypercube, t: u64) -> Result<Vec<Hypercube>, PartitionError> {
        if !self.active.contains(p) {
            return Err(PartitionError::NotActive(p.clone()));
        }
        let children = p.children()?;
        self.active.remove(p);
        self.deactivated_at.insert(p.clone(), t);
        for c in &children {
            self.active.insert(c.clone());
            self.activated_at.insert(c.clone(), t);
        }
        self.max_active_level = self.max_active_level.max(p.level() + 1);
        Ok(children)
    }
}

/// Largest level a cell activated at slot `t` may have: `log2(t)/ρ + 1`.
pub fn max_level_bound(t: u64, rho: f64) -> f64 {
    (t.max(1) as f64).log2() / rho + 1.0
}
