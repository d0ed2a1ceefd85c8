//! Constructive atomic decomposition of step signals over the level sets of
//! the non-tangential maximal function, its reconstruction, the split
//! criteria for Lorentz membership, and the atomic-sum verifiers.

mod build;
mod criteria;
mod verify;
pub mod whitney;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::atom::{Atom, Interval};
use crate::dyadic::pow2;
use crate::error::{Error, Result};
use crate::signal::Signal;

pub use build::{decompose, default_psi, DEFAULT_PSI_GAIN};
pub use criteria::{check_sum_split_criterion, check_sup_split_criterion, SplitInput, LevelSplit};
pub use verify::{
    atomic_sum, decay_epsilon, proof_splits, verify_atomic_upper_bound, verify_overlapping_atomic_bound, AtomicCheckConfig,
};
pub use whitney::{whitney_cover, DyadicCells, WhitneyCover};

/// Target cap on how many same-level intervals may contain a point.
pub const OVERLAP_TARGET: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: f64,
    pub cell_width: f64,
    pub len: usize,
}

impl Grid {
    pub fn of(s: &Signal) -> Self {
        Self { origin: s.origin(), cell_width: s.cell_width(), len: s.len() }
    }

    pub fn zeros(&self) -> Result<Signal> {
        Signal::zeros(self.origin, self.cell_width, self.len)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub lambda: f64,
    pub atom: Atom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub k: i32,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicDecomposition {
    pub p: f64,
    pub overlap_bound: usize,
    pub grid: Grid,
    /// Levels in increasing `k`.
    pub levels: Vec<Level>,
    /// Part of the signal no atom carries: its projection onto low-degree
    /// polynomials over the whole domain. Zero when the global moments vanish.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residual: Vec<f64>,
}

impl AtomicDecomposition {
    pub fn empty(p: f64, grid: Grid) -> Self {
        Self { p, overlap_bound: OVERLAP_TARGET, grid, levels: Vec::new(), residual: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.levels.iter().all(|l| l.terms.is_empty())
    }

    pub fn term_count(&self) -> usize {
        self.levels.iter().map(|l| l.terms.len()).sum()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Term)> {
        self.levels.iter().flat_map(|l| l.terms.iter().map(move |t| (l.k, t)))
    }

    /// `Σ_j λ_{j,k} a_{j,k}` for a single level.
    pub fn level_signal(&self, k: i32) -> Result<Signal> {
        let mut out = self.grid.zeros()?;
        if let Some(level) = self.levels.iter().find(|l| l.k == k) {
            for t in &level.terms {
                out.add_scaled(t.lambda, &t.atom.profile)?;
            }
        }
        Ok(out)
    }

    /// Sum of the levels selected by `keep`, without the residual.
    pub fn partial_sum(&self, keep: impl Fn(i32) -> bool) -> Result<Signal> {
        let mut out = self.grid.zeros()?;
        for level in self.levels.iter().filter(|l| keep(l.k)) {
            for t in &level.terms {
                out.add_scaled(t.lambda, &t.atom.profile)?;
            }
        }
        Ok(out)
    }

    /// Largest `sup|f_k| / 2^k` over the levels.
    pub fn level_sup_constant(&self) -> Result<f64> {
        let mut c = 0.0_f64;
        for level in &self.levels {
            c = c.max(self.level_signal(level.k)?.sup_abs() / pow2(level.k));
        }
        Ok(c)
    }

    /// Largest number of same-level intervals containing a point, per level.
    pub fn level_overlaps(&self) -> BTreeMap<i32, usize> {
        self.levels
            .iter()
            .map(|l| (l.k, max_overlap(l.terms.iter().map(|t| t.atom.interval()))))
            .collect()
    }
}

/// Cellwise `Σ λ a`, plus the residual.
pub fn reconstruct(dec: &AtomicDecomposition) -> Result<Signal> {
    let mut out = dec.grid.zeros()?;
    for (_, t) in dec.terms() {
        out.add_scaled(t.lambda, &t.atom.profile)?;
    }
    if !dec.residual.is_empty() {
        if dec.residual.len() != dec.grid.len {
            return Err(Error::GridMismatch(format!(
                "residual has {} cells, grid has {}",
                dec.residual.len(),
                dec.grid.len
            )));
        }
        for (o, r) in out.values_mut().iter_mut().zip(&dec.residual) {
            *o += r;
        }
    }
    Ok(out)
}

/// Maximum number of half-open intervals `[start, end)` sharing a point.
pub fn max_overlap(intervals: impl IntoIterator<Item = Interval>) -> usize {
    let mut events: Vec<(f64, i32)> = Vec::new();
    for iv in intervals {
        events.push((iv.start(), 1));
        events.push((iv.end(), -1));
    }
    // closings sort before openings at equal coordinates
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut cur = 0i32;
    let mut best = 0i32;
    for (_, d) in events {
        cur += d;
        best = best.max(cur);
    }
    best as usize
}
