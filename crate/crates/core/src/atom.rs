//! `H^p` atoms on the line: construction by moment correction, validity
//! checks, and the pointwise decay bound for their maximal functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{moment_about, moment_basis, moment_order, remove_projection};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub center: f64,
    pub length: f64,
}

impl Interval {
    pub fn new(center: f64, length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0 && center.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad interval center {center} length {length}")));
        }
        Ok(Self { center, length })
    }

    pub fn from_bounds(start: f64, end: f64) -> Result<Self> {
        Self::new(0.5 * (start + end), end - start)
    }

    pub fn start(&self) -> f64 {
        self.center - 0.5 * self.length
    }

    pub fn end(&self) -> f64 {
        self.center + 0.5 * self.length
    }

    /// Same center, length multiplied by `factor`.
    pub fn dilate(&self, factor: f64) -> Self {
        Self { center: self.center, length: self.length * factor }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.start() && x < self.end()
    }

    pub fn contains_interval(&self, other: &Interval, tol: f64) -> bool {
        other.start() >= self.start() - tol && other.end() <= self.end() + tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub center: f64,
    pub length: f64,
    pub p: f64,
    pub profile: Signal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomCheck {
    pub support_ok: bool,
    /// `|I|^{1/p} · sup|a|`; at most one for a valid atom.
    pub sup_ratio: f64,
    /// `|∫ (x − x_I)^α a| / (sup|a| |I|^{α+1})` for `α = 0..=N`.
    pub moment_errors: Vec<f64>,
    pub valid: bool,
}

pub const MOMENT_TOLERANCE: f64 = 1e-10;

impl Atom {
    pub fn interval(&self) -> Interval {
        Interval { center: self.center, length: self.length }
    }

    /// `N = ⌊1/p − 1⌋`.
    pub fn moment_order(&self) -> usize {
        moment_order(self.p)
    }

    /// Decay exponent `γ = N + 2` of `Ma` away from the interval.
    pub fn gamma(&self) -> f64 {
        self.moment_order() as f64 + 2.0
    }

    pub fn is_zero(&self) -> bool {
        self.profile.is_zero()
    }

    pub fn check(&self) -> AtomCheck {
        let iv = self.interval();
        let h = self.profile.cell_width();
        let tol = 1e-9 * self.length.max(h);
        let support_ok = self.profile.values().iter().enumerate().all(|(i, &v)| {
            v == 0.0 || (self.profile.cell_start(i) >= iv.start() - tol && self.profile.cell_start(i) + h <= iv.end() + tol)
        });
        let sup = self.profile.sup_abs();
        let sup_ratio = self.length.powf(1.0 / self.p) * sup;
        let moment_errors: Vec<f64> = (0..=self.moment_order() as u32)
            .map(|alpha| {
                if sup == 0.0 {
                    return 0.0;
                }
                let m = moment_about(self.profile.values(), self.profile.origin(), h, self.center, alpha);
                m.abs() / (sup * self.length.powi(alpha as i32 + 1))
            })
            .collect();
        let valid = support_ok && sup_ratio <= 1.0 + 1e-12 && moment_errors.iter().all(|&e| e <= MOMENT_TOLERANCE);
        AtomCheck { support_ok, sup_ratio, moment_errors, valid }
    }

    /// The atom as a signal on the grid (and domain) of `grid`.
    pub fn to_signal_on(&self, grid: &Signal) -> Result<Signal> {
        let mut out = grid.zeros_like();
        out.add_scaled(1.0, &self.profile)?;
        Ok(out)
    }

    /// `|I|^{γ−1/p} / (|I| + |x − x_I|)^γ`.
    pub fn decay_envelope(&self, x: f64) -> f64 {
        let g = self.gamma();
        self.length.powf(g - 1.0 / self.p) / (self.length + (x - self.center).abs()).powf(g)
    }

    /// Smallest `c` with `Ma(x) ≤ c · envelope(x)` at every cell of `ma`.
    pub fn decay_constant(&self, ma: &Signal) -> f64 {
        (0..ma.len())
            .map(|i| ma.values()[i] / self.decay_envelope(ma.cell_center(i)))
            .fold(0.0, f64::max)
    }
}

/// Moment-corrects `raw` on `interval` and normalizes it into an atom.
///
/// Returns `(a, λ)` with `λ·a` equal to the corrected function and
/// `|I|^{1/p} sup|a| = 1`, or the zero atom with `λ = 0` when nothing
/// survives the correction.
pub fn make_atom(interval: Interval, raw: &Signal, p: f64) -> Result<(Atom, f64)> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidIndex(format!("atoms need 0 < p <= 1, got {p}")));
    }
    let h = raw.cell_width();
    let tol = 1e-9 * h;
    let inside = |i: usize| {
        let a = raw.cell_start(i);
        a >= interval.start() - tol && a + h <= interval.end() + tol
    };
    if let Some(i) = (0..raw.len()).find(|&i| raw.values()[i] != 0.0 && !inside(i)) {
        return Err(Error::InvalidArgument(format!(
            "raw function is nonzero at cell {i}, outside [{}, {})",
            interval.start(),
            interval.end()
        )));
    }
    let first = (0..raw.len()).find(|&i| inside(i));
    let last = (0..raw.len()).rev().find(|&i| inside(i));
    let (Some(first), Some(last)) = (first, last) else {
        return Err(Error::InvalidArgument("interval contains no cell of the raw grid".into()));
    };
    let mut values = raw.values()[first..=last].to_vec();
    let sup_raw = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let basis = moment_basis(values.len(), moment_order(p));
    remove_projection(&mut values, &basis);
    let sup = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let origin = raw.cell_start(first);
    if sup <= 1e-12 * sup_raw || sup == 0.0 {
        let profile = Signal::new(origin, h, vec![0.0; values.len()])?;
        return Ok((Atom { center: interval.center, length: interval.length, p, profile }, 0.0));
    }
    let scale = sup * interval.length.powf(1.0 / p);
    values.iter_mut().for_each(|v| *v /= scale);
    let profile = Signal::new(origin, h, values)?;
    Ok((Atom { center: interval.center, length: interval.length, p, profile }, scale))
}
