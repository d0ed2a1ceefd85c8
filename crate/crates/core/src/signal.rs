//! Piecewise-constant signals on a uniform grid.
//!
//! A [`Signal`] with origin `x0`, cell width `h` and values `v[0..M]` is the
//! function equal to `v[i]` on `[x0 + i h, x0 + (i + 1) h)` and zero elsewhere.
//! Every integral in this crate is taken against this exact model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSignal")]
pub struct Signal {
    origin: f64,
    cell_width: f64,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSignal {
    origin: f64,
    cell_width: f64,
    values: Vec<f64>,
}

impl TryFrom<RawSignal> for Signal {
    type Error = Error;

    fn try_from(raw: RawSignal) -> Result<Self> {
        Signal::new(raw.origin, raw.cell_width, raw.values)
    }
}

impl Signal {
    pub fn new(origin: f64, cell_width: f64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSignal("a signal needs at least one cell".into()));
        }
        if !(cell_width.is_finite() && cell_width > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "cell width must be finite and positive, got {cell_width}"
            )));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidSignal(format!("origin must be finite, got {origin}")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!("value at cell {i} is not finite")));
        }
        Ok(Self { origin, cell_width, values })
    }

    /// The zero signal on the same grid as `self`.
    pub fn zeros_like(&self) -> Self {
        Self { origin: self.origin, cell_width: self.cell_width, values: vec![0.0; self.len()] }
    }

    pub fn zeros(origin: f64, cell_width: f64, len: usize) -> Result<Self> {
        Self::new(origin, cell_width, vec![0.0; len])
    }

    /// Indicator of `[origin, origin + len * cell_width)`.
    pub fn indicator(origin: f64, cell_width: f64, len: usize) -> Result<Self> {
        Self::new(origin, cell_width, vec![1.0; len])
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> f64 {
        self.origin + self.cell_width * self.len() as f64
    }

    pub fn domain_length(&self) -> f64 {
        self.cell_width * self.len() as f64
    }

    pub fn cell_start(&self, i: usize) -> f64 {
        self.origin + self.cell_width * i as f64
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        self.origin + self.cell_width * (i as f64 + 0.5)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Measure of the support: `h * #{cells with nonzero value}`.
    pub fn support_measure(&self) -> f64 {
        self.cell_width * self.values.iter().filter(|&&v| v != 0.0).count() as f64
    }

    /// `(∫|f|^r)^{1/r}` for finite `r > 0`.
    pub fn lp_norm(&self, r: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.abs().powf(r)).sum();
        (self.cell_width * s).powf(1.0 / r)
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            origin: self.origin,
            cell_width: self.cell_width,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Same values on a grid whose cell width is multiplied by `s`.
    pub fn dilated(&self, s: f64) -> Result<Self> {
        Self::new(self.origin * s, self.cell_width * s, self.values.clone())
    }

    /// Each cell split into `factor` equal cells; the function is unchanged.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidArgument("refinement factor must be positive".into()));
        }
        let values = self
            .values
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, factor))
            .collect();
        Self::new(self.origin, self.cell_width / factor as f64, values)
    }

    /// Cell index of `other`'s first cell on this grid, when both share the
    /// same cell width and cell boundaries.
    pub fn grid_offset(&self, other: &Signal) -> Result<isize> {
        let rel = (self.cell_width - other.cell_width).abs() / self.cell_width;
        if rel > 1e-12 {
            return Err(Error::GridMismatch(format!(
                "cell widths differ: {} vs {}",
                self.cell_width, other.cell_width
            )));
        }
        let shift = (other.origin - self.origin) / self.cell_width;
        let k = shift.round();
        if (shift - k).abs() > 1e-9 {
            return Err(Error::GridMismatch(format!(
                "origin {} is not on the grid of origin {} and width {}",
                other.origin, self.origin, self.cell_width
            )));
        }
        Ok(k as isize)
    }

    /// Adds `c * other` into `self`. `other` must lie on the same grid and
    /// inside the domain of `self`.
    pub fn add_scaled(&mut self, c: f64, other: &Signal) -> Result<()> {
        let off = self.grid_offset(other)?;
        if off < 0 || off as usize + other.len() > self.len() {
            return Err(Error::GridMismatch(format!(
                "signal on cells [{off}, {}) exceeds the target domain of {} cells",
                off + other.len() as isize,
                self.len()
            )));
        }
        let off = off as usize;
        for (dst, src) in self.values[off..off + other.len()].iter_mut().zip(&other.values) {
            *dst += c * src;
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Signal) -> Result<Signal> {
        if self.grid_offset(other)? != 0 || self.len() != other.len() {
            return Err(Error::GridMismatch("signals cover different domains".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Signal::new(self.origin, self.cell_width, values)
    }

    pub fn try_sub(&self, other: &Signal) -> Result<Signal> {
        self.try_add(&other.scaled(-1.0))
    }

    /// Restriction to cells `[start, end)`, as a signal with its own origin.
    pub fn window(&self, start: usize, end: usize) -> Result<Signal> {
        if start >= end || end > self.len() {
            return Err(Error::InvalidArgument(format!(
                "window [{start}, {end}) is not a nonempty range inside {} cells",
                self.len()
            )));
        }
        Signal::new(self.cell_start(start), self.cell_width, self.values[start..end].to_vec())
    }

    /// Embeds `self` into a zero signal of `len` cells that starts `offset`
    /// cells before `self.origin`.
    pub fn padded(&self, offset: usize, len: usize) -> Result<Signal> {
        if offset + self.len() > len {
            return Err(Error::InvalidArgument("padding target too short".into()));
        }
        let mut values = vec![0.0; len];
        values[offset..offset + self.len()].copy_from_slice(&self.values);
        Signal::new(self.origin - offset as f64 * self.cell_width, self.cell_width, values)
    }
}

/// Relative L² distance `‖a − b‖₂ / ‖b‖₂` (absolute when `b` is zero).
pub fn relative_l2_error(a: &Signal, b: &Signal) -> Result<f64> {
    let diff = a.try_sub(b)?.l2_norm();
    let base = b.l2_norm();
    Ok(if base > 0.0 { diff / base } else { diff })
}
