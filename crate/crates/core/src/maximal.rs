//! Smoothing kernels, radial and non-tangential maximal functions, and the
//! Hardy–Lorentz quasinorm built from them.
//!
//! Kernels are cardinal B-splines rescaled to `[-1, 1]`; their exact cell
//! integrals come from the closed-form B-spline CDF, so `f * φ_t` at cell
//! centers is an exact finite sum for step signals.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::{lorentz_quasinorm_levels, LorentzIndex};
use crate::moments::moment_order;
use crate::signal::Signal;

/// Compactly supported kernel on `[-1, 1]`: the cardinal B-spline of the
/// given order (1 = box, 2 = triangle, 3 = quadratic, …) scaled to have
/// integral `gain`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mollifier {
    pub order: u32,
    pub gain: f64,
}

impl Default for Mollifier {
    fn default() -> Self {
        Self::triangle()
    }
}

impl Mollifier {
    pub fn new(order: u32, gain: f64) -> Result<Self> {
        if order == 0 || order > 8 {
            return Err(Error::InvalidArgument(format!("B-spline order must be in 1..=8, got {order}")));
        }
        if !(gain.is_finite() && gain != 0.0) {
            return Err(Error::InvalidArgument("mollifier integral must be finite and nonzero".into()));
        }
        Ok(Self { order, gain })
    }

    pub fn triangle() -> Self {
        Self { order: 2, gain: 1.0 }
    }

    /// Smallest B-spline whose atom tails decay at the `H^p` rate:
    /// degree `N + 1` with `N = ⌊1/p − 1⌋`, and at least the triangle.
    pub fn for_p(p: f64) -> Self {
        Self { order: (moment_order(p) as u32 + 2).max(2), gain: 1.0 }
    }

    pub fn with_gain(self, gain: f64) -> Self {
        Self { gain, ..self }
    }

    pub fn integral(&self) -> f64 {
        self.gain
    }

    /// `∫_{-1}^{u} φ`.
    pub fn cdf(&self, u: f64) -> f64 {
        if u <= -1.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return self.gain;
        }
        let r = self.order as f64;
        let x = (u + 1.0) * r / 2.0;
        let c = if x <= r / 2.0 { bspline_cdf(self.order, x) } else { 1.0 - bspline_cdf(self.order, r - x) };
        self.gain * c
    }

    /// `φ(u)`.
    pub fn density(&self, u: f64) -> f64 {
        if !(-1.0..1.0).contains(&u) {
            return 0.0;
        }
        let r = self.order as f64;
        self.gain * bspline_density(self.order, (u + 1.0) * r / 2.0) * r / 2.0
    }

    /// The kernel sampled as a step signal on `[-1, 1)` with `cells` cells
    /// (cell averages, exact).
    pub fn profile(&self, cells: usize) -> Signal {
        let h = 2.0 / cells as f64;
        let values = (0..cells)
            .map(|i| {
                let a = -1.0 + i as f64 * h;
                (self.cdf(a + h) - self.cdf(a)) / h
            })
            .collect();
        Signal::new(-1.0, h, values).expect("valid grid")
    }

    /// Exact cell weights `w[d] = ∫_{cell at offset d} φ_t(x_i − y) dy` for a
    /// kernel of scale `t` on cells of width `h`, `d = -R..=R`.
    fn cell_weights(&self, t: f64, h: f64) -> Vec<f64> {
        let reach = (t / h + 0.5).ceil() as isize;
        (-reach..=reach)
            .map(|d| {
                let lo = (d as f64 - 0.5) * h / t;
                let hi = (d as f64 + 0.5) * h / t;
                self.cdf(hi) - self.cdf(lo)
            })
            .collect()
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// CDF of the cardinal B-spline of order `r` (knots `0..=r`) on `[0, r]`.
fn bspline_cdf(r: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..=r {
        let s = x - i as f64;
        if s <= 0.0 {
            break;
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(r, i) * s.powi(r as i32);
    }
    acc / factorial(r)
}

fn bspline_density(r: u32, x: f64) -> f64 {
    if x <= 0.0 || x >= r as f64 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..=r {
        let s = x - i as f64;
        if s <= 0.0 {
            break;
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(r, i) * s.powi(r as i32 - 1);
    }
    acc / factorial(r - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MaximalKind {
    #[default]
    Radial,
    NonTangential,
}

impl std::str::FromStr for MaximalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "radial" => Ok(Self::Radial),
            "nontangential" | "non-tangential" => Ok(Self::NonTangential),
            other => Err(Error::InvalidArgument(format!("unknown maximal function `{other}`"))),
        }
    }
}

/// The dyadic scale set for a grid of `len` cells of width `h`:
/// `t = h/2` (at a cell center every `t ≤ h/2` sees only that cell, so this
/// is the `t → 0` limit) followed by `h·2^m`, `0 ≤ m ≤ log₂ len`.
pub fn dyadic_scales(h: f64, len: usize) -> Vec<f64> {
    let top = (usize::BITS - 1 - len.max(1).leading_zeros()) as i32;
    std::iter::once(h / 2.0).chain((0..=top).map(|m| h * 2.0_f64.powi(m))).collect()
}

/// `|(f * φ_t)(x_i)|` at every cell center, one row per scale.
#[derive(Debug, Clone)]
pub struct ScaleStack {
    pub scales: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl ScaleStack {
    pub fn new(f: &Signal, phi: &Mollifier) -> Self {
        let h = f.cell_width();
        let n = f.len();
        let scales = dyadic_scales(h, n);
        let v = f.values();
        let rows = scales
            .iter()
            .map(|&t| {
                let w = phi.cell_weights(t, h);
                let reach = (w.len() / 2) as isize;
                (0..n as isize)
                    .map(|i| {
                        let lo = (i - reach).max(0);
                        let hi = (i + reach).min(n as isize - 1);
                        let mut acc = 0.0;
                        for c in lo..=hi {
                            acc += w[(c - i + reach) as usize] * v[c as usize];
                        }
                        acc.abs()
                    })
                    .collect()
            })
            .collect();
        Self { scales, rows }
    }

    pub fn radial(&self, like: &Signal) -> Signal {
        let mut out = vec![0.0_f64; like.len()];
        for row in &self.rows {
            for (o, &x) in out.iter_mut().zip(row) {
                *o = o.max(x);
            }
        }
        Signal::new(like.origin(), like.cell_width(), out).expect("finite values")
    }

    pub fn nontangential(&self, like: &Signal) -> Signal {
        let h = like.cell_width();
        let mut out = vec![0.0_f64; like.len()];
        for (row, &t) in self.rows.iter().zip(&self.scales) {
            // |i − j| h < t  ⇔  |i − j| ≤ ⌈t/h⌉ − 1
            let radius = ((t / h).ceil() as usize).saturating_sub(1);
            let windowed = sliding_max(row, radius);
            for (o, x) in out.iter_mut().zip(windowed) {
                *o = o.max(x);
            }
        }
        Signal::new(like.origin(), like.cell_width(), out).expect("finite values")
    }
}

/// `out[i] = max(row[i-r..=i+r])`, clipped to the row.
fn sliding_max(row: &[f64], r: usize) -> Vec<f64> {
    if r == 0 {
        return row.to_vec();
    }
    let n = row.len();
    let mut out = vec![0.0; n];
    let mut dq: VecDeque<usize> = VecDeque::new();
    // window for output i is [i - r, i + r]; push indices up to i + r
    let mut next = 0usize;
    for (i, o) in out.iter_mut().enumerate() {
        let right = (i + r).min(n - 1);
        while next <= right {
            while let Some(&b) = dq.back() {
                if row[b] <= row[next] {
                    dq.pop_back();
                } else {
                    break;
                }
            }
            dq.push_back(next);
            next += 1;
        }
        while let Some(&f) = dq.front() {
            if f + r < i {
                dq.pop_front();
            } else {
                break;
            }
        }
        *o = row[*dq.front().expect("window is nonempty")];
    }
    out
}

/// `Mf(x) = max_t |(f * φ_t)(x)|` over [`dyadic_scales`], at cell centers.
pub fn radial_maximal(f: &Signal, phi: &Mollifier) -> Signal {
    ScaleStack::new(f, phi).radial(f)
}

/// `Nf(x) = max {|(f * ψ_t)(y)| : |x − y| < t}` over grid centers `y` and
/// [`dyadic_scales`].
pub fn nontangential_maximal(f: &Signal, psi: &Mollifier) -> Signal {
    ScaleStack::new(f, psi).nontangential(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct MaximalConfig {
    pub mollifier: Mollifier,
    pub kind: MaximalKind,
}

impl MaximalConfig {
    pub fn radial(mollifier: Mollifier) -> Self {
        Self { mollifier, kind: MaximalKind::Radial }
    }

    pub fn maximal(&self, f: &Signal) -> Signal {
        match self.kind {
            MaximalKind::Radial => radial_maximal(f, &self.mollifier),
            MaximalKind::NonTangential => nontangential_maximal(f, &self.mollifier),
        }
    }
}

/// `‖{2^k m(Mf, 2^k)^{1/p}}‖_{ℓ^q}` with the configured maximal function.
pub fn hardy_lorentz_quasinorm(f: &Signal, idx: LorentzIndex, cfg: &MaximalConfig) -> f64 {
    lorentz_quasinorm_levels(&cfg.maximal(f), idx)
}
