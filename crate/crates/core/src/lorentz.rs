//! Distribution functions, non-increasing rearrangements and Lorentz
//! quasinorms of step signals.
//!
//! All quantities are evaluated in closed form: the rearrangement of a step
//! signal is a step curve, so `∫ [t^{1/p} f*(t)]^q dt/t` is a finite sum of
//! power-law integrals.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dyadic::{ceil_log2, floor_log2, pow2};
use crate::error::{Error, Result};
use crate::signal::Signal;

/// A positive exponent that may be infinite. Infinity is an explicit marker,
/// never a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn finite(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 {
            Ok(Exponent::Finite(q))
        } else if q == f64::INFINITY {
            Ok(Exponent::Infinite)
        } else {
            Err(Error::InvalidIndex(format!("exponent must be positive, got {q}")))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// `1/q`, zero for `q = ∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(q) => 1.0 / q,
            Exponent::Infinite => 0.0,
        }
    }

    /// Value as an `f64`, with `f64::INFINITY` for the marker. Only for
    /// display and ordering.
    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(q) => q,
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(q) => write!(f, "{q}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if matches!(t.as_str(), "inf" | "infinity" | "∞") {
            return Ok(Exponent::Infinite);
        }
        if let Some((a, b)) = t.split_once('/') {
            let num: f64 = a.trim().parse().map_err(|_| Error::InvalidIndex(s.into()))?;
            let den: f64 = b.trim().parse().map_err(|_| Error::InvalidIndex(s.into()))?;
            return Exponent::finite(num / den);
        }
        let q: f64 = t.parse().map_err(|_| Error::InvalidIndex(s.into()))?;
        Exponent::finite(q)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(q) => s.serialize_f64(*q),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(q) => Exponent::finite(q),
            Raw::Text(t) => t.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Lorentz index `(p, q)` with `0 < p < ∞`, `0 < q ≤ ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzIndex {
    pub p: f64,
    pub q: Exponent,
}

impl LorentzIndex {
    pub fn new(p: f64, q: Exponent) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidIndex(format!("p must be finite and positive, got {p}")));
        }
        if let Exponent::Finite(qv) = q {
            if !(qv.is_finite() && qv > 0.0) {
                return Err(Error::InvalidIndex(format!("q must be positive, got {qv}")));
            }
        }
        Ok(Self { p, q })
    }

    pub fn finite(p: f64, q: f64) -> Result<Self> {
        Self::new(p, Exponent::finite(q)?)
    }

    pub fn weak(p: f64) -> Result<Self> {
        Self::new(p, Exponent::Infinite)
    }

    /// Index admissible for Hardy–Lorentz spaces (`p ≤ 1`).
    pub fn hardy(p: f64, q: Exponent) -> Result<Self> {
        let idx = Self::new(p, q)?;
        if p > 1.0 {
            return Err(Error::InvalidIndex(format!("Hardy-Lorentz spaces need p <= 1, got {p}")));
        }
        Ok(idx)
    }
}

/// Right-continuous non-increasing step function on `(0, ∞)`: value
/// `plateau_values[i]` on `[breakpoints[i-1], breakpoints[i])` (with
/// `breakpoints[-1] = 0`) and zero beyond the last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct StepCurve {
    pub breakpoints: Vec<f64>,
    pub plateau_values: Vec<f64>,
}

impl StepCurve {
    pub fn is_empty(&self) -> bool {
        self.plateau_values.is_empty()
    }

    pub fn len(&self) -> usize {
        self.plateau_values.len()
    }

    fn start(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.breakpoints[i - 1]
        }
    }

    /// Total length of the support.
    pub fn support(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
    }

    /// `|{s : f*(s) > λ}|`.
    pub fn distribution(&self, lambda: f64) -> f64 {
        // plateau values are strictly decreasing
        let n = self.plateau_values.partition_point(|&v| v > lambda);
        if n == 0 {
            0.0
        } else {
            self.breakpoints[n - 1]
        }
    }

    /// `f*(s)` for `s ≥ 0`.
    pub fn value_at(&self, s: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b <= s);
        self.plateau_values.get(i).copied().unwrap_or(0.0)
    }

    /// `∫_a^b f*(s)^r ds` for `0 ≤ a ≤ b ≤ ∞` and finite `r > 0`.
    pub fn power_integral(&self, r: f64, a: f64, b: f64) -> f64 {
        let mut acc = 0.0;
        for (i, &v) in self.plateau_values.iter().enumerate() {
            let lo = self.start(i).max(a);
            let hi = self.breakpoints[i].min(b);
            if hi > lo {
                acc += v.powf(r) * (hi - lo);
            }
        }
        acc
    }

    /// `∫_0^t f*(s) ds`.
    pub fn cumulative(&self, t: f64) -> f64 {
        self.power_integral(1.0, 0.0, t)
    }

    /// Lorentz quasinorm of any function whose rearrangement is `self`.
    pub fn lorentz_quasinorm(&self, idx: LorentzIndex) -> f64 {
        let p = idx.p;
        match idx.q {
            Exponent::Infinite => self
                .plateau_values
                .iter()
                .zip(&self.breakpoints)
                .map(|(v, t)| v * t.powf(1.0 / p))
                .fold(0.0, f64::max),
            Exponent::Finite(q) => {
                // (q/p) ∫_{a}^{b} t^{q/p - 1} dt = b^{q/p} - a^{q/p}
                let r = q / p;
                let mut acc = 0.0;
                let mut prev = 0.0_f64;
                for (v, &t) in self.plateau_values.iter().zip(&self.breakpoints) {
                    let tr = t.powf(r);
                    acc += v.powf(q) * (tr - prev);
                    prev = tr;
                }
                acc.powf(1.0 / q)
            }
        }
    }

    /// Rearrangement of `min(|f|, τ)`.
    pub fn clipped(&self, tau: f64) -> StepCurve {
        let mut out = StepCurve::default();
        if tau <= 0.0 {
            return out;
        }
        for (i, &v) in self.plateau_values.iter().enumerate() {
            let w = v.min(tau);
            if out.plateau_values.last() == Some(&w) {
                *out.breakpoints.last_mut().unwrap() = self.breakpoints[i];
            } else {
                out.plateau_values.push(w);
                out.breakpoints.push(self.breakpoints[i]);
            }
        }
        out
    }

    /// Rearrangement of `(|f| − τ)_+`.
    pub fn excess(&self, tau: f64) -> StepCurve {
        let mut out = StepCurve::default();
        for (i, &v) in self.plateau_values.iter().enumerate() {
            if v > tau {
                out.plateau_values.push(v - tau);
                out.breakpoints.push(self.breakpoints[i]);
            }
        }
        out
    }

    /// Rearrangement of `c·f`.
    pub fn scaled(&self, c: f64) -> StepCurve {
        if c == 0.0 {
            return StepCurve::default();
        }
        StepCurve {
            breakpoints: self.breakpoints.clone(),
            plateau_values: self.plateau_values.iter().map(|v| v * c.abs()).collect(),
        }
    }
}

/// `m(f, λ) = |{x : |f(x)| > λ}|`, exact.
pub fn distribution_function(f: &Signal, lambda: f64) -> Result<f64> {
    if lambda < 0.0 || lambda.is_nan() {
        return Err(Error::NegativeLevel(lambda));
    }
    let count = f.values().iter().filter(|v| v.abs() > lambda).count();
    Ok(f.cell_width() * count as f64)
}

/// Nonzero magnitudes sorted in decreasing order.
fn sorted_magnitudes(values: &[f64]) -> Vec<f64> {
    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).filter(|&v| v > 0.0).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags
}

/// Non-increasing rearrangement `f*` of a step signal.
pub fn rearrangement(f: &Signal) -> StepCurve {
    let h = f.cell_width();
    let mags = sorted_magnitudes(f.values());
    let mut curve = StepCurve::default();
    let mut count = 0usize;
    for v in mags {
        count += 1;
        let t = h * count as f64;
        if curve.plateau_values.last() == Some(&v) {
            *curve.breakpoints.last_mut().unwrap() = t;
        } else {
            curve.plateau_values.push(v);
            curve.breakpoints.push(t);
        }
    }
    curve
}

/// `‖f‖_{p,q}` in rearrangement form, evaluated in closed form.
pub fn lorentz_quasinorm(f: &Signal, idx: LorentzIndex) -> f64 {
    rearrangement(f).lorentz_quasinorm(idx)
}

/// The dyadic terms `(k, 2^k m(f, 2^k)^{1/p})` for `k` from
/// `⌊log₂ min|f|⌋ − 1` to `⌈log₂ max|f|⌉`, where `min` runs over nonzero values.
pub fn dyadic_level_terms(f: &Signal, p: f64) -> Vec<(i32, f64)> {
    level_terms_from_magnitudes(&sorted_magnitudes(f.values()), f.cell_width(), p)
}

pub(crate) fn level_terms_from_magnitudes(desc: &[f64], h: f64, p: f64) -> Vec<(i32, f64)> {
    let (Some(&max), Some(&min)) = (desc.first(), desc.last()) else {
        return Vec::new();
    };
    let lo = floor_log2(min) - 1;
    let hi = ceil_log2(max);
    (lo..=hi)
        .map(|k| {
            let lambda = pow2(k);
            let count = desc.partition_point(|&v| v > lambda);
            let m = h * count as f64;
            (k, lambda * m.powf(1.0 / p))
        })
        .collect()
}

pub(crate) fn ell_q_of_terms(terms: impl Iterator<Item = f64>, q: Exponent) -> f64 {
    match q {
        Exponent::Infinite => terms.fold(0.0, f64::max),
        Exponent::Finite(q) => terms.map(|x| x.powf(q)).sum::<f64>().powf(1.0 / q),
    }
}

/// `(Σ_k [2^k m(f,2^k)^{1/p}]^q)^{1/q}` (sup for `q = ∞`) over the finite
/// level range of [`dyadic_level_terms`].
pub fn lorentz_quasinorm_levels(f: &Signal, idx: LorentzIndex) -> f64 {
    let terms = dyadic_level_terms(f, idx.p);
    ell_q_of_terms(terms.into_iter().map(|(_, x)| x), idx.q)
}
