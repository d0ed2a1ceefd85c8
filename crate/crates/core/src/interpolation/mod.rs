//! Peetre K-functionals of step signals and sequences, intermediate-space
//! quasinorms of sampled K-curves, and the Hardy–Lorentz interpolation check.

mod hardy;
mod kfunc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentz::Exponent;

pub use hardy::{split_by_levels, verify_interpolation_identity, InterpolationCheckConfig};
pub use kfunc::{
    exhaustive_family, holmstedt, k_functional_bruteforce, naive_exhaustive, threshold_family, KFunctional,
    SplitFamily, EXHAUSTIVE_FRACTIONS, EXHAUSTIVE_MAX_LEN, THRESHOLD_LEVELS,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoupleKind {
    /// `(ℓ^{q0}, ℓ^{q1})`: entries weighted by one, whatever the cell width.
    Sequence,
    /// `(L^{q0}, L^{q1})` on the signal's grid.
    Function,
    /// `(H^{p,q0}, H^{p,q1})`.
    Hardy { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupleSpec {
    pub kind: CoupleKind,
    pub q0: Exponent,
    pub q1: Exponent,
}

impl CoupleSpec {
    pub fn new(kind: CoupleKind, q0: Exponent, q1: Exponent) -> Result<Self> {
        let ok = match (q0, q1) {
            (Exponent::Finite(a), Exponent::Finite(b)) => a > 0.0 && a < b,
            (Exponent::Finite(a), Exponent::Infinite) => a > 0.0,
            _ => false,
        };
        if !ok {
            return Err(Error::InvalidIndex(format!("couple needs 0 < q0 < q1 <= inf, got ({q0}, {q1})")));
        }
        if let CoupleKind::Hardy { p } = kind {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidIndex(format!("Hardy couple needs 0 < p <= 1, got {p}")));
            }
        }
        Ok(Self { kind, q0, q1 })
    }

    pub fn sequence(q0: Exponent, q1: Exponent) -> Result<Self> {
        Self::new(CoupleKind::Sequence, q0, q1)
    }

    pub fn function(q0: Exponent, q1: Exponent) -> Result<Self> {
        Self::new(CoupleKind::Function, q0, q1)
    }
}

/// Default half-width of the dyadic `t`-grid exponent range.
pub const DEFAULT_T_EXP: u32 = 16;
/// Largest exponent range tried when tails have not decayed.
pub const MAX_T_EXP: u32 = 40;
/// Tail samples of `t^{−η} K(t)` must fall below this fraction of the peak.
pub const TAIL_DECAY: f64 = 1e-3;

/// `K(t)` sampled at `t = 2^i`, `−T ≤ i ≤ T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCurve {
    pub t: Vec<f64>,
    #[serde(rename = "K")]
    pub k: Vec<f64>,
}

impl KCurve {
    pub fn sample(t_exp: u32, k_of: impl Fn(f64) -> f64) -> Self {
        let e = t_exp as i32;
        let t: Vec<f64> = (-e..=e).map(|i| 2.0_f64.powi(i)).collect();
        let k = t.iter().map(|&t| k_of(t)).collect();
        Self { t, k }
    }

    pub fn t_exp(&self) -> u32 {
        (self.t.len() / 2) as u32
    }

    /// `K` nondecreasing and `K(t)/t` nonincreasing, up to relative `tol`.
    pub fn has_k_shape(&self, tol: f64) -> bool {
        self.k.windows(2).zip(self.t.windows(2)).all(|(k, t)| {
            let slack = tol * k[0].abs().max(k[1].abs());
            k[1] >= k[0] - slack && k[1] / t[1] <= k[0] / t[0] + slack / t[0]
        })
    }
}

/// `(∫₀^∞ [t^{−η} K(t)]^q dt/t)^{1/q}`, or `sup t^{−η}K(t)` for `q = ∞`.
///
/// Between samples `K` is taken as a power of `t` (linear in log–log), which
/// is exact for the piecewise power-law K-curves of step signals away from
/// their breakpoints; beyond the grid ends the end slopes are extended.
pub fn interpolation_quasinorm(curve: &KCurve, eta: f64, q: Exponent) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("η must lie in (0, 1), got {eta}")));
    }
    let n = curve.t.len();
    if n < 2 || curve.k.len() != n {
        return Err(Error::InvalidArgument("K-curve needs at least two samples".into()));
    }
    let g: Vec<f64> = curve.t.iter().zip(&curve.k).map(|(t, k)| t.powf(-eta) * k).collect();
    let gmax = g.iter().copied().fold(0.0, f64::max);
    if gmax == 0.0 {
        return Ok(0.0);
    }
    let (left, right) = (g[0] / gmax, g[n - 1] / gmax);
    if left >= TAIL_DECAY || right >= TAIL_DECAY {
        return Err(Error::TailNotDecayed { t_exp: curve.t_exp(), left, right });
    }
    let q = match q {
        Exponent::Infinite => return Ok(gmax),
        Exponent::Finite(q) => q,
    };
    let slope = |i: usize| (curve.k[i + 1] / curve.k[i]).ln() / (curve.t[i + 1] / curve.t[i]).ln();
    let mut total = 0.0;
    for i in 0..n - 1 {
        let lr = (curve.t[i + 1] / curve.t[i]).ln();
        if curve.k[i] > 0.0 {
            let a = (slope(i) - eta) * q;
            let factor = if (a * lr).abs() < 1e-12 { lr } else { (a * lr).exp_m1() / a };
            total += g[i].powf(q) * factor;
        } else {
            // K vanishes at the left sample: fall back to a fine midpoint rule in log t
            let m = 64;
            total += (0..m)
                .map(|j| {
                    let u = (j as f64 + 0.5) / m as f64;
                    let t = curve.t[i] * (u * lr).exp();
                    let k = curve.k[i] + (curve.k[i + 1] - curve.k[i]) * (t - curve.t[i]) / (curve.t[i + 1] - curve.t[i]);
                    (t.powf(-eta) * k).powf(q) * lr / m as f64
                })
                .sum::<f64>();
        }
    }
    if curve.k[0] > 0.0 {
        let a = (slope(0) - eta) * q;
        if a <= 0.0 {
            return Err(Error::TailNotDecayed { t_exp: curve.t_exp(), left, right });
        }
        total += g[0].powf(q) / a;
    }
    let a = (slope(n - 2) - eta) * q;
    if a >= 0.0 {
        return Err(Error::TailNotDecayed { t_exp: curve.t_exp(), left, right });
    }
    total += g[n - 1].powf(q) / -a;
    Ok(total.powf(1.0 / q))
}

/// Samples `k_of` on a grid of half-width `DEFAULT_T_EXP`, widening by four
/// until the tails decay or `MAX_T_EXP` is reached.
pub fn interpolation_quasinorm_adaptive(
    k_of: impl Fn(f64) -> f64,
    eta: f64,
    q: Exponent,
) -> Result<(f64, KCurve)> {
    let mut t_exp = DEFAULT_T_EXP;
    loop {
        let curve = KCurve::sample(t_exp, &k_of);
        match interpolation_quasinorm(&curve, eta, q) {
            Ok(v) => return Ok((v, curve)),
            Err(Error::TailNotDecayed { .. }) if t_exp < MAX_T_EXP => t_exp = (t_exp + 4).min(MAX_T_EXP),
            Err(e) => return Err(e),
        }
    }
}

/// `η` with `1/q = (1 − η)/q1 + η/q2`.
pub fn interpolation_parameter(q1: f64, q: f64, q2: Exponent) -> f64 {
    let inv2 = q2.reciprocal();
    (1.0 / q1 - 1.0 / q) / (1.0 / q1 - inv2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_curve_has_zero_norm() {
        let c = KCurve::sample(8, |_| 0.0);
        assert_eq!(interpolation_quasinorm(&c, 0.5, Exponent::Finite(2.0)).unwrap(), 0.0);
    }

    #[test]
    fn min_curve_matches_closed_form() {
        // ∫ [t^{-η} min(t,1)]^q dt/t = 1/((1-η)q) + 1/(ηq)
        for (eta, q) in [(0.5_f64, 2.0_f64), (0.25, 1.0), (0.7, 3.0)] {
            let want = (1.0 / ((1.0 - eta) * q) + 1.0 / (eta * q)).powf(1.0 / q);
            let (got, _) = interpolation_quasinorm_adaptive(|t| t.min(1.0), eta, Exponent::Finite(q)).unwrap();
            assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
        }
        let c = KCurve::sample(24, |t| t.min(1.0));
        assert_eq!(interpolation_quasinorm(&c, 0.5, Exponent::Infinite).unwrap(), 1.0);
    }

    #[test]
    fn scaling_is_exact() {
        let c = KCurve::sample(32, |t| (t * 3.0).min(2.0 + t.sqrt()).min(5.0));
        let c3 = KCurve { t: c.t.clone(), k: c.k.iter().map(|k| 3.0 * k).collect() };
        let a = interpolation_quasinorm(&c, 0.4, Exponent::Finite(1.5)).unwrap();
        let b = interpolation_quasinorm(&c3, 0.4, Exponent::Finite(1.5)).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-12 * b);
    }

    #[test]
    fn undecayed_tails_are_reported_and_widened() {
        let narrow = KCurve::sample(2, |t| t.min(1.0));
        assert!(matches!(
            interpolation_quasinorm(&narrow, 0.5, Exponent::Finite(2.0)),
            Err(Error::TailNotDecayed { .. })
        ));
        let (_, c) = interpolation_quasinorm_adaptive(|t| t.min(1e6), 0.5, Exponent::Finite(2.0)).unwrap();
        assert!(c.t_exp() > DEFAULT_T_EXP);
        // K(t) = t^{1/2} never decays at η = 1/2
        assert!(interpolation_quasinorm_adaptive(|t| t.sqrt(), 0.5, Exponent::Finite(2.0)).is_err());
    }

    #[test]
    fn parameter_examples() {
        assert!((interpolation_parameter(1.0, 2.0, Exponent::Infinite) - 0.5).abs() < 1e-15);
        assert!((interpolation_parameter(1.0, 2.0, Exponent::Finite(4.0)) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn couple_validation() {
        let f = |x| Exponent::Finite(x);
        assert!(CoupleSpec::function(f(1.0), Exponent::Infinite).is_ok());
        assert!(CoupleSpec::function(f(2.0), f(1.0)).is_err());
        assert!(CoupleSpec::function(Exponent::Infinite, Exponent::Infinite).is_err());
        assert!(CoupleSpec::new(CoupleKind::Hardy { p: 2.0 }, f(1.0), f(2.0)).is_err());
    }
}
