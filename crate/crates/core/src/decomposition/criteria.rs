//! Checkers for the two split criteria that place a function in `L^{p,q}`:
//! `φ ≤ ψ_{k₀} + η_{k₀}` at every level `k₀`, with `ψ` controlled near or
//! below the level and `η` controlled by the tail of `{2^k μ_k}`.

use std::collections::BTreeMap;

use crate::dyadic::pow2;
use crate::error::{Error, Result};
use crate::lorentz::{distribution_function, ell_q_of_terms, lorentz_quasinorm, Exponent, LorentzIndex};
use crate::report::{safe_ratio, Report};
use crate::signal::Signal;

#[derive(Debug, Clone)]
pub struct LevelSplit {
    pub psi: Signal,
    pub eta: Signal,
}

pub struct SplitInput<'a> {
    pub phi: &'a Signal,
    pub splits: &'a BTreeMap<i32, LevelSplit>,
    pub mu: &'a BTreeMap<i32, f64>,
    pub eps: f64,
    pub p: f64,
    pub q: Exponent,
}

/// Relative slack allowed in `φ ≤ ψ + η`, which holds exactly up to rounding.
const DOMINATION_SLACK: f64 = 1e-12;

impl SplitInput<'_> {
    fn validate(&self, eps_cap: f64) -> Result<()> {
        if !(self.p > 0.0) {
            return Err(Error::InvalidIndex(format!("p must be positive, got {}", self.p)));
        }
        if !(self.eps > 0.0 && self.eps < eps_cap) {
            return Err(Error::InvalidArgument(format!("ε = {} outside (0, {eps_cap})", self.eps)));
        }
        if self.mu.values().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidArgument("μ must be finite and nonnegative".into()));
        }
        for s in self.splits.values() {
            for g in [&s.psi, &s.eta] {
                self.phi.grid_offset(g)?;
                if g.len() != self.phi.len() {
                    return Err(Error::GridMismatch("split functions must share the grid of φ".into()));
                }
            }
        }
        Ok(())
    }

    fn dominated(&self, s: &LevelSplit) -> bool {
        let scale = self.phi.sup_abs();
        self.phi
            .values()
            .iter()
            .zip(s.psi.values().iter().zip(s.eta.values()))
            .all(|(f, (a, b))| *f <= a + b + DOMINATION_SLACK * scale)
    }

    fn sum_mu(&self, range: impl Fn(i32) -> bool, term: impl Fn(i32, f64) -> f64) -> f64 {
        self.mu.iter().filter(|(k, _)| range(**k)).map(|(&k, &m)| term(k, m)).sum()
    }

    fn conclusion(&self, report: &mut Report) {
        let lhs = lorentz_quasinorm(self.phi, LorentzIndex { p: self.p, q: self.q });
        let rhs = ell_q_of_terms(self.mu.iter().map(|(&k, &m)| pow2(k) * m), self.q);
        report.set("phi_norm", lhs).set("mu_norm", rhs).set("C", safe_ratio(lhs, rhs));
        report.flag("conclusion_finite", safe_ratio(lhs, rhs).is_finite());
    }
}

/// Records per-`k₀` constants, the overall smallest admissible `c`, and
/// flags the failing levels.
fn finish(
    mut report: Report,
    input: &SplitInput,
    per_level: Vec<(i32, bool, f64, f64)>,
    c_bound: f64,
) -> Report {
    let mut c_first = 0.0_f64;
    let mut c_second = 0.0_f64;
    let mut dominated = true;
    for &(k0, dom, a, b) in &per_level {
        c_first = c_first.max(a);
        c_second = c_second.max(b);
        if !dom {
            dominated = false;
            report.note(format!("k0 = {k0}: phi exceeds psi + eta"));
        }
        if a > c_bound || b > c_bound {
            report.note(format!("k0 = {k0}: constants {a:.3e}, {b:.3e} exceed bound {c_bound}"));
        }
    }
    let c = c_first.max(c_second);
    report
        .set("c_first", c_first)
        .set("c_second", c_second)
        .set("c", c)
        .set("c_bound", c_bound)
        .set("levels_checked", per_level.len() as f64);
    report.flag("domination", dominated).flag("hypotheses", dominated && c <= c_bound);
    input.conclusion(&mut report);
    let big_c = report.get("C").unwrap_or(0.0);
    report.set("C_over_c", safe_ratio(big_c, c));
    report
}

/// `‖ψ_{k₀}‖_∞ ≤ c 2^{k₀}` and
/// `2^{k₀εp} m(η_{k₀}, 2^{k₀}) ≤ c Σ_{k≥k₀} [2^{kε} μ_k]^p`, with `0 < ε < 1`.
pub fn check_sup_split_criterion(input: &SplitInput, c_bound: f64) -> Result<Report> {
    input.validate(1.0)?;
    let (p, eps) = (input.p, input.eps);
    let mut per_level = Vec::new();
    for (&k0, s) in input.splits {
        let lam = pow2(k0);
        let c_psi = s.psi.sup_abs() / lam;
        let lhs = lam.powf(eps * p) * distribution_function(&s.eta, lam)?;
        let rhs = input.sum_mu(|k| k >= k0, |k, m| (pow2(k).powf(eps) * m).powf(p));
        per_level.push((k0, input.dominated(s), c_psi, safe_ratio(lhs, rhs)));
    }
    Ok(finish(Report::new("sup-split"), input, per_level, c_bound))
}

/// `2^{k₀p} m(ψ_{k₀}, 2^{k₀})^ε ≤ c Σ_{k≤k₀} [2^k μ_k^ε]^p` and
/// `2^{k₀ε} m(η_{k₀}, 2^{k₀}) ≤ c Σ_{k≥k₀} [2^{kε} μ_k]^p`, with
/// `0 < ε < min(1, q/p)`.
pub fn check_sum_split_criterion(input: &SplitInput, c_bound: f64) -> Result<Report> {
    let cap = match input.q {
        Exponent::Infinite => 1.0,
        Exponent::Finite(q) => (q / input.p).min(1.0),
    };
    input.validate(cap)?;
    let (p, eps) = (input.p, input.eps);
    let mut per_level = Vec::new();
    for (&k0, s) in input.splits {
        let lam = pow2(k0);
        let lhs_low = lam.powf(p) * distribution_function(&s.psi, lam)?.powf(eps);
        let rhs_low = input.sum_mu(|k| k <= k0, |k, m| (pow2(k) * m.powf(eps)).powf(p));
        let lhs_high = lam.powf(eps) * distribution_function(&s.eta, lam)?;
        let rhs_high = input.sum_mu(|k| k >= k0, |k, m| (pow2(k).powf(eps) * m).powf(p));
        per_level.push((k0, input.dominated(s), safe_ratio(lhs_low, rhs_low), safe_ratio(lhs_high, rhs_high)));
    }
    Ok(finish(Report::new("sum-split"), input, per_level, c_bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(v: &[f64]) -> Signal {
        Signal::new(0.0, 1.0, v.to_vec()).unwrap()
    }

    #[test]
    fn zero_phi_gives_zero_constant() {
        let z = sig(&[0.0; 4]);
        let mut splits = BTreeMap::new();
        splits.insert(0, LevelSplit { psi: z.clone(), eta: z.clone() });
        let mu = BTreeMap::from([(0, 1.0)]);
        let input = SplitInput { phi: &z, splits: &splits, mu: &mu, eps: 0.5, p: 1.0, q: Exponent::Finite(1.0) };
        let r = check_sup_split_criterion(&input, 10.0).unwrap();
        assert_eq!(r.get("C"), Some(0.0));
        assert!(r.passed(), "{r:?}");
        let r = check_sum_split_criterion(&input, 10.0).unwrap();
        assert_eq!(r.get("C"), Some(0.0));
        assert!(r.passed());
    }

    #[test]
    fn oversized_psi_is_flagged() {
        let phi = sig(&[1.0, 1.0, 0.0, 0.0]);
        let psi = sig(&[1e9, 1e9, 0.0, 0.0]);
        let splits = BTreeMap::from([(0, LevelSplit { psi, eta: sig(&[0.0; 4]) })]);
        let mu = BTreeMap::from([(0, 2.0)]);
        let input = SplitInput { phi: &phi, splits: &splits, mu: &mu, eps: 0.5, p: 1.0, q: Exponent::Infinite };
        let r = check_sup_split_criterion(&input, 100.0).unwrap();
        assert!(!r.is("hypotheses"));
        assert!(r.is("domination"));
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn undominated_phi_is_flagged() {
        let phi = sig(&[3.0, 0.0]);
        let splits = BTreeMap::from([(0, LevelSplit { psi: sig(&[1.0, 0.0]), eta: sig(&[1.0, 0.0]) })]);
        let mu = BTreeMap::from([(0, 1.0)]);
        let input = SplitInput { phi: &phi, splits: &splits, mu: &mu, eps: 0.5, p: 1.0, q: Exponent::Infinite };
        assert!(!check_sup_split_criterion(&input, 1e6).unwrap().is("domination"));
    }

    #[test]
    fn epsilon_range_is_enforced() {
        let z = sig(&[0.0]);
        let splits = BTreeMap::new();
        let mu = BTreeMap::new();
        let mk = |eps, q| SplitInput { phi: &z, splits: &splits, mu: &mu, eps, p: 1.0, q };
        assert!(check_sup_split_criterion(&mk(1.0, Exponent::Infinite), 1.0).is_err());
        // q/p = 1/2 caps ε below 1/2
        assert!(check_sum_split_criterion(&mk(0.6, Exponent::Finite(0.5)), 1.0).is_err());
        assert!(check_sum_split_criterion(&mk(0.4, Exponent::Finite(0.5)), 1.0).is_ok());
    }
}
