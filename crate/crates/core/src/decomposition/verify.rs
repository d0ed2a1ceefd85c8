use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::atom::Atom;
use crate::error::{Error, Result};
use crate::lorentz::{Exponent, LorentzIndex};
use crate::maximal::{hardy_lorentz_quasinorm, MaximalConfig, Mollifier};
use crate::moments::moment_order;
use crate::report::{safe_ratio, Report};
use crate::sequence::{level_partition, mixed_norm, CoefficientFamily};
use crate::signal::Signal;

use super::criteria::{check_sum_split_criterion, check_sup_split_criterion, SplitInput, LevelSplit};
use super::{max_overlap, Grid, OVERLAP_TARGET};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomicCheckConfig {
    pub maximal: MaximalConfig,
    pub overlap_bound: usize,
    /// Upper limit on the split-criterion constants before a flag is raised.
    pub c_bound: f64,
    /// Also run the split criterion on the truncated atomic sums.
    pub with_criterion: bool,
}

impl AtomicCheckConfig {
    pub fn for_p(p: f64) -> Self {
        Self {
            maximal: MaximalConfig::radial(Mollifier::for_p(p)),
            overlap_bound: OVERLAP_TARGET,
            c_bound: 1e3,
            with_criterion: false,
        }
    }
}

fn validate_family(c: &CoefficientFamily, atoms: &[Atom]) -> Result<()> {
    if c.len() != atoms.len() {
        return Err(Error::InvalidArgument(format!("{} coefficients for {} atoms", c.len(), atoms.len())));
    }
    for (j, (e, a)) in c.entries.iter().zip(atoms).enumerate() {
        if (e.measure - a.length).abs() > 1e-9 * a.length {
            return Err(Error::InvalidArgument(format!(
                "entry {j}: measure {} differs from atom length {}",
                e.measure, a.length
            )));
        }
    }
    Ok(())
}

/// `Σ λ_j a_j` on `domain`.
pub fn atomic_sum(c: &CoefficientFamily, atoms: &[Atom], domain: &Grid) -> Result<Signal> {
    validate_family(c, atoms)?;
    let mut f = domain.zeros()?;
    for (e, a) in c.entries.iter().zip(atoms) {
        f.add_scaled(e.lambda, &a.profile)?;
    }
    Ok(f)
}

/// The splits used to place `Mf` in `L^{p,q}`: at each `k₀`,
/// `ψ = M(Σ_{k<k₀} λ_j a_j)` and `η = M(Σ_{k≥k₀} λ_j a_j)` over the level
/// partition, with `μ_k = (Σ_{j∈𝓘_k} |I_j|)^{1/p}`.
pub fn proof_splits(
    c: &CoefficientFamily,
    atoms: &[Atom],
    p: f64,
    domain: &Grid,
    maximal: &MaximalConfig,
) -> Result<(Signal, BTreeMap<i32, LevelSplit>, BTreeMap<i32, f64>)> {
    validate_family(c, atoms)?;
    let part = level_partition(c, p);
    let f = atomic_sum(c, atoms, domain)?;
    let phi = maximal.maximal(&f);
    let mu: BTreeMap<i32, f64> = part
        .iter()
        .map(|(&k, js)| (k, js.iter().map(|&j| c.entries[j].measure).sum::<f64>().powf(1.0 / p)))
        .collect();
    let mut splits = BTreeMap::new();
    let (Some(&lo), Some(&hi)) = (part.keys().next(), part.keys().next_back()) else {
        return Ok((phi, splits, mu));
    };
    for k0 in lo - 1..=hi + 1 {
        let mut low = domain.zeros()?;
        let mut high = domain.zeros()?;
        for (&k, js) in &part {
            let target = if k < k0 { &mut low } else { &mut high };
            for &j in js {
                target.add_scaled(c.entries[j].lambda, &atoms[j].profile)?;
            }
        }
        splits.insert(k0, LevelSplit { psi: maximal.maximal(&low), eta: maximal.maximal(&high) });
    }
    Ok((phi, splits, mu))
}

/// Midpoint of `(1/(γp), cap)` with `γ = N + 2`: the exponent range where the
/// atom decay makes `(Ma)^{εp}` integrable.
pub fn decay_epsilon(p: f64, cap: f64) -> f64 {
    let gamma = moment_order(p) as f64 + 2.0;
    let lo = 1.0 / (gamma * p);
    if lo < cap {
        0.5 * (lo + cap)
    } else {
        0.5 * cap
    }
}

fn overlap_diagnosis(c: &CoefficientFamily, atoms: &[Atom], p: f64, bound: usize, report: &mut Report) -> bool {
    let part = level_partition(c, p);
    let mut worst = 0usize;
    for (k, js) in &part {
        let o = max_overlap(js.iter().map(|&j| atoms[j].interval()));
        if o > bound {
            report.note(format!("level {k}: {o} intervals overlap (bound {bound})"));
        }
        worst = worst.max(o);
    }
    report.set("max_level_overlap", worst as f64);
    worst <= bound
}

/// `‖Σ λ_j a_j‖_{H^{p,q}} ≤ C ‖λ‖_{[p,q]}` for atoms with bounded overlap at
/// each level. An overlap violation is diagnosed in the report; the
/// comparison is still carried out.
pub fn verify_atomic_upper_bound(
    c: &CoefficientFamily,
    atoms: &[Atom],
    p: f64,
    q: Exponent,
    domain: &Grid,
    cfg: &AtomicCheckConfig,
) -> Result<Report> {
    let idx = LorentzIndex::hardy(p, q)?;
    let f = atomic_sum(c, atoms, domain)?;
    let mut report = Report::new("atomic-upper");
    let overlap_ok = overlap_diagnosis(c, atoms, p, cfg.overlap_bound, &mut report);
    let atoms_ok = atoms.iter().all(|a| a.check().valid);
    let hardy = hardy_lorentz_quasinorm(&f, idx, &cfg.maximal);
    let mixed = mixed_norm(c, p, q);
    let ratio = safe_ratio(hardy, mixed);
    report.set("hardy_norm", hardy).set("mixed_norm", mixed).set("ratio", ratio).set("atoms", atoms.len() as f64);
    report.flag("overlap", overlap_ok).flag("atoms_valid", atoms_ok).flag("ratio_finite", ratio.is_finite());
    if cfg.with_criterion {
        let (phi, splits, mu) = proof_splits(c, atoms, p, domain, &cfg.maximal)?;
        let eps = decay_epsilon(p, 1.0);
        let input = SplitInput { phi: &phi, splits: &splits, mu: &mu, eps, p, q };
        let crit = check_sup_split_criterion(&input, cfg.c_bound)?;
        for key in ["c", "C"] {
            report.set(format!("criterion_{key}"), crit.get(key).unwrap_or(f64::NAN));
        }
        report.flag("criterion_hypotheses", crit.is("hypotheses"));
    }
    Ok(report)
}

/// `‖Σ λ_j a_j‖_{H^{p,q}} ≤ C ‖λ‖_{[η,q]}` for `0 < η < min(p, q)`, with no
/// overlap assumption.
pub fn verify_overlapping_atomic_bound(
    c: &CoefficientFamily,
    atoms: &[Atom],
    p: f64,
    q: Exponent,
    eta: f64,
    domain: &Grid,
    cfg: &AtomicCheckConfig,
) -> Result<Report> {
    let idx = LorentzIndex::hardy(p, q)?;
    let cap = match q {
        Exponent::Infinite => p,
        Exponent::Finite(qv) => p.min(qv),
    };
    if !(eta > 0.0 && eta < cap) {
        return Err(Error::InvalidIndex(format!("η = {eta} outside (0, {cap})")));
    }
    let f = atomic_sum(c, atoms, domain)?;
    let mut report = Report::new("atomic-overlap");
    overlap_diagnosis(c, atoms, p, cfg.overlap_bound, &mut report);
    let hardy = hardy_lorentz_quasinorm(&f, idx, &cfg.maximal);
    let mixed = mixed_norm(c, eta, q);
    let ratio = safe_ratio(hardy, mixed);
    report.set("hardy_norm", hardy).set("mixed_norm", mixed).set("ratio", ratio).set("eta", eta);
    report.flag("atoms_valid", atoms.iter().all(|a| a.check().valid)).flag("ratio_finite", ratio.is_finite());
    if cfg.with_criterion {
        let (phi, splits, mu) = proof_splits(c, atoms, p, domain, &cfg.maximal)?;
        let cap = match q {
            Exponent::Infinite => 1.0,
            Exponent::Finite(qv) => (qv / p).min(1.0),
        };
        let input = SplitInput { phi: &phi, splits: &splits, mu: &mu, eps: decay_epsilon(p, cap), p, q };
        let crit = check_sum_split_criterion(&input, cfg.c_bound)?;
        for key in ["c", "C"] {
            report.set(format!("criterion_{key}"), crit.get(key).unwrap_or(f64::NAN));
        }
        report.flag("criterion_hypotheses", crit.is("hypotheses"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{make_atom, Interval};

    fn haar(grid_n: usize, start: usize, len: usize) -> (Atom, Grid) {
        let h = 1.0 / grid_n as f64;
        let mut v = vec![0.0; grid_n];
        for (i, x) in v[start..start + len].iter_mut().enumerate() {
            *x = if i < len / 2 { 1.0 } else { -1.0 };
        }
        let raw = Signal::new(0.0, h, v).unwrap();
        let iv = Interval::from_bounds(start as f64 * h, (start + len) as f64 * h).unwrap();
        let (a, _) = make_atom(iv, &raw, 1.0).unwrap();
        (a, Grid::of(&raw))
    }

    #[test]
    fn disjoint_same_level_family() {
        let (a1, grid) = haar(64, 8, 8);
        let (a2, _) = haar(64, 32, 8);
        let c = CoefficientFamily::from_pairs(&[(1.0, a1.length), (1.0, a2.length)]).unwrap();
        let cfg = AtomicCheckConfig { with_criterion: true, ..AtomicCheckConfig::for_p(1.0) };
        let r = verify_atomic_upper_bound(&c, &[a1, a2], 1.0, Exponent::Finite(1.0), &grid, &cfg).unwrap();
        assert_eq!(r.get("mixed_norm"), Some(2.0));
        assert!(r.passed(), "{r:?}");
        assert!(r.get("ratio").unwrap() > 0.1 && r.get("ratio").unwrap() < 100.0);
    }

    #[test]
    fn ratio_is_homogeneous() {
        let (a, grid) = haar(64, 16, 16);
        let q = Exponent::Finite(2.0);
        let cfg = AtomicCheckConfig::for_p(1.0);
        let base = CoefficientFamily::from_pairs(&[(1.0, a.length)]).unwrap();
        let r1 = verify_atomic_upper_bound(&base, std::slice::from_ref(&a), 1.0, q, &grid, &cfg).unwrap();
        let r2 = verify_atomic_upper_bound(&base.scaled(4.0), &[a], 1.0, q, &grid, &cfg).unwrap();
        assert!((r1.get("ratio").unwrap() - r2.get("ratio").unwrap()).abs() < 1e-12);
    }

    #[test]
    fn overlap_violation_is_diagnosed_not_fatal() {
        let (a, grid) = haar(64, 16, 16);
        let atoms = vec![a.clone(); 12];
        let c = CoefficientFamily::from_pairs(&vec![(1.0, a.length); 12]).unwrap();
        let cfg = AtomicCheckConfig::for_p(1.0);
        let r = verify_atomic_upper_bound(&c, &atoms, 1.0, Exponent::Infinite, &grid, &cfg).unwrap();
        assert!(!r.is("overlap"));
        assert!(r.get("ratio").unwrap().is_finite());
        let r = verify_overlapping_atomic_bound(&c, &atoms, 1.0, Exponent::Infinite, 0.5, &grid, &cfg).unwrap();
        assert!(r.passed());
        assert!(verify_overlapping_atomic_bound(&c, &atoms, 1.0, Exponent::Infinite, 1.0, &grid, &cfg).is_err());
    }

    #[test]
    fn empty_family_is_zero() {
        let grid = Grid { origin: 0.0, cell_width: 0.25, len: 8 };
        let c = CoefficientFamily::default();
        let cfg = AtomicCheckConfig::for_p(1.0);
        let r = verify_overlapping_atomic_bound(&c, &[], 1.0, Exponent::Finite(2.0), 0.5, &grid, &cfg).unwrap();
        assert_eq!(r.get("hardy_norm"), Some(0.0));
        assert_eq!(r.get("ratio"), Some(0.0));
    }
}
