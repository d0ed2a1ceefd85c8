//! Coefficient sequences: `ℓ^q` norms, the level partition of an atomic
//! family and the mixed norm `‖λ‖_{[p,q]}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decomposition::AtomicDecomposition;
use crate::dyadic::level_of;
use crate::error::{Error, Result};
use crate::lorentz::{ell_q_of_terms, Exponent};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub lambda: f64,
    /// Measure `|I_j|` of the defining interval.
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoefficientFamily {
    pub entries: Vec<Coefficient>,
}

impl CoefficientFamily {
    pub fn new(entries: Vec<Coefficient>) -> Result<Self> {
        for (j, e) in entries.iter().enumerate() {
            if !(e.measure.is_finite() && e.measure > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "entry {j}: interval measure must be positive, got {}",
                    e.measure
                )));
            }
            if !e.lambda.is_finite() {
                return Err(Error::InvalidArgument(format!("entry {j}: coefficient is not finite")));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(lambda, measure)| Coefficient { lambda, measure }).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| Coefficient { lambda: c * e.lambda, measure: e.measure })
                .collect(),
        }
    }
}

/// Level `k` → indices `j` with `2^k ≤ |λ_j| / |I_j|^{1/p} < 2^{k+1}`.
pub type LevelPartition = BTreeMap<i32, Vec<usize>>;

/// `(Σ μ_k^q)^{1/q}`, or `sup μ_k` for `q = ∞`.
pub fn ell_q_norm(mu: &[f64], q: Exponent) -> f64 {
    ell_q_of_terms(mu.iter().copied(), q)
}

/// Normalized size `|λ_j| / |I_j|^{1/p}` whose binary exponent is the level.
pub fn normalized_size(c: &Coefficient, p: f64) -> f64 {
    if p == 1.0 {
        c.lambda.abs() / c.measure
    } else {
        c.lambda.abs() / c.measure.powf(1.0 / p)
    }
}

/// Zero coefficients are left out of every level.
pub fn level_partition(c: &CoefficientFamily, p: f64) -> LevelPartition {
    let mut part = LevelPartition::new();
    for (j, e) in c.entries.iter().enumerate() {
        let r = normalized_size(e, p);
        if r > 0.0 {
            part.entry(level_of(r)).or_default().push(j);
        }
    }
    part
}

/// Per-level aggregates `(Σ_{j∈𝓘_k} |λ_j|^p)^{1/p}`.
pub fn partition_masses(c: &CoefficientFamily, p: f64) -> BTreeMap<i32, f64> {
    level_partition(c, p)
        .into_iter()
        .map(|(k, js)| {
            let s: f64 = js.iter().map(|&j| c.entries[j].lambda.abs().powf(p)).sum();
            (k, s.powf(1.0 / p))
        })
        .collect()
}

/// `‖λ‖_{[p,q]} = (Σ_k [Σ_{j∈𝓘_k} |λ_j|^p]^{q/p})^{1/q}`.
pub fn mixed_norm(c: &CoefficientFamily, p: f64, q: Exponent) -> f64 {
    let masses = partition_masses(c, p);
    ell_q_of_terms(masses.values().copied(), q)
}

/// `μ_k = (Σ_j |λ_{j,k}|^p)^{1/p}` for every level present in `dec`.
pub fn level_masses(dec: &AtomicDecomposition, p: f64) -> BTreeMap<i32, f64> {
    dec.levels
        .iter()
        .map(|level| {
            let s: f64 = level.terms.iter().map(|t| t.lambda.abs().powf(p)).sum();
            (level.k, s.powf(1.0 / p))
        })
        .collect()
}

/// Dense view `μ_k` for `k` in `lo..=hi`, zero at absent levels.
pub fn dense_masses(masses: &BTreeMap<i32, f64>) -> Vec<(i32, f64)> {
    let (Some((&lo, _)), Some((&hi, _))) = (masses.first_key_value(), masses.last_key_value())
    else {
        return Vec::new();
    };
    (lo..=hi).map(|k| (k, masses.get(&k).copied().unwrap_or(0.0))).collect()
}
