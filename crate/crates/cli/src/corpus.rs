use std::fmt;
use std::str::FromStr;

use hlorentz_core::lorentz::Exponent;
use hlorentz_core::moments::{moment_basis, moment_order, remove_projection};
use hlorentz_core::Signal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Longest signal a corpus may hold.
pub const MAX_LENGTH: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueDistribution {
    Uniform,
    Lognormal,
    SparseAtoms,
}

impl FromStr for ValueDistribution {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "uniform" => Ok(Self::Uniform),
            "lognormal" => Ok(Self::Lognormal),
            "sparse-atoms" => Ok(Self::SparseAtoms),
            other => Err(CliError::Usage(format!("unknown distribution `{other}`"))),
        }
    }
}

impl fmt::Display for ValueDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::Lognormal => "lognormal",
            Self::SparseAtoms => "sparse-atoms",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub seed: u64,
    pub count: usize,
    pub signal_length: usize,
    pub value_distribution: ValueDistribution,
    pub p_list: Vec<f64>,
    pub q_list: Vec<Exponent>,
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.signal_length;
        if !(8..=MAX_LENGTH).contains(&n) || !n.is_power_of_two() {
            return Err(CliError::Usage(format!("signal length must be a power of two in 8..={MAX_LENGTH}, got {n}")));
        }
        if self.p_list.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(CliError::Usage("every p must be positive and finite".into()));
        }
        Ok(())
    }

    /// Vanishing moments imposed on every signal: enough for the smallest `p`.
    pub fn moment_degree(&self) -> usize {
        self.p_list.iter().filter(|&&p| p <= 1.0).map(|&p| moment_order(p)).max().unwrap_or(0)
    }

    pub fn generate(&self) -> Result<Vec<Signal>, CliError> {
        self.validate()?;
        (0..self.count).map(|i| self.item(i)).collect()
    }

    /// Item `index`, independent of every other item.
    pub fn item(&self, index: usize) -> Result<Signal, CliError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let n = self.signal_length;
        let log_n = n.trailing_zeros();
        let coarse_len = 1usize << rng.random_range(3.min(log_n)..=log_n);
        let lognormal = LogNormal::new(0.0, 1.0).expect("unit lognormal");
        let mut coarse = match self.value_distribution {
            ValueDistribution::Uniform => {
                let u = Uniform::new(-1.0, 1.0).expect("unit interval");
                (0..coarse_len).map(|_| u.sample(&mut rng)).collect::<Vec<f64>>()
            }
            ValueDistribution::Lognormal => (0..coarse_len)
                .map(|_| {
                    let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    s * lognormal.sample(&mut rng)
                })
                .collect(),
            ValueDistribution::SparseAtoms => {
                let mut v = vec![0.0; coarse_len];
                for _ in 0..rng.random_range(1..=4) {
                    let width = 1usize << rng.random_range(1..=coarse_len.trailing_zeros());
                    let start = rng.random_range(0..coarse_len / width) * width;
                    let amp = lognormal.sample(&mut rng) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    for (i, x) in v[start..start + width].iter_mut().enumerate() {
                        *x += if i < width / 2 { amp } else { -amp };
                    }
                }
                v
            }
        };
        if coarse.iter().all(|&x| x == 0.0) {
            coarse[0] = 1.0;
        }
        let mut values: Vec<f64> = coarse.iter().flat_map(|&v| std::iter::repeat_n(v, n / coarse_len)).collect();
        remove_projection(&mut values, &moment_basis(n, self.moment_degree()));
        Ok(Signal::new(0.0, 1.0 / n as f64, values)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dist: ValueDistribution) -> CorpusSpec {
        CorpusSpec {
            seed: 7,
            count: 5,
            signal_length: 64,
            value_distribution: dist,
            p_list: vec![1.0, 0.5],
            q_list: vec![Exponent::Finite(2.0)],
        }
    }

    #[test]
    fn generation_is_deterministic_and_item_local() {
        for d in [ValueDistribution::Uniform, ValueDistribution::Lognormal, ValueDistribution::SparseAtoms] {
            let s = spec(d);
            let a = s.generate().unwrap();
            assert_eq!(a, s.generate().unwrap());
            assert_eq!(a[3], s.item(3).unwrap());
            assert_ne!(a[0], a[1]);
        }
    }

    #[test]
    fn moments_vanish() {
        let s = spec(ValueDistribution::Lognormal);
        assert_eq!(s.moment_degree(), 1);
        for f in s.generate().unwrap() {
            let scale: f64 = f.values().iter().map(|v| v.abs()).sum();
            let m0: f64 = f.values().iter().sum();
            let m1: f64 = f.values().iter().enumerate().map(|(i, v)| (i as f64 - 31.5) * v).sum();
            assert!(m0.abs() < 1e-12 * scale && m1.abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn lengths_are_validated() {
        let mut s = spec(ValueDistribution::Uniform);
        s.signal_length = 100;
        assert!(s.generate().is_err());
        s.signal_length = 1 << 15;
        assert!(s.generate().is_err());
    }
}
