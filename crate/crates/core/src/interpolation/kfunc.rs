use crate::error::{Error, Result};
use crate::lorentz::{rearrangement, Exponent, StepCurve};
use crate::signal::Signal;

use super::{CoupleKind, CoupleSpec};

/// Log-spaced thresholds in the threshold family (data values are added).
pub const THRESHOLD_LEVELS: usize = 200;
/// Per-coordinate fraction grid of the exhaustive split search.
pub const EXHAUSTIVE_FRACTIONS: usize = 21;
/// Longest input searched exhaustively.
pub const EXHAUSTIVE_MAX_LEN: usize = 6;

/// Candidate splittings `f = f₀ + f₁` stored as norm pairs
/// `(‖f₀‖₀, ‖f₁‖₁)`; `K(t) ≤ min a + t b`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SplitFamily {
    pub pairs: Vec<(f64, f64)>,
}

impl SplitFamily {
    pub fn eval(&self, t: f64) -> f64 {
        self.pairs.iter().map(|&(a, b)| a + t * b).fold(f64::INFINITY, f64::min)
    }

    pub fn merged(mut self, other: SplitFamily) -> Self {
        self.pairs.extend(other.pairs);
        self
    }
}

fn weight(x: &Signal, kind: CoupleKind) -> Result<f64> {
    match kind {
        CoupleKind::Sequence => Ok(1.0),
        CoupleKind::Function => Ok(x.cell_width()),
        CoupleKind::Hardy { .. } => {
            Err(Error::InvalidArgument("brute-force K-functionals need a sequence or function couple".into()))
        }
    }
}

/// `Σ w|v|^q` or `max |v|`: the norm before the final root.
fn power_sum(mags: impl Iterator<Item = f64>, q: Exponent, w: f64) -> f64 {
    match q {
        Exponent::Infinite => mags.fold(0.0, f64::max),
        Exponent::Finite(q) => w * mags.map(|v| v.powf(q)).sum::<f64>(),
    }
}

fn root(s: f64, q: Exponent) -> f64 {
    match q {
        Exponent::Infinite => s,
        Exponent::Finite(q) => s.powf(1.0 / q),
    }
}

/// Splittings `f₀ = sign f · (|f| − τ)₊`, `f₁ = sign f · min(|f|, τ)` over
/// log-spaced `τ`, every data magnitude, `0` and `max|f|`.
pub fn threshold_family(x: &Signal, couple: &CoupleSpec) -> Result<SplitFamily> {
    let w = weight(x, couple.kind)?;
    let mags: Vec<f64> = x.values().iter().map(|v| v.abs()).collect();
    let max = mags.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(SplitFamily { pairs: vec![(0.0, 0.0)] });
    }
    let min = mags.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let mut taus: Vec<f64> = vec![0.0, max];
    taus.extend(mags.iter().copied());
    let (llo, lhi) = ((min * 1e-3).ln(), max.ln());
    taus.extend((0..THRESHOLD_LEVELS).map(|i| (llo + (lhi - llo) * i as f64 / (THRESHOLD_LEVELS - 1) as f64).exp()));
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let pairs = taus
        .into_iter()
        .map(|tau| {
            let a = power_sum(mags.iter().map(|v| (v - tau).max(0.0)), couple.q0, w);
            let b = power_sum(mags.iter().map(|v| v.min(tau)), couple.q1, w);
            (root(a, couple.q0), root(b, couple.q1))
        })
        .collect();
    Ok(SplitFamily { pairs })
}

/// Combines per-coordinate costs: sum for finite exponents, max for `∞`.
fn combine(acc: f64, term: f64, q: Exponent) -> f64 {
    match q {
        Exponent::Infinite => acc.max(term),
        Exponent::Finite(_) => acc + term,
    }
}

fn coord_cost(v: f64, q: Exponent, w: f64) -> f64 {
    match q {
        Exponent::Infinite => v,
        Exponent::Finite(q) => w * v.powf(q),
    }
}

/// Every per-coordinate split `f₀ = s f`, `s ∈ {0, 1/20, …, 1}`, reduced to
/// its Pareto frontier in `(Σ|f₀|^{q0}, Σ|f₁|^{q1})`. Both objectives are
/// monotone in each coordinate's contribution, so pruning dominated partial
/// states after every coordinate keeps the exact minimum for every `t`.
pub fn exhaustive_family(x: &Signal, couple: &CoupleSpec) -> Result<SplitFamily> {
    let w = weight(x, couple.kind)?;
    if x.len() > EXHAUSTIVE_MAX_LEN {
        return Err(Error::InvalidArgument(format!(
            "exhaustive search is limited to {EXHAUSTIVE_MAX_LEN} entries, got {}",
            x.len()
        )));
    }
    let steps = (EXHAUSTIVE_FRACTIONS - 1) as f64;
    let mut frontier: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for &v in x.values() {
        let v = v.abs();
        let options: Vec<(f64, f64)> = (0..EXHAUSTIVE_FRACTIONS)
            .map(|i| {
                let s = i as f64 / steps;
                (coord_cost(s * v, couple.q0, w), coord_cost((1.0 - s) * v, couple.q1, w))
            })
            .collect();
        let mut next: Vec<(f64, f64)> = frontier
            .iter()
            .flat_map(|&(a, b)| {
                options.iter().map(move |&(da, db)| (combine(a, da, couple.q0), combine(b, db, couple.q1)))
            })
            .collect();
        next.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        frontier.clear();
        for (a, b) in next {
            if frontier.last().is_none_or(|&(_, lb)| b < lb) {
                frontier.push((a, b));
            }
        }
    }
    let pairs = frontier.into_iter().map(|(a, b)| (root(a, couple.q0), root(b, couple.q1))).collect();
    Ok(SplitFamily { pairs })
}

/// Plain nested loop over all `21^n` splits; the reference for
/// [`exhaustive_family`] on short inputs.
pub fn naive_exhaustive(x: &Signal, t: f64, couple: &CoupleSpec) -> Result<f64> {
    let w = weight(x, couple.kind)?;
    let n = x.len();
    let m = EXHAUSTIVE_FRACTIONS;
    let steps = (m - 1) as f64;
    let mut best = f64::INFINITY;
    let mut idx = vec![0usize; n];
    loop {
        let f0 = idx.iter().zip(x.values()).map(|(&i, v)| i as f64 / steps * v.abs());
        let f1 = idx.iter().zip(x.values()).map(|(&i, v)| (1.0 - i as f64 / steps) * v.abs());
        let cost = root(power_sum(f0, couple.q0, w), couple.q0) + t * root(power_sum(f1, couple.q1, w), couple.q1);
        best = best.min(cost);
        let mut d = 0;
        while d < n {
            idx[d] += 1;
            if idx[d] < m {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == n {
            return Ok(best);
        }
    }
}

/// Brute-force K-functional of one input, reusable across many `t`.
#[derive(Debug, Clone)]
pub struct KFunctional {
    family: SplitFamily,
}

impl KFunctional {
    pub fn new(x: &Signal, couple: &CoupleSpec) -> Result<Self> {
        let mut family = threshold_family(x, couple)?;
        if x.len() <= EXHAUSTIVE_MAX_LEN {
            family = family.merged(exhaustive_family(x, couple)?);
        }
        Ok(Self { family })
    }

    pub fn at(&self, t: f64) -> f64 {
        self.family.eval(t)
    }
}

/// Smallest `‖f₀‖₀ + t‖f₁‖₁` over the threshold family and, for inputs of
/// at most six entries, the exhaustive split grid.
pub fn k_functional_bruteforce(x: &Signal, t: f64, couple: &CoupleSpec) -> Result<f64> {
    Ok(KFunctional::new(x, couple)?.at(t))
}

/// Holmstedt's expression
/// `(∫₀^{t^α} f*^{q0})^{1/q0} + t (∫_{t^α}^∞ f*^{q1})^{1/q1}` with
/// `1/α = 1/q0 − 1/q1`; for `q1 = ∞` the second term is `t f*(t^α)`.
pub fn holmstedt(f: &Signal, t: f64, q0: f64, q1: Exponent) -> Result<f64> {
    if !(q0 > 0.0 && q0 < q1.as_f64()) {
        return Err(Error::InvalidIndex(format!("Holmstedt needs 0 < q0 < q1, got ({q0}, {q1})")));
    }
    Ok(holmstedt_curve(&rearrangement(f), t, q0, q1))
}

pub(crate) fn holmstedt_curve(star: &StepCurve, t: f64, q0: f64, q1: Exponent) -> f64 {
    let alpha = 1.0 / (1.0 / q0 - q1.reciprocal());
    let s = t.powf(alpha);
    let head = star.power_integral(q0, 0.0, s).powf(1.0 / q0);
    let tail = match q1 {
        Exponent::Infinite => star.value_at(s),
        Exponent::Finite(q1) => star.power_integral(q1, s, f64::INFINITY).powf(1.0 / q1),
    };
    head + t * tail
}
