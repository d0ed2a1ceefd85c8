use serde::{Deserialize, Serialize};

use crate::decomposition::{decompose, default_psi, reconstruct, AtomicDecomposition};
use crate::error::{Error, Result};
use crate::lorentz::{rearrangement, Exponent, LorentzIndex, StepCurve};
use crate::maximal::{hardy_lorentz_quasinorm, nontangential_maximal, MaximalConfig, Mollifier};
use crate::report::{safe_ratio, Report};
use crate::sequence::level_masses;
use crate::signal::Signal;

use super::{interpolation_parameter, interpolation_quasinorm_adaptive, SplitFamily, THRESHOLD_LEVELS};

/// Splits `dec` into the levels carrying the `l0` largest masses `μ_k`
/// (ties to the smaller `k`) and the rest. `l0 = 0` puts everything in the
/// second part; the residual always goes there too.
pub fn split_by_levels(dec: &AtomicDecomposition, l0: usize, p: f64) -> Result<(Signal, Signal)> {
    let masses = level_masses(dec, p);
    let mut order: Vec<(i32, f64)> = masses.into_iter().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let chosen: Vec<i32> = order.iter().take(l0).map(|(k, _)| *k).collect();
    let f1 = dec.partial_sum(|k| chosen.contains(&k))?;
    let f2 = reconstruct(dec)?.try_sub(&f1)?;
    Ok((f1, f2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationCheckConfig {
    /// Maximal function behind every Hardy–Lorentz quasinorm.
    pub maximal: MaximalConfig,
    /// Kernel for the decomposition that supplies the splittings.
    pub psi: Mollifier,
}

impl InterpolationCheckConfig {
    pub fn for_p(p: f64) -> Self {
        Self { maximal: MaximalConfig::radial(Mollifier::for_p(p)), psi: default_psi(p) }
    }
}

/// Threshold splittings of a function in the Lorentz couple
/// `(L^{p,q1}, L^{p,q2})`, computed on its rearrangement.
fn lorentz_threshold_family(star: &StepCurve, p: f64, q1: Exponent, q2: Exponent) -> SplitFamily {
    let Some(&max) = star.plateau_values.first() else {
        return SplitFamily { pairs: vec![(0.0, 0.0)] };
    };
    let min = *star.plateau_values.last().unwrap();
    let mut taus = vec![0.0, max];
    taus.extend(star.plateau_values.iter().copied());
    let (lo, hi) = ((min * 1e-3).ln(), max.ln());
    taus.extend((0..THRESHOLD_LEVELS).map(|i| (lo + (hi - lo) * i as f64 / (THRESHOLD_LEVELS - 1) as f64).exp()));
    let i1 = LorentzIndex { p, q: q1 };
    let i2 = LorentzIndex { p, q: q2 };
    let pairs = taus
        .into_iter()
        .map(|tau| (star.excess(tau).lorentz_quasinorm(i1), star.clipped(tau).lorentz_quasinorm(i2)))
        .collect();
    SplitFamily { pairs }
}

/// Brackets `‖f‖_{(H^{p,q1}, H^{p,q2})_{η,q}}` against `‖f‖_{H^{p,q}}`.
///
/// The upper K-curve minimizes over the level splittings of the atomic
/// decomposition; the lower one is the Lorentz-couple K-curve of `Nf`.
pub fn verify_interpolation_identity(
    f: &Signal,
    p: f64,
    q1: f64,
    q: f64,
    q2: Exponent,
    cfg: &InterpolationCheckConfig,
) -> Result<Report> {
    if !(p > 0.0 && p <= 1.0 && q1 > 0.0 && q1 < q && q < q2.as_f64()) {
        return Err(Error::InvalidIndex(format!("need 0 < p <= 1 and 0 < q1 < q < q2, got p={p}, ({q1}, {q}, {q2})")));
    }
    let eta = interpolation_parameter(q1, q, q2);
    let (e1, e, e2) = (Exponent::Finite(q1), Exponent::Finite(q), q2);
    let mut report = Report::new("interpolation");
    report.set("eta", eta);
    let hardy = hardy_lorentz_quasinorm(f, LorentzIndex { p, q: e }, &cfg.maximal);
    if f.is_zero() {
        for key in ["upper", "lower", "hardy"] {
            report.set(key, 0.0);
        }
        for key in ["upper_over_hardy", "lower_over_hardy", "upper_over_lower"] {
            report.set(key, 0.0);
        }
        report.flag("finite", true);
        return Ok(report);
    }

    let dec = decompose(f, p, &cfg.psi)?;
    let levels = dec.levels.len();
    let mut upper_family = SplitFamily::default();
    for l0 in 0..=levels {
        let (f1, f2) = split_by_levels(&dec, l0, p)?;
        let a = hardy_lorentz_quasinorm(&f1, LorentzIndex { p, q: e1 }, &cfg.maximal);
        let b = hardy_lorentz_quasinorm(&f2, LorentzIndex { p, q: e2 }, &cfg.maximal);
        upper_family.pairs.push((a, b));
    }
    let nf = nontangential_maximal(f, &cfg.maximal.mollifier);
    let lower_family = lorentz_threshold_family(&rearrangement(&nf), p, e1, e2);

    let (upper, up_curve) = interpolation_quasinorm_adaptive(|t| upper_family.eval(t), eta, e)?;
    let (lower, low_curve) = interpolation_quasinorm_adaptive(|t| lower_family.eval(t), eta, e)?;
    report
        .set("upper", upper)
        .set("lower", lower)
        .set("hardy", hardy)
        .set("upper_over_hardy", safe_ratio(upper, hardy))
        .set("lower_over_hardy", safe_ratio(lower, hardy))
        .set("upper_over_lower", safe_ratio(upper, lower))
        .set("levels", levels as f64)
        .set("t_exp_upper", up_curve.t_exp() as f64)
        .set("t_exp_lower", low_curve.t_exp() as f64);
    report.flag("finite", upper.is_finite() && lower.is_finite() && hardy.is_finite());
    report.flag("k_shape", up_curve.has_k_shape(1e-9) && low_curve.has_k_shape(1e-9));
    Ok(report)
}
