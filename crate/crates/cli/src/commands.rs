use std::path::Path;

use hlorentz_core::interpolation::{CoupleKind, CoupleSpec, KCurve, KFunctional};
use hlorentz_core::lorentz::{lorentz_quasinorm, lorentz_quasinorm_levels, rearrangement, Exponent, LorentzIndex, StepCurve};
use hlorentz_core::report::safe_ratio;
use hlorentz_core::signal::relative_l2_error;
use hlorentz_core::{decompose, reconstruct, AtomicDecomposition, Signal};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::corpus::CorpusSpec;
use crate::error::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    serde_json::from_str(&text).map_err(|e| CliError::Json { path: path.display().to_string(), source: e })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Json { path: path.display().to_string(), source: e })?;
    std::fs::write(path, text).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}

/// Which quasinorm forms `norm` reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum NormForm {
    #[default]
    Both,
    Closed,
    Levels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormOutput {
    pub p: f64,
    pub q: Exponent,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

pub fn cmd_norm(f: &Signal, p: f64, q: Exponent, form: NormForm) -> Result<NormOutput, CliError> {
    let idx = LorentzIndex::new(p, q)?;
    let closed = (form != NormForm::Levels).then(|| lorentz_quasinorm(f, idx));
    let levels = (form != NormForm::Closed).then(|| lorentz_quasinorm_levels(f, idx));
    let ratio = closed.zip(levels).map(|(a, b)| safe_ratio(a, b));
    Ok(NormOutput { p, q, closed, levels, ratio })
}

pub fn cmd_rearrange(f: &Signal) -> StepCurve {
    rearrangement(f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeSummary {
    pub levels: usize,
    pub terms: usize,
    pub reconstruction_error: f64,
}

/// Decomposes, writes the JSON to `out`, reads it back and reports the
/// reconstruction error of the read-back copy.
pub fn cmd_decompose(f: &Signal, p: f64, cfg: &RunConfig, out: &Path) -> Result<DecomposeSummary, CliError> {
    let dec = decompose(f, p, &cfg.psi(p))?;
    write_json(out, &dec)?;
    let back: AtomicDecomposition = read_json(out)?;
    let reconstruction_error = relative_l2_error(&reconstruct(&back)?, f)?;
    Ok(DecomposeSummary { levels: back.levels.len(), terms: back.term_count(), reconstruction_error })
}

/// `K(t)` at `t = 2^i`, `|i| ≤ t_exp`, for the sequence or function couple.
pub fn cmd_kfunc(f: &Signal, kind: CoupleKind, q0: Exponent, q1: Exponent, t_exp: u32) -> Result<KCurve, CliError> {
    let couple = CoupleSpec::new(kind, q0, q1)?;
    if matches!(kind, CoupleKind::Hardy { .. }) {
        return Err(CliError::Usage("kfunc supports the sequence and function couples".into()));
    }
    let kf = KFunctional::new(f, &couple)?;
    Ok(KCurve::sample(t_exp, |t| kf.at(t)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusFile {
    pub spec: CorpusSpec,
    pub signals: Vec<Signal>,
}

pub fn cmd_gen_corpus(spec: &CorpusSpec) -> Result<CorpusFile, CliError> {
    Ok(CorpusFile { spec: spec.clone(), signals: spec.generate()? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_and_zero_norms() {
        let one = Signal::indicator(0.0, 0.125, 8).unwrap();
        let out = cmd_norm(&one, 1.0, Exponent::Finite(2.0), NormForm::Both).unwrap();
        assert!((out.closed.unwrap() - 1.0).abs() < 1e-12);
        let zero = one.zeros_like();
        let out = cmd_norm(&zero, 0.5, Exponent::Infinite, NormForm::Closed).unwrap();
        assert_eq!(out.closed, Some(0.0));
        assert!(out.levels.is_none() && out.ratio.is_none());
    }

    #[test]
    fn decompose_round_trips_through_file() {
        let dir = std::env::temp_dir().join(format!("hlorentz-cmd-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let f = Signal::new(0.0, 1.0 / 16.0, (0..16).map(|i| if i % 4 < 2 { 1.0 } else { -1.0 }).collect()).unwrap();
        let s = cmd_decompose(&f, 1.0, &RunConfig::default(), &dir.join("d.json")).unwrap();
        assert!(s.reconstruction_error < 1e-10 && s.terms > 0);
        let z = cmd_decompose(&f.zeros_like(), 1.0, &RunConfig::default(), &dir.join("z.json")).unwrap();
        assert_eq!((z.levels, z.terms), (0, 0));
        std::fs::remove_dir_all(&dir).ok();
    }
}
