use std::collections::BTreeMap;
use std::str::FromStr;

use hlorentz_core::maximal::{MaximalConfig, MaximalKind, Mollifier};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Settings read from a `key = value` file. Values left unset fall back to
/// per-`p` defaults when a run resolves them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Maximal function behind Hardy–Lorentz quasinorms.
    pub maximal: MaximalKind,
    /// B-spline order of the maximal-function mollifier; unset means the
    /// smallest order with enough smoothness for `p`.
    pub mollifier_order: Option<u32>,
    pub mollifier_gain: f64,
    /// Integral of the level-set kernel used by the decomposition.
    pub psi_gain: f64,
    pub overlap_bound: usize,
    pub c_bound: f64,
    pub with_criterion: bool,
    pub kernel: String,
    /// Samples per octave of the `δ` grid.
    pub delta_refine: u32,
    /// Tail window half-width in domain lengths.
    pub tail_pad: usize,
    /// Output padding of `Tf` in domain lengths.
    pub pad_domains: usize,
    pub recon_tol: f64,
    pub spread_max: f64,
    pub interp_spread_max: f64,
    pub holmstedt_factor: f64,
    pub oracle_rel_tol: f64,
    /// `t = 2^i` for `|i| ≤ t_exp` in K-function tables.
    pub t_exp: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            maximal: MaximalKind::Radial,
            mollifier_order: None,
            mollifier_gain: 1.0,
            psi_gain: hlorentz_core::decomposition::DEFAULT_PSI_GAIN,
            overlap_bound: hlorentz_core::decomposition::OVERLAP_TARGET,
            c_bound: 1e3,
            with_criterion: true,
            kernel: "hilbert".into(),
            delta_refine: 1,
            tail_pad: 2,
            pad_domains: 1,
            recon_tol: 1e-6,
            spread_max: 1e3,
            interp_spread_max: 1e2,
            holmstedt_factor: 4.0,
            oracle_rel_tol: 0.05,
            t_exp: 12,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Config { line, message: format!("bad value `{value}` for `{key}`") })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::Config { line, message: format!("expected `key = value`, got `{content}`") });
            };
            cfg.set(key.trim(), value.trim(), line)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), CliError> {
        match key {
            "maximal" => {
                self.maximal = value.parse().map_err(|e: hlorentz_core::Error| CliError::Config {
                    line,
                    message: e.to_string(),
                })?
            }
            "mollifier_order" => {
                self.mollifier_order = if value == "auto" { None } else { Some(parse_value(key, value, line)?) }
            }
            "mollifier_gain" => self.mollifier_gain = parse_value(key, value, line)?,
            "psi_gain" => self.psi_gain = parse_value(key, value, line)?,
            "overlap_bound" => self.overlap_bound = parse_value(key, value, line)?,
            "c_bound" => self.c_bound = parse_value(key, value, line)?,
            "with_criterion" => self.with_criterion = parse_value(key, value, line)?,
            "kernel" => {
                hlorentz_core::cz::kernel_by_name(value)
                    .map_err(|e| CliError::Config { line, message: e.to_string() })?;
                self.kernel = value.to_string();
            }
            "delta_refine" => self.delta_refine = parse_value(key, value, line)?,
            "tail_pad" => self.tail_pad = parse_value(key, value, line)?,
            "pad_domains" => self.pad_domains = parse_value(key, value, line)?,
            "recon_tol" => self.recon_tol = parse_value(key, value, line)?,
            "spread_max" => self.spread_max = parse_value(key, value, line)?,
            "interp_spread_max" => self.interp_spread_max = parse_value(key, value, line)?,
            "holmstedt_factor" => self.holmstedt_factor = parse_value(key, value, line)?,
            "oracle_rel_tol" => self.oracle_rel_tol = parse_value(key, value, line)?,
            "t_exp" => self.t_exp = parse_value(key, value, line)?,
            other => return Err(CliError::Config { line, message: format!("unknown key `{other}`") }),
        }
        if self.delta_refine == 0 {
            return Err(CliError::Config { line, message: "delta_refine must be positive".into() });
        }
        Ok(())
    }

    /// Every setting as text, in the same `key = value` vocabulary the
    /// parser accepts.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let kind = match self.maximal {
            MaximalKind::Radial => "radial",
            MaximalKind::NonTangential => "nontangential",
        };
        let order = self.mollifier_order.map_or("auto".to_string(), |o| o.to_string());
        [
            ("maximal", kind.to_string()),
            ("mollifier_order", order),
            ("mollifier_gain", self.mollifier_gain.to_string()),
            ("psi_gain", self.psi_gain.to_string()),
            ("overlap_bound", self.overlap_bound.to_string()),
            ("c_bound", self.c_bound.to_string()),
            ("with_criterion", self.with_criterion.to_string()),
            ("kernel", self.kernel.clone()),
            ("delta_refine", self.delta_refine.to_string()),
            ("tail_pad", self.tail_pad.to_string()),
            ("pad_domains", self.pad_domains.to_string()),
            ("recon_tol", self.recon_tol.to_string()),
            ("spread_max", self.spread_max.to_string()),
            ("interp_spread_max", self.interp_spread_max.to_string()),
            ("holmstedt_factor", self.holmstedt_factor.to_string()),
            ("oracle_rel_tol", self.oracle_rel_tol.to_string()),
            ("t_exp", self.t_exp.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    pub fn mollifier(&self, p: f64) -> Mollifier {
        let base = Mollifier::for_p(p);
        Mollifier { order: self.mollifier_order.unwrap_or(base.order), gain: self.mollifier_gain }
    }

    pub fn maximal_config(&self, p: f64) -> MaximalConfig {
        MaximalConfig { mollifier: self.mollifier(p), kind: self.maximal }
    }

    pub fn psi(&self, p: f64) -> Mollifier {
        Mollifier::for_p(p).with_gain(self.psi_gain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.mollifier_order = Some(3);
        cfg.maximal = MaximalKind::NonTangential;
        cfg.spread_max = 250.0;
        let text: String = cfg.echo().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn comments_and_errors() {
        let cfg = RunConfig::parse("# header\n\noverlap_bound = 4 # trailing\n").unwrap();
        assert_eq!(cfg.overlap_bound, 4);
        assert!(matches!(RunConfig::parse("nonsense"), Err(CliError::Config { line: 1, .. })));
        assert!(matches!(RunConfig::parse("a = 1"), Err(CliError::Config { .. })));
        assert!(matches!(RunConfig::parse("\nkernel = riesz"), Err(CliError::Config { line: 2, .. })));
        assert!(RunConfig::parse("delta_refine = 0").is_err());
    }
}
