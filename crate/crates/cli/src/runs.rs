use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use hlorentz_core::cz::{
    default_family, dini_constant, dyadic_delta_grid, kernel_by_name, verify_weak_type_bound, TailQuadrature,
    WeakTypeConfig,
};
use hlorentz_core::decomposition::{
    check_sum_split_criterion, check_sup_split_criterion, decay_epsilon, decompose, proof_splits, reconstruct,
    verify_atomic_upper_bound, verify_overlapping_atomic_bound, AtomicCheckConfig, SplitInput,
};
use hlorentz_core::interpolation::{
    holmstedt, verify_interpolation_identity, CoupleSpec, InterpolationCheckConfig, KFunctional,
};
use hlorentz_core::lorentz::{lorentz_quasinorm, lorentz_quasinorm_levels, rearrangement, Exponent, LorentzIndex};
use hlorentz_core::maximal::hardy_lorentz_quasinorm;
use hlorentz_core::moments::moment_order;
use hlorentz_core::report::safe_ratio;
use hlorentz_core::signal::relative_l2_error;
use hlorentz_core::{Atom, AtomicDecomposition, Coefficient, CoefficientFamily, Grid, Signal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::corpus::CorpusSpec;
use crate::error::CliError;
use crate::report::{brackets, Bracket, ItemResult, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Atomic decomposition round trip, overlap, level bound and coefficient bracket.
    Decompose,
    /// Weak-type bound for the model singular integral.
    WeakType,
    /// Hardy–Lorentz quasinorm of atomic sums against the mixed coefficient norm.
    AtomicUpper,
    /// The same without an overlap assumption, with the `η` mixed norm.
    AtomicOverlap,
    /// Interpolation quasinorm brackets against the Hardy–Lorentz quasinorm.
    Interpolation,
    /// Sup-form split criterion on the decomposition's level splits.
    SupSplit,
    /// Sum-form split criterion on the decomposition's level splits.
    SumSplit,
    /// Closed-form against level-form Lorentz quasinorms.
    LorentzEquiv,
    /// K-functional oracle and Holmstedt agreement.
    Holmstedt,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use clap::ValueEnum;
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

/// Exponents beyond the corpus lists.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VerifyParams {
    pub q1: Option<f64>,
    pub q2: Option<Exponent>,
    pub eta: Option<f64>,
}

fn fmt_exp(q: Exponent) -> String {
    q.to_string()
}

fn hardy_ps(spec: &CorpusSpec) -> Vec<f64> {
    spec.p_list.iter().copied().filter(|&p| p <= 1.0).collect()
}

fn coefficients(dec: &AtomicDecomposition) -> crate::Result<(CoefficientFamily, Vec<Atom>)> {
    let mut entries = Vec::new();
    let mut atoms = Vec::new();
    for (_, t) in dec.terms() {
        entries.push(Coefficient { lambda: t.lambda, measure: t.atom.length });
        atoms.push(t.atom.clone());
    }
    Ok((CoefficientFamily::new(entries)?, atoms))
}

fn atomic_cfg(cfg: &RunConfig, p: f64) -> AtomicCheckConfig {
    AtomicCheckConfig {
        maximal: cfg.maximal_config(p),
        overlap_bound: cfg.overlap_bound,
        c_bound: cfg.c_bound,
        with_criterion: cfg.with_criterion,
    }
}

/// Runs the per-item part of `check`, capturing failures per parameter row.
fn run_item(
    check: Check,
    index: usize,
    f: &Signal,
    spec: &CorpusSpec,
    cfg: &RunConfig,
    params: &VerifyParams,
    dini: &BTreeMap<String, f64>,
) -> Vec<ItemResult> {
    let mut rows = Vec::new();
    let guard = |row: &mut ItemResult, r: crate::Result<()>| {
        if let Err(e) = r {
            row.error = Some(e.to_string());
        }
    };
    match check {
        Check::LorentzEquiv => {
            for &p in &spec.p_list {
                for &q in &spec.q_list {
                    let mut row = ItemResult::new(index, &[("p", p.to_string()), ("q", fmt_exp(q))]);
                    let r = (|| {
                        let idx = LorentzIndex::new(p, q)?;
                        let closed = lorentz_quasinorm(f, idx);
                        let levels = lorentz_quasinorm_levels(f, idx);
                        let ratio = safe_ratio(closed, levels);
                        let bound = 2.0_f64.powf(1.0 / p + 1.0);
                        row.scalars.insert("closed".into(), closed);
                        row.scalars.insert("levels".into(), levels);
                        row.scalars.insert("ratio".into(), ratio);
                        let inside = ratio == 0.0 && closed == 0.0 || (ratio >= 1.0 / bound && ratio <= bound);
                        row.flags.insert("in_bracket".into(), inside);
                        if q == Exponent::Finite(p) {
                            let lp = f.lp_norm(p);
                            row.scalars.insert("lp_norm".into(), lp);
                            row.flags.insert("lp_identity".into(), (closed - lp).abs() <= 1e-10 * lp.max(f64::MIN_POSITIVE));
                        }
                        Ok(())
                    })();
                    guard(&mut row, r);
                    rows.push(row);
                }
            }
        }
        Check::Holmstedt => {
            for q1 in [Exponent::Infinite, Exponent::Finite(2.0)] {
                let mut row = ItemResult::new(index, &[("q0", "1".into()), ("q1", fmt_exp(q1))]);
                let r = (|| {
                    let couple = CoupleSpec::function(Exponent::Finite(1.0), q1)?;
                    let kf = KFunctional::new(f, &couple)?;
                    let star = rearrangement(f);
                    let (mut lo, mut hi, mut oracle_err) = (f64::INFINITY, 0.0_f64, 0.0_f64);
                    let e = cfg.t_exp as i32;
                    for i in -e..=e {
                        let t = 2.0_f64.powi(i);
                        let k = kf.at(t);
                        let h = holmstedt(f, t, 1.0, q1)?;
                        if k > 0.0 {
                            lo = lo.min(h / k);
                            hi = hi.max(h / k);
                        }
                        if q1.is_infinite() {
                            let exact = star.cumulative(t);
                            if exact > 0.0 {
                                oracle_err = oracle_err.max((k - exact).abs() / exact);
                            }
                        }
                    }
                    if lo.is_infinite() {
                        lo = 1.0;
                        hi = 1.0;
                    }
                    row.scalars.insert("holmstedt_ratio_min".into(), lo);
                    row.scalars.insert("holmstedt_ratio_max".into(), hi);
                    let fac = cfg.holmstedt_factor;
                    row.flags.insert("holmstedt_within".into(), lo >= 1.0 / fac && hi <= fac);
                    if q1.is_infinite() {
                        row.scalars.insert("oracle_rel_err".into(), oracle_err);
                        row.flags.insert("oracle_within".into(), oracle_err <= cfg.oracle_rel_tol);
                    }
                    Ok(())
                })();
                guard(&mut row, r);
                rows.push(row);
            }
        }
        Check::Decompose => {
            for p in hardy_ps(spec) {
                let dec = decompose(f, p, &cfg.psi(p));
                for &q in &spec.q_list {
                    let mut row = ItemResult::new(index, &[("p", p.to_string()), ("q", fmt_exp(q))]);
                    let r = (|| {
                        let dec = dec.as_ref().map_err(Clone::clone)?;
                        let err = relative_l2_error(&reconstruct(dec)?, f)?;
                        let overlap = dec.level_overlaps().values().copied().max().unwrap_or(0);
                        let (c, _) = coefficients(dec)?;
                        let hardy = hardy_lorentz_quasinorm(f, LorentzIndex::hardy(p, q)?, &cfg.maximal_config(p));
                        let mixed = hlorentz_core::mixed_norm(&c, p, q);
                        row.scalars.insert("recon_error".into(), err);
                        row.scalars.insert("max_overlap".into(), overlap as f64);
                        row.scalars.insert("sup_constant".into(), dec.level_sup_constant()?);
                        row.scalars.insert("levels".into(), dec.levels.len() as f64);
                        row.scalars.insert("terms".into(), dec.term_count() as f64);
                        row.scalars.insert("hardy_norm".into(), hardy);
                        row.scalars.insert("mixed_norm".into(), mixed);
                        row.scalars.insert("ratio".into(), safe_ratio(mixed, hardy));
                        row.flags.insert("round_trip".into(), err <= cfg.recon_tol);
                        row.flags.insert("overlap".into(), overlap <= cfg.overlap_bound);
                        row.flags.insert("atoms_valid".into(), dec.terms().all(|(_, t)| t.atom.check().valid));
                        Ok(())
                    })();
                    guard(&mut row, r);
                    rows.push(row);
                }
            }
        }
        Check::AtomicUpper | Check::AtomicOverlap => {
            for p in hardy_ps(spec) {
                let dec = decompose(f, p, &cfg.psi(p));
                for &q in &spec.q_list {
                    let eta = params.eta.unwrap_or(0.5 * p.min(q.as_f64()));
                    let mut keys = vec![("p", p.to_string()), ("q", fmt_exp(q))];
                    if check == Check::AtomicOverlap {
                        keys.push(("eta", eta.to_string()));
                    }
                    let mut row = ItemResult::new(index, &keys);
                    let r = (|| {
                        let dec = dec.as_ref().map_err(Clone::clone)?;
                        let (c, atoms) = coefficients(dec)?;
                        let grid = Grid::of(f);
                        let acfg = atomic_cfg(cfg, p);
                        let rep = if check == Check::AtomicUpper {
                            verify_atomic_upper_bound(&c, &atoms, p, q, &grid, &acfg)?
                        } else {
                            verify_overlapping_atomic_bound(&c, &atoms, p, q, eta, &grid, &acfg)?
                        };
                        row.absorb(&rep, "");
                        Ok(())
                    })();
                    guard(&mut row, r);
                    rows.push(row);
                }
            }
        }
        Check::SupSplit | Check::SumSplit => {
            for p in hardy_ps(spec) {
                let dec = decompose(f, p, &cfg.psi(p));
                for &q in &spec.q_list {
                    let mut row = ItemResult::new(index, &[("p", p.to_string()), ("q", fmt_exp(q))]);
                    let r = (|| {
                        let dec = dec.as_ref().map_err(Clone::clone)?;
                        let (c, atoms) = coefficients(dec)?;
                        let (phi, splits, mu) = proof_splits(&c, &atoms, p, &Grid::of(f), &cfg.maximal_config(p))?;
                        let rep = if check == Check::SupSplit {
                            let input = SplitInput { phi: &phi, splits: &splits, mu: &mu, eps: decay_epsilon(p, 1.0), p, q };
                            check_sup_split_criterion(&input, cfg.c_bound)?
                        } else {
                            let cap = match q {
                                Exponent::Infinite => 1.0,
                                Exponent::Finite(qv) => (qv / p).min(1.0),
                            };
                            let input = SplitInput { phi: &phi, splits: &splits, mu: &mu, eps: decay_epsilon(p, cap), p, q };
                            check_sum_split_criterion(&input, cfg.c_bound)?
                        };
                        row.absorb(&rep, "");
                        Ok(())
                    })();
                    guard(&mut row, r);
                    rows.push(row);
                }
            }
        }
        Check::Interpolation => {
            let (q1, q, q2) = interpolation_exponents(spec, params);
            for p in hardy_ps(spec) {
                let mut row = ItemResult::new(
                    index,
                    &[("p", p.to_string()), ("q1", q1.to_string()), ("q", fmt_exp(q)), ("q2", fmt_exp(q2))],
                );
                let r = (|| {
                    let icfg = InterpolationCheckConfig { maximal: cfg.maximal_config(p), psi: cfg.psi(p) };
                    let rep = verify_interpolation_identity(f, p, q1, q.as_f64(), q2, &icfg)?;
                    row.absorb(&rep, "");
                    Ok(())
                })();
                guard(&mut row, r);
                rows.push(row);
            }
        }
        Check::WeakType => {
            for p in hardy_ps(spec) {
                for q in weak_type_qs(spec, p) {
                    let mut row = ItemResult::new(index, &[("p", p.to_string()), ("q", fmt_exp(q))]);
                    let r = (|| {
                        let Some(&a) = dini.get(&dini_key(p, q)) else {
                            return Err(CliError::Usage(format!("no Dini constant for p={p}, q={q}")));
                        };
                        let kernel = kernel_by_name(&cfg.kernel)?;
                        let wcfg = WeakTypeConfig {
                            maximal: cfg.maximal_config(p),
                            psi: cfg.psi(p),
                            eps_cells: 0.5,
                            pad_domains: cfg.pad_domains,
                        };
                        let rep = verify_weak_type_bound(f, p, q, kernel.as_ref(), a, &wcfg)?;
                        row.absorb(&rep, "");
                        Ok(())
                    })();
                    guard(&mut row, r);
                    rows.push(row);
                }
            }
        }
    }
    rows
}

/// `(q1, q, q2)`: `q1` defaults to one, `q2` to infinity, and `q` is the
/// first listed exponent strictly between them (two if none is).
fn interpolation_exponents(spec: &CorpusSpec, params: &VerifyParams) -> (f64, Exponent, Exponent) {
    let q1 = params.q1.unwrap_or(1.0);
    let q2 = params.q2.unwrap_or(Exponent::Infinite);
    let q = spec
        .q_list
        .iter()
        .copied()
        .find(|q| q.as_f64() > q1 && q.as_f64() < q2.as_f64())
        .unwrap_or(Exponent::Finite(2.0));
    (q1, q, q2)
}

/// Listed exponents with `q > p`, the range where the Dini constant exists.
fn weak_type_qs(spec: &CorpusSpec, p: f64) -> Vec<Exponent> {
    spec.q_list.iter().copied().filter(|q| q.as_f64() > p).collect()
}

fn dini_key(p: f64, q: Exponent) -> String {
    format!("p={p},q={q}")
}

/// `A_{p,q}` for every `(p, q)` the weak-type check will use.
pub fn dini_table(spec: &CorpusSpec, cfg: &RunConfig) -> crate::Result<BTreeMap<String, f64>> {
    let kernel = kernel_by_name(&cfg.kernel)?;
    let grid = Grid { origin: 0.0, cell_width: 1.0 / spec.signal_length as f64, len: spec.signal_length };
    let family = default_family(&grid);
    let quad = TailQuadrature::around(&grid, cfg.tail_pad);
    let deltas = dyadic_delta_grid(cfg.delta_refine);
    let mut out = BTreeMap::new();
    for p in hardy_ps(spec) {
        for q in weak_type_qs(spec, p) {
            let rep = dini_constant(kernel.as_ref(), p, q, moment_order(p), &deltas, &family, &quad)?;
            out.insert(dini_key(p, q), rep.a_pq);
        }
    }
    Ok(out)
}

fn all_flags(items: &[ItemResult], key: &str) -> Option<bool> {
    let vals: Vec<bool> = items.iter().filter_map(|i| i.flags.get(key).copied()).collect();
    (!vals.is_empty()).then(|| vals.iter().all(|&b| b))
}

fn max_scalar(items: &[ItemResult], key: &str) -> Option<f64> {
    items.iter().filter_map(|i| i.scalars.get(key).copied()).reduce(f64::max)
}

/// Aggregate brackets and pass/fail per threshold.
fn aggregate(check: Check, items: &[ItemResult], cfg: &RunConfig) -> (Vec<Bracket>, BTreeMap<String, bool>) {
    let mut checks = BTreeMap::new();
    checks.insert("no_errors".to_string(), items.iter().all(|i| i.error.is_none()));
    let mut require = |name: &str, v: Option<bool>| {
        if let Some(v) = v {
            checks.insert(name.to_string(), v);
        }
    };
    let flag_keys: &[&str] = match check {
        Check::LorentzEquiv => &["in_bracket", "lp_identity"],
        Check::Holmstedt => &["holmstedt_within", "oracle_within"],
        Check::Decompose => &["round_trip", "overlap", "atoms_valid"],
        Check::AtomicUpper => &["overlap", "atoms_valid", "ratio_finite", "criterion_hypotheses"],
        Check::AtomicOverlap => &["atoms_valid", "ratio_finite", "criterion_hypotheses"],
        Check::SupSplit | Check::SumSplit => &["hypotheses", "conclusion_finite"],
        Check::Interpolation => &["finite", "k_shape"],
        Check::WeakType => &["finite"],
    };
    for k in flag_keys {
        require(k, all_flags(items, k));
    }
    let (bracket_keys, spread_max): (&[&str], f64) = match check {
        Check::LorentzEquiv => (&["ratio"], f64::INFINITY),
        Check::Holmstedt => (&["holmstedt_ratio_max"], f64::INFINITY),
        Check::Decompose => (&["ratio", "sup_constant"], cfg.spread_max),
        Check::AtomicUpper | Check::AtomicOverlap => (&["ratio"], cfg.spread_max),
        Check::SupSplit | Check::SumSplit => (&["C_over_c"], f64::INFINITY),
        Check::Interpolation => (&["upper_over_hardy", "lower_over_hardy", "upper_over_lower"], cfg.interp_spread_max),
        Check::WeakType => (&["C"], cfg.spread_max),
    };
    let mut all = Vec::new();
    for key in bracket_keys {
        let b = brackets(items, key);
        // the sup-constant bracket is logged, not thresholded
        if spread_max.is_finite() && *key != "sup_constant" {
            require(&format!("{key}_spread"), Some(b.iter().all(|b| b.spread <= spread_max)));
        }
        all.extend(b);
    }
    if check == Check::Decompose {
        require("sup_constant_finite", max_scalar(items, "sup_constant").map(f64::is_finite));
    }
    if check == Check::WeakType {
        require("C_bounded", max_scalar(items, "C").map(|c| c <= cfg.c_bound));
    }
    (all, checks)
}

/// Generates the corpus, runs `check` on every item (in parallel, reported
/// in item order) and aggregates the result.
pub fn run_verify(
    check: Check,
    spec: &CorpusSpec,
    cfg: &RunConfig,
    params: &VerifyParams,
) -> crate::Result<RunReport> {
    let start = Instant::now();
    let corpus = spec.generate()?;
    let mut report = run_verify_on(check, spec, &corpus, cfg, params)?;
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs `check` on an explicit corpus; `spec` supplies the exponent lists
/// and is echoed in the report.
pub fn run_verify_on(
    check: Check,
    spec: &CorpusSpec,
    corpus: &[Signal],
    cfg: &RunConfig,
    params: &VerifyParams,
) -> crate::Result<RunReport> {
    let start = Instant::now();
    let dini = if check == Check::WeakType && !corpus.is_empty() { dini_table(spec, cfg)? } else { BTreeMap::new() };
    let items: Vec<ItemResult> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, f)| run_item(check, i, f, spec, cfg, params, &dini))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let (brackets, mut checks) = aggregate(check, &items, cfg);
    for (k, a) in &dini {
        checks.entry(format!("dini_finite[{k}]")).or_insert(a.is_finite());
    }
    let passed = checks.values().all(|&b| b);
    let mut config = cfg.echo();
    for (k, v) in [("q1", params.q1.map(|v| v.to_string())), ("q2", params.q2.map(fmt_exp)), ("eta", params.eta.map(|v| v.to_string()))] {
        if let Some(v) = v {
            config.insert(k.to_string(), v);
        }
    }
    Ok(RunReport {
        command: format!("verify {check}"),
        config,
        corpus: spec.clone(),
        items,
        brackets,
        checks,
        passed,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ValueDistribution;

    fn spec(count: usize) -> CorpusSpec {
        CorpusSpec {
            seed: 3,
            count,
            signal_length: 32,
            value_distribution: ValueDistribution::Uniform,
            p_list: vec![1.0],
            q_list: vec![Exponent::Finite(2.0)],
        }
    }

    #[test]
    fn empty_corpus_passes() {
        let r = run_verify(Check::Decompose, &spec(0), &RunConfig::default(), &VerifyParams::default()).unwrap();
        assert!(r.items.is_empty() && r.passed);
    }

    #[test]
    fn small_runs_pass_and_repeat() {
        for check in [Check::LorentzEquiv, Check::Decompose, Check::Holmstedt, Check::SupSplit] {
            let a = run_verify(check, &spec(3), &RunConfig::default(), &VerifyParams::default()).unwrap();
            assert!(a.passed, "{check}: {:?}", a.checks);
            let b = run_verify(check, &spec(3), &RunConfig::default(), &VerifyParams::default()).unwrap();
            assert_eq!(a.csv_string().unwrap(), b.csv_string().unwrap());
        }
    }

    #[test]
    fn names_are_kebab_case() {
        assert_eq!(Check::LorentzEquiv.to_string(), "lorentz-equiv");
        assert_eq!(Check::WeakType.to_string(), "weak-type");
    }
}
