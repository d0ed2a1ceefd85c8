//! A model Calderón–Zygmund operator (the truncated Hilbert transform), the
//! Taylor-remainder modulus `ω_p`, its Dini constant, atom tail bounds and
//! the weak-type check on `H^{p,q}`.

use serde::{Deserialize, Serialize};

use crate::atom::{Atom, Interval};
use crate::decomposition::{decompose, AtomicDecomposition, Grid};
use crate::dyadic::pow2;
use crate::error::{Error, Result};
use crate::lorentz::{distribution_function, lorentz_quasinorm, Exponent, LorentzIndex};
use crate::maximal::{hardy_lorentz_quasinorm, MaximalConfig, Mollifier};
use crate::moments::moment_order;
use crate::report::{safe_ratio, Report};
use crate::signal::Signal;

pub trait Kernel: Send + Sync {
    fn name(&self) -> &'static str;

    /// `k(x, y)` for `x ≠ y`.
    fn eval(&self, x: f64, y: f64) -> f64;

    /// `k_α(x, y₀) = (1/α!) ∂_y^α k(x, y)` at `y = y₀`.
    fn taylor_coefficient(&self, alpha: u32, x: f64, y0: f64) -> f64;

    /// `∫ k(x, y) dy` over `[a, b]` minus `(x − ε, x + ε)`.
    fn cell_integral(&self, x: f64, a: f64, b: f64, eps: f64) -> f64;

    /// `∫_I |k(x,y) − Σ_{α≤N} (y − y_I)^α k_α(x, y_I)| dy` for `x ∉ 2I`.
    fn remainder_mass(&self, x: f64, interval: &Interval, n: usize) -> f64;

    /// `k(x, y)` depends on `x − y` only.
    fn translation_invariant(&self) -> bool {
        false
    }
}

/// `k(x, y) = 1/(x − y)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertKernel;

/// `ln(hi/lo)` for `0 < lo ≤ hi`, accurate when the ratio is near one.
fn log_ratio(lo: f64, hi: f64) -> f64 {
    ((hi - lo) / lo).ln_1p()
}

impl Kernel for HilbertKernel {
    fn name(&self) -> &'static str {
        "hilbert"
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        1.0 / (x - y)
    }

    fn taylor_coefficient(&self, alpha: u32, x: f64, y0: f64) -> f64 {
        (x - y0).powi(-(alpha as i32 + 1))
    }

    fn cell_integral(&self, x: f64, a: f64, b: f64, eps: f64) -> f64 {
        // ∫_a^b dy/(x − y) = ∫_{x−b}^{x−a} du/u
        let (lo, hi) = (x - b, x - a);
        let mut acc = 0.0;
        let plo = lo.max(eps);
        if hi > plo {
            acc += log_ratio(plo, hi);
        }
        let nhi = hi.min(-eps);
        if lo < nhi {
            acc -= log_ratio(-nhi, -lo);
        }
        acc
    }

    fn remainder_mass(&self, x: f64, interval: &Interval, n: usize) -> f64 {
        // R = r^{N+1}/(x − y) with r = (y − y_I)/(x − y_I); over each half of I
        // the integral is Σ_{m≥N+2} (±1)^{m−N} ρ^m / m with ρ = |I| / (2|x − y_I|).
        let rho = 0.5 * interval.length / (x - interval.center).abs();
        let mut pos = 0.0;
        let mut neg = 0.0;
        let mut term = rho.powi(n as i32 + 2);
        let mut sign = 1.0;
        for m in n + 2..n + 400 {
            let t = term / m as f64;
            pos += t;
            neg += sign * t;
            if t < 1e-18 * pos {
                break;
            }
            term *= rho;
            sign = -sign;
        }
        pos + neg
    }

    fn translation_invariant(&self) -> bool {
        true
    }
}

pub fn kernel_by_name(name: &str) -> Result<Box<dyn Kernel>> {
    match name.trim() {
        "hilbert" => Ok(Box::new(HilbertKernel)),
        other => Err(Error::InvalidArgument(format!("unknown kernel `{other}`"))),
    }
}

/// `Tf(x) = ∫_{|x−y|>ε} k(x, y) f(y) dy` at the cell centers of `out`.
/// `out` must share the cell width and alignment of `f`.
pub fn apply_cz_on(f: &Signal, kernel: &dyn Kernel, eps: f64, out: &Grid) -> Result<Signal> {
    let h = f.cell_width();
    if eps < 0.5 * h * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!("truncation {eps} below half a cell ({})", 0.5 * h)));
    }
    let mut res = out.zeros()?;
    let shift = res.grid_offset(f)?;
    let v = f.values();
    if kernel.translation_invariant() {
        // weights by offset d = i − j, with x at the center of cell 0
        let (m, n) = (f.len() as isize, out.len as isize);
        let lo_d = -(m - 1) - shift;
        let hi_d = n - 1 - shift;
        let weights: Vec<f64> = (lo_d..=hi_d)
            .map(|d| {
                let a = -(d as f64) * h - 0.5 * h;
                kernel.cell_integral(0.0, a, a + h, eps)
            })
            .collect();
        for (i, r) in res.values_mut().iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, &fj) in v.iter().enumerate() {
                if fj != 0.0 {
                    let d = i as isize - (j as isize + shift);
                    acc += weights[(d - lo_d) as usize] * fj;
                }
            }
            *r = acc;
        }
    } else {
        for i in 0..out.len {
            let x = out.origin + (i as f64 + 0.5) * h;
            res.values_mut()[i] = v
                .iter()
                .enumerate()
                .map(|(j, &fj)| fj * kernel.cell_integral(x, f.cell_start(j), f.cell_start(j) + h, eps))
                .sum();
        }
    }
    Ok(res)
}

/// [`apply_cz_on`] over the grid of `f`.
pub fn apply_cz(f: &Signal, kernel: &dyn Kernel, eps: f64) -> Result<Signal> {
    apply_cz_on(f, kernel, eps, &Grid::of(f))
}

/// `f`'s grid extended by `pad` cells on each side.
pub fn padded_grid(f: &Signal, pad: usize) -> Grid {
    Grid { origin: f.origin() - pad as f64 * f.cell_width(), cell_width: f.cell_width(), len: f.len() + 2 * pad }
}

/// `Tf(x)` at an arbitrary point.
pub fn cz_at(f: &Signal, kernel: &dyn Kernel, eps: f64, x: f64) -> f64 {
    let h = f.cell_width();
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, &v)| v * kernel.cell_integral(x, f.cell_start(j), f.cell_start(j) + h, eps))
        .sum()
}

/// `k(x, y) − Σ_{α≤N} (y − y_I)^α k_α(x, y_I)`.
pub fn taylor_remainder(kernel: &dyn Kernel, interval: &Interval, n: usize, x: f64, y: f64) -> Result<f64> {
    if (x - interval.center).abs() < interval.length {
        return Err(Error::InsideDoubledInterval { x, center: interval.center, length: interval.length });
    }
    let u = y - interval.center;
    let poly: f64 = (0..=n as u32).map(|a| u.powi(a as i32) * kernel.taylor_coefficient(a, x, interval.center)).sum();
    Ok(kernel.eval(x, y) - poly)
}

/// Evaluation window for tail integrals: uniform cells with four midpoint
/// nodes each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailQuadrature {
    pub start: f64,
    pub cell_width: f64,
    pub cells: usize,
}

/// Midpoint nodes per quadrature cell.
pub const NODES_PER_CELL: usize = 4;

impl TailQuadrature {
    /// The grid's domain extended by `pad_domains` domain lengths on each side.
    pub fn around(grid: &Grid, pad_domains: usize) -> Self {
        Self {
            start: grid.origin - (pad_domains * grid.len) as f64 * grid.cell_width,
            cell_width: grid.cell_width,
            cells: grid.len * (2 * pad_domains + 1),
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let w = self.cell_width / NODES_PER_CELL as f64;
        (0..self.cells * NODES_PER_CELL).map(move |i| (self.start + (i as f64 + 0.5) * w, w))
    }
}

/// Dyadic intervals of length `4h … domain/4` at the left end, the middle
/// and the right end of the grid.
pub fn default_family(grid: &Grid) -> Vec<Interval> {
    let h = grid.cell_width;
    let mut out = Vec::new();
    let mut len = 4usize;
    while 4 * len <= grid.len {
        let mid = (grid.len / 2 - len / 2) / len * len;
        for start in [0, mid, grid.len - len] {
            let a = grid.origin + start as f64 * h;
            out.push(Interval { center: a + 0.5 * len as f64 * h, length: len as f64 * h });
        }
        len *= 2;
    }
    out
}

/// `(1/|I|) ∫_{window ∖ (2/δ)I} [∫_I |R(x,y)| dy]^p dx` for one interval.
fn omega_single(kernel: &dyn Kernel, p: f64, n: usize, delta: f64, iv: &Interval, quad: &TailQuadrature) -> f64 {
    let reach = iv.length / delta;
    quad.nodes()
        .filter(|(x, _)| (x - iv.center).abs() >= reach)
        .map(|(x, w)| w * kernel.remainder_mass(x, iv, n).powf(p))
        .sum::<f64>()
        / iv.length
}

/// `ω_p(δ)`: the largest single-interval value over `family`.
pub fn omega_p(
    kernel: &dyn Kernel,
    p: f64,
    n: usize,
    delta: f64,
    family: &[Interval],
    quad: &TailQuadrature,
) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("δ must lie in (0, 1], got {delta}")));
    }
    if family.is_empty() {
        return Err(Error::InvalidArgument("interval family is empty".into()));
    }
    Ok(family.iter().map(|iv| omega_single(kernel, p, n, delta, iv, quad)).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiniReport {
    pub delta_grid: Vec<f64>,
    pub omega_values: Vec<f64>,
    /// `q/(q − p)`, or one for `q = ∞`.
    pub exponent: f64,
    #[serde(rename = "A_pq")]
    pub a_pq: f64,
}

/// `q/(q − p)`, with `1` for `q = ∞`.
pub fn dini_exponent(p: f64, q: Exponent) -> Result<f64> {
    match q {
        Exponent::Infinite => Ok(1.0),
        Exponent::Finite(q) if q > p => Ok(q / (q - p)),
        Exponent::Finite(q) => Err(Error::InvalidIndex(format!("Dini condition needs p < q, got p={p}, q={q}"))),
    }
}

/// Below this log–log slope at the smallest `δ`, `ω` is taken not to decay.
const DIVERGENCE_SLOPE: f64 = 1e-3;

/// `[∫₀¹ ω(δ)^r dδ/δ]^{1/r}` from samples at decreasing `δ` (starting at 1),
/// interpolating `ω` as a power of `δ` between samples and extending the
/// last power below the smallest sample.
pub fn dini_from_samples(deltas: &[f64], omegas: &[f64], r: f64) -> Result<f64> {
    let n = deltas.len();
    if n < 2 || omegas.len() != n {
        return Err(Error::InvalidArgument("Dini quadrature needs at least two samples".into()));
    }
    if omegas.iter().all(|&w| w == 0.0) {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for j in 0..n - 1 {
        let (d0, d1) = (deltas[j], deltas[j + 1]);
        let (w0, w1) = (omegas[j], omegas[j + 1]);
        let lr = (d0 / d1).ln();
        if w0 == 0.0 {
            continue;
        }
        if w1 == 0.0 {
            // linear-in-δ fall-off to zero inside the cell: ∫ (w0 δ/d0)^r dδ/δ
            total += w0.powf(r) * (1.0 - (d1 / d0).powf(r)) / r;
            continue;
        }
        let s = (w0 / w1).ln() / lr;
        let a = s * r;
        let factor = if (a * lr).abs() < 1e-12 { lr } else { -(-a * lr).exp_m1() / a };
        total += w0.powf(r) * factor;
    }
    let (wl, wp) = (omegas[n - 1], omegas[n - 2]);
    if wl > 0.0 {
        let s = if wp > 0.0 { (wp / wl).ln() / (deltas[n - 2] / deltas[n - 1]).ln() } else { 0.0 };
        if s <= DIVERGENCE_SLOPE {
            return Err(Error::DiniDivergent { slope: s });
        }
        total += wl.powf(r) / (s * r);
    }
    Ok(total.powf(1.0 / r))
}

/// `δ = 2^{−j/refine}` for `j = 0 … 12·refine`.
pub fn dyadic_delta_grid(refine: u32) -> Vec<f64> {
    (0..=12 * refine).map(|j| 2.0_f64.powf(-(j as f64) / refine as f64)).collect()
}

/// `A_{p,q}` for the kernel from `ω_p` on `deltas`.
pub fn dini_constant(
    kernel: &dyn Kernel,
    p: f64,
    q: Exponent,
    n: usize,
    deltas: &[f64],
    family: &[Interval],
    quad: &TailQuadrature,
) -> Result<DiniReport> {
    let exponent = dini_exponent(p, q)?;
    let omega_values = deltas
        .iter()
        .map(|&d| omega_p(kernel, p, n, d, family, quad))
        .collect::<Result<Vec<_>>>()?;
    let a_pq = dini_from_samples(deltas, &omega_values, exponent)?;
    Ok(DiniReport { delta_grid: deltas.to_vec(), omega_values, exponent, a_pq })
}

/// Slack allowed in the atom tail inequality.
pub const TAIL_SLACK: f64 = 1e-9;

/// `∫_{window ∖ (2/δ)I} |Ta|^p ≤ ω_p(δ)` with the atom's interval added to
/// `family`.
pub fn atom_tail_check(
    atom: &Atom,
    kernel: &dyn Kernel,
    delta: f64,
    family: &[Interval],
    quad: &TailQuadrature,
) -> Result<Report> {
    let iv = atom.interval();
    let p = atom.p;
    let n = atom.moment_order();
    let mut fam = family.to_vec();
    fam.push(iv);
    let omega = omega_p(kernel, p, n, delta, &fam, quad)?;
    let reach = iv.length / delta;
    let eps = 0.5 * atom.profile.cell_width();
    let lhs: f64 = quad
        .nodes()
        .filter(|(x, _)| (x - iv.center).abs() >= reach)
        .map(|(x, w)| w * cz_at(&atom.profile, kernel, eps, x).abs().powf(p))
        .sum();
    let mut report = Report::new("atom-tail");
    report.set("delta", delta).set("tail", lhs).set("omega", omega).set("ratio", safe_ratio(lhs, omega));
    report.flag("tail_bound", lhs <= omega + TAIL_SLACK);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeConfig {
    pub maximal: MaximalConfig,
    pub psi: Mollifier,
    /// Truncation radius as a multiple of the cell width.
    pub eps_cells: f64,
    /// Output cells added on each side, as multiples of the signal length.
    pub pad_domains: usize,
}

impl WeakTypeConfig {
    pub fn for_p(p: f64) -> Self {
        Self {
            maximal: MaximalConfig::radial(Mollifier::for_p(p)),
            psi: crate::decomposition::default_psi(p),
            eps_cells: 0.5,
            pad_domains: 1,
        }
    }
}

/// Measure of a union of intervals.
fn union_measure(mut ivs: Vec<(f64, f64)>) -> f64 {
    ivs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in ivs {
        cur = match cur {
            Some((s, e)) if a <= e => Some((s, e.max(b))),
            Some((s, e)) => {
                total += e - s;
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    if let Some((s, e)) = cur {
        total += e - s;
    }
    total
}

/// Exceptional set `Ω = ∪_{k>k₀} I*_{j,k}`, `I* = 2 (3/2)^{p(k−k₀)} I`.
fn exceptional_set(dec: &AtomicDecomposition, k0: i32, p: f64) -> Vec<(f64, f64)> {
    dec.terms()
        .filter(|(k, _)| *k > k0)
        .map(|(k, t)| {
            let iv = t.atom.interval().dilate(2.0 * 1.5_f64.powf(p * (k - k0) as f64));
            (iv.start(), iv.end())
        })
        .collect()
}

/// `‖Tf‖_{p,∞} ≤ C A_{p,q}^{1/p} ‖f‖_{H^{p,q}}`, with the constants of the
/// three intermediate estimates over the `k₀` grid: the low part
/// `2^{pk₀} m(Tf₁, 2^{k₀−1}) / ‖f‖^p_{H^{p,∞}}`, the exceptional set
/// `2^{pk₀}|Ω| / ‖f‖^p_{H^{p,∞}}`, and the tail
/// `∫_{∖Ω} |Tf₂|^p / (A ‖f‖^p_{H^{p,q}})`.
pub fn verify_weak_type_bound(
    f: &Signal,
    p: f64,
    q: Exponent,
    kernel: &dyn Kernel,
    a_pq: f64,
    cfg: &WeakTypeConfig,
) -> Result<Report> {
    dini_exponent(p, q)?;
    let idx = LorentzIndex::hardy(p, q)?;
    if !(a_pq.is_finite() && a_pq >= 0.0) {
        return Err(Error::InvalidArgument(format!("A_pq must be finite, got {a_pq}")));
    }
    let h = f.cell_width();
    let eps = cfg.eps_cells * h;
    let out = padded_grid(f, cfg.pad_domains * f.len());
    let tf = apply_cz_on(f, kernel, eps, &out)?;
    let weak = lorentz_quasinorm(&tf, LorentzIndex::weak(p)?);
    let hpq = hardy_lorentz_quasinorm(f, idx, &cfg.maximal);
    let hpinf = hardy_lorentz_quasinorm(f, LorentzIndex::weak(p)?, &cfg.maximal);
    let rhs = a_pq.powf(1.0 / p) * hpq;
    let mut report = Report::new("weak-type");
    report.set("weak_norm", weak).set("hardy_norm", hpq).set("A_pq", a_pq).set("C", safe_ratio(weak, rhs));

    let dec = decompose(f, p, &cfg.psi)?;
    let (mut c_low, mut c_omega, mut c_tail, mut c_final) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    if let (Some(first), Some(last)) = (dec.levels.first(), dec.levels.last()) {
        for k0 in first.k - 1..=last.k {
            let lam = pow2(k0);
            let mut f1 = dec.partial_sum(|k| k <= k0)?;
            for (v, r) in f1.values_mut().iter_mut().zip(&dec.residual) {
                *v += r;
            }
            let tf1 = apply_cz_on(&f1, kernel, eps, &out)?;
            let tf2 = tf.try_sub(&tf1)?;
            let omega = exceptional_set(&dec, k0, p);
            let omega_measure = union_measure(omega.clone());
            let tail: f64 = (0..tf2.len())
                .filter(|&i| {
                    let x = tf2.cell_center(i);
                    !omega.iter().any(|&(a, b)| x >= a && x < b)
                })
                .map(|i| h * tf2.values()[i].abs().powf(p))
                .sum();
            let lp = lam.powf(p);
            c_low = c_low.max(safe_ratio(lp * distribution_function(&tf1, 0.5 * lam)?, hpinf.powf(p)));
            c_omega = c_omega.max(safe_ratio(lp * omega_measure, hpinf.powf(p)));
            c_tail = c_tail.max(safe_ratio(tail, a_pq * hpq.powf(p)));
            c_final = c_final.max(safe_ratio(lp * distribution_function(&tf, lam)?, hpq.powf(p)));
        }
    }
    report
        .set("c_low", c_low)
        .set("c_exceptional", c_omega)
        .set("c_tail", c_tail)
        .set("c_final", c_final)
        .set("levels", dec.levels.len() as f64);
    report.flag("finite", report.get("C").is_some_and(f64::is_finite));
    Ok(report)
}

/// `N = ⌊1/p − 1⌋` for the remainder order.
pub fn remainder_order(p: f64) -> usize {
    moment_order(p)
}
