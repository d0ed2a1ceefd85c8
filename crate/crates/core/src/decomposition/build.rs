use crate::atom::{Atom, Interval};
use crate::dyadic::{ceil_log2, floor_log2, pow2};
use crate::error::{Error, Result};
use crate::maximal::{nontangential_maximal, Mollifier};
use crate::moments::{moment_order, projection, remove_projection, BasisCache};
use crate::signal::Signal;

use super::whitney::{whitney_cover, WhitneyCover};
use super::{AtomicDecomposition, Grid, Level, Term};

/// Integral of the default level-set kernel. Level sets of `Nf` are cut at
/// `2^k` and atoms carry `λ = 2^k |I|^{1/p}`.
pub const DEFAULT_PSI_GAIN: f64 = 16.0;

/// The kernel `decompose` uses unless told otherwise.
pub fn default_psi(p: f64) -> Mollifier {
    Mollifier::for_p(p).with_gain(DEFAULT_PSI_GAIN)
}

/// Pieces whose relative size falls below this are dropped as rounding noise.
const NEGLIGIBLE: f64 = 1e-13;

/// Decomposes `f` into atoms supported on Whitney intervals of
/// `O_k = {Nf > 2^k}`.
///
/// With `g_k` equal to `f` off `O_k` and to the degree-`N` projection of `f`
/// on each Whitney interval of `O_k`, the level pieces are
/// `f_k = g_{k+1} − g_k`. Whitney intervals of `O_{k+1}` nest inside those of
/// `O_k`, so `f_k` restricted to a Whitney interval `W` of `O_k` has vanishing
/// moments on `W` and becomes `λ a` with `λ = 2^k |W|^{1/p}`. A piece larger
/// than `2^k` is carried by `R` equal copies of a scaled-down atom.
pub fn decompose(f: &Signal, p: f64, psi: &Mollifier) -> Result<AtomicDecomposition> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidIndex(format!("decomposition needs 0 < p <= 1, got {p}")));
    }
    let grid = Grid::of(f);
    let mut dec = AtomicDecomposition::empty(p, grid);
    if f.is_zero() {
        return Ok(dec);
    }
    let nf = nontangential_maximal(f, psi);
    let nmax = nf.sup_abs();
    let nmin = nf.values().iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let k_hi = ceil_log2(nmax);
    let k_lo = floor_log2(nmin) - 1;
    let degree = moment_order(p);
    let h = f.cell_width();
    let fsup = f.sup_abs();
    let mut cache = BasisCache::default();

    // g_{k_hi} = f since O_{k_hi} is empty
    let mut upper = f.values().to_vec();
    let mut levels = Vec::new();
    for k in (k_lo..k_hi).rev() {
        let lambda_level = pow2(k);
        let mask: Vec<bool> = nf.values().iter().map(|&v| v > lambda_level).collect();
        let cover = whitney_cover(&mask, k);
        let lower = level_truncation(f.values(), &cover, degree, &mut cache);
        let mut terms = Vec::new();
        for w in cover.intervals.iter().filter(|w| !w.floor) {
            let mut piece: Vec<f64> = (w.start..w.end()).map(|i| upper[i] - lower[i]).collect();
            let sup = piece.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if sup <= NEGLIGIBLE * fsup {
                continue;
            }
            remove_projection(&mut piece, cache.get(w.len, degree));
            let sup = piece.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let length = w.len as f64 * h;
            let lambda = lambda_level * length.powf(1.0 / p);
            let copies = (sup / lambda_level * (1.0 - 1e-12)).ceil().max(1.0);
            let scale = lambda * copies;
            let profile = Signal::new(f.cell_start(w.start), h, piece.iter().map(|v| v / scale).collect())?;
            let interval = Interval::new(f.cell_start(w.start) + 0.5 * length, length)?;
            let atom = Atom { center: interval.center, length, p, profile };
            for _ in 0..copies as usize {
                terms.push(Term { lambda, atom: atom.clone() });
            }
        }
        if !terms.is_empty() {
            levels.push(Level { k, terms });
        }
        upper = lower;
    }
    levels.reverse();
    dec.levels = levels;
    if upper.iter().any(|v| v.abs() > NEGLIGIBLE * fsup) {
        dec.residual = upper;
    }
    Ok(dec)
}

/// `g_k`: `f` off the cover, its polynomial projection on each interval.
fn level_truncation(f: &[f64], cover: &WhitneyCover, degree: usize, cache: &mut BasisCache) -> Vec<f64> {
    let mut g = f.to_vec();
    for w in cover.intervals.iter().filter(|w| !w.floor) {
        let proj = projection(&f[w.start..w.end()], cache.get(w.len, degree));
        g[w.start..w.end()].copy_from_slice(&proj);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::reconstruct;
    use crate::signal::relative_l2_error;

    fn bumpy(n: usize) -> Signal {
        let h = 1.0 / n as f64;
        let mut v: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) * (1.0 + (i % 3) as f64)).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        Signal::new(0.0, h, v).unwrap()
    }

    #[test]
    fn zero_signal_gives_empty_decomposition() {
        let f = Signal::zeros(0.0, 0.5, 8).unwrap();
        let dec = decompose(&f, 1.0, &default_psi(1.0)).unwrap();
        assert!(dec.levels.is_empty() && dec.residual.is_empty());
    }

    #[test]
    fn round_trip_and_normalization() {
        for p in [1.0, 2.0 / 3.0, 0.5] {
            let f = bumpy(64);
            let dec = decompose(&f, p, &default_psi(p)).unwrap();
            let r = reconstruct(&dec).unwrap();
            assert!(relative_l2_error(&r, &f).unwrap() < 1e-10);
            for (k, t) in dec.terms() {
                let want = pow2(k) * t.atom.length.powf(1.0 / p);
                assert!((t.lambda - want).abs() <= 1e-10 * want);
                let chk = t.atom.check();
                assert!(chk.valid, "p = {p}, level {k}: {chk:?}");
            }
            assert!(dec.level_overlaps().values().all(|&o| o <= crate::decomposition::OVERLAP_TARGET));
        }
    }

    #[test]
    fn rejects_bad_p() {
        let f = bumpy(8);
        assert!(decompose(&f, 1.5, &default_psi(1.0)).is_err());
    }
}
