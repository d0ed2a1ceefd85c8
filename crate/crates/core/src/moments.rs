//! Polynomial moments of step functions on a run of equal cells.
//!
//! For a step function `g` on cells of width `h`, `∫ x^α g = h Σ_c g_c · avg_c(x^α)`,
//! and the cell averages of `1, x, …, x^N` span the same space as the sampled
//! powers of the cell centers. Removing the Euclidean projection onto that
//! space therefore kills the first `N + 1` moments exactly while keeping `g`
//! a step function.

use std::collections::HashMap;

/// Orthonormal basis (Euclidean on cell values) of discrete polynomials of
/// degree `≤ degree` on `n` equally spaced cells. Has `min(n, degree + 1)`
/// vectors.
pub fn moment_basis(n: usize, degree: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    if n == 0 {
        return basis;
    }
    let scale = if n > 1 { 2.0 / (n - 1) as f64 } else { 1.0 };
    let u: Vec<f64> = (0..n).map(|c| c as f64 * scale - if n > 1 { 1.0 } else { 0.0 }).collect();
    for alpha in 0..=degree {
        if basis.len() == n {
            break;
        }
        let mut v: Vec<f64> = u.iter().map(|x| x.powi(alpha as i32)).collect();
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // two passes of Gram–Schmidt
        for _ in 0..2 {
            for e in &basis {
                let d: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= d * ei;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-10 * norm0.max(1.0) {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    basis
}

/// Subtracts the projection onto `basis` in place.
pub fn remove_projection(values: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for e in basis {
            let d: f64 = values.iter().zip(e).map(|(a, b)| a * b).sum();
            for (vi, ei) in values.iter_mut().zip(e) {
                *vi -= d * ei;
            }
        }
    }
}

/// The projection of `values` onto `basis`.
pub fn projection(values: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for e in basis {
        let d: f64 = values.iter().zip(e).map(|(a, b)| a * b).sum();
        for (o, ei) in out.iter_mut().zip(e) {
            *o += d * ei;
        }
    }
    out
}

/// Memoized bases keyed by `(cells, degree)`.
#[derive(Debug, Default)]
pub struct BasisCache {
    bases: HashMap<(usize, usize), Vec<Vec<f64>>>,
}

impl BasisCache {
    pub fn get(&mut self, n: usize, degree: usize) -> &[Vec<f64>] {
        self.bases.entry((n, degree)).or_insert_with(|| moment_basis(n, degree))
    }
}

/// `∫ (x − center)^α g(x) dx` for a step function with cells
/// `[start + i h, start + (i+1) h)`.
pub fn moment_about(values: &[f64], start: f64, h: f64, center: f64, alpha: u32) -> f64 {
    let e = alpha as i32 + 1;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let a = start + i as f64 * h - center;
            let b = a + h;
            v * (b.powi(e) - a.powi(e)) / e as f64
        })
        .sum()
}

/// `⌊1/p − 1⌋`: the number of vanishing moments (minus one) an `H^p` atom
/// on the line carries.
pub fn moment_order(p: f64) -> usize {
    let x = 1.0 / p - 1.0;
    // 1/p computed in floating point can land a hair below an integer
    (x + 1e-12).floor().max(0.0) as usize
}
