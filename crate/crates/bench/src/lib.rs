//! Shared inputs for the benchmarks.

use hlorentz_core::Signal;

/// Deterministic mean-zero step signal on `[0, 1)` with `n` cells.
pub fn sawtooth(n: usize) -> Signal {
    let mut v: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) * (1.0 + (i % 3) as f64)).collect();
    let mean = v.iter().sum::<f64>() / n as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    Signal::new(0.0, 1.0 / n as f64, v).expect("valid grid")
}
