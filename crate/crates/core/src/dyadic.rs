//! Exact binary-exponent helpers for dyadic level bookkeeping.

/// `2^k` as an exact `f64` (for `k` in the normal range).
pub fn pow2(k: i32) -> f64 {
    2.0_f64.powi(k)
}

/// `⌊log₂ x⌋` for finite `x > 0`, read from the IEEE exponent.
pub fn floor_log2(x: f64) -> i32 {
    assert!(x > 0.0 && x.is_finite(), "floor_log2 needs a finite positive argument, got {x}");
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp == 0 {
        // subnormal: renormalize
        let m = bits & ((1u64 << 52) - 1);
        return -1074 + (63 - m.leading_zeros() as i32);
    }
    exp - 1023
}

pub fn is_pow2(x: f64) -> bool {
    x > 0.0 && x.is_finite() && (x.to_bits() & ((1u64 << 52) - 1)) == 0 && (x.to_bits() >> 52) & 0x7ff != 0
}

/// `⌈log₂ x⌉` for finite `x > 0`.
pub fn ceil_log2(x: f64) -> i32 {
    let f = floor_log2(x);
    if is_pow2(x) {
        f
    } else {
        f + 1
    }
}

/// The level `k` with `2^k ≤ x < 2^{k+1}`.
pub fn level_of(x: f64) -> i32 {
    floor_log2(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_at_boundaries() {
        assert_eq!(floor_log2(1.0), 0);
        assert_eq!(floor_log2(2.0), 1);
        assert_eq!(floor_log2(1.999999999), 0);
        assert_eq!(floor_log2(0.5), -1);
        assert_eq!(floor_log2(3.0), 1);
        assert_eq!(ceil_log2(3.0), 2);
        assert_eq!(ceil_log2(4.0), 2);
        assert_eq!(ceil_log2(0.75), 0);
        assert_eq!(floor_log2(f64::MIN_POSITIVE / 4.0), -1024);
    }

    #[test]
    fn agrees_with_log2_off_boundaries() {
        for i in 1..2000 {
            let x = 1.0137_f64.powi(i) * 1e-6;
            assert_eq!(floor_log2(x), x.log2().floor() as i32, "x = {x}");
        }
    }
}
