//! Fixed benchmark inputs shared by the criterion benches.

use rug::{Float, Rational};

/// Float precision used by the float-backend benches.
pub const BENCH_PRECISION: u32 = 128;

pub fn one_third() -> Rational {
    Rational::from((1, 3))
}

pub fn one_quarter_float() -> Float {
    Float::with_val(BENCH_PRECISION, 0.25)
}

/// Mixed-sign integer coefficients of length `n`, cycling through `+-1..=3`.
pub fn mixed_coefficients(n: usize) -> Vec<i64> {
    const CYCLE: [i64; 6] = [1, -2, 3, -1, 2, -3];
    CYCLE.iter().copied().cycle().take(n).collect()
}

/// A multiset with many distinct subset sums.
pub fn spread_multiset(n: usize) -> Vec<Rational> {
    (0..n).map(|i| Rational::from(1 + 3 * i as i64 % 17)).collect()
}
