//! Small numeric helpers shared by the estimators and the analytic code.

use alloc::vec::Vec;

/// `x^k` for a non-negative integer exponent, with `0^0 = 1`.
pub fn powu(mut x: f64, mut k: u32) -> f64 {
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= x;
        }
        x *= x;
        k >>= 1;
    }
    acc
}

/// `ln(k!)` via log-gamma.
pub fn ln_factorial(k: u64) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Exact binomial coefficient as a float, for the small arguments used by
/// the per-bit participation probabilities.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    libm::round(acc)
}

/// `k * ln(x)` with the convention `0 * ln(0) = 0`.
pub fn xlogy(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * libm::log(x)
    }
}

/// Table of `ln(k!)` for `k = 0..=max`, built by running sums.
#[derive(Debug, Clone)]
pub struct LnFactorials(Vec<f64>);

impl LnFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        table.push(0.0);
        for k in 1..=max {
            table.push(ln_factorial(k as u64));
        }
        Self(table)
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0.get(k).copied().unwrap_or_else(|| ln_factorial(k as u64))
    }

    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.get(n) - self.get(k) - self.get(n - k)
    }
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl core::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Relative tolerance under which two vote totals count as a tie.
///
/// Weighted tallies accumulate in different orders in the classifier, the
/// brute-force oracle and the analytic enumeration; sums that are equal in
/// exact arithmetic can differ in the last few ulps.
pub const TIE_RELATIVE_TOLERANCE: f64 = 1e-12;

/// Sign of `a - b` with ties detected up to [`TIE_RELATIVE_TOLERANCE`].
pub fn tolerant_cmp(a: f64, b: f64) -> core::cmp::Ordering {
    let scale = libm::fmax(libm::fabs(a), libm::fabs(b));
    let diff = a - b;
    if libm::fabs(diff) <= TIE_RELATIVE_TOLERANCE * scale {
        core::cmp::Ordering::Equal
    } else if diff > 0.0 {
        core::cmp::Ordering::Greater
    } else {
        core::cmp::Ordering::Less
    }
}
