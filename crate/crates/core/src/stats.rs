//! Exact two-sided sign test.
//!
//! Tails are exact integer binomial sums in u128 for n <= 120, so the only
//! rounding is the final conversion to `f64`. Larger n use log-space summation.

use serde::Serialize;

use crate::error::{DriftError, Result};

/// Differences with `|d| <= ZERO_TOL` are ties and are dropped.
pub const ZERO_TOL: f64 = 1e-12;
pub const TAIL_CONVENTION: &str =
    "two-sided: 2 * min(P[X <= k], P[X >= k]) capped at 1, X ~ Binomial(n, 1/2)";

const EXACT_LIMIT: u64 = 120;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignTestResult {
    pub n_nonzero: u64,
    pub n_positive: u64,
    pub p_value: f64,
}

pub fn exact_sign_test(differences: &[f64], zero_tol: f64) -> Result<SignTestResult> {
    let mut n_nonzero = 0;
    let mut n_positive = 0;
    for &d in differences {
        if d.abs() > zero_tol {
            n_nonzero += 1;
            if d > 0.0 {
                n_positive += 1;
            }
        }
    }
    if n_nonzero == 0 {
        return Err(DriftError::AllZero { zero_tol });
    }
    Ok(SignTestResult {
        n_nonzero,
        n_positive,
        p_value: sign_test_p_value(n_positive, n_nonzero),
    })
}

/// Two-sided p-value for `k` successes out of `n` fair trials.
pub fn sign_test_p_value(k: u64, n: u64) -> f64 {
    assert!(k <= n, "k = {k} exceeds n = {n}");
    if n <= EXACT_LIMIT {
        exact_p_value(k, n)
    } else {
        log_space_p_value(k, n)
    }
}

fn exact_p_value(k: u64, n: u64) -> f64 {
    let mut coeff: u128 = 1;
    let mut lower: u128 = 0;
    let mut upper: u128 = 0;
    for i in 0..=n {
        if i <= k {
            lower += coeff;
        }
        if i >= k {
            upper += coeff;
        }
        // C(n, i+1) = C(n, i) * (n - i) / (i + 1), exact at every step
        coeff = coeff * u128::from(n - i) / u128::from(i + 1);
    }
    // p = 2 * tail / 2^n = tail / 2^(n-1)
    let tail = lower.min(upper) as f64;
    let p = if n == 0 {
        1.0
    } else {
        tail / 2f64.powi(n as i32 - 1)
    };
    p.min(1.0)
}

fn log_space_p_value(k: u64, n: u64) -> f64 {
    // ln C(n, i) for i = 0..=n via running sums of logs.
    let mut ln_coeff = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0f64;
    ln_coeff.push(0.0);
    for i in 0..n {
        acc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        ln_coeff.push(acc);
    }
    let log_sum = |range: std::ops::RangeInclusive<u64>| {
        let terms: Vec<f64> = range.map(|i| ln_coeff[i as usize]).collect();
        let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
    };
    let tail = log_sum(0..=k).min(log_sum(k..=n));
    (tail - (n as f64 - 1.0) * std::f64::consts::LN_2)
        .exp()
        .min(1.0)
}
