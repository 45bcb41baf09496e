//! Binomial confidence intervals and empirical-vs-analytic comparison.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Pass threshold on |z|.
pub const Z_PASS: f64 = 3.0;

/// 95% Wilson score interval for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub z_score: f64,
    pub pass: bool,
}

/// Standard error used for the z-score: binomial at the analytic `p`, or
/// the Wilson half-width (in SE units) when `p` is 0 or 1.
pub fn standard_error(empirical: f64, analytic: f64, trials: u64) -> f64 {
    let n = trials as f64;
    let se = (analytic * (1.0 - analytic) / n).sqrt();
    if se > 0.0 {
        return se;
    }
    let errors = (empirical * n).round() as u64;
    let (lo, hi) = wilson_interval(errors, trials);
    (hi - lo) / (2.0 * Z95)
}

/// `z = (empirical - analytic) / SE`; passes iff `|z| <= 3`.
pub fn compare(empirical: f64, analytic: f64, trials: u64) -> Comparison {
    let diff = empirical - analytic;
    let z_score = if diff == 0.0 {
        0.0
    } else {
        diff / standard_error(empirical, analytic, trials)
    };
    Comparison {
        z_score,
        pass: z_score.abs() <= Z_PASS,
    }
}

/// One-sided check against an upper bound; passes iff `z <= 3`.
pub fn compare_bound(empirical: f64, bound: f64, trials: u64) -> Comparison {
    let c = compare(empirical, bound, trials);
    Comparison {
        z_score: c.z_score,
        pass: c.z_score <= Z_PASS,
    }
}
