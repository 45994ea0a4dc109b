//! Binomial tests for Monte Carlo failure counts.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, Binomial, ContinuousCDF, DiscreteCDF};

/// `P(X ≥ x)` for `X ~ Bin(n, p)`.
pub fn binomial_upper_tail(x: u64, n: u64, p: f64) -> f64 {
    if x == 0 {
        return 1.0;
    }
    if x > n {
        return 0.0;
    }
    let dist = Binomial::new(p, n).expect("valid binomial parameters");
    dist.sf(x - 1)
}

/// Exact one-sided Clopper–Pearson bounds at level `confidence`:
/// `P(p < lower) ≤ 1 − confidence` and likewise for `upper`.
pub fn clopper_pearson(x: u64, n: u64, confidence: f64) -> (f64, f64) {
    let alpha = 1.0 - confidence;
    let (xf, nf) = (x as f64, n as f64);
    let lower = if x == 0 {
        0.0
    } else {
        Beta::new(xf, nf - xf + 1.0)
            .expect("valid beta parameters")
            .inverse_cdf(alpha)
    };
    let upper = if x == n {
        1.0
    } else {
        Beta::new(xf + 1.0, nf - xf)
            .expect("valid beta parameters")
            .inverse_cdf(1.0 - alpha)
    };
    (lower, upper)
}

/// Outcome of testing `H₀: failure probability ≤ δ` against the observed
/// failure count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureTest {
    pub failures: u64,
    pub trials: u64,
    pub delta: f64,
    pub rate: f64,
    pub lower: f64,
    pub upper: f64,
    pub p_value: f64,
    pub pass: bool,
}

/// Passes unless the observed count rejects `p ≤ δ` at `confidence`.
pub fn failure_test(failures: u64, trials: u64, delta: f64, confidence: f64) -> FailureTest {
    let p_value = binomial_upper_tail(failures, trials, delta);
    let (lower, upper) = clopper_pearson(failures, trials, confidence);
    FailureTest {
        failures,
        trials,
        delta,
        rate: failures as f64 / trials as f64,
        lower,
        upper,
        p_value,
        pass: p_value >= 1.0 - confidence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tail_by_sum(x: u64, n: u64, p: f64) -> f64 {
        let mut ln_c = 0.0f64;
        let mut total = 0.0;
        for k in 0..=n {
            if k > 0 {
                ln_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
            }
            if k >= x {
                total += (ln_c + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp();
            }
        }
        total
    }

    #[test]
    fn tail_matches_direct_sum() {
        for (x, n, p) in [(0u64, 10u64, 0.3), (3, 10, 0.3), (62, 500, 0.1), (70, 500, 0.1)] {
            assert_relative_eq!(binomial_upper_tail(x, n, p), tail_by_sum(x, n, p), max_relative = 1e-9);
        }
    }

    #[test]
    fn lower_bound_and_p_value_agree() {
        for x in 0..=120u64 {
            let t = failure_test(x, 500, 0.1, 0.95);
            assert_eq!(t.pass, t.lower <= 0.1 + 1e-12, "x = {x}");
        }
    }

    #[test]
    fn zero_failures() {
        let t = failure_test(0, 500, 0.1, 0.95);
        assert!(t.pass);
        assert_eq!(t.lower, 0.0);
        assert_relative_eq!(t.upper, 1.0 - 0.05f64.powf(1.0 / 500.0), max_relative = 1e-9);
    }

    #[test]
    fn clearly_too_many_failures() {
        assert!(!failure_test(100, 500, 0.1, 0.95).pass);
    }
}
