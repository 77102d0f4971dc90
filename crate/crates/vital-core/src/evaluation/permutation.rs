//! Two-sided permutation p-values for Spearman's rho.
//!
//! The permutation distribution is over shuffles of `y`. Because the
//! rank multisets (and hence both rank variances) are unchanged by
//! permutation, `|rho_perm| >= |rho_obs|` is equivalent to comparing
//! squared rank covariances — which, with average ranks scaled to
//! integers, the exact path evaluates in integer arithmetic with no
//! floating-point tie ambiguity.

use crate::error::{CoreError, Result};
use crate::evaluation::spearman::{fractional_ranks, spearman_rho};
use crate::numerics::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMethod {
    Exact,
    MonteCarlo,
}

/// Largest n for which exact enumeration is allowed (n! guard).
pub const EXACT_MAX_N: usize = 10;

/// Two-sided permutation p-value: `P(|rho_perm| >= |rho_obs|)`.
///
/// `Exact` enumerates all n! permutations (n <= 10). `MonteCarlo` draws
/// seeded resamples and applies the +1/+1 correction with the observed
/// statistic included.
pub fn p_value(x: &[f64], y: &[f64], method: PMethod, seed: u64, resamples: usize) -> Result<f64> {
    // validates lengths, finiteness, and degeneracy
    spearman_rho(x, y)?;
    match method {
        PMethod::Exact => {
            if x.len() > EXACT_MAX_N {
                return Err(CoreError::Config(format!(
                    "exact permutation test with n = {} exceeds the n <= {EXACT_MAX_N} guard",
                    x.len()
                )));
            }
            Ok(exact_p(x, y))
        }
        PMethod::MonteCarlo => {
            if resamples == 0 {
                return Err(CoreError::Config("monte carlo needs >= 1 resample".into()));
            }
            Ok(monte_carlo_p(x, y, seed, resamples))
        }
    }
}

/// Integer-centered ranks: `n * (2 * rank_i) - sum_j (2 * rank_j)`.
/// Average ranks are multiples of 1/2, so `2 * rank` is an integer and
/// the centering stays exact.
fn centered_int_ranks(values: &[f64]) -> Vec<i64> {
    let ranks = fractional_ranks(values);
    let n = ranks.len() as i64;
    let doubled: Vec<i64> = ranks.iter().map(|r| (2.0 * r).round() as i64).collect();
    let total: i64 = doubled.iter().sum();
    doubled.into_iter().map(|a| n * a - total).collect()
}

fn exact_p(x: &[f64], y: &[f64]) -> f64 {
    let a = centered_int_ranks(x);
    let mut b = centered_int_ranks(y);
    let n = a.len();

    let dot = |b: &[i64]| -> i64 { a.iter().zip(b).map(|(p, q)| p * q).sum() };
    let observed_sq = {
        let s = dot(&b);
        s * s
    };

    // iterative Heap's algorithm; the covariance S is updated in O(1)
    // per swap via (A_i - A_j)(B_j - B_i)
    let mut s = dot(&b);
    let mut hits: u64 = u64::from(s * s >= observed_sq);
    let mut total: u64 = 1;
    let mut counters = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if counters[i] < i {
            let j = if i % 2 == 0 { 0 } else { counters[i] };
            s += (a[i] - a[j]) * (b[j] - b[i]);
            b.swap(i, j);
            if s * s >= observed_sq {
                hits += 1;
            }
            total += 1;
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    debug_assert_eq!(total, (1..=n as u64).product::<u64>());
    hits as f64 / total as f64
}

fn monte_carlo_p(x: &[f64], y: &[f64], seed: u64, resamples: usize) -> f64 {
    // centered f64 ranks: values are multiples of 1/2 around (n+1)/2,
    // so all products and sums below are exact in f64
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let a: Vec<f64> = fractional_ranks(x).iter().map(|r| r - mean).collect();
    let mut b: Vec<f64> = fractional_ranks(y).iter().map(|r| r - mean).collect();

    let dot = |b: &[f64]| -> f64 { a.iter().zip(b).map(|(p, q)| p * q).sum() };
    let observed_sq = {
        let s = dot(&b);
        s * s
    };

    let mut rng = SeededRng::new(seed);
    let mut hits: u64 = 0;
    for _ in 0..resamples {
        rng.shuffle(&mut b);
        let s = dot(&b);
        if s * s >= observed_sq {
            hits += 1;
        }
    }
    (hits as f64 + 1.0) / (resamples as f64 + 1.0)
}

/// Student-t approximation of the Spearman p-value. Diagnostic only:
/// the permutation test above is the reported method.
pub fn t_approx_p_value(rho: f64, n: usize) -> Result<f64> {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    if n < 3 {
        return Err(CoreError::Input("t approximation needs n >= 3".into()));
    }
    if !(-1.0..=1.0).contains(&rho) {
        return Err(CoreError::Range(format!("rho {rho} outside [-1, 1]")));
    }
    if (rho.abs() - 1.0).abs() < 1e-15 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| CoreError::Input(format!("t distribution: {e}")))?;
    Ok(2.0 * (1.0 - dist.cdf(t.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_identity_n3_is_one_third() {
        let x = [1.0, 2.0, 3.0];
        let p = p_value(&x, &x, PMethod::Exact, 0, 0).unwrap();
        assert!((p - 1.0 / 3.0).abs() < 1e-15, "got {p}");
    }

    #[test]
    fn exact_identity_n4_is_one_twelfth() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let p = p_value(&x, &x, PMethod::Exact, 0, 0).unwrap();
        assert!((p - 1.0 / 12.0).abs() < 1e-15, "got {p}");
    }

    #[test]
    fn exact_reversal_matches_identity_by_symmetry() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [4.0, 3.0, 2.0, 1.0];
        let p = p_value(&x, &y, PMethod::Exact, 0, 0).unwrap();
        assert!((p - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn exact_guard_rejects_large_n() {
        let x: Vec<f64> = (0..11).map(f64::from).collect();
        assert!(matches!(
            p_value(&x, &x, PMethod::Exact, 0, 0),
            Err(CoreError::Config(_))
        ));
    }

    #[test]
    fn monte_carlo_is_seed_deterministic() {
        let x = [1.0, 5.0, 3.0, 2.0, 4.0, 7.0, 6.0, 9.0, 8.0, 10.0];
        let y = [2.0, 4.0, 1.0, 5.0, 3.0, 8.0, 7.0, 10.0, 9.0, 6.0];
        let a = p_value(&x, &y, PMethod::MonteCarlo, 31, 20_000).unwrap();
        let b = p_value(&x, &y, PMethod::MonteCarlo, 31, 20_000).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn monte_carlo_tracks_exact_for_small_n() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0];
        let exact = p_value(&x, &y, PMethod::Exact, 0, 0).unwrap();
        let mc = p_value(&x, &y, PMethod::MonteCarlo, 7, 200_000).unwrap();
        assert!((exact - mc).abs() < 0.01, "exact {exact} vs mc {mc}");
    }

    #[test]
    fn t_approximation_behaves() {
        // strong correlation on decent n: small p
        let p = t_approx_p_value(0.9, 20).unwrap();
        assert!(p < 0.001);
        // no correlation: p = 1
        let p0 = t_approx_p_value(0.0, 20).unwrap();
        assert!((p0 - 1.0).abs() < 1e-12);
        assert_eq!(t_approx_p_value(1.0, 10).unwrap(), 0.0);
    }
}
