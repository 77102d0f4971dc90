//! Fractional ranks and tie-aware Spearman rank correlation (Pearson
//! correlation of average ranks).

use crate::error::{CoreError, Result};

/// Average ("fractional") ranks in [1, n]: tied values receive the mean
/// of the ordinal positions they occupy, so the rank sum is always
/// exactly n(n+1)/2.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));

    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the average of ranks i+1..=j+1
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn check_series(name: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::Input(format!("{name} contains a non-finite value")));
    }
    if xs.windows(2).all(|w| w[0] == w[1]) {
        return Err(CoreError::Input(format!(
            "{name} is constant; rank correlation is undefined"
        )));
    }
    Ok(())
}

/// Spearman's rho: the Pearson correlation of the two fractional-rank
/// vectors. Needs n >= 2 and at least two distinct values per series.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(CoreError::Shape(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(CoreError::Input(format!(
            "need at least 2 observations, got {}",
            x.len()
        )));
    }
    check_series("x", x)?;
    check_series("y", y)?;

    let rx = fractional_ranks(x);
    let ry = fractional_ranks(y);
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;

    let mut cov = 0.0;
    let mut ssx = 0.0;
    let mut ssy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        let da = a - mean;
        let db = b - mean;
        cov += da * db;
        ssx += da * da;
        ssy += db * db;
    }
    Ok(cov / (ssx * ssy).sqrt())
}

/// Min-max normalization to [0, 1]. A strictly monotone transform, so
/// it never changes ranks (and therefore never changes rho); it exists
/// because the evaluation protocol states it.
pub fn normalize_min_max(xs: &[f64]) -> Result<Vec<f64>> {
    let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return Err(CoreError::Input(
            "min-max normalization of a constant or empty series".into(),
        ));
    }
    Ok(xs.iter().map(|v| (v - min) / (max - min)).collect())
}
