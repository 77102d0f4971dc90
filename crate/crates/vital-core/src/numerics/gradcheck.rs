//! Finite-difference check of the MLP directional derivative.

use crate::numerics::{mlp_forward, mlp_jvp, MlpParams};

/// Relative disagreement between the analytic directional derivative
/// and a central finite difference with step `h`:
/// `||analytic - central|| / (||central|| + eps)`.
///
/// Panics on misuse (`h <= 0`, zero direction, shape mismatch); there is
/// no error channel because the return value *is* the error magnitude.
pub fn finite_diff_check(params: &MlpParams, input: &[f64], direction: &[f64], h: f64) -> f64 {
    assert!(h > 0.0, "finite difference step must be positive");
    assert!(
        direction.iter().any(|&v| v != 0.0),
        "direction must be nonzero"
    );

    let (_, analytic) = mlp_jvp(params, input, direction).expect("shape-valid input expected");

    let plus: Vec<f64> = input.iter().zip(direction).map(|(x, d)| x + h * d).collect();
    let minus: Vec<f64> = input.iter().zip(direction).map(|(x, d)| x - h * d).collect();
    let f_plus = mlp_forward(params, &plus).expect("shape-valid input expected");
    let f_minus = mlp_forward(params, &minus).expect("shape-valid input expected");
    let central: Vec<f64> = f_plus
        .iter()
        .zip(&f_minus)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect();

    let diff_norm: f64 = analytic
        .iter()
        .zip(&central)
        .map(|(a, c)| (a - c) * (a - c))
        .sum::<f64>()
        .sqrt();
    let central_norm: f64 = central.iter().map(|c| c * c).sum::<f64>().sqrt();
    diff_norm / (central_norm + 1e-12)
}
