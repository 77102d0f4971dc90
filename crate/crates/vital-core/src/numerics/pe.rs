//! Fixed sinusoidal positional encodings (base 10000), used to stamp
//! temporal order onto tactile frame embeddings and sequence order onto
//! the toy decoder input.

use crate::error::{CoreError, Result};
use crate::numerics::Matrix;

/// P x d matrix with
/// `pe[pos][2i] = sin(pos / 10000^(2i/d))`,
/// `pe[pos][2i+1] = cos(pos / 10000^(2i/d))`.
pub fn sinusoidal_pe(positions: usize, dim: usize) -> Result<Matrix> {
    if positions == 0 {
        return Err(CoreError::Config("positional encoding needs >= 1 position".into()));
    }
    if dim == 0 || dim % 2 != 0 {
        return Err(CoreError::Config(format!(
            "positional encoding dim must be a positive even number, got {dim}"
        )));
    }
    let mut data = Vec::with_capacity(positions * dim);
    for pos in 0..positions {
        for i in 0..dim / 2 {
            let angle = pos as f64 / 10000f64.powf(2.0 * i as f64 / dim as f64);
            data.push(angle.sin());
            data.push(angle.cos());
        }
    }
    Matrix::new(positions, dim, data)
}
