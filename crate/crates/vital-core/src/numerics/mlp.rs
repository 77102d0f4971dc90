//! Feed-forward MLP used as the modality-specific projection into the
//! shared embedding space. Forward pass only; the only derivative
//! machinery is the forward-mode directional derivative needed by the
//! gradient checker.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::numerics::{seeded_init, Matrix, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

#[derive(Debug, Clone)]
pub struct MlpLayer {
    pub weight: Matrix, // out x in
    pub bias: Vec<f64>, // out
    pub activation: Activation,
}

impl MlpLayer {
    pub fn new(weight: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weight.rows() {
            return Err(CoreError::Shape(format!(
                "bias length {} does not match weight rows {}",
                bias.len(),
                weight.rows()
            )));
        }
        if bias.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::Numeric("non-finite bias entry".into()));
        }
        Ok(Self { weight, bias, activation })
    }
}

/// Ordered dense layers; adjacent dimensions must chain.
#[derive(Debug, Clone)]
pub struct MlpParams {
    layers: Vec<MlpLayer>,
}

impl MlpParams {
    pub fn new(layers: Vec<MlpLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(CoreError::Config("MLP needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].weight.rows() != pair[1].weight.cols() {
                return Err(CoreError::Shape(format!(
                    "layer output dim {} does not chain into next input dim {}",
                    pair[0].weight.rows(),
                    pair[1].weight.cols()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Seeded network over the dimension chain `dims`, ReLU on hidden
    /// layers and identity on the last.
    pub fn seeded(rng: &mut SeededRng, dims: &[usize], scale: f64) -> Result<Self> {
        if dims.len() < 2 {
            return Err(CoreError::Config("dimension chain needs >= 2 entries".into()));
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (i, io) in dims.windows(2).enumerate() {
            let (input, output) = (io[0], io[1]);
            let weight = seeded_init(rng, output, input, scale)?;
            let bias = vec![0.0; output];
            let activation = if i + 2 == dims.len() { Activation::Identity } else { Activation::Relu };
            layers.push(MlpLayer::new(weight, bias, activation)?);
        }
        Self::new(layers)
    }

    pub fn layers(&self) -> &[MlpLayer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].weight.rows()
    }
}

/// Forward pass: `x -> act(Wx + b)` layer by layer.
pub fn mlp_forward(params: &MlpParams, input: &[f64]) -> Result<Vec<f64>> {
    if input.len() != params.input_dim() {
        return Err(CoreError::Shape(format!(
            "input length {} does not match first layer in-dim {}",
            input.len(),
            params.input_dim()
        )));
    }
    let mut x = input.to_vec();
    for layer in &params.layers {
        let mut y = layer.weight.matvec(&x)?;
        for (v, b) in y.iter_mut().zip(&layer.bias) {
            *v += b;
            if layer.activation == Activation::Relu && *v < 0.0 {
                *v = 0.0;
            }
        }
        x = y;
    }
    Ok(x)
}

/// Forward-mode pass: returns (value, directional derivative along
/// `direction`). ReLU uses the subgradient 0 at the kink.
pub fn mlp_jvp(params: &MlpParams, input: &[f64], direction: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if direction.len() != input.len() {
        return Err(CoreError::Shape("direction length must match input length".into()));
    }
    if input.len() != params.input_dim() {
        return Err(CoreError::Shape(format!(
            "input length {} does not match first layer in-dim {}",
            input.len(),
            params.input_dim()
        )));
    }
    let mut x = input.to_vec();
    let mut dx = direction.to_vec();
    for layer in &params.layers {
        let mut y = layer.weight.matvec(&x)?;
        let mut dy = layer.weight.matvec(&dx)?;
        for ((v, dv), b) in y.iter_mut().zip(dy.iter_mut()).zip(&layer.bias) {
            *v += b;
            if layer.activation == Activation::Relu && *v <= 0.0 {
                *v = 0.0;
                *dv = 0.0;
            }
        }
        x = y;
        dx = dy;
    }
    Ok((x, dx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(weight: Matrix, bias: Vec<f64>, act: Activation) -> MlpLayer {
        MlpLayer::new(weight, bias, act).unwrap()
    }

    #[test]
    fn zero_weights_yield_bias() {
        let p = MlpParams::new(vec![layer(
            Matrix::zeros(3, 4),
            vec![0.5, -1.0, 2.0],
            Activation::Identity,
        )])
        .unwrap();
        let out = mlp_forward(&p, &[9.0, -3.0, 7.0, 1.0]).unwrap();
        assert_eq!(out, vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn identity_layer_is_identity() {
        let p = MlpParams::new(vec![layer(
            Matrix::identity(4),
            vec![0.0; 4],
            Activation::Identity,
        )])
        .unwrap();
        let x = [0.1, -0.7, 3.3, 0.0];
        assert_eq!(mlp_forward(&p, &x).unwrap(), x.to_vec());
    }

    // Independent oracle: naive triple-loop evaluation of the same
    // layers, written without reusing Matrix::matvec.
    fn naive_forward(params: &MlpParams, input: &[f64]) -> Vec<f64> {
        let mut x = input.to_vec();
        for layer in params.layers() {
            let rows = layer.weight.rows();
            let cols = layer.weight.cols();
            let mut y = vec![0.0; rows];
            for r in 0..rows {
                let mut acc = 0.0;
                for c in 0..cols {
                    acc += layer.weight.get(r, c) * x[c];
                }
                acc += layer.bias[r];
                y[r] = if layer.activation == Activation::Relu && acc < 0.0 { 0.0 } else { acc };
            }
            x = y;
        }
        x
    }

    #[test]
    fn seeded_two_layer_matches_naive_oracle() {
        let mut rng = SeededRng::new(20240601);
        let p = MlpParams::seeded(&mut rng, &[6, 5, 4], 0.3).unwrap();
        let x = [0.25, -0.5, 1.5, 0.0, -2.0, 0.75];
        let got = mlp_forward(&p, &x).unwrap();
        let want = naive_forward(&p, &x);
        assert_eq!(got.len(), 4);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "impl {g} vs oracle {w}");
        }
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let mut rng = SeededRng::new(1);
        let p = MlpParams::seeded(&mut rng, &[3, 2], 0.1).unwrap();
        assert!(matches!(mlp_forward(&p, &[1.0, 2.0]), Err(CoreError::Shape(_))));
    }

    #[test]
    fn chain_mismatch_rejected() {
        let l1 = layer(Matrix::zeros(3, 2), vec![0.0; 3], Activation::Relu);
        let l2 = layer(Matrix::zeros(2, 4), vec![0.0; 2], Activation::Identity);
        assert!(matches!(MlpParams::new(vec![l1, l2]), Err(CoreError::Shape(_))));
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = SeededRng::new(5);
        let p = MlpParams::seeded(&mut rng, &[4, 8, 4], 0.08).unwrap();
        let x = [0.2, 0.4, -0.1, 0.9];
        assert_eq!(mlp_forward(&p, &x).unwrap(), mlp_forward(&p, &x).unwrap());
    }
}
