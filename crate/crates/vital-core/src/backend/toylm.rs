//! ToyLM: a tiny deterministic decoder over the assembled multimodal
//! sequence. Two decoder layers of single-head scaled dot-product
//! attention (causal) plus a residual MLP, byte vocabulary shared with
//! the tokenizer, greedy decoding at temperature 0 with ties broken
//! toward the lowest token id.
//!
//! Sinusoidal position terms are added to the input embeddings, so the
//! decoder genuinely sees sequence order: permuting span contents
//! changes the logits.

use crate::assembly::{detokenize_lossy, MultimodalSequence, EOS_TOKEN, VOCAB_SIZE};
use crate::backend::{Backend, FinishReason, GenerationRequest, GenerationResult, RequestPayload};
use crate::error::{CoreError, Result};
use crate::numerics::{
    derive_seed, mlp_forward, seeded_init, sinusoidal_pe, softmax_in_place, Matrix, MlpParams,
    SeededRng,
};

const N_LAYERS: usize = 2;
/// Hard cap on prompt + generated positions (toy scale).
const MAX_POSITIONS: usize = 8192;

#[derive(Debug, Clone)]
struct DecoderLayer {
    wq: Matrix,
    wk: Matrix,
    wv: Matrix,
    wo: Matrix,
    mlp: MlpParams,
}

/// Seeded decoder weights plus the shared token embedding table.
#[derive(Debug, Clone)]
pub struct ToyLmWeights {
    dim: usize,
    embed: Matrix, // VOCAB_SIZE x dim
    layers: Vec<DecoderLayer>,
    w_out: Matrix, // VOCAB_SIZE x dim
}

impl ToyLmWeights {
    /// Build deterministic weights for embedding dimension `dim`,
    /// sharing `embed` with the text-embedding stage.
    pub fn seeded(seed: u64, dim: usize, embed: Matrix) -> Result<Self> {
        if embed.rows() != VOCAB_SIZE || embed.cols() != dim {
            return Err(CoreError::Shape(format!(
                "embedding table is {}x{}, expected {VOCAB_SIZE}x{dim}",
                embed.rows(),
                embed.cols()
            )));
        }
        let mut layers = Vec::with_capacity(N_LAYERS);
        for layer_idx in 0..N_LAYERS {
            let mut rng = SeededRng::new(derive_seed(seed, &format!("toylm-layer-{layer_idx}")));
            let scale = 0.08;
            layers.push(DecoderLayer {
                wq: seeded_init(&mut rng, dim, dim, scale)?,
                wk: seeded_init(&mut rng, dim, dim, scale)?,
                wv: seeded_init(&mut rng, dim, dim, scale)?,
                wo: seeded_init(&mut rng, dim, dim, scale)?,
                mlp: MlpParams::seeded(&mut rng, &[dim, 2 * dim, dim], scale)?,
            });
        }
        let mut rng = SeededRng::new(derive_seed(seed, "toylm-out"));
        let w_out = seeded_init(&mut rng, VOCAB_SIZE, dim, 0.08)?;
        Ok(Self { dim, embed, layers, w_out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embed_table(&self) -> &Matrix {
        &self.embed
    }
}

/// Attention weights recorded at one query position: one row per layer,
/// each covering every position up to and including the query.
#[derive(Debug, Clone)]
pub struct AttentionTrace {
    pub per_layer: Vec<Vec<f64>>,
}

/// Incremental causal decoder state (per-layer key/value caches).
struct DecoderState<'w> {
    weights: &'w ToyLmWeights,
    keys: Vec<Vec<Vec<f64>>>,   // [layer][pos][dim]
    values: Vec<Vec<Vec<f64>>>, // [layer][pos][dim]
}

impl<'w> DecoderState<'w> {
    fn new(weights: &'w ToyLmWeights) -> Self {
        Self {
            weights,
            keys: vec![Vec::new(); N_LAYERS],
            values: vec![Vec::new(); N_LAYERS],
        }
    }

    /// Process one position and return (hidden state, attention rows).
    fn step(&mut self, x_in: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let d = self.weights.dim;
        let inv_sqrt_d = 1.0 / (d as f64).sqrt();
        let mut x = x_in.to_vec();
        let mut attn_rows = Vec::with_capacity(N_LAYERS);
        for (layer_idx, layer) in self.weights.layers.iter().enumerate() {
            let q = layer.wq.matvec(&x)?;
            let k = layer.wk.matvec(&x)?;
            let v = layer.wv.matvec(&x)?;
            self.keys[layer_idx].push(k);
            self.values[layer_idx].push(v);

            let cached_k = &self.keys[layer_idx];
            let cached_v = &self.values[layer_idx];
            let mut scores: Vec<f64> = cached_k
                .iter()
                .map(|key| key.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>() * inv_sqrt_d)
                .collect();
            softmax_in_place(&mut scores);

            let mut ctx = vec![0.0; d];
            for (w, val) in scores.iter().zip(cached_v) {
                for (c, x) in ctx.iter_mut().zip(val) {
                    *c += w * x;
                }
            }
            let proj = layer.wo.matvec(&ctx)?;
            for (xi, p) in x.iter_mut().zip(&proj) {
                *xi += p;
            }
            let h = mlp_forward(&layer.mlp, &x)?;
            for (xi, hi) in x.iter_mut().zip(&h) {
                *xi += hi;
            }
            attn_rows.push(scores);
        }
        Ok((x, attn_rows))
    }
}

fn logits(weights: &ToyLmWeights, hidden: &[f64]) -> Result<Vec<f64>> {
    weights.w_out.matvec(hidden)
}

/// Greedy argmax with the lowest token id winning ties.
fn argmax_lowest(logits: &[f64]) -> u32 {
    let mut best = 0usize;
    for (i, &v) in logits.iter().enumerate() {
        if v > logits[best] {
            best = i;
        }
    }
    best as u32
}

fn prefill<'w>(
    weights: &'w ToyLmWeights,
    sequence: &MultimodalSequence,
    max_tokens: usize,
) -> Result<(DecoderState<'w>, Vec<f64>, Vec<Vec<f64>>, Matrix)> {
    if sequence.dim() != weights.dim {
        return Err(CoreError::Shape(format!(
            "sequence dim {} does not match decoder dim {}",
            sequence.dim(),
            weights.dim
        )));
    }
    if sequence.is_empty() {
        return Err(CoreError::Input("cannot decode from an empty sequence".into()));
    }
    let total = sequence.len() + max_tokens;
    if total > MAX_POSITIONS {
        return Err(CoreError::Config(format!(
            "sequence of {total} positions exceeds the decoder cap {MAX_POSITIONS}"
        )));
    }
    let pe = sinusoidal_pe(total, weights.dim)?;
    let mut state = DecoderState::new(weights);
    let mut last_hidden = Vec::new();
    let mut last_attn = Vec::new();
    for (pos, item) in sequence.items().iter().enumerate() {
        let x: Vec<f64> = item.vector.iter().zip(pe.row(pos)).map(|(a, b)| a + b).collect();
        let (hidden, attn) = state.step(&x)?;
        last_hidden = hidden;
        last_attn = attn;
    }
    Ok((state, last_hidden, last_attn, pe))
}

/// Logits for the first generated token, given the prompt sequence.
/// Debug surface for attention/permutation checks.
pub fn prompt_logits(weights: &ToyLmWeights, sequence: &MultimodalSequence) -> Result<Vec<f64>> {
    let (_, hidden, _, _) = prefill(weights, sequence, 1)?;
    logits(weights, &hidden)
}

/// Attention rows (one per layer) computed at the final prompt
/// position, covering the whole multimodal sequence.
pub fn prompt_attention(weights: &ToyLmWeights, sequence: &MultimodalSequence) -> Result<AttentionTrace> {
    let (_, _, attn, _) = prefill(weights, sequence, 1)?;
    Ok(AttentionTrace { per_layer: attn })
}

/// Run greedy (or seeded-sampled, when `temperature > 0`) byte decoding
/// over the assembled sequence.
pub fn toy_generate(
    weights: &ToyLmWeights,
    sequence: &MultimodalSequence,
    max_tokens: usize,
    temperature: f64,
    seed: u64,
) -> Result<GenerationResult> {
    let start = std::time::Instant::now();
    let (mut state, mut hidden, _, pe) = prefill(weights, sequence, max_tokens)?;
    let mut rng = SeededRng::new(derive_seed(seed, "toylm-sampler"));
    let mut ids: Vec<u32> = Vec::with_capacity(max_tokens);
    let mut finish = FinishReason::Length;
    for step in 0..max_tokens {
        let mut step_logits = logits(weights, &hidden)?;
        if step == 0 {
            // never stop before emitting at least one byte
            step_logits[EOS_TOKEN as usize] = f64::NEG_INFINITY;
        }
        let token = if temperature > 0.0 {
            sample(&step_logits, temperature, &mut rng)
        } else {
            argmax_lowest(&step_logits)
        };
        if token == EOS_TOKEN {
            finish = FinishReason::Stop;
            break;
        }
        ids.push(token);
        let pos = sequence.len() + step;
        let x: Vec<f64> = weights
            .embed
            .row(token as usize)
            .iter()
            .zip(pe.row(pos))
            .map(|(a, b)| a + b)
            .collect();
        let (h, _) = state.step(&x)?;
        hidden = h;
    }
    let text = detokenize_lossy(&ids);
    let latency = start.elapsed().as_millis() as u64;
    GenerationResult::new(text, finish, latency)
}

fn sample(logits: &[f64], temperature: f64, rng: &mut SeededRng) -> u32 {
    let mut probs: Vec<f64> = logits.iter().map(|v| v / temperature).collect();
    softmax_in_place(&mut probs);
    let draw = rng.next_f64();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if draw < acc {
            return i as u32;
        }
    }
    (probs.len() - 1) as u32
}

/// [`Backend`] wrapper around the toy decoder.
pub struct ToyLmBackend {
    weights: ToyLmWeights,
    seed: u64,
}

impl ToyLmBackend {
    pub fn new(weights: ToyLmWeights, seed: u64) -> Self {
        Self { weights, seed }
    }

    pub fn weights(&self) -> &ToyLmWeights {
        &self.weights
    }
}

impl Backend for ToyLmBackend {
    fn generate(&self, req: &GenerationRequest) -> Result<GenerationResult> {
        match &req.payload {
            RequestPayload::Sequence(seq) => {
                toy_generate(&self.weights, seq, req.max_tokens, req.temperature, self.seed)
            }
            RequestPayload::Messages(_) => Err(CoreError::Input(
                "toy backend consumes embedding sequences, not chat messages".into(),
            )),
        }
    }

    fn model_id(&self) -> String {
        format!("toylm-d{}-seed{}", self.weights.dim, self.seed)
    }
}
