//! Toy vision and tactile encoders.
//!
//! The pipeline shape mirrors the production design — region
//! segmentation, per-region features, a "penultimate" encoder MLP, a
//! projection MLP into the shared space, boundary tokens — but the
//! featurizer is a deterministic statistic extractor instead of a
//! pretrained transformer, so everything runs at desk scale with no
//! weight downloads.

mod io;
mod types;

pub use io::{image_to_png_bytes, load_image};
pub use types::{BoundaryTokens, EmbeddingSequence, Image, Modality, RegionGrid, TactileClip};

use std::collections::BTreeMap;

use crate::error::{CoreError, Result};
use crate::numerics::{mlp_forward, sinusoidal_pe, MlpParams};

/// Number of values produced by [`frame_features`]: three channels of
/// (mean, standard deviation, 8-bin intensity histogram).
pub const FEATURE_DIM: usize = 30;

/// Split an image into a G x G grid of sub-images in row-major order.
/// Each region spans `height/G` (integer division) rows, with the
/// remainder rows assigned to the last grid row; columns likewise.
pub fn segment_image(img: &Image, grid: usize) -> Result<RegionGrid> {
    if grid == 0 {
        return Err(CoreError::Config("grid size must be >= 1".into()));
    }
    if grid > img.width().min(img.height()) {
        return Err(CoreError::Config(format!(
            "grid size {grid} exceeds min(image dims) = {}",
            img.width().min(img.height())
        )));
    }
    let base_h = img.height() / grid;
    let base_w = img.width() / grid;
    let mut regions = Vec::with_capacity(grid * grid);
    for r in 0..grid {
        let y0 = r * base_h;
        let y1 = if r + 1 == grid { img.height() } else { (r + 1) * base_h };
        for c in 0..grid {
            let x0 = c * base_w;
            let x1 = if c + 1 == grid { img.width() } else { (c + 1) * base_w };
            regions.push(img.crop(x0, y0, x1 - x0, y1 - y0));
        }
    }
    RegionGrid::new(grid, regions)
}

/// Deterministic per-image feature vector: per channel, the mean,
/// population standard deviation, and a normalized 8-bin intensity
/// histogram. Grayscale images report the same channel three times so
/// the feature length is always [`FEATURE_DIM`].
pub fn frame_features(img: &Image) -> Vec<f64> {
    let mut features = Vec::with_capacity(FEATURE_DIM);
    for ch in 0..3 {
        let source = if img.channels() == 1 { 0 } else { ch };
        let values: Vec<f64> = img.channel_values(source).collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        features.push(mean);
        features.push(var.sqrt());
        let mut hist = [0.0f64; 8];
        for &v in &values {
            // bin k covers [k/8, (k+1)/8); 1.0 lands in the last bin
            let bin = ((v * 8.0) as usize).min(7);
            hist[bin] += 1.0;
        }
        features.extend(hist.iter().map(|h| h / n));
    }
    features
}

/// Vision path: segment, featurize each region, run the encoder MLP
/// ("penultimate" features), then project into the shared space. Output
/// order is row-major region order.
pub fn encode_vision(
    img: &Image,
    grid: usize,
    encoder: &MlpParams,
    projector: &MlpParams,
) -> Result<EmbeddingSequence> {
    check_encoder_chain(encoder, projector)?;
    let regions = segment_image(img, grid)?;
    let mut seq = EmbeddingSequence::empty(projector.output_dim(), Modality::Vision);
    for region in regions.regions() {
        let feats = frame_features(region);
        let penultimate = mlp_forward(encoder, &feats)?;
        let projected = mlp_forward(projector, &penultimate)?;
        seq.push(projected)?;
    }
    Ok(seq)
}

/// Tactile path without positional encodings: one projected embedding
/// per frame in temporal order. Exposed so order-sensitivity can be
/// isolated to the positional term.
pub fn encode_tactile_raw(
    clip: &TactileClip,
    encoder: &MlpParams,
    projector: &MlpParams,
) -> Result<EmbeddingSequence> {
    if clip.is_empty() {
        return Err(CoreError::Input("cannot encode an empty tactile clip".into()));
    }
    check_encoder_chain(encoder, projector)?;
    let mut seq = EmbeddingSequence::empty(projector.output_dim(), Modality::Tactile);
    for frame in clip.frames() {
        let feats = frame_features(frame);
        let penultimate = mlp_forward(encoder, &feats)?;
        seq.push(mlp_forward(projector, &penultimate)?)?;
    }
    Ok(seq)
}

/// Tactile path: projected per-frame embeddings plus the sinusoidal
/// positional encoding row for each frame's position.
pub fn encode_tactile(
    clip: &TactileClip,
    encoder: &MlpParams,
    projector: &MlpParams,
) -> Result<EmbeddingSequence> {
    let raw = encode_tactile_raw(clip, encoder, projector)?;
    let pe = sinusoidal_pe(raw.len(), raw.dim())?;
    let mut seq = EmbeddingSequence::empty(raw.dim(), Modality::Tactile);
    for (pos, v) in raw.vectors().iter().enumerate() {
        let stamped: Vec<f64> = v.iter().zip(pe.row(pos)).map(|(a, b)| a + b).collect();
        seq.push(stamped)?;
    }
    Ok(seq)
}

fn check_encoder_chain(encoder: &MlpParams, projector: &MlpParams) -> Result<()> {
    if encoder.input_dim() != FEATURE_DIM {
        return Err(CoreError::Shape(format!(
            "encoder in-dim {} does not match feature dim {FEATURE_DIM}",
            encoder.input_dim()
        )));
    }
    if encoder.output_dim() != projector.input_dim() {
        return Err(CoreError::Shape(format!(
            "encoder out-dim {} does not chain into projector in-dim {}",
            encoder.output_dim(),
            projector.input_dim()
        )));
    }
    Ok(())
}

/// Boundary token names, in sequence order.
pub const BOUNDARY_TOKEN_NAMES: [&str; 4] = ["img_start", "img_end", "tact_start", "tact_end"];

/// Build frozen boundary tokens by arithmetic averaging of descriptive
/// phrase embeddings, one phrase list per token name. All four names in
/// [`BOUNDARY_TOKEN_NAMES`] must be present.
pub fn init_boundary_tokens(
    phrase_embeddings: &BTreeMap<String, Vec<Vec<f64>>>,
) -> Result<BoundaryTokens> {
    let mut means: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut dim: Option<usize> = None;
    for name in BOUNDARY_TOKEN_NAMES {
        let phrases = phrase_embeddings
            .get(name)
            .ok_or_else(|| CoreError::Config(format!("missing phrase list for token '{name}'")))?;
        if phrases.is_empty() {
            return Err(CoreError::Config(format!("empty phrase list for token '{name}'")));
        }
        let d = phrases[0].len();
        match dim {
            None => dim = Some(d),
            Some(existing) if existing != d => {
                return Err(CoreError::Shape(format!(
                    "phrase embeddings for '{name}' have dim {d}, expected {existing}"
                )))
            }
            _ => {}
        }
        let mut mean = vec![0.0; d];
        for p in phrases {
            if p.len() != d {
                return Err(CoreError::Shape(format!(
                    "mixed phrase embedding dims for token '{name}'"
                )));
            }
            for (m, v) in mean.iter_mut().zip(p) {
                *m += v;
            }
        }
        let inv = 1.0 / phrases.len() as f64;
        for m in mean.iter_mut() {
            *m *= inv;
        }
        means.insert(name, mean);
    }
    BoundaryTokens::new(
        means.remove("img_start").unwrap(),
        means.remove("img_end").unwrap(),
        means.remove("tact_start").unwrap(),
        means.remove("tact_end").unwrap(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    fn checker_image(w: usize, h: usize) -> Image {
        let pixels = (0..h)
            .flat_map(|y| (0..w).map(move |x| ((x + y) % 2) as f64))
            .collect();
        Image::new(w, h, 1, pixels).unwrap()
    }

    fn gradient_image(w: usize, h: usize) -> Image {
        let pixels = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x + y) as f64 / (w + h) as f64))
            .collect();
        Image::new(w, h, 1, pixels).unwrap()
    }

    fn toy_encoders(seed: u64, d: usize) -> (MlpParams, MlpParams) {
        let mut rng = SeededRng::new(seed);
        let encoder = MlpParams::seeded(&mut rng, &[FEATURE_DIM, 24, 20], 0.08).unwrap();
        let projector = MlpParams::seeded(&mut rng, &[20, d], 0.08).unwrap();
        (encoder, projector)
    }

    #[test]
    fn segment_exact_division() {
        let grid = segment_image(&checker_image(64, 64), 4).unwrap();
        assert_eq!(grid.regions().len(), 16);
        for r in grid.regions() {
            assert_eq!((r.width(), r.height()), (16, 16));
        }
    }

    #[test]
    fn segment_remainder_goes_to_last_row_and_column() {
        let grid = segment_image(&checker_image(65, 65), 4).unwrap();
        assert_eq!(grid.regions().len(), 16);
        // row-major: region (r, c) at index r*4 + c
        for r in 0..4 {
            for c in 0..4 {
                let region = &grid.regions()[r * 4 + c];
                let want_w = if c == 3 { 17 } else { 16 };
                let want_h = if r == 3 { 17 } else { 16 };
                assert_eq!((region.width(), region.height()), (want_w, want_h));
            }
        }
    }

    #[test]
    fn segment_single_region_is_input() {
        let img = gradient_image(8, 6);
        let grid = segment_image(&img, 1).unwrap();
        assert_eq!(grid.regions().len(), 1);
        assert_eq!(grid.regions()[0], img);
    }

    #[test]
    fn segment_oversized_grid_rejected() {
        assert!(matches!(
            segment_image(&checker_image(4, 4), 5),
            Err(CoreError::Config(_))
        ));
    }

    #[test]
    fn vision_shape_and_determinism() {
        let img = gradient_image(64, 64);
        let (enc, proj) = toy_encoders(42, 32);
        let a = encode_vision(&img, 4, &enc, &proj).unwrap();
        let b = encode_vision(&img, 4, &enc, &proj).unwrap();
        assert_eq!(a.len(), 16);
        assert_eq!(a.dim(), 32);
        assert_eq!(a.vectors(), b.vectors());
    }

    // Independent straight-line oracle: pool stats -> MLP -> MLP written
    // out with no reuse of segment_image/encode_vision internals.
    #[test]
    fn vision_matches_straight_line_oracle() {
        let img = gradient_image(16, 16);
        let (enc, proj) = toy_encoders(7, 8);
        let got = encode_vision(&img, 2, &enc, &proj).unwrap();

        // oracle: region (0,0) is rows 0..8, cols 0..8
        let mut vals = Vec::new();
        for y in 0..8 {
            for x in 0..8 {
                vals.push((x + y) as f64 / 32.0);
            }
        }
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let std = (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        let mut hist = [0.0f64; 8];
        for &v in &vals {
            hist[((v * 8.0) as usize).min(7)] += 1.0 / n;
        }
        let mut feats = Vec::new();
        for _ in 0..3 {
            feats.push(mean);
            feats.push(std);
            feats.extend_from_slice(&hist);
        }
        let penultimate = mlp_forward(&enc, &feats).unwrap();
        let projected = mlp_forward(&proj, &penultimate).unwrap();
        for (g, w) in got.vectors()[0].iter().zip(&projected) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn tactile_shape_and_pe_row_zero() {
        let clip = TactileClip::synthetic(20.0, 24, 8, 8, "gel-0").unwrap();
        let (enc, proj) = toy_encoders(3, 32);
        let with_pe = encode_tactile(&clip, &enc, &proj).unwrap();
        let raw = encode_tactile_raw(&clip, &enc, &proj).unwrap();
        assert_eq!(with_pe.len(), 24);
        assert_eq!(with_pe.dim(), 32);
        // frame 0 carries PE row 0 = [0, 1, 0, 1, ...]
        for (i, (a, b)) in with_pe.vectors()[0].iter().zip(&raw.vectors()[0]).enumerate() {
            let want = if i % 2 == 0 { 0.0 } else { 1.0 };
            assert!((a - b - want).abs() < 1e-12);
        }
    }

    #[test]
    fn tactile_order_matters_with_pe_only() {
        let frame_a = checker_image(8, 8);
        let frame_b = gradient_image(8, 8);
        let fwd = TactileClip::new(
            vec![frame_a.clone(), frame_b.clone()],
            vec![0, 50],
            "gel-0".into(),
        )
        .unwrap();
        let rev = TactileClip::new(vec![frame_b, frame_a], vec![0, 50], "gel-0".into()).unwrap();
        let (enc, proj) = toy_encoders(5, 16);

        let f = encode_tactile(&fwd, &enc, &proj).unwrap();
        let r = encode_tactile(&rev, &enc, &proj).unwrap();
        assert_ne!(f.vectors(), r.vectors(), "positions must distinguish order");

        // without PE the swapped clip yields the same multiset
        let f_raw = encode_tactile_raw(&fwd, &enc, &proj).unwrap();
        let r_raw = encode_tactile_raw(&rev, &enc, &proj).unwrap();
        let mut fs = f_raw.vectors().to_vec();
        let mut rs = r_raw.vectors().to_vec();
        let key = |v: &Vec<f64>| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        fs.sort_by_key(key);
        rs.sort_by_key(key);
        assert_eq!(fs, rs);
    }

    #[test]
    fn empty_clip_rejected() {
        let (enc, proj) = toy_encoders(5, 16);
        let clip = TactileClip::new(vec![], vec![], "gel-0".into()).unwrap();
        assert!(matches!(
            encode_tactile(&clip, &enc, &proj),
            Err(CoreError::Input(_))
        ));
    }

    #[test]
    fn boundary_token_averaging() {
        let mut phrases = BTreeMap::new();
        phrases.insert("img_start".to_string(), vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        phrases.insert("img_end".to_string(), vec![vec![2.0, 2.0]]);
        phrases.insert("tact_start".to_string(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        phrases.insert("tact_end".to_string(), vec![vec![0.5, 0.5]]);
        let tokens = init_boundary_tokens(&phrases).unwrap();
        // mean of three phrases, derived by hand
        assert_eq!(tokens.img_start(), &[2.0 / 3.0, 2.0 / 3.0]);
        // singleton mean is the phrase itself
        assert_eq!(tokens.img_end(), &[2.0, 2.0]);
        // symmetric pair cancels
        assert_eq!(tokens.tact_start(), &[0.0, 0.0]);
        assert!(tokens.frozen());
    }

    #[test]
    fn boundary_tokens_reject_empty_and_mixed_dims() {
        let mut phrases = BTreeMap::new();
        for name in BOUNDARY_TOKEN_NAMES {
            phrases.insert(name.to_string(), vec![vec![1.0, 2.0]]);
        }
        phrases.insert("img_start".to_string(), vec![]);
        assert!(matches!(
            init_boundary_tokens(&phrases),
            Err(CoreError::Config(_))
        ));

        phrases.insert("img_start".to_string(), vec![vec![1.0, 2.0, 3.0]]);
        assert!(matches!(
            init_boundary_tokens(&phrases),
            Err(CoreError::Shape(_))
        ));
    }

    #[test]
    fn vision_length_is_grid_squared() {
        let img = gradient_image(32, 32);
        let (enc, proj) = toy_encoders(1, 16);
        for g in 1..=8 {
            let seq = encode_vision(&img, g, &enc, &proj).unwrap();
            assert_eq!(seq.len(), g * g);
            assert!(seq.vectors().iter().all(|v| v.iter().all(|x| x.is_finite())));
        }
    }
}
