//! Text tokenization, token embedding, and assembly of the unified
//! multimodal input sequence: projected vision and tactile spans are
//! bracketed by boundary markers and concatenated with embedded text
//! into one channel-wise sequence.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::encoders::{init_boundary_tokens, BoundaryTokens, EmbeddingSequence, Modality};
use crate::error::{CoreError, Result};
use crate::numerics::Matrix;

/// Base byte vocabulary.
pub const BYTE_VOCAB: usize = 256;
/// End-of-sequence token id reserved above the byte range.
pub const EOS_TOKEN: u32 = 256;
/// Padding token id (reserved; never emitted by the tokenizer).
pub const PAD_TOKEN: u32 = 257;
/// Full vocabulary size: bytes plus reserved specials.
pub const VOCAB_SIZE: usize = 258;

/// Ordered token ids, all below [`VOCAB_SIZE`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    ids: Vec<u32>,
}

impl TokenSequence {
    pub fn new(ids: Vec<u32>) -> Result<Self> {
        if let Some(bad) = ids.iter().find(|&&id| id as usize >= VOCAB_SIZE) {
            return Err(CoreError::Range(format!(
                "token id {bad} outside vocabulary of size {VOCAB_SIZE}"
            )));
        }
        Ok(Self { ids })
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Byte-level tokenizer: one id per UTF-8 byte. No out-of-vocabulary
/// cases, exact round trip.
pub fn tokenize_text(s: &str) -> TokenSequence {
    TokenSequence { ids: s.bytes().map(u32::from).collect() }
}

/// Inverse of [`tokenize_text`]. Reserved special ids are skipped; the
/// remaining bytes must form valid UTF-8.
pub fn detokenize(tokens: &TokenSequence) -> Result<String> {
    let bytes: Vec<u8> = tokens
        .ids
        .iter()
        .filter(|&&id| (id as usize) < BYTE_VOCAB)
        .map(|&id| id as u8)
        .collect();
    String::from_utf8(bytes).map_err(|e| CoreError::Parse(format!("detokenize: invalid UTF-8: {e}")))
}

/// Lossy byte decoding for generated token streams (replacement
/// character on invalid UTF-8). Deterministic.
pub fn detokenize_lossy(ids: &[u32]) -> String {
    let bytes: Vec<u8> = ids
        .iter()
        .filter(|&&id| (id as usize) < BYTE_VOCAB)
        .map(|&id| id as u8)
        .collect();
    String::from_utf8_lossy(&bytes).into_owned()
}

/// Look up each token id in a V x d embedding table.
pub fn embed_tokens(tokens: &TokenSequence, table: &Matrix) -> Result<EmbeddingSequence> {
    let mut seq = EmbeddingSequence::empty(table.cols(), Modality::Text);
    for &id in &tokens.ids {
        if id as usize >= table.rows() {
            return Err(CoreError::Range(format!(
                "token id {id} outside embedding table with {} rows",
                table.rows()
            )));
        }
        seq.push(table.row(id as usize).to_vec())?;
    }
    Ok(seq)
}

/// Segment kinds a layout may place. `TextPrefix` consumes the first
/// `text_split` text embeddings, `TextSuffix` the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    TextPrefix,
    Vision,
    Tactile,
    TextSuffix,
}

/// Ordered placement of the text, vision, and tactile spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    segments: Vec<Segment>,
    text_split: usize,
}

impl Layout {
    /// Validates that vision and tactile appear exactly once and that
    /// at least one text segment is present (each at most once).
    pub fn new(segments: Vec<Segment>, text_split: usize) -> Result<Self> {
        let count = |s: Segment| segments.iter().filter(|&&x| x == s).count();
        for (seg, name) in [(Segment::Vision, "vision"), (Segment::Tactile, "tactile")] {
            match count(seg) {
                1 => {}
                0 => return Err(CoreError::Config(format!("layout omits the {name} span"))),
                n => {
                    return Err(CoreError::Config(format!(
                        "layout places the {name} span {n} times"
                    )))
                }
            }
        }
        let prefixes = count(Segment::TextPrefix);
        let suffixes = count(Segment::TextSuffix);
        if prefixes > 1 || suffixes > 1 {
            return Err(CoreError::Config("layout duplicates a text segment".into()));
        }
        if prefixes + suffixes == 0 {
            return Err(CoreError::Config("layout omits the text span".into()));
        }
        Ok(Self { segments, text_split })
    }

    /// Default: text prefix, vision span, tactile span, text suffix
    /// (vision before tactile before the question).
    pub fn default_with_split(text_split: usize) -> Self {
        Self {
            segments: vec![
                Segment::TextPrefix,
                Segment::Vision,
                Segment::Tactile,
                Segment::TextSuffix,
            ],
            text_split,
        }
    }

    /// All media first, all text after: `[F_o ; F_t ; F_l]`.
    pub fn media_first() -> Self {
        Self {
            segments: vec![Segment::Vision, Segment::Tactile, Segment::TextSuffix],
            text_split: 0,
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn text_split(&self) -> usize {
        self.text_split
    }
}

/// Role of one slot in the assembled sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemTag {
    Text,
    ImgMarker,
    Vision,
    TactMarker,
    Tactile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceItem {
    pub tag: ItemTag,
    pub vector: Vec<f64>,
}

/// The model-ready multimodal sequence: embedded text interleaved with
/// exactly one marker-bracketed vision span and one tactile span.
#[derive(Debug, Clone, PartialEq)]
pub struct MultimodalSequence {
    dim: usize,
    items: Vec<SequenceItem>,
}

impl MultimodalSequence {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn items(&self) -> &[SequenceItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn tags(&self) -> Vec<ItemTag> {
        self.items.iter().map(|i| i.tag).collect()
    }
}

/// Concatenate text, vision, and tactile embeddings into one sequence
/// following `layout`, bracketing each media span with its boundary
/// markers. Total length is `|text| + |vision| + |tactile| + 4`.
pub fn assemble_sequence(
    text: &EmbeddingSequence,
    vision: &EmbeddingSequence,
    tactile: &EmbeddingSequence,
    boundary: &BoundaryTokens,
    layout: &Layout,
) -> Result<MultimodalSequence> {
    let d = boundary.dim();
    for (name, seq) in [("text", text), ("vision", vision), ("tactile", tactile)] {
        if !seq.is_empty() && seq.dim() != d {
            return Err(CoreError::Shape(format!(
                "{name} span dim {} does not match boundary token dim {d}",
                seq.dim()
            )));
        }
    }
    let split = layout.text_split();
    let has_prefix = layout.segments().contains(&Segment::TextPrefix);
    let has_suffix = layout.segments().contains(&Segment::TextSuffix);
    if split > text.len() {
        return Err(CoreError::Config(format!(
            "text split {split} exceeds text length {}",
            text.len()
        )));
    }
    if !has_prefix && split != 0 {
        return Err(CoreError::Config("text split without a text_prefix segment".into()));
    }
    if !has_suffix && split != text.len() {
        return Err(CoreError::Config(
            "layout has no text_suffix but the split leaves text unplaced".into(),
        ));
    }

    let mut items = Vec::with_capacity(text.len() + vision.len() + tactile.len() + 4);
    for seg in layout.segments() {
        match seg {
            Segment::TextPrefix => {
                for v in &text.vectors()[..split] {
                    items.push(SequenceItem { tag: ItemTag::Text, vector: v.clone() });
                }
            }
            Segment::TextSuffix => {
                for v in &text.vectors()[split..] {
                    items.push(SequenceItem { tag: ItemTag::Text, vector: v.clone() });
                }
            }
            Segment::Vision => {
                items.push(SequenceItem { tag: ItemTag::ImgMarker, vector: boundary.img_start().to_vec() });
                for v in vision.vectors() {
                    items.push(SequenceItem { tag: ItemTag::Vision, vector: v.clone() });
                }
                items.push(SequenceItem { tag: ItemTag::ImgMarker, vector: boundary.img_end().to_vec() });
            }
            Segment::Tactile => {
                items.push(SequenceItem { tag: ItemTag::TactMarker, vector: boundary.tact_start().to_vec() });
                for v in tactile.vectors() {
                    items.push(SequenceItem { tag: ItemTag::Tactile, vector: v.clone() });
                }
                items.push(SequenceItem { tag: ItemTag::TactMarker, vector: boundary.tact_end().to_vec() });
            }
        }
    }
    Ok(MultimodalSequence { dim: d, items })
}

/// Descriptive phrases averaged into each boundary token. The wording
/// is a fixture: any short phrases describing the span boundaries work,
/// what matters is that the averages are fixed and frozen.
pub const BOUNDARY_PHRASES: [(&str, [&str; 3]); 4] = [
    ("img_start", [
        "the object photograph begins here",
        "start of visual observation",
        "opening of the camera view",
    ]),
    ("img_end", [
        "the object photograph ends here",
        "end of visual observation",
        "closing of the camera view",
    ]),
    ("tact_start", [
        "the touch recording begins here",
        "start of tactile contact readings",
        "opening of the sensor sequence",
    ]),
    ("tact_end", [
        "the touch recording ends here",
        "end of tactile contact readings",
        "closing of the sensor sequence",
    ]),
];

/// Build the default frozen boundary tokens from [`BOUNDARY_PHRASES`]:
/// each phrase is tokenized, embedded through `table`, and mean-pooled;
/// the phrase means are then averaged per token.
pub fn default_boundary_tokens(table: &Matrix) -> Result<BoundaryTokens> {
    let mut phrase_embeddings: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for (name, phrases) in BOUNDARY_PHRASES {
        let mut embedded = Vec::with_capacity(phrases.len());
        for phrase in phrases {
            let tokens = tokenize_text(phrase);
            let seq = embed_tokens(&tokens, table)?;
            let mut mean = vec![0.0; table.cols()];
            for v in seq.vectors() {
                for (m, x) in mean.iter_mut().zip(v) {
                    *m += x;
                }
            }
            let inv = 1.0 / seq.len() as f64;
            for m in mean.iter_mut() {
                *m *= inv;
            }
            embedded.push(mean);
        }
        phrase_embeddings.insert(name.to_string(), embedded);
    }
    init_boundary_tokens(&phrase_embeddings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{seeded_init, SeededRng};

    fn seq_of(n: usize, d: usize, fill: f64, modality: Modality) -> EmbeddingSequence {
        EmbeddingSequence::from_vectors(d, modality, (0..n).map(|i| {
            let mut v = vec![fill; d];
            v[0] += i as f64;
            v
        }).collect())
        .unwrap()
    }

    fn toy_boundary(d: usize) -> BoundaryTokens {
        BoundaryTokens::new(vec![9.0; d], vec![8.0; d], vec![7.0; d], vec![6.0; d]).unwrap()
    }

    #[test]
    fn tokenize_empty_and_ascii() {
        assert!(tokenize_text("").ids().is_empty());
        assert_eq!(tokenize_text("ab").ids(), &[97, 98]);
    }

    #[test]
    fn tokenize_round_trips_utf8() {
        for s in ["", "hello", "Grüße 🦀", "tab\tnewline\n"] {
            assert_eq!(detokenize(&tokenize_text(s)).unwrap(), s);
        }
    }

    #[test]
    fn embed_empty_and_lookup() {
        let table = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
        let empty = embed_tokens(&TokenSequence::new(vec![]).unwrap(), &table).unwrap();
        assert!(empty.is_empty());

        let seq = embed_tokens(&TokenSequence::new(vec![2, 0, 2]).unwrap(), &table).unwrap();
        assert_eq!(seq.vectors()[0], vec![0.5, 0.5]);
        assert_eq!(seq.vectors()[1], vec![1.0, 0.0]);
        // repeated id, identical vector
        assert_eq!(seq.vectors()[0], seq.vectors()[2]);
    }

    #[test]
    fn embed_rejects_out_of_table_id() {
        let table = Matrix::zeros(4, 2);
        let err = embed_tokens(&TokenSequence::new(vec![4]).unwrap(), &table).unwrap_err();
        assert!(matches!(err, CoreError::Range(_)));
    }

    #[test]
    fn assembled_length_is_additive() {
        let d = 4;
        let text = seq_of(10, d, 0.1, Modality::Text);
        let vision = seq_of(16, d, 0.2, Modality::Vision);
        let tactile = seq_of(24, d, 0.3, Modality::Tactile);
        let out = assemble_sequence(
            &text,
            &vision,
            &tactile,
            &toy_boundary(d),
            &Layout::default_with_split(3),
        )
        .unwrap();
        assert_eq!(out.len(), 10 + (16 + 2) + (24 + 2));
    }

    #[test]
    fn empty_vision_span_keeps_markers() {
        let d = 4;
        let text = seq_of(5, d, 0.1, Modality::Text);
        let vision = EmbeddingSequence::empty(d, Modality::Vision);
        let tactile = seq_of(3, d, 0.3, Modality::Tactile);
        let out = assemble_sequence(
            &text,
            &vision,
            &tactile,
            &toy_boundary(d),
            &Layout::default_with_split(0),
        )
        .unwrap();
        assert_eq!(out.len(), 5 + 2 + (3 + 2));
        let tags = out.tags();
        assert_eq!(tags.iter().filter(|t| **t == ItemTag::ImgMarker).count(), 2);
    }

    #[test]
    fn default_layout_tag_pattern() {
        let d = 2;
        let text = seq_of(4, d, 0.1, Modality::Text);
        let vision = seq_of(2, d, 0.2, Modality::Vision);
        let tactile = seq_of(3, d, 0.3, Modality::Tactile);
        let out = assemble_sequence(
            &text,
            &vision,
            &tactile,
            &toy_boundary(d),
            &Layout::default_with_split(1),
        )
        .unwrap();
        use ItemTag::*;
        let want = vec![
            Text, ImgMarker, Vision, Vision, ImgMarker, TactMarker, Tactile, Tactile, Tactile,
            TactMarker, Text, Text, Text,
        ];
        assert_eq!(out.tags(), want);
    }

    #[test]
    fn dim_mismatch_is_shape_error() {
        let text = seq_of(2, 3, 0.1, Modality::Text);
        let vision = seq_of(2, 4, 0.2, Modality::Vision);
        let tactile = seq_of(2, 4, 0.3, Modality::Tactile);
        let err = assemble_sequence(
            &text,
            &vision,
            &tactile,
            &toy_boundary(4),
            &Layout::default_with_split(0),
        )
        .unwrap_err();
        assert!(matches!(err, CoreError::Shape(_)));
    }

    #[test]
    fn layout_validation_rejects_missing_or_duplicate_spans() {
        assert!(matches!(
            Layout::new(vec![Segment::Vision, Segment::TextSuffix], 0),
            Err(CoreError::Config(_))
        ));
        assert!(matches!(
            Layout::new(
                vec![Segment::Vision, Segment::Vision, Segment::Tactile, Segment::TextSuffix],
                0
            ),
            Err(CoreError::Config(_))
        ));
        assert!(matches!(
            Layout::new(vec![Segment::Vision, Segment::Tactile], 0),
            Err(CoreError::Config(_))
        ));
    }

    #[test]
    fn assembly_is_pure_rearrangement() {
        let d = 3;
        let text = seq_of(5, d, 0.1, Modality::Text);
        let vision = seq_of(4, d, 0.2, Modality::Vision);
        let tactile = seq_of(2, d, 0.3, Modality::Tactile);
        let out = assemble_sequence(
            &text,
            &vision,
            &tactile,
            &toy_boundary(d),
            &Layout::default_with_split(2),
        )
        .unwrap();
        let mut got: Vec<Vec<u64>> = out
            .items()
            .iter()
            .filter(|i| matches!(i.tag, ItemTag::Text | ItemTag::Vision | ItemTag::Tactile))
            .map(|i| i.vector.iter().map(|v| v.to_bits()).collect())
            .collect();
        let mut want: Vec<Vec<u64>> = text
            .vectors()
            .iter()
            .chain(vision.vectors())
            .chain(tactile.vectors())
            .map(|v| v.iter().map(|x| x.to_bits()).collect())
            .collect();
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn default_boundary_tokens_are_deterministic() {
        let table = seeded_init(&mut SeededRng::new(17), VOCAB_SIZE, 8, 0.08).unwrap();
        let a = default_boundary_tokens(&table).unwrap();
        let b = default_boundary_tokens(&table).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim(), 8);
        assert!(a.frozen());
    }
}
