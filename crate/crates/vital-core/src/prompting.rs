//! Structured property-scoring prompts and response parsing.
//!
//! The prompt walks the model through two phases — visual object
//! identification, then combined material-tactile property evaluation —
//! renders the three 10-point rating scales, and pins a machine
//! parseable answer contract. The parser inverts that contract, either
//! strictly (fixtures, tests) or leniently (real services drift; every
//! deviation is recorded as a warning so runs can report format
//! compliance).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CoreError, Result};

/// The three rated physical properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Hardness,
    Elasticity,
    Roughness,
}

impl Property {
    pub const ALL: [Property; 3] = [Property::Hardness, Property::Elasticity, Property::Roughness];

    pub fn as_str(&self) -> &'static str {
        match self {
            Property::Hardness => "hardness",
            Property::Elasticity => "elasticity",
            Property::Roughness => "roughness",
        }
    }

    fn contract_key(&self) -> &'static str {
        match self {
            Property::Hardness => "HARDNESS",
            Property::Elasticity => "ELASTICITY",
            Property::Roughness => "ROUGHNESS",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One band of a rating scale: scores `lo..=hi` share a
/// characterization and example materials.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleBand {
    pub lo: u8,
    pub hi: u8,
    pub characterization: String,
    pub examples: String,
}

/// A 10-point scale split into five labeled bands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingScale {
    pub property: Property,
    pub bands: Vec<ScaleBand>,
}

impl RatingScale {
    pub fn validate(&self) -> Result<()> {
        let expected = [(1, 2), (3, 4), (5, 6), (7, 8), (9, 10)];
        if self.bands.len() != 5 {
            return Err(CoreError::Config(format!(
                "{} scale has {} bands, expected 5",
                self.property,
                self.bands.len()
            )));
        }
        for (band, (lo, hi)) in self.bands.iter().zip(expected) {
            if (band.lo, band.hi) != (lo, hi) {
                return Err(CoreError::Config(format!(
                    "{} scale band [{}, {}] does not partition 1..10 as [{lo}, {hi}]",
                    self.property, band.lo, band.hi
                )));
            }
            if band.characterization.is_empty() {
                return Err(CoreError::Config(format!(
                    "{} scale band [{lo}, {hi}] has an empty characterization",
                    self.property
                )));
            }
        }
        Ok(())
    }

    /// Characterization of the band containing `score`.
    pub fn lookup(&self, score: u8) -> Result<&str> {
        if !(1..=10).contains(&score) {
            return Err(CoreError::Range(format!(
                "score {score} outside the 1..10 rating range"
            )));
        }
        let band = &self.bands[usize::from((score - 1) / 2)];
        Ok(&band.characterization)
    }
}

fn band(lo: u8, hi: u8, characterization: &str, examples: &str) -> ScaleBand {
    ScaleBand {
        lo,
        hi,
        characterization: characterization.to_string(),
        examples: examples.to_string(),
    }
}

/// The canonical three rating scales.
pub fn default_scales() -> Vec<RatingScale> {
    vec![
        RatingScale {
            property: Property::Hardness,
            bands: vec![
                band(1, 2, "Extremely soft", "Cotton, sponge"),
                band(3, 4, "Soft", "Rubber ball, soft plastic toy"),
                band(5, 6, "Medium", "Plastic container, shoe sole"),
                band(7, 8, "Hard", "Wood, ceramic plate"),
                band(9, 10, "Extremely hard", "Metal, diamond"),
            ],
        },
        RatingScale {
            property: Property::Elasticity,
            bands: vec![
                band(1, 2, "Minimal elasticity", "Clay, dry sponge, wooden ruler"),
                band(3, 4, "Low elasticity", "Rubber eraser, hard plastic, book cover"),
                band(5, 6, "Medium elasticity", "Foam ball, silicone, thick rubber mat"),
                band(7, 8, "High elasticity", "Rubber band, bouncy ball, yoga mat"),
                band(9, 10, "Maximum elasticity", "Trampoline surface, latex sheet, inflated balloon"),
            ],
        },
        RatingScale {
            property: Property::Roughness,
            bands: vec![
                band(1, 2, "Extremely smooth", "Glass, polished marble"),
                band(3, 4, "Smooth", "Plastic surface, ceramic mug"),
                band(5, 6, "Medium texture", "Paper, leather, cardboard"),
                band(7, 8, "Rough", "Sandpaper, concrete, bark of a tree"),
                band(9, 10, "Extremely rough", "Gravel, coarse fabric, pumice stone"),
            ],
        },
    ]
}

/// Band characterization for a property and score on the canonical
/// scales.
pub fn scale_lookup(property: Property, score: u8) -> Result<String> {
    let scales = default_scales();
    let scale = scales
        .iter()
        .find(|s| s.property == property)
        .expect("default scales cover every property");
    scale.lookup(score).map(str::to_string)
}

/// The exact answer line format models must produce.
pub const OUTPUT_CONTRACT: &str = "OBJECT: <name>\nMATERIAL: <material>\nHARDNESS: <1-10> | <rationale>\nELASTICITY: <1-10> | <rationale>\nROUGHNESS: <1-10> | <rationale>";

/// Versioned identifier of the shipped default prompt wording.
pub const PROMPT_FIXTURE_VERSION: &str = "vital-prompt-v1";

/// Everything needed to render the two-phase scoring prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub phase1_instructions: String,
    pub phase2_instructions: String,
    pub scales: Vec<RatingScale>,
    pub constraints: Vec<String>,
    pub output_contract: String,
}

impl Default for PromptSpec {
    fn default() -> Self {
        Self {
            phase1_instructions: "Phase 1 - Visual identification: from the object photograph, \
                 identify the object. Describe its color, shape, and visible surface texture, \
                 and name the material it appears to be made of."
                .to_string(),
            phase2_instructions: "Phase 2 - Material and tactile property evaluation: combine \
                 the identified material with the tactile contact sequence. Rate hardness, \
                 elasticity, and roughness on the 10-point scales below, grounding each rating \
                 in how that material behaves under contact."
                .to_string(),
            scales: default_scales(),
            constraints: vec![
                "Reason about the specific material you identified, not the object category."
                    .to_string(),
                "Spread ratings across the whole scale when objects genuinely differ; do not \
                 default to the middle bands."
                    .to_string(),
                "Avoid generic answers: each rationale must cite a concrete visual or tactile \
                 cue."
                    .to_string(),
                "Respond with exactly the five answer lines, nothing before or after them."
                    .to_string(),
            ],
            output_contract: OUTPUT_CONTRACT.to_string(),
        }
    }
}

impl PromptSpec {
    pub fn validate(&self) -> Result<()> {
        if self.scales.len() != 3 {
            return Err(CoreError::Config(format!(
                "prompt spec has {} scales, expected one per property",
                self.scales.len()
            )));
        }
        for property in Property::ALL {
            if !self.scales.iter().any(|s| s.property == property) {
                return Err(CoreError::Config(format!("prompt spec missing the {property} scale")));
            }
        }
        for scale in &self.scales {
            scale.validate()?;
        }
        for key in ["OBJECT:", "MATERIAL:", "HARDNESS:", "ELASTICITY:", "ROUGHNESS:"] {
            if !self.output_contract.contains(key) {
                return Err(CoreError::Config(format!(
                    "output contract does not define the {key} line"
                )));
            }
        }
        Ok(())
    }
}

/// Render the full prompt: phase 1, phase 2, the three scale tables,
/// the constraints, and the output contract verbatim.
pub fn build_prompt(spec: &PromptSpec, object_hint: Option<&str>) -> Result<String> {
    spec.validate()?;
    let mut out = String::new();
    out.push_str("You are rating the physical properties of one object from its photograph and a sequence of tactile sensor frames recorded while touching it.\n\n");
    out.push_str(&spec.phase1_instructions);
    out.push_str("\n\n");
    out.push_str(&spec.phase2_instructions);
    out.push_str("\n\nRating scales:\n");
    for property in Property::ALL {
        let scale = spec
            .scales
            .iter()
            .find(|s| s.property == property)
            .expect("validated above");
        out.push_str(&format!("\n{}:\n", capitalize(property.as_str())));
        for b in &scale.bands {
            out.push_str(&format!(
                "  {}-{}: {} (e.g. {})\n",
                b.lo, b.hi, b.characterization, b.examples
            ));
        }
    }
    out.push_str("\nConstraints:\n");
    for c in &spec.constraints {
        out.push_str(&format!("- {c}\n"));
    }
    if let Some(hint) = object_hint {
        out.push_str(&format!("\nHint: the object may be {hint}.\n"));
    }
    out.push_str("\nAnswer in exactly this format:\n");
    out.push_str(&spec.output_contract);
    out.push('\n');
    Ok(out)
}

/// SHA-256 checksum (hex) of the rendered default prompt; pins the
/// prompt fixture so wording changes are deliberate.
pub fn prompt_sha256(spec: &PromptSpec, object_hint: Option<&str>) -> Result<String> {
    let rendered = build_prompt(spec, object_hint)?;
    let digest = Sha256::digest(rendered.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Integer Likert scores with rationales for one object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyScores {
    pub object_name: String,
    pub material: String,
    pub hardness: u8,
    pub elasticity: u8,
    pub roughness: u8,
    pub rationales: BTreeMap<Property, String>,
}

impl PropertyScores {
    pub fn new(
        object_name: String,
        material: String,
        hardness: u8,
        elasticity: u8,
        roughness: u8,
        rationales: BTreeMap<Property, String>,
    ) -> Result<Self> {
        if object_name.trim().is_empty() {
            return Err(CoreError::Input("object name must be nonempty".into()));
        }
        for (name, score) in [("hardness", hardness), ("elasticity", elasticity), ("roughness", roughness)] {
            if !(1..=10).contains(&score) {
                return Err(CoreError::Range(format!(
                    "{name} score {score} outside the 1..10 rating range"
                )));
            }
        }
        Ok(Self { object_name, material, hardness, elasticity, roughness, rationales })
    }

    pub fn score(&self, property: Property) -> u8 {
        match property {
            Property::Hardness => self.hardness,
            Property::Elasticity => self.elasticity,
            Property::Roughness => self.roughness,
        }
    }

    pub fn rationale(&self, property: Property) -> &str {
        self.rationales.get(&property).map(String::as_str).unwrap_or("")
    }

    /// Render the five contract lines for these scores (the exact text
    /// a perfectly compliant model would produce).
    pub fn render_contract(&self) -> String {
        format!(
            "OBJECT: {}\nMATERIAL: {}\nHARDNESS: {} | {}\nELASTICITY: {} | {}\nROUGHNESS: {} | {}",
            self.object_name,
            self.material,
            self.hardness,
            self.rationale(Property::Hardness),
            self.elasticity,
            self.rationale(Property::Elasticity),
            self.roughness,
            self.rationale(Property::Roughness),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    Strict,
    Lenient,
}

/// Parsed scores plus any format deviations observed on the way.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedResponse {
    pub scores: PropertyScores,
    pub mode: ParseMode,
    pub warnings: Vec<String>,
}

/// Parse a model response into [`PropertyScores`].
///
/// Strict mode requires exactly the five contract lines, in order, with
/// nothing else. Lenient mode scans the whole text case-insensitively,
/// takes the first usable match per key, and records one warning per
/// deviation. Scores outside 1..=10 are rejected in both modes.
pub fn parse_response(text: &str, mode: ParseMode) -> Result<ParsedResponse> {
    match mode {
        ParseMode::Strict => parse_strict(text),
        ParseMode::Lenient => parse_lenient(text),
    }
}

const KEYS: [&str; 5] = ["OBJECT", "MATERIAL", "HARDNESS", "ELASTICITY", "ROUGHNESS"];

fn parse_strict(text: &str) -> Result<ParsedResponse> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if lines.len() > 5 {
        // name the first offending line; a repeated key is a duplicate
        let extra = lines[5];
        let dup = KEYS.iter().find(|k| extra.to_uppercase().starts_with(&format!("{}:", k)));
        return Err(match dup {
            Some(k) => CoreError::Parse(format!("duplicate {k} line in strict response")),
            None => CoreError::Parse(format!("unexpected extra line in strict response: '{extra}'")),
        });
    }

    let mut values = Vec::with_capacity(5);
    for (i, key) in KEYS.iter().enumerate() {
        let line = lines.get(i).ok_or_else(|| {
            CoreError::Parse(format!("missing {key} line in strict response"))
        })?;
        let prefix = format!("{key}:");
        let rest = line.strip_prefix(&prefix).ok_or_else(|| {
            CoreError::Parse(format!("line {} is not a valid {key} line: '{line}'", i + 1))
        })?;
        values.push(rest.trim());
    }

    let object_name = values[0].to_string();
    if object_name.is_empty() {
        return Err(CoreError::Parse("empty OBJECT name in strict response".into()));
    }
    let material = values[1].to_string();

    let mut scores = [0u8; 3];
    let mut rationales = BTreeMap::new();
    for (slot, property) in Property::ALL.iter().enumerate() {
        let raw = values[slot + 2];
        let (num, rationale) = match raw.split_once('|') {
            Some((n, r)) => (n.trim(), r.trim()),
            None => {
                return Err(CoreError::Parse(format!(
                    "{} line is missing the '|' rationale separator",
                    property.contract_key()
                )))
            }
        };
        scores[slot] = parse_score(num, property)?;
        rationales.insert(*property, rationale.to_string());
    }

    let scores = PropertyScores::new(object_name, material, scores[0], scores[1], scores[2], rationales)?;
    Ok(ParsedResponse { scores, mode: ParseMode::Strict, warnings: Vec::new() })
}

fn parse_score(raw: &str, property: &Property) -> Result<u8> {
    let value: i64 = raw.parse().map_err(|_| {
        CoreError::Parse(format!(
            "{} score '{raw}' is not an integer",
            property.contract_key()
        ))
    })?;
    if !(1..=10).contains(&value) {
        return Err(CoreError::Range(format!(
            "{} score {value} outside the 1..10 rating range",
            property.contract_key()
        )));
    }
    Ok(value as u8)
}

fn key_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)\b(object|material|hardness|elasticity|roughness)\s*:").unwrap()
    })
}

fn parse_lenient(text: &str) -> Result<ParsedResponse> {
    let mut warnings = Vec::new();

    // all key occurrences, in text order
    let matches: Vec<(usize, usize, String)> = key_regex()
        .captures_iter(text)
        .map(|c| {
            let m = c.get(0).unwrap();
            (m.start(), m.end(), c[1].to_uppercase())
        })
        .collect();

    let mut first_pos: BTreeMap<String, usize> = BTreeMap::new();
    let mut extracted: BTreeMap<String, String> = BTreeMap::new();
    for (idx, (start, end, key)) in matches.iter().enumerate() {
        if extracted.contains_key(key) {
            warnings.push(format!("duplicate {key} occurrence ignored (first match kept)"));
            continue;
        }
        // value runs to the next key occurrence or end of line
        let value_end = matches
            .get(idx + 1)
            .map(|(s, _, _)| *s)
            .unwrap_or(text.len())
            .min(text[*end..].find('\n').map(|p| end + p).unwrap_or(text.len()));
        let raw = text[*end..value_end].trim();
        let raw = raw.trim_end_matches([',', ';', '.']).trim();
        extracted.insert(key.clone(), raw.to_string());
        first_pos.insert(key.clone(), *start);
    }

    // first occurrences should follow the canonical key order
    let mut max_pos: Option<usize> = None;
    for key in KEYS {
        if let Some(&pos) = first_pos.get(key) {
            match max_pos {
                Some(mp) if pos < mp => {
                    warnings.push(format!("{key} appears out of canonical order"))
                }
                _ => max_pos = Some(pos),
            }
        }
    }

    let object_name = extracted
        .get("OBJECT")
        .filter(|v| !v.is_empty())
        .cloned()
        .ok_or_else(|| CoreError::Parse("no OBJECT name found in response".into()))?;
    let material = match extracted.get("MATERIAL") {
        Some(v) if !v.is_empty() => v.clone(),
        _ => {
            warnings.push("no MATERIAL line found".to_string());
            String::new()
        }
    };

    let mut scores = [0u8; 3];
    let mut rationales = BTreeMap::new();
    for (slot, property) in Property::ALL.iter().enumerate() {
        let key = property.contract_key();
        let raw = extracted
            .get(key)
            .ok_or_else(|| CoreError::Parse(format!("no {key} score found in response")))?;
        let (num_part, rationale) = match raw.split_once('|') {
            Some((n, r)) => (n.trim(), r.trim().to_string()),
            None => {
                warnings.push(format!("{key} line is missing the '|' rationale separator"));
                (raw.as_str(), String::new())
            }
        };
        // tolerate trailing words after the number ("7 out of 10")
        let token = num_part.split_whitespace().next().unwrap_or("");
        let cleaned: String = token
            .trim_start_matches(['(', '[', '*'])
            .trim_end_matches([')', ']', '*', '/', ','])
            .to_string();
        if cleaned != num_part {
            warnings.push(format!("{key} score embedded in extra text"));
        }
        scores[slot] = parse_score(&cleaned, property)?;
        rationales.insert(*property, rationale);
    }

    let scores = PropertyScores::new(object_name, material, scores[0], scores[1], scores[2], rationales)?;
    Ok(ParsedResponse { scores, mode: ParseMode::Lenient, warnings })
}
