//! End-to-end orchestration: manifest in, per-object audit artifacts
//! and a correlation report out.
//!
//! Per object: load image and tactile clip, sample frames, encode both
//! modalities, assemble the multimodal sequence, build the prompt,
//! generate, parse. Object failures are recorded and skipped; the run
//! only fails globally when fewer than three objects survive to the
//! join. Everything is reproducible from (manifest, config): artifacts
//! are written in manifest order and contain no wall-clock data.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::assembly::{
    assemble_sequence, default_boundary_tokens, embed_tokens, tokenize_text, Layout, VOCAB_SIZE,
};
use crate::backend::{
    Backend, ChatMessage, GenerationRequest, MessagePart, RemoteBackend, ScriptedBackend,
    ToyLmBackend, ToyLmWeights,
};
use crate::encoders::{
    encode_tactile, encode_vision, image_to_png_bytes, BoundaryTokens, EmbeddingSequence,
    Modality, FEATURE_DIM,
};
use crate::error::{CoreError, Result};
use crate::evaluation::{
    evaluate_property, render_report, CorrelationReport, EvalOptions, GroundTruthRecord,
    ReportFormat, ScoreTable,
};
use crate::numerics::{derive_seed, seeded_init, MlpParams, SeededRng};
use crate::pipeline::{load_manifest, sample_frames, ObjectManifestEntry, RunConfig};
use crate::prompting::{build_prompt, ParsedResponse, PromptSpec, Property};

/// Outcome of one object's pass through the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ObjectOutcome {
    Ok { warnings: usize },
    Failed { error: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectStatus {
    pub object_id: String,
    pub outcome: ObjectOutcome,
}

/// Written to `summary.json` for every run, even ones that end with
/// insufficient data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub dataset_id: String,
    pub model_id: String,
    pub mode: crate::prompting::ParseMode,
    pub objects: Vec<ObjectStatus>,
    pub attempted_parses: usize,
    pub warning_free_parses: usize,
    pub format_compliance: f64,
    pub effective_n: usize,
}

#[derive(Debug)]
pub struct RunOutput {
    pub report: CorrelationReport,
    pub summary: RunSummary,
    pub run_dir: PathBuf,
}

struct Components {
    vision_encoder: MlpParams,
    vision_projector: MlpParams,
    tactile_encoder: MlpParams,
    tactile_projector: MlpParams,
    boundary: BoundaryTokens,
    embed_table: crate::numerics::Matrix,
    prompt_spec: PromptSpec,
    backend: Box<dyn Backend>,
}

fn build_components(config: &RunConfig) -> Result<Components> {
    let d = config.dim;
    let penultimate = 40;
    let mut enc_rng = SeededRng::new(derive_seed(config.seed, "vision-encoder"));
    let vision_encoder = MlpParams::seeded(&mut enc_rng, &[FEATURE_DIM, 48, penultimate], 0.08)?;
    let vision_projector = MlpParams::seeded(&mut enc_rng, &[penultimate, d], 0.08)?;
    let mut tact_rng = SeededRng::new(derive_seed(config.seed, "tactile-encoder"));
    let tactile_encoder = MlpParams::seeded(&mut tact_rng, &[FEATURE_DIM, 48, penultimate], 0.08)?;
    let tactile_projector = MlpParams::seeded(&mut tact_rng, &[penultimate, d], 0.08)?;

    let mut table_rng = SeededRng::new(derive_seed(config.seed, "token-table"));
    let embed_table = seeded_init(&mut table_rng, VOCAB_SIZE, d, 0.08)?;
    let boundary = default_boundary_tokens(&embed_table)?;

    let backend: Box<dyn Backend> = match config.backend {
        crate::pipeline::BackendKind::Toy => {
            let weights = ToyLmWeights::seeded(derive_seed(config.seed, "toylm"), d, embed_table.clone())?;
            Box::new(ToyLmBackend::new(weights, config.seed))
        }
        crate::pipeline::BackendKind::Scripted => {
            let path = config
                .script_path
                .as_ref()
                .ok_or_else(|| CoreError::Config("scripted backend needs script_path".into()))?;
            Box::new(ScriptedBackend::from_json_file(path)?)
        }
        crate::pipeline::BackendKind::Remote => {
            let settings = config.remote.clone().unwrap_or_default();
            Box::new(RemoteBackend::new(settings.to_remote_config()?)?)
        }
    };

    Ok(Components {
        vision_encoder,
        vision_projector,
        tactile_encoder,
        tactile_projector,
        boundary,
        embed_table,
        prompt_spec: config.prompt.clone().unwrap_or_default(),
        backend,
    })
}

/// Split the prompt for the prefix/suffix layout: everything through
/// the first blank line is the preamble placed before the media spans.
fn prompt_split(prompt: &str) -> usize {
    prompt.find("\n\n").map(|i| i + 2).unwrap_or(0)
}

fn process_object(
    entry: &ObjectManifestEntry,
    base_dir: &Path,
    config: &RunConfig,
    parts: &Components,
    prompt: &str,
    layout: &Layout,
    object_dir: &Path,
) -> Result<ParsedResponse> {
    std::fs::create_dir_all(object_dir)?;
    std::fs::write(object_dir.join("prompt.txt"), prompt)?;

    let image = entry.load_object_image(base_dir)?;
    let clip = entry.load_clip(base_dir)?;
    let sampled = sample_frames(&clip, config.stride_ms)?;

    let vision = encode_vision(&image, config.grid, &parts.vision_encoder, &parts.vision_projector)?;
    let tactile = encode_tactile(&sampled, &parts.tactile_encoder, &parts.tactile_projector)?;
    let text = embed_tokens(&tokenize_text(prompt), &parts.embed_table)?;
    let sequence = assemble_sequence(&text, &vision, &tactile, &parts.boundary, layout)?;

    let request = match config.backend {
        crate::pipeline::BackendKind::Remote => {
            let mut content = vec![MessagePart::Text { text: prompt.to_string() }];
            content.push(MessagePart::Image { data: BASE64.encode(image_to_png_bytes(&image)?) });
            for frame in sampled.frames() {
                content.push(MessagePart::Image { data: BASE64.encode(image_to_png_bytes(frame)?) });
            }
            GenerationRequest::for_messages(vec![ChatMessage::user(content)], config.max_tokens, config.temperature)?
        }
        _ => GenerationRequest::for_sequence(sequence, config.max_tokens, config.temperature)?,
    }
    .with_object_id(entry.object_id.clone());

    let generated = parts.backend.generate(&request)?;
    std::fs::write(object_dir.join("response.txt"), &generated.text)?;

    let parsed = crate::prompting::parse_response(&generated.text, config.effective_mode())?;
    let json = serde_json::to_string_pretty(&parsed)
        .map_err(|e| CoreError::Validation(format!("scores json: {e}")))?;
    std::fs::write(object_dir.join("scores.json"), json)?;
    Ok(parsed)
}

/// Run the full pipeline over a manifest. Artifacts land under
/// `out_dir/<run_id>/`: per-object `prompt.txt`, `response.txt`,
/// `scores.json` (or `error.txt`), plus `summary.json` and, when
/// evaluation succeeds, `report.{txt,csv,json}`.
pub fn run_pipeline(manifest_path: &Path, config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let entries = load_manifest(manifest_path)?;
    let base_dir = manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let dataset_id = manifest_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());

    let parts = build_components(config)?;
    let prompt = build_prompt(&parts.prompt_spec, None)?;
    let layout = Layout::new(config.layout.clone(), prompt_split(&prompt))?;

    let run_id = config.effective_run_id();
    let run_dir = config.out_dir.join(&run_id);
    std::fs::create_dir_all(&run_dir)?;

    // object-level fan-out with a bounded worker pool; results are
    // collected by index so output order matches the manifest
    let results: Vec<Option<Result<ParsedResponse>>> = {
        let slots: Mutex<Vec<Option<Result<ParsedResponse>>>> =
            Mutex::new((0..entries.len()).map(|_| None).collect());
        let next = AtomicUsize::new(0);
        let workers = config.parallelism.min(entries.len()).max(1);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let idx = next.fetch_add(1, Ordering::SeqCst);
                    if idx >= entries.len() {
                        break;
                    }
                    let entry = &entries[idx];
                    let object_dir = run_dir.join(&entry.object_id);
                    let outcome = process_object(
                        entry, &base_dir, config, &parts, &prompt, &layout, &object_dir,
                    );
                    if let Err(e) = &outcome {
                        // per-object isolation: record and move on
                        let _ = std::fs::write(object_dir.join("error.txt"), format!("{e}\n"));
                    }
                    slots.lock().expect("worker panicked").get_mut(idx).map(|s| *s = Some(outcome));
                });
            }
        });
        slots.into_inner().expect("worker panicked")
    };

    let mut statuses = Vec::with_capacity(entries.len());
    let mut table = ScoreTable::new();
    let mut truth: Vec<GroundTruthRecord> = Vec::new();
    let mut attempted = 0usize;
    let mut warning_free = 0usize;
    for (entry, slot) in entries.iter().zip(results) {
        let outcome = slot.expect("every index processed");
        match outcome {
            Ok(parsed) => {
                attempted += 1;
                if parsed.warnings.is_empty() {
                    warning_free += 1;
                }
                statuses.push(ObjectStatus {
                    object_id: entry.object_id.clone(),
                    outcome: ObjectOutcome::Ok { warnings: parsed.warnings.len() },
                });
                table.push(entry.object_id.clone(), parsed.scores)?;
                truth.push(entry.ground_truth_record());
            }
            Err(e) => {
                // parse errors reached the parser; everything earlier did not
                if matches!(e, CoreError::Parse(_) | CoreError::Range(_)) {
                    attempted += 1;
                }
                statuses.push(ObjectStatus {
                    object_id: entry.object_id.clone(),
                    outcome: ObjectOutcome::Failed { error: e.to_string() },
                });
            }
        }
    }

    let compliance = if attempted == 0 {
        0.0
    } else {
        warning_free as f64 / attempted as f64
    };
    let summary = RunSummary {
        run_id: run_id.clone(),
        dataset_id: dataset_id.clone(),
        model_id: parts.backend.model_id(),
        mode: config.effective_mode(),
        objects: statuses,
        attempted_parses: attempted,
        warning_free_parses: warning_free,
        format_compliance: compliance,
        effective_n: table.len(),
    };
    let summary_json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CoreError::Validation(format!("summary json: {e}")))?;
    std::fs::write(run_dir.join("summary.json"), summary_json)?;

    if table.len() < 3 {
        return Err(CoreError::InsufficientData(format!(
            "only {} of {} objects produced scores; need >= 3",
            table.len(),
            entries.len()
        )));
    }

    let opts = EvalOptions { seed: config.seed, mc_resamples: config.mc_resamples, ..Default::default() };
    let mut results = Vec::with_capacity(3);
    for property in Property::ALL {
        results.push(evaluate_property(&table, &truth, property, &opts)?);
    }
    let report = CorrelationReport::new(results, dataset_id, parts.backend.model_id(), compliance)?;

    for (format, ext) in [
        (ReportFormat::Text, "txt"),
        (ReportFormat::Csv, "csv"),
        (ReportFormat::Json, "json"),
    ] {
        std::fs::write(run_dir.join(format!("report.{ext}")), render_report(&report, format)?)?;
    }

    Ok(RunOutput { report, summary, run_dir })
}

/// Validate a manifest and report raw/sampled frame counts per object
/// (the `ingest` command).
pub fn ingest_summary(manifest_path: &Path, stride_ms: i64) -> Result<Vec<(String, usize, usize)>> {
    let entries = load_manifest(manifest_path)?;
    let base_dir = manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut rows = Vec::with_capacity(entries.len());
    for entry in &entries {
        let clip = entry.load_clip(&base_dir)?;
        let sampled = sample_frames(&clip, stride_ms)?;
        rows.push((entry.object_id.clone(), clip.len(), sampled.len()));
    }
    Ok(rows)
}

/// Render the prompt exactly as the pipeline would for a run config
/// (the `prompt` command), with its fixture checksum.
pub fn rendered_prompt(config: &RunConfig, object_hint: Option<&str>) -> Result<(String, String)> {
    let spec = config.prompt.clone().unwrap_or_default();
    let prompt = build_prompt(&spec, object_hint)?;
    let checksum = crate::prompting::prompt_sha256(&spec, object_hint)?;
    Ok((prompt, checksum))
}

/// Single-object end-to-end (the `infer` command): returns the raw
/// response text and the parsed scores.
pub fn infer_object(
    manifest_path: &Path,
    object_id: &str,
    config: &RunConfig,
) -> Result<(String, ParsedResponse)> {
    config.validate()?;
    let entries = load_manifest(manifest_path)?;
    let base_dir = manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let entry = entries
        .iter()
        .find(|e| e.object_id == object_id)
        .ok_or_else(|| {
            CoreError::Validation(format!("object '{object_id}' not found in manifest"))
        })?;
    let parts = build_components(config)?;
    let prompt = build_prompt(&parts.prompt_spec, None)?;
    let layout = Layout::new(config.layout.clone(), prompt_split(&prompt))?;
    let run_dir = config.out_dir.join(config.effective_run_id());
    let object_dir = run_dir.join(&entry.object_id);
    let parsed = process_object(entry, &base_dir, config, &parts, &prompt, &layout, &object_dir)?;
    let response = std::fs::read_to_string(object_dir.join("response.txt"))?;
    Ok((response, parsed))
}

// compile-time check that pipeline embedding sequences agree on dims
#[allow(dead_code)]
fn _assert_dims(seq: &EmbeddingSequence) -> (usize, Modality) {
    (seq.dim(), seq.modality())
}

/// Map object ids to canned contract texts (helper used by fixtures,
/// the demo generator, and tests).
pub fn contract_script(rows: &[(&str, &str, &str, u8, u8, u8)]) -> BTreeMap<String, String> {
    rows.iter()
        .map(|(id, name, material, h, e, r)| {
            let mut rationales = BTreeMap::new();
            rationales.insert(Property::Hardness, "indentation resistance".to_string());
            rationales.insert(Property::Elasticity, "rebound behavior".to_string());
            rationales.insert(Property::Roughness, "surface profile".to_string());
            let scores = crate::prompting::PropertyScores::new(
                name.to_string(),
                material.to_string(),
                *h,
                *e,
                *r,
                rationales,
            )
            .expect("fixture scores are in range");
            (id.to_string(), scores.render_contract())
        })
        .collect()
}
