//! Dataset ingestion, run configuration, and end-to-end orchestration
//! from manifest to correlation report.

mod config;
mod demo;
mod manifest;
mod run;
mod sampling;
pub mod tseq;

pub use config::{load_config, BackendKind, RemoteSettings, RunConfig};
pub use demo::{generate_demo_dataset, DemoPaths};
pub use manifest::{load_manifest, GroundTruthFields, ObjectManifestEntry};
pub use run::{
    contract_script, infer_object, ingest_summary, rendered_prompt, run_pipeline, ObjectOutcome,
    ObjectStatus, RunOutput, RunSummary,
};
pub use sampling::{sample_frames, sample_indices};
