//! Run configuration: backend choice and settings, seeds, encoder
//! dimensions, sampling stride, prompt spec, layout, and output paths.
//! Loadable from a JSON file; CLI flags override individual fields.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::assembly::Segment;
use crate::backend::{RemoteConfig, RetryPolicy};
use crate::error::{CoreError, Result};
use crate::prompting::{ParseMode, PromptSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Toy,
    Scripted,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RemoteSettings {
    /// Endpoint URL; falls back to `VITAL_REMOTE_URL` when empty.
    pub endpoint: String,
    pub model: String,
    pub timeout_secs: u64,
    pub policy: RetryPolicy,
}

impl Default for RemoteSettings {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            model: "vlm-default".to_string(),
            timeout_secs: 60,
            policy: RetryPolicy::default(),
        }
    }
}

impl RemoteSettings {
    /// Resolve into a client config, taking endpoint and credential
    /// from the environment when not set here.
    pub fn to_remote_config(&self) -> Result<RemoteConfig> {
        let mut cfg = RemoteConfig::new(self.endpoint.clone(), self.model.clone());
        cfg.timeout = Duration::from_secs(self.timeout_secs);
        cfg.policy = self.policy.clone();
        cfg.with_env_fallback()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Stable run identifier; derived from the seed when unset so two
    /// identical runs land in identical paths.
    pub run_id: Option<String>,
    pub backend: BackendKind,
    /// JSON file mapping object id to canned text (scripted backend).
    pub script_path: Option<PathBuf>,
    pub remote: Option<RemoteSettings>,
    pub seed: u64,
    /// Shared embedding dimension d.
    pub dim: usize,
    /// Region grid G (G^2 vision embeddings).
    pub grid: usize,
    /// Tactile sampling stride in milliseconds.
    pub stride_ms: i64,
    pub parallelism: usize,
    /// Parse mode; defaults per backend (strict for scripted, lenient
    /// for toy and remote).
    pub mode: Option<ParseMode>,
    pub max_tokens: usize,
    pub temperature: f64,
    pub mc_resamples: usize,
    /// Prompt spec override; the versioned default when unset.
    pub prompt: Option<PromptSpec>,
    pub layout: Vec<Segment>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            run_id: None,
            backend: BackendKind::Toy,
            script_path: None,
            remote: None,
            seed: 42,
            dim: 64,
            grid: 4,
            stride_ms: 250,
            parallelism: 1,
            mode: None,
            max_tokens: 64,
            temperature: 0.0,
            mc_resamples: 200_000,
            prompt: None,
            layout: vec![
                Segment::TextPrefix,
                Segment::Vision,
                Segment::Tactile,
                Segment::TextSuffix,
            ],
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim % 2 != 0 {
            return Err(CoreError::Config(format!(
                "dim must be a positive even number, got {}",
                self.dim
            )));
        }
        if self.grid == 0 {
            return Err(CoreError::Config("grid must be >= 1".into()));
        }
        if self.stride_ms <= 0 {
            return Err(CoreError::Config(format!(
                "stride_ms must be positive, got {}",
                self.stride_ms
            )));
        }
        if self.parallelism == 0 {
            return Err(CoreError::Config("parallelism must be >= 1".into()));
        }
        if self.max_tokens == 0 {
            return Err(CoreError::Config("max_tokens must be >= 1".into()));
        }
        if self.backend == BackendKind::Scripted && self.script_path.is_none() {
            return Err(CoreError::Config(
                "scripted backend needs script_path in the config".into(),
            ));
        }
        if let Some(spec) = &self.prompt {
            spec.validate()?;
        }
        Ok(())
    }

    /// Parse mode, defaulted per backend: fixtures must not drift
    /// (strict), real or toy generators may (lenient).
    pub fn effective_mode(&self) -> ParseMode {
        self.mode.unwrap_or(match self.backend {
            BackendKind::Scripted => ParseMode::Strict,
            BackendKind::Toy | BackendKind::Remote => ParseMode::Lenient,
        })
    }

    pub fn effective_run_id(&self) -> String {
        self.run_id.clone().unwrap_or_else(|| format!("run-seed{}", self.seed))
    }
}

/// Read a [`RunConfig`] from a JSON file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CoreError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: RunConfig = serde_json::from_str(&raw)
        .map_err(|e| CoreError::Config(format!("bad config {}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn odd_dim_rejected() {
        let cfg = RunConfig { dim: 63, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(CoreError::Config(_))));
    }

    #[test]
    fn scripted_without_script_rejected() {
        let cfg = RunConfig { backend: BackendKind::Scripted, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn mode_defaults_per_backend() {
        let toy = RunConfig::default();
        assert_eq!(toy.effective_mode(), ParseMode::Lenient);
        let scripted = RunConfig {
            backend: BackendKind::Scripted,
            script_path: Some("s.json".into()),
            ..Default::default()
        };
        assert_eq!(scripted.effective_mode(), ParseMode::Strict);
    }

    #[test]
    fn config_round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        let cfg = RunConfig { seed: 7, grid: 2, ..Default::default() };
        std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
        assert_eq!(load_config(&path).unwrap(), cfg);
    }

    #[test]
    fn unknown_config_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, r#"{"sede": 7}"#).unwrap();
        assert!(matches!(load_config(&path), Err(CoreError::Config(_))));
    }
}
