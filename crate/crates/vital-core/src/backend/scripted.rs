//! Scripted fixture backend: a map from object id to canned response
//! text, for offline deterministic runs and tests.

use std::collections::BTreeMap;
use std::path::Path;

use crate::backend::{Backend, FinishReason, GenerationRequest, GenerationResult};
use crate::error::{CoreError, Result};

pub struct ScriptedBackend {
    script: BTreeMap<String, String>,
}

impl ScriptedBackend {
    pub fn new(script: BTreeMap<String, String>) -> Result<Self> {
        for (id, text) in &script {
            if text.is_empty() {
                return Err(CoreError::Fixture(format!("canned response for '{id}' is empty")));
            }
        }
        Ok(Self { script })
    }

    /// Load a script from a JSON file mapping object id to canned text.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)?;
        let script: BTreeMap<String, String> = serde_json::from_str(&raw)
            .map_err(|e| CoreError::Fixture(format!("bad script file {}: {e}", path.display())))?;
        Self::new(script)
    }

    pub fn len(&self) -> usize {
        self.script.len()
    }

    pub fn is_empty(&self) -> bool {
        self.script.is_empty()
    }
}

impl Backend for ScriptedBackend {
    fn generate(&self, req: &GenerationRequest) -> Result<GenerationResult> {
        let id = req.object_id.as_deref().ok_or_else(|| {
            CoreError::Input("scripted backend needs an object_id tag on the request".into())
        })?;
        let text = self.script.get(id).ok_or_else(|| {
            let known: Vec<&str> = self.script.keys().map(String::as_str).collect();
            CoreError::Fixture(format!(
                "script has no canned response for object id '{id}' (known ids: [{}])",
                known.join(", ")
            ))
        })?;
        GenerationResult::new(text.clone(), FinishReason::Stop, 0)
    }

    fn model_id(&self) -> String {
        "scripted".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::RequestPayload;

    fn request(object_id: Option<&str>) -> GenerationRequest {
        let mut req = GenerationRequest::for_messages(vec![], 8, 0.0).unwrap();
        req.payload = RequestPayload::Messages(vec![]);
        if let Some(id) = object_id {
            req = req.with_object_id(id);
        }
        req
    }

    #[test]
    fn lookup_returns_canned_text_verbatim() {
        let mut script = BTreeMap::new();
        script.insert("duck_toy".to_string(), "OBJECT: duck toy\nMATERIAL: rubber".to_string());
        let backend = ScriptedBackend::new(script).unwrap();
        let out = backend.generate(&request(Some("duck_toy"))).unwrap();
        assert_eq!(out.text, "OBJECT: duck toy\nMATERIAL: rubber");
        assert_eq!(out.finish_reason, FinishReason::Stop);
    }

    #[test]
    fn missing_id_error_names_it() {
        let mut script = BTreeMap::new();
        script.insert("duck_toy".to_string(), "x".to_string());
        let backend = ScriptedBackend::new(script).unwrap();
        let err = backend.generate(&request(Some("mug"))).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("'mug'"), "got: {msg}");
        assert!(msg.contains("duck_toy"), "got: {msg}");
    }

    #[test]
    fn empty_script_always_errors() {
        let backend = ScriptedBackend::new(BTreeMap::new()).unwrap();
        assert!(backend.generate(&request(Some("anything"))).is_err());
    }

    #[test]
    fn request_without_object_id_rejected() {
        let mut script = BTreeMap::new();
        script.insert("a".to_string(), "b".to_string());
        let backend = ScriptedBackend::new(script).unwrap();
        assert!(matches!(
            backend.generate(&request(None)),
            Err(CoreError::Input(_))
        ));
    }

    #[test]
    fn empty_canned_text_rejected_at_construction() {
        let mut script = BTreeMap::new();
        script.insert("a".to_string(), String::new());
        assert!(matches!(ScriptedBackend::new(script), Err(CoreError::Fixture(_))));
    }
}
