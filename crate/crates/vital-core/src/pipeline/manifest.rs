//! Line-delimited JSON object manifest: one object per line with media
//! paths and embedded ground truth. Validation errors carry the line
//! number.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::encoders::{load_image, Image, TactileClip};
use crate::error::{CoreError, Result};
use crate::evaluation::{GroundTruthRecord, MaterialCategory};
use crate::pipeline::tseq::read_tseq;

fn default_fps() -> f64 {
    20.0
}

fn default_sensor() -> String {
    "gelsight-mini".to_string()
}

/// Instrument measurements as they appear inside a manifest line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthFields {
    pub shore_hardness: f64,
    pub elastic_modulus_mpa: f64,
    pub roughness_ra_um: f64,
}

/// One dataset object: identity, media paths, and ground truth.
/// Exactly one of `tactile_video_path` (a raw `.tseq` frame-sequence
/// file) or `tactile_frame_paths` (frame images; directories expand to
/// their sorted contents) must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectManifestEntry {
    pub object_id: String,
    pub name: String,
    pub material_category: MaterialCategory,
    pub image_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tactile_video_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tactile_frame_paths: Option<Vec<String>>,
    #[serde(default = "default_fps")]
    pub fps: f64,
    #[serde(default = "default_sensor")]
    pub sensor_id: String,
    pub ground_truth: GroundTruthFields,
}

impl ObjectManifestEntry {
    pub fn ground_truth_record(&self) -> GroundTruthRecord {
        GroundTruthRecord {
            object_id: self.object_id.clone(),
            material_category: self.material_category,
            shore_hardness: self.ground_truth.shore_hardness,
            elastic_modulus_mpa: self.ground_truth.elastic_modulus_mpa,
            roughness_ra_um: self.ground_truth.roughness_ra_um,
        }
    }

    fn validate(&self, base_dir: &Path) -> Result<()> {
        if self.object_id.trim().is_empty() {
            return Err(CoreError::Validation("object_id must be nonempty".into()));
        }
        if self.name.trim().is_empty() {
            return Err(CoreError::Validation("name must be nonempty".into()));
        }
        self.ground_truth_record().validate()?;
        if !(self.fps > 0.0 && self.fps <= 1000.0) {
            return Err(CoreError::Validation(format!("fps must be in (0, 1000], got {}", self.fps)));
        }
        match (&self.tactile_video_path, &self.tactile_frame_paths) {
            (Some(_), Some(_)) => {
                return Err(CoreError::Validation(
                    "give either tactile_video_path or tactile_frame_paths, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CoreError::Validation(
                    "one of tactile_video_path or tactile_frame_paths is required".into(),
                ))
            }
            _ => {}
        }
        let image = base_dir.join(&self.image_path);
        if !image.is_file() {
            return Err(CoreError::Validation(format!(
                "image_path '{}' does not exist",
                image.display()
            )));
        }
        if let Some(video) = &self.tactile_video_path {
            let p = base_dir.join(video);
            if !p.is_file() {
                return Err(CoreError::Validation(format!(
                    "tactile_video_path '{}' does not exist",
                    p.display()
                )));
            }
        }
        if let Some(paths) = &self.tactile_frame_paths {
            if paths.is_empty() {
                return Err(CoreError::Validation("tactile_frame_paths is empty".into()));
            }
            for raw in paths {
                let p = base_dir.join(raw);
                if !p.exists() {
                    return Err(CoreError::Validation(format!(
                        "tactile frame path '{}' does not exist",
                        p.display()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Load the object photograph.
    pub fn load_object_image(&self, base_dir: &Path) -> Result<Image> {
        load_image(&base_dir.join(&self.image_path))
    }

    /// Load the tactile recording. Frame images get timestamps from
    /// `fps`; `.tseq` files carry their own rate.
    pub fn load_clip(&self, base_dir: &Path) -> Result<TactileClip> {
        if let Some(video) = &self.tactile_video_path {
            return read_tseq(&base_dir.join(video), &self.sensor_id);
        }
        let paths = self
            .tactile_frame_paths
            .as_ref()
            .ok_or_else(|| CoreError::Validation("entry has no tactile source".into()))?;
        let mut files: Vec<PathBuf> = Vec::new();
        for raw in paths {
            let p = base_dir.join(raw);
            if p.is_dir() {
                let mut inside: Vec<PathBuf> = std::fs::read_dir(&p)?
                    .filter_map(|e| e.ok())
                    .map(|e| e.path())
                    .filter(|e| e.is_file())
                    .collect();
                inside.sort();
                if inside.is_empty() {
                    return Err(CoreError::Input(format!(
                        "frame directory '{}' is empty",
                        p.display()
                    )));
                }
                files.extend(inside);
            } else {
                files.push(p);
            }
        }
        let mut frames = Vec::with_capacity(files.len());
        let mut timestamps = Vec::with_capacity(files.len());
        for (i, file) in files.iter().enumerate() {
            frames.push(load_image(file)?);
            timestamps.push((i as f64 * 1000.0 / self.fps).round() as i64);
        }
        TactileClip::new(frames, timestamps, self.sensor_id.clone())
    }
}

/// Load and validate a line-delimited JSON manifest. Media paths are
/// resolved relative to the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<ObjectManifestEntry>> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CoreError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();

    let mut entries = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (idx, line) in raw.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let entry: ObjectManifestEntry = serde_json::from_str(line)
            .map_err(|e| CoreError::Manifest { line: line_no, message: e.to_string() })?;
        entry
            .validate(&base_dir)
            .map_err(|e| CoreError::Manifest { line: line_no, message: e.to_string() })?;
        if let Some(first) = seen.insert(entry.object_id.clone(), line_no) {
            return Err(CoreError::Manifest {
                line: line_no,
                message: format!(
                    "duplicate object_id '{}' (first seen on line {first})",
                    entry.object_id
                ),
            });
        }
        entries.push(entry);
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::image_to_png_bytes;
    use crate::pipeline::tseq::write_tseq;

    fn write_png(path: &Path) {
        let img = Image::new(8, 8, 1, (0..64).map(|i| f64::from(i as u8) / 255.0).collect()).unwrap();
        std::fs::write(path, image_to_png_bytes(&img).unwrap()).unwrap();
    }

    fn entry_json(id: &str, category: &str, with_clip: bool) -> String {
        let tactile = if with_clip {
            r#""tactile_video_path": "clip.tseq","#
        } else {
            r#""tactile_frame_paths": ["frames"],"#
        };
        format!(
            r#"{{"object_id": "{id}", "name": "object {id}", "material_category": "{category}", "image_path": "img.png", {tactile} "ground_truth": {{"shore_hardness": 42.0, "elastic_modulus_mpa": 3.5, "roughness_ra_um": 1.2}}}}"#
        )
    }

    fn fixture_dir() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        write_png(&dir.path().join("img.png"));
        let clip = TactileClip::synthetic(20.0, 6, 4, 4, "gel").unwrap();
        write_tseq(&dir.path().join("clip.tseq"), &clip, 20.0).unwrap();
        let frames = dir.path().join("frames");
        std::fs::create_dir(&frames).unwrap();
        write_png(&frames.join("f0.png"));
        write_png(&frames.join("f1.png"));
        dir
    }

    #[test]
    fn well_formed_manifest_loads_all_entries() {
        let dir = fixture_dir();
        let manifest = dir.path().join("manifest.jsonl");
        let lines = [
            entry_json("a", "plastic", true),
            entry_json("b", "rubber", false),
            entry_json("c", "textile", true),
        ]
        .join("\n");
        std::fs::write(&manifest, lines).unwrap();
        let entries = load_manifest(&manifest).unwrap();
        assert_eq!(entries.len(), 3);
        assert_eq!(entries[1].object_id, "b");
    }

    #[test]
    fn duplicate_object_id_names_id_and_line() {
        let dir = fixture_dir();
        let manifest = dir.path().join("manifest.jsonl");
        let lines = [entry_json("a", "plastic", true), entry_json("a", "rubber", true)].join("\n");
        std::fs::write(&manifest, lines).unwrap();
        let err = load_manifest(&manifest).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "got: {msg}");
        assert!(msg.contains("'a'"), "got: {msg}");
    }

    #[test]
    fn unknown_category_lists_the_nine_allowed() {
        let dir = fixture_dir();
        let manifest = dir.path().join("manifest.jsonl");
        std::fs::write(&manifest, entry_json("a", "stone", true)).unwrap();
        let err = load_manifest(&manifest).unwrap_err();
        let msg = err.to_string();
        for cat in ["plastic", "rubber", "metal", "wood", "ceramic", "glass", "foam", "paper", "textile"] {
            assert!(msg.contains(cat), "expected '{cat}' in: {msg}");
        }
    }

    #[test]
    fn missing_media_file_is_flagged() {
        let dir = fixture_dir();
        std::fs::remove_file(dir.path().join("img.png")).unwrap();
        let manifest = dir.path().join("manifest.jsonl");
        std::fs::write(&manifest, entry_json("a", "plastic", true)).unwrap();
        let err = load_manifest(&manifest).unwrap_err();
        assert!(err.to_string().contains("img.png"), "got: {err}");
    }

    #[test]
    fn missing_field_reports_line() {
        let dir = fixture_dir();
        let manifest = dir.path().join("manifest.jsonl");
        let good = entry_json("a", "plastic", true);
        std::fs::write(&manifest, format!("{good}\n{{\"object_id\": \"b\"}}")).unwrap();
        let err = load_manifest(&manifest).unwrap_err();
        assert!(matches!(err, CoreError::Manifest { line: 2, .. }), "got: {err}");
    }

    #[test]
    fn non_positive_measurement_rejected() {
        let dir = fixture_dir();
        let manifest = dir.path().join("manifest.jsonl");
        let bad = entry_json("a", "plastic", true)
            .replace("\"shore_hardness\": 42.0", "\"shore_hardness\": -1.0");
        std::fs::write(&manifest, bad).unwrap();
        let err = load_manifest(&manifest).unwrap_err();
        assert!(err.to_string().contains("shore_hardness"), "got: {err}");
    }

    #[test]
    fn clip_from_frame_directory_expands_sorted() {
        let dir = fixture_dir();
        let manifest = dir.path().join("manifest.jsonl");
        std::fs::write(&manifest, entry_json("a", "plastic", false)).unwrap();
        let entries = load_manifest(&manifest).unwrap();
        let clip = entries[0].load_clip(dir.path()).unwrap();
        assert_eq!(clip.len(), 2);
        assert_eq!(clip.timestamps_ms(), &[0, 50]);
    }

    #[test]
    fn clip_from_tseq_file() {
        let dir = fixture_dir();
        let manifest = dir.path().join("manifest.jsonl");
        std::fs::write(&manifest, entry_json("a", "plastic", true)).unwrap();
        let entries = load_manifest(&manifest).unwrap();
        let clip = entries[0].load_clip(dir.path()).unwrap();
        assert_eq!(clip.len(), 6);
    }
}
