//! Self-contained demo dataset generator: synthetic object images,
//! tactile recordings, a manifest, a rank-aligned response script, and
//! a ready-to-run config. Lets the full eval path run offline.

use std::path::{Path, PathBuf};

use crate::encoders::{image_to_png_bytes, Image, TactileClip};
use crate::error::{CoreError, Result};
use crate::evaluation::MaterialCategory;
use crate::pipeline::tseq::write_tseq;
use crate::pipeline::{BackendKind, RunConfig};

pub struct DemoPaths {
    pub manifest: PathBuf,
    pub config: PathBuf,
    pub script: PathBuf,
}

/// Synthetic RGB object image with a per-object hue ramp.
fn demo_image(idx: usize, size: usize) -> Result<Image> {
    let mut pixels = Vec::with_capacity(size * size * 3);
    for y in 0..size {
        for x in 0..size {
            let base = ((x * 7 + y * 3 + idx * 29) % 256) as f64 / 255.0;
            pixels.push(base);
            pixels.push((base * 0.5 + idx as f64 * 0.09).fract());
            pixels.push(1.0 - base);
        }
    }
    Image::new(size, size, 3, pixels)
}

/// Generate an `n_objects`-entry demo dataset under `dir`.
///
/// Ground truth rises monotonically with the object index on all three
/// instruments, and the scripted responses rate hardness/roughness
/// rising and elasticity falling, so a run reproduces the expected
/// rank-perfect correlations (elasticity through the sign policy).
pub fn generate_demo_dataset(dir: &Path, n_objects: usize) -> Result<DemoPaths> {
    if n_objects < 3 {
        return Err(CoreError::Config("demo dataset needs at least 3 objects".into()));
    }
    if n_objects > 10 {
        return Err(CoreError::Config("demo dataset caps at 10 objects".into()));
    }
    std::fs::create_dir_all(dir.join("media"))?;

    let mut manifest_lines = Vec::with_capacity(n_objects);
    let mut script_rows = Vec::with_capacity(n_objects);
    for i in 0..n_objects {
        let object_id = format!("obj_{i:02}");
        let category = MaterialCategory::ALL[i % MaterialCategory::ALL.len()];
        let image_rel = format!("media/{object_id}.png");
        let clip_rel = format!("media/{object_id}.tseq");

        let image = demo_image(i, 48)?;
        std::fs::write(dir.join(&image_rel), image_to_png_bytes(&image)?)?;
        let clip = TactileClip::synthetic(20.0, 120, 16, 16, "gelsight-mini")?;
        write_tseq(&dir.join(&clip_rel), &clip, 20.0)?;

        let entry = serde_json::json!({
            "object_id": object_id,
            "name": format!("demo object {i}"),
            "material_category": category.as_str(),
            "image_path": image_rel,
            "tactile_video_path": clip_rel,
            "ground_truth": {
                "shore_hardness": 20.0 + 8.0 * i as f64,
                "elastic_modulus_mpa": 0.5 + 4.0 * i as f64,
                "roughness_ra_um": 0.2 + 0.9 * i as f64,
            },
        });
        manifest_lines.push(entry.to_string());

        let hardness = (1 + i).min(10) as u8;
        let elasticity = (10 - i).max(1) as u8;
        let roughness = (1 + i).min(10) as u8;
        script_rows.push((object_id, format!("demo object {i}"), hardness, elasticity, roughness));
    }

    let manifest = dir.join("manifest.jsonl");
    std::fs::write(&manifest, manifest_lines.join("\n") + "\n")?;

    let rows: Vec<(&str, &str, &str, u8, u8, u8)> = script_rows
        .iter()
        .map(|(id, name, h, e, r)| (id.as_str(), name.as_str(), "demo material", *h, *e, *r))
        .collect();
    let script_map = crate::pipeline::contract_script(&rows);
    let script = dir.join("script.json");
    std::fs::write(
        &script,
        serde_json::to_string_pretty(&script_map)
            .map_err(|e| CoreError::Validation(format!("script json: {e}")))?,
    )?;

    let config = RunConfig {
        backend: BackendKind::Scripted,
        script_path: Some(script.clone()),
        out_dir: dir.join("out"),
        grid: 2,
        dim: 32,
        ..Default::default()
    };
    let config_path = dir.join("config.json");
    std::fs::write(
        &config_path,
        serde_json::to_string_pretty(&config)
            .map_err(|e| CoreError::Validation(format!("config json: {e}")))?,
    )?;

    Ok(DemoPaths { manifest, config: config_path, script })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{load_config, load_manifest, run_pipeline};

    #[test]
    fn demo_dataset_runs_end_to_end_with_perfect_ranks() {
        let dir = tempfile::tempdir().unwrap();
        let paths = generate_demo_dataset(dir.path(), 5).unwrap();
        assert_eq!(load_manifest(&paths.manifest).unwrap().len(), 5);

        let config = load_config(&paths.config).unwrap();
        let output = run_pipeline(&paths.manifest, &config).unwrap();
        for r in &output.report.results {
            assert_eq!(r.rho_reported, 1.0, "{:?}", r.property);
            assert_eq!(r.n, 5);
        }
        assert_eq!(
            output.report.result(crate::prompting::Property::Elasticity).rho,
            -1.0
        );
        assert_eq!(output.report.format_compliance, 1.0);
        assert!(output.run_dir.join("report.txt").is_file());
    }
}
