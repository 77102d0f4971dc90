//! Ground-truth storage, rank-correlation evaluation with permutation
//! p-values, the elasticity sign policy, and report rendering.

mod permutation;
mod report;
mod spearman;

pub use permutation::{p_value, t_approx_p_value, PMethod, EXACT_MAX_N};
pub use report::{parse_report_csv, render_report, ReportFormat};
pub use spearman::{fractional_ranks, normalize_min_max, spearman_rho};

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::numerics::derive_seed;
use crate::prompting::{Property, PropertyScores};

/// The nine material categories objects are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaterialCategory {
    Plastic,
    Rubber,
    Metal,
    Wood,
    Ceramic,
    Glass,
    Foam,
    Paper,
    Textile,
}

impl MaterialCategory {
    pub const ALL: [MaterialCategory; 9] = [
        MaterialCategory::Plastic,
        MaterialCategory::Rubber,
        MaterialCategory::Metal,
        MaterialCategory::Wood,
        MaterialCategory::Ceramic,
        MaterialCategory::Glass,
        MaterialCategory::Foam,
        MaterialCategory::Paper,
        MaterialCategory::Textile,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MaterialCategory::Plastic => "plastic",
            MaterialCategory::Rubber => "rubber",
            MaterialCategory::Metal => "metal",
            MaterialCategory::Wood => "wood",
            MaterialCategory::Ceramic => "ceramic",
            MaterialCategory::Glass => "glass",
            MaterialCategory::Foam => "foam",
            MaterialCategory::Paper => "paper",
            MaterialCategory::Textile => "textile",
        }
    }
}

impl fmt::Display for MaterialCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-object instrument measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub object_id: String,
    pub material_category: MaterialCategory,
    /// Indentation hardness on the Shore scale.
    pub shore_hardness: f64,
    /// Stiffness from the linear stress-strain regime, MPa.
    pub elastic_modulus_mpa: f64,
    /// Arithmetic-mean surface roughness, micrometers.
    pub roughness_ra_um: f64,
}

impl GroundTruthRecord {
    pub fn validate(&self) -> Result<()> {
        if self.object_id.trim().is_empty() {
            return Err(CoreError::Validation("ground truth row with empty object_id".into()));
        }
        for (name, v) in [
            ("shore_hardness", self.shore_hardness),
            ("elastic_modulus_mpa", self.elastic_modulus_mpa),
            ("roughness_ra_um", self.roughness_ra_um),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::Data(format!(
                    "object '{}': {name} must be a positive finite number, got {v}",
                    self.object_id
                )));
            }
        }
        Ok(())
    }

    /// The instrument measurement evaluated against a property's model
    /// scores.
    pub fn measurement(&self, property: Property) -> f64 {
        match property {
            Property::Hardness => self.shore_hardness,
            Property::Elasticity => self.elastic_modulus_mpa,
            Property::Roughness => self.roughness_ra_um,
        }
    }
}

/// Load ground truth from a delimited table (CSV with header
/// `object_id,material_category,shore_hardness,elastic_modulus_mpa,roughness_ra_um`).
pub fn load_ground_truth(path: &Path) -> Result<Vec<GroundTruthRecord>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CoreError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let mut records = Vec::new();
    let mut seen = BTreeMap::new();
    for (idx, row) in reader.deserialize::<GroundTruthRecord>().enumerate() {
        let line = idx + 2; // header is line 1
        let record = row.map_err(|e| CoreError::Manifest { line, message: e.to_string() })?;
        record.validate().map_err(|e| CoreError::Manifest { line, message: e.to_string() })?;
        if let Some(first) = seen.insert(record.object_id.clone(), line) {
            return Err(CoreError::Manifest {
                line,
                message: format!(
                    "duplicate object_id '{}' (first seen on line {first})",
                    record.object_id
                ),
            });
        }
        records.push(record);
    }
    Ok(records)
}

/// Model scores keyed by object id.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScoreTable {
    rows: Vec<(String, PropertyScores)>,
}

impl ScoreTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, object_id: String, scores: PropertyScores) -> Result<()> {
        if self.rows.iter().any(|(id, _)| *id == object_id) {
            return Err(CoreError::Validation(format!(
                "duplicate object_id '{object_id}' in score table"
            )));
        }
        self.rows.push((object_id, scores));
        Ok(())
    }

    pub fn rows(&self) -> &[(String, PropertyScores)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, object_id: &str) -> Option<&PropertyScores> {
        self.rows.iter().find(|(id, _)| id == object_id).map(|(_, s)| s)
    }
}

/// Knobs for [`evaluate_property`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Base seed; the per-property Monte Carlo stream is derived from
    /// (seed, property) so results are independent of scheduling.
    pub seed: u64,
    pub mc_resamples: usize,
    /// Use exact enumeration up to this n, Monte Carlo beyond.
    pub exact_max_n: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { seed: 42, mc_resamples: 200_000, exact_max_n: 8 }
    }
}

/// One property's correlation against ground truth. `rho` is the raw
/// coefficient; `rho_reported` applies the sign policy (elasticity is
/// reported as `|rho|` since elastic modulus runs opposite to perceived
/// elasticity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub property: Property,
    pub rho: f64,
    pub rho_reported: f64,
    pub p_value: f64,
    pub n: usize,
    pub method: PMethod,
    pub seed: Option<u64>,
}

impl CorrelationResult {
    pub fn new(
        property: Property,
        rho: f64,
        p: f64,
        n: usize,
        method: PMethod,
        seed: Option<u64>,
    ) -> Result<Self> {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(CoreError::Range(format!("rho {rho} outside [-1, 1]")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(CoreError::Range(format!("p-value {p} outside [0, 1]")));
        }
        let rho_reported = match property {
            Property::Elasticity => rho.abs(),
            _ => rho,
        };
        Ok(Self { property, rho, rho_reported, p_value: p, n, method, seed })
    }
}

/// Full three-property report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub results: Vec<CorrelationResult>,
    pub dataset_id: String,
    pub model_id: String,
    /// Fraction of responses parsed without warnings.
    pub format_compliance: f64,
}

impl CorrelationReport {
    pub fn new(
        results: Vec<CorrelationResult>,
        dataset_id: String,
        model_id: String,
        format_compliance: f64,
    ) -> Result<Self> {
        for property in Property::ALL {
            let count = results.iter().filter(|r| r.property == property).count();
            if count != 1 {
                return Err(CoreError::Validation(format!(
                    "report has {count} results for {property}, expected exactly 1"
                )));
            }
        }
        if !(0.0..=1.0).contains(&format_compliance) {
            return Err(CoreError::Range(format!(
                "format compliance {format_compliance} outside [0, 1]"
            )));
        }
        Ok(Self { results, dataset_id, model_id, format_compliance })
    }

    pub fn result(&self, property: Property) -> &CorrelationResult {
        self.results
            .iter()
            .find(|r| r.property == property)
            .expect("validated: one result per property")
    }
}

/// Correlate one property's model scores against ground truth.
///
/// Joins on object id (needs >= 3 matches), min-max normalizes both
/// series (a documented no-op for rank correlation), computes rho and a
/// permutation p-value (exact for small n, seeded Monte Carlo
/// otherwise), and applies the elasticity sign policy at reporting.
pub fn evaluate_property(
    scores: &ScoreTable,
    truth: &[GroundTruthRecord],
    property: Property,
    opts: &EvalOptions,
) -> Result<CorrelationResult> {
    let truth_by_id: BTreeMap<&str, &GroundTruthRecord> =
        truth.iter().map(|r| (r.object_id.as_str(), r)).collect();

    let mut model_series = Vec::new();
    let mut truth_series = Vec::new();
    for (id, s) in scores.rows() {
        if let Some(record) = truth_by_id.get(id.as_str()) {
            record.validate()?;
            model_series.push(f64::from(s.score(property)));
            truth_series.push(record.measurement(property));
        }
    }
    let n = model_series.len();
    if n < 3 {
        return Err(CoreError::InsufficientData(format!(
            "score/truth join produced {n} objects for {property}; need >= 3"
        )));
    }

    let model_norm = normalize_min_max(&model_series)?;
    let truth_norm = normalize_min_max(&truth_series)?;
    let rho = spearman_rho(&model_norm, &truth_norm)?;

    let (method, seed) = if n <= opts.exact_max_n {
        (PMethod::Exact, None)
    } else {
        (PMethod::MonteCarlo, Some(derive_seed(opts.seed, property.as_str())))
    };
    let p = p_value(
        &model_norm,
        &truth_norm,
        method,
        seed.unwrap_or(0),
        opts.mc_resamples,
    )?;
    CorrelationResult::new(property, rho, p, n, method, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(object_id: &str, h: u8, e: u8, r: u8) -> PropertyScores {
        PropertyScores::new(
            object_id.to_string(),
            "material".to_string(),
            h,
            e,
            r,
            BTreeMap::new(),
        )
        .unwrap()
    }

    fn truth(id: &str, shore: f64, modulus: f64, ra: f64) -> GroundTruthRecord {
        GroundTruthRecord {
            object_id: id.to_string(),
            material_category: MaterialCategory::Rubber,
            shore_hardness: shore,
            elastic_modulus_mpa: modulus,
            roughness_ra_um: ra,
        }
    }

    fn fixture() -> (ScoreTable, Vec<GroundTruthRecord>) {
        let mut table = ScoreTable::new();
        table.push("a".into(), scores("a", 2, 9, 1)).unwrap();
        table.push("b".into(), scores("b", 5, 6, 4)).unwrap();
        table.push("c".into(), scores("c", 8, 3, 7)).unwrap();
        let truth = vec![
            truth("a", 20.0, 0.5, 0.2),
            truth("b", 50.0, 5.0, 1.5),
            truth("c", 85.0, 40.0, 6.0),
        ];
        (table, truth)
    }

    #[test]
    fn perfect_rank_agreement_scores_one() {
        let (table, truth) = fixture();
        let res =
            evaluate_property(&table, &truth, Property::Hardness, &EvalOptions::default()).unwrap();
        assert_eq!(res.rho, 1.0);
        assert_eq!(res.rho_reported, 1.0);
        assert_eq!(res.n, 3);
        assert_eq!(res.method, PMethod::Exact);
    }

    #[test]
    fn elasticity_sign_policy_reports_absolute_value() {
        let (table, truth) = fixture();
        // model elasticity decreases as modulus increases: raw rho = -1
        let res = evaluate_property(&table, &truth, Property::Elasticity, &EvalOptions::default())
            .unwrap();
        assert_eq!(res.rho, -1.0);
        assert_eq!(res.rho_reported, 1.0);
    }

    #[test]
    fn hardness_keeps_raw_sign() {
        for rho in [-1.0f64, -0.5, 0.7] {
            let r = CorrelationResult::new(Property::Hardness, rho, 0.5, 10, PMethod::MonteCarlo, Some(1))
                .unwrap();
            assert_eq!(r.rho_reported, rho);
            let e = CorrelationResult::new(Property::Elasticity, rho, 0.5, 10, PMethod::MonteCarlo, Some(1))
                .unwrap();
            assert_eq!(e.rho_reported, rho.abs());
        }
    }

    #[test]
    fn join_below_three_is_insufficient() {
        let (table, mut truth) = fixture();
        truth.pop();
        let err =
            evaluate_property(&table, &truth, Property::Hardness, &EvalOptions::default()).unwrap_err();
        assert!(matches!(err, CoreError::InsufficientData(_)));
    }

    #[test]
    fn bad_measurement_is_data_error() {
        let (table, mut truth) = fixture();
        truth[1].roughness_ra_um = 0.0;
        let err =
            evaluate_property(&table, &truth, Property::Roughness, &EvalOptions::default()).unwrap_err();
        assert!(matches!(err, CoreError::Data(_)));
    }

    #[test]
    fn report_requires_one_result_per_property() {
        let r = CorrelationResult::new(Property::Hardness, 0.5, 0.01, 10, PMethod::Exact, None).unwrap();
        let err = CorrelationReport::new(vec![r], "d".into(), "m".into(), 1.0).unwrap_err();
        assert!(matches!(err, CoreError::Validation(_)));
    }

    #[test]
    fn score_table_rejects_duplicate_ids() {
        let mut table = ScoreTable::new();
        table.push("a".into(), scores("a", 1, 1, 1)).unwrap();
        assert!(table.push("a".into(), scores("a", 2, 2, 2)).is_err());
    }
}
