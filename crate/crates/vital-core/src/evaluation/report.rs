//! Report rendering: text (display-rounded), CSV and JSON (full
//! precision, round-trippable).

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::evaluation::{CorrelationReport, CorrelationResult, PMethod};
use crate::prompting::Property;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

/// Format with (at least) `sig` significant figures, plain decimal
/// notation.
fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return format!("{x:.prec$}", prec = sig - 1);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Render a report. Text uses display rounding (rho to 3 decimals, p
/// to 3 significant figures); CSV and JSON carry full-precision values
/// and parse back to identical reports.
pub fn render_report(report: &CorrelationReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Text => Ok(render_text(report)),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => serde_json::to_string_pretty(report)
            .map_err(|e| CoreError::Validation(format!("report json: {e}"))),
    }
}

fn render_text(report: &CorrelationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "Spearman rank correlation vs instrument ground truth\n\
         dataset: {}  model: {}\n",
        report.dataset_id, report.model_id
    ));
    out.push_str(&format!(
        "format compliance: {:.3}\n\n",
        report.format_compliance
    ));
    out.push_str("property    model           rho      p-value   n   method\n");
    for property in Property::ALL {
        let r = report.result(property);
        let method = match r.method {
            PMethod::Exact => "exact".to_string(),
            PMethod::MonteCarlo => match r.seed {
                Some(s) => format!("monte_carlo(seed={s})"),
                None => "monte_carlo".to_string(),
            },
        };
        out.push_str(&format!(
            "{:<11} {:<15} {:<8} {:<9} {:<3} {}\n",
            r.property.as_str(),
            report.model_id,
            format!("{:.3}", r.rho_reported),
            format_sig(r.p_value, 3),
            r.n,
            method,
        ));
    }
    out
}

/// Flat CSV row mirroring [`CorrelationResult`] plus the report
/// context columns.
#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    property: Property,
    dataset_id: String,
    model_id: String,
    rho: f64,
    rho_reported: f64,
    p_value: f64,
    n: usize,
    method: PMethod,
    seed: Option<u64>,
    format_compliance: f64,
}

fn render_csv(report: &CorrelationReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for property in Property::ALL {
        let r = report.result(property);
        writer
            .serialize(CsvRow {
                property: r.property,
                dataset_id: report.dataset_id.clone(),
                model_id: report.model_id.clone(),
                rho: r.rho,
                rho_reported: r.rho_reported,
                p_value: r.p_value,
                n: r.n,
                method: r.method,
                seed: r.seed,
                format_compliance: report.format_compliance,
            })
            .map_err(|e| CoreError::Validation(format!("report csv: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CoreError::Validation(format!("report csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CoreError::Validation(format!("report csv: {e}")))
}

/// Parse a CSV report back (inverse of the CSV renderer).
pub fn parse_report_csv(text: &str) -> Result<CorrelationReport> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut results = Vec::new();
    let mut context: Option<(String, String, f64)> = None;
    for row in reader.deserialize::<CsvRow>() {
        let row = row.map_err(|e| CoreError::Parse(format!("report csv: {e}")))?;
        let ctx = (row.dataset_id.clone(), row.model_id.clone(), row.format_compliance);
        match &context {
            None => context = Some(ctx),
            Some(existing) if *existing != ctx => {
                return Err(CoreError::Parse("inconsistent report context across csv rows".into()))
            }
            _ => {}
        }
        results.push(CorrelationResult {
            property: row.property,
            rho: row.rho,
            rho_reported: row.rho_reported,
            p_value: row.p_value,
            n: row.n,
            method: row.method,
            seed: row.seed,
        });
    }
    let (dataset_id, model_id, compliance) =
        context.ok_or_else(|| CoreError::Parse("empty report csv".into()))?;
    CorrelationReport::new(results, dataset_id, model_id, compliance)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Published three-row fixture used purely as rendering input.
    pub(crate) fn fixture_report() -> CorrelationReport {
        let results = vec![
            CorrelationResult::new(Property::Hardness, 0.501, 0.005, 35, PMethod::MonteCarlo, Some(7))
                .unwrap(),
            CorrelationResult::new(Property::Elasticity, -0.530, 0.003, 35, PMethod::MonteCarlo, Some(8))
                .unwrap(),
            CorrelationResult::new(Property::Roughness, 0.643, 0.0001, 35, PMethod::MonteCarlo, Some(9))
                .unwrap(),
        ];
        CorrelationReport::new(results, "objects-35".into(), "Octopi-ViTaL".into(), 1.0).unwrap()
    }

    #[test]
    fn text_contains_fixture_coefficients() {
        let text = render_report(&fixture_report(), ReportFormat::Text).unwrap();
        for needle in ["0.501", "0.530", "0.643"] {
            assert!(text.contains(needle), "missing {needle} in:\n{text}");
        }
    }

    #[test]
    fn hardness_row_renders_coefficient_and_p() {
        let text = render_report(&fixture_report(), ReportFormat::Text).unwrap();
        let row = text.lines().find(|l| l.starts_with("hardness")).unwrap();
        assert!(row.contains("0.501"), "row: {row}");
        assert!(row.contains("0.005"), "row: {row}");
        assert!(row.contains("35"), "row: {row}");
    }

    #[test]
    fn compliance_renders_three_decimals() {
        let text = render_report(&fixture_report(), ReportFormat::Text).unwrap();
        assert!(text.contains("format compliance: 1.000"));
    }

    #[test]
    fn csv_round_trips_exactly() {
        let report = fixture_report();
        let csv = render_report(&report, ReportFormat::Csv).unwrap();
        let back = parse_report_csv(&csv).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn json_round_trips_exactly() {
        let report = fixture_report();
        let json = render_report(&report, ReportFormat::Json).unwrap();
        let back: CorrelationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn significant_figure_formatting() {
        assert_eq!(format_sig(0.005, 3), "0.00500");
        assert_eq!(format_sig(0.0001, 3), "0.000100");
        assert_eq!(format_sig(0.3333333, 3), "0.333");
        assert_eq!(format_sig(1.0, 3), "1.00");
    }
}
