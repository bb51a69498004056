use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use shmcam::signalkit::{
    assess_damage, assess_damage_with_threshold, percent_error, DamageAssessment, ModalEstimate, Reference,
    ReferenceSource, SignalError,
};

use crate::config::{default_pair, AnalysisSection, Condition, ScenarioConfig};
use crate::pipeline;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub case_id: String,
    pub condition: Condition,
    pub pair: String,
    pub seed: u64,
    pub config_hash: String,
    pub modal: ModalEstimate<f64>,
    /// Reference frequency for this case's condition, Hz.
    pub reference: f64,
    pub percent_error: f64,
    pub assessment: Option<DamageAssessment<f64>>,
    /// Seconds from start of the hover simulation to hold, when flown.
    pub time_to_hold: Option<f64>,
    /// Artifact name to path relative to the output root.
    pub artifacts: BTreeMap<String, String>,
}

impl RunReport {
    pub fn new(
        cfg: &ScenarioConfig,
        modal: ModalEstimate<f64>,
        reference: f64,
        percent_error: f64,
        time_to_hold: Option<f64>,
        dir: &Path,
    ) -> Self {
        let names = [
            pipeline::MOTION,
            pipeline::MANIFEST,
            pipeline::GROUND_TRUTH,
            pipeline::TRAJECTORY,
            pipeline::MARKER_TRACE,
            pipeline::REFERENCE_TRACE,
            pipeline::TRACE,
            pipeline::DISPLACEMENT,
            pipeline::ACCEL,
            pipeline::SPECTRUM,
        ];
        let artifacts = names
            .iter()
            .filter(|n| dir.join(n).exists())
            .map(|n| (n.trim_end_matches(".csv").trim_end_matches(".toml").to_string(), format!("{}/{n}", cfg.case_id)))
            .collect();
        Self {
            case_id: cfg.case_id.clone(),
            condition: cfg.condition,
            pair: cfg.pair_label(),
            seed: cfg.seed,
            config_hash: cfg.hash(),
            modal,
            reference,
            percent_error,
            assessment: None,
            time_to_hold,
            artifacts,
        }
    }

    /// A report holding only an identified frequency, e.g. a published value.
    pub fn from_frequency(case_id: &str, condition: Condition, frequency: f64) -> Self {
        Self {
            case_id: case_id.to_string(),
            condition,
            pair: default_pair(case_id),
            seed: 0,
            config_hash: String::new(),
            modal: ModalEstimate { frequency, peak_power: 0.0, resolution: 0.0, band: (0.0, 0.0) },
            reference: 0.0,
            percent_error: 0.0,
            assessment: None,
            time_to_hold: None,
            artifacts: BTreeMap::new(),
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        pipeline::write_text(path, &text)
    }

    pub fn read(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

pub fn assess_pair(
    healthy: &RunReport,
    damaged: &RunReport,
    analysis: &AnalysisSection,
) -> Result<DamageAssessment<f64>, SignalError> {
    let (rh, rd) = (analysis.reference_healthy, analysis.reference_damaged);
    match analysis.damage_threshold {
        Some(t) => assess_damage_with_threshold(
            &healthy.modal,
            &damaged.modal,
            Reference { source: ReferenceSource::ContactSensor, healthy: rh, damaged: rd },
            t,
        ),
        None => assess_damage(&healthy.modal, &damaged.modal, rh, rd),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub pair: String,
    pub healthy: Option<(String, f64, f64)>,
    pub damaged: Option<(String, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub warnings: Vec<String>,
}

/// Builds the healthy/damaged comparison against reference frequencies
/// `(f_h, f_d)`. Rows follow the first appearance of each pair label.
pub fn compare_runs(reports: &[RunReport], reference: (f64, f64)) -> Result<ComparisonTable, SignalError> {
    if reports.is_empty() {
        return Err(SignalError::InvalidConfig("no reports to compare".into()));
    }
    let mut rows: Vec<ComparisonRow> = Vec::new();
    for r in reports {
        let idx = match rows.iter().position(|row| row.pair == r.pair) {
            Some(i) => i,
            None => {
                rows.push(ComparisonRow { pair: r.pair.clone(), healthy: None, damaged: None });
                rows.len() - 1
            }
        };
        let (slot, f_ref) = match r.condition {
            Condition::Healthy => (&mut rows[idx].healthy, reference.0),
            Condition::Damaged => (&mut rows[idx].damaged, reference.1),
        };
        let err = percent_error(r.modal.frequency, f_ref)?;
        *slot = Some((r.case_id.clone(), r.modal.frequency, err));
    }
    let warnings = rows
        .iter()
        .filter_map(|row| match (&row.healthy, &row.damaged) {
            (Some((h, ..)), None) => Some(format!("{h}: no damaged counterpart")),
            (None, Some((d, ..))) => Some(format!("{d}: no healthy counterpart")),
            _ => None,
        })
        .collect();
    Ok(ComparisonTable { rows, warnings })
}

fn cells(side: &Option<(String, f64, f64)>) -> [String; 3] {
    match side {
        Some((case, f, e)) => [case.clone(), format!("{f:.2}"), format!("{e:.1}")],
        None => [String::new(), String::new(), String::new()],
    }
}

impl ComparisonTable {
    const HEADER: [&'static str; 6] = ["healthy_case", "f_h_hz", "error_h_pct", "damaged_case", "f_d_hz", "error_d_pct"];

    fn grid(&self) -> Vec<[String; 6]> {
        self.rows
            .iter()
            .map(|row| {
                let [a, b, c] = cells(&row.healthy);
                let [d, e, f] = cells(&row.damaged);
                [a, b, c, d, e, f]
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = Self::HEADER.join(",");
        s.push('\n');
        for r in self.grid() {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_console(&self) -> String {
        let grid = self.grid();
        let widths: Vec<usize> = (0..6)
            .map(|i| grid.iter().map(|r| r[i].len()).chain([Self::HEADER[i].len()]).max().unwrap_or(0))
            .collect();
        let line = |cols: Vec<&str>| {
            cols.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
        };
        let mut out = line(Self::HEADER.to_vec());
        out.push('\n');
        for r in &grid {
            out.push_str(&line(r.iter().map(String::as_str).collect()));
            out.push('\n');
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_rows() {
        let reports = [
            RunReport::from_frequency("HSC1", Condition::Healthy, 5.10),
            RunReport::from_frequency("DSC1", Condition::Damaged, 4.51),
            RunReport::from_frequency("HAC1", Condition::Healthy, 5.38),
            RunReport::from_frequency("DAC1", Condition::Damaged, 4.75),
        ];
        let t = compare_runs(&reports, (5.09, 4.51)).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "HSC1,5.10,0.2,DSC1,4.51,0.0");
        assert_eq!(lines[2], "HAC1,5.38,5.7,DAC1,4.75,5.3");
        assert!(t.warnings.is_empty());
    }

    #[test]
    fn missing_counterpart_leaves_blanks() {
        let t = compare_runs(&[RunReport::from_frequency("HUC1", Condition::Healthy, 5.01)], (5.09, 4.51)).unwrap();
        assert_eq!(t.to_csv().lines().nth(1).unwrap(), "HUC1,5.01,1.6,,,");
        assert_eq!(t.warnings.len(), 1);
        assert!(t.to_console().contains("warning: HUC1"));
    }

    #[test]
    fn empty_input_rejected() {
        assert!(compare_runs(&[], (5.09, 4.51)).is_err());
    }
}
