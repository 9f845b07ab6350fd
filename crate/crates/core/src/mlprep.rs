//! Labeled two-hand feature datasets for offline classifier training.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::config::Config;
use crate::features::{extract_feature_vector, FeatureError, FeatureVector, PalmOrientation, Trajectory};
use crate::frame_model::Frame;

pub const DATASET_HEADER: [&str; 10] = [
    "sample_no", "curv_l", "curv_r", "ftd_l", "ftd_r", "orient", "traj", "freq_hz", "ipd_mm", "label",
];

#[derive(Debug, Error)]
pub enum MlprepError {
    #[error("window {index}: {source}")]
    InsufficientWindow { index: usize, source: FeatureError },
    #[error("window {index}: label is empty")]
    EmptyLabel { index: usize },
    #[error("manifest {path}: {source}")]
    Manifest { path: PathBuf, source: csv::Error },
    #[error("writing dataset: {0}")]
    Write(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy)]
pub struct LabeledWindow<'a> {
    pub frames: &'a [Frame],
    pub label: &'a str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub sample_no: usize,
    /// Grab strength aggregated over the window, [0, 1].
    pub hand_curvature_left: Option<f64>,
    pub hand_curvature_right: Option<f64>,
    /// Minimum adjacent fingertip distance, mm.
    pub fingertip_distance_left: Option<f64>,
    pub fingertip_distance_right: Option<f64>,
    pub orientation_code: u8,
    pub trajectory_code: u8,
    pub frequency_hz: Option<f64>,
    pub inter_palm_distance_mm: Option<f64>,
    pub gesture_class: String,
}

impl DatasetRow {
    pub fn from_features(sample_no: usize, v: &FeatureVector, label: &str) -> Self {
        Self {
            sample_no,
            hand_curvature_left: v.grab_left,
            hand_curvature_right: v.grab_right,
            fingertip_distance_left: v.fingertip_distance_left,
            fingertip_distance_right: v.fingertip_distance_right,
            orientation_code: orientation_code(v.palm_orientation),
            trajectory_code: trajectory_code(v.trajectory),
            frequency_hz: v.movement_frequency,
            inter_palm_distance_mm: v.inter_palm_distance,
            gesture_class: label.to_string(),
        }
    }

    fn cells(&self) -> [String; 10] {
        [
            self.sample_no.to_string(),
            format_cell(self.hand_curvature_left),
            format_cell(self.hand_curvature_right),
            format_cell(self.fingertip_distance_left),
            format_cell(self.fingertip_distance_right),
            self.orientation_code.to_string(),
            self.trajectory_code.to_string(),
            format_cell(self.frequency_hz),
            format_cell(self.inter_palm_distance_mm),
            self.gesture_class.clone(),
        ]
    }
}

pub fn orientation_code(o: PalmOrientation) -> u8 {
    match o {
        PalmOrientation::Other => 0,
        PalmOrientation::FacingEachOther => 1,
        PalmOrientation::OnePalmOverOther => 2,
    }
}

pub fn trajectory_code(t: Trajectory) -> u8 {
    match t {
        Trajectory::Indeterminate => 0,
        Trajectory::Linear => 1,
        Trajectory::Circular => 2,
    }
}

/// Six decimals with trailing zeros dropped; empty when absent.
pub fn format_cell(v: Option<f64>) -> String {
    let Some(v) = v else {
        return String::new();
    };
    let text = format!("{v:.6}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    if text == "-0" {
        "0".into()
    } else {
        text.to_string()
    }
}

pub fn build_dataset(windows: &[LabeledWindow<'_>], cfg: &Config) -> Result<Vec<DatasetRow>, MlprepError> {
    windows
        .iter()
        .enumerate()
        .map(|(index, w)| {
            if w.label.trim().is_empty() {
                return Err(MlprepError::EmptyLabel { index });
            }
            let v = extract_feature_vector(w.frames, cfg)
                .map_err(|source| MlprepError::InsufficientWindow { index, source })?;
            Ok(DatasetRow::from_features(index + 1, &v, w.label))
        })
        .collect()
}

pub fn write_dataset(rows: &[DatasetRow]) -> Result<String, MlprepError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(DATASET_HEADER)?;
    for row in rows {
        w.write_record(row.cells())?;
    }
    let bytes = w.into_inner().map_err(|e| MlprepError::Write(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("dataset is utf-8"))
}

/// One manifest line: a stream pair, a time range and its class label.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ManifestEntry {
    pub left: PathBuf,
    pub right: PathBuf,
    pub start_ms: u64,
    pub end_ms: u64,
    pub label: String,
}

/// Reads `left,right,start_ms,end_ms,label`; relative paths resolve
/// against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, MlprepError> {
    let wrap = |source| MlprepError::Manifest {
        path: path.to_path_buf(),
        source,
    };
    let base = path.parent().unwrap_or(Path::new(""));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(wrap)?;
    reader
        .deserialize::<ManifestEntry>()
        .map(|entry| {
            let mut e = entry.map_err(wrap)?;
            e.left = base.join(&e.left);
            e.right = base.join(&e.right);
            Ok(e)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_trim_trailing_zeros() {
        assert_eq!(format_cell(Some(0.6)), "0.6");
        assert_eq!(format_cell(Some(25.66)), "25.66");
        assert_eq!(format_cell(Some(3.0)), "3");
        assert_eq!(format_cell(Some(-0.0000001)), "0");
        assert_eq!(format_cell(None), "");
    }

    #[test]
    fn empty_input_gives_header_only() {
        let rows = build_dataset(&[], &Config::default()).unwrap();
        assert!(rows.is_empty());
        assert_eq!(write_dataset(&rows).unwrap(), format!("{}\n", DATASET_HEADER.join(",")));
    }

    #[test]
    fn labels_with_commas_are_quoted() {
        let row = DatasetRow {
            sample_no: 1,
            hand_curvature_left: Some(0.1),
            hand_curvature_right: None,
            fingertip_distance_left: None,
            fingertip_distance_right: None,
            orientation_code: 1,
            trajectory_code: 2,
            frequency_hz: None,
            inter_palm_distance_mm: None,
            gesture_class: "rub, palm".into(),
        };
        let text = write_dataset(&[row]).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "1,0.1,,,,1,2,,,\"rub, palm\"");
    }
}
