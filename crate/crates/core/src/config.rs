//! Threshold configuration shared by the feature extractors and the
//! stage detector.
//!
//! Every tunable lives in one flat record so the published constants
//! (0.4 facing resultant, 0.3 flat grab, 17 mm open spread, 0.8-3.6 Hz rub
//! rate, 2-7 s stage duration) stay visible and overridable. The file form
//! is flat `key = value` TOML; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config key `{key}` = {value} is outside {range}")]
    OutOfRange {
        key: &'static str,
        value: f64,
        range: &'static str,
    },
}

/// How per-frame scalars are summarized over a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Mean,
    Median,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    // per-frame features
    pub facing_max_resultant: f64,
    pub flat_max_grab: f64,
    pub open_min_spacing_mm: f64,

    // trajectory
    pub line_variance_ratio: f64,
    pub circle_max_relative_residual: f64,
    pub circle_min_radius_mm: f64,
    pub circle_max_radius_mm: f64,
    pub stationary_path_mm: f64,

    // frequency
    pub min_oscillation_mm: f64,

    // windowed orientation
    pub orientation_vote: f64,
    pub stacked_min_resultant: f64,
    pub stacked_max_angle_deg: f64,
    pub aggregation: Aggregation,

    // stage detector
    pub facing_dwell_s: f64,
    pub not_facing_alert_s: f64,
    pub approach_window_s: f64,
    pub approach_slope_mm_s: f64,
    pub contact_distance_mm: f64,
    pub rotation_sweep_deg: f64,
    pub rotation_min_speed_mm_s: f64,
    pub rub_min_hz: f64,
    pub rub_max_hz: f64,
    pub stage_min_s: f64,
    pub stage_max_s: f64,
    pub hands_lost_timeout_s: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            facing_max_resultant: 0.4,
            flat_max_grab: 0.3,
            open_min_spacing_mm: 17.0,
            line_variance_ratio: 0.95,
            circle_max_relative_residual: 0.10,
            circle_min_radius_mm: 5.0,
            circle_max_radius_mm: 200.0,
            stationary_path_mm: 10.0,
            min_oscillation_mm: 5.0,
            orientation_vote: 0.70,
            stacked_min_resultant: 1.6,
            stacked_max_angle_deg: 30.0,
            aggregation: Aggregation::Mean,
            facing_dwell_s: 0.3,
            not_facing_alert_s: 2.0,
            approach_window_s: 0.5,
            approach_slope_mm_s: -20.0,
            contact_distance_mm: 30.0,
            rotation_sweep_deg: 180.0,
            rotation_min_speed_mm_s: 20.0,
            rub_min_hz: 0.8,
            rub_max_hz: 3.6,
            stage_min_s: 2.0,
            stage_max_s: 7.0,
            hands_lost_timeout_s: 1.0,
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn check(
            key: &'static str,
            value: f64,
            ok: bool,
            range: &'static str,
        ) -> Result<(), ConfigError> {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange { key, value, range })
            }
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        let pos = |v: f64| v > 0.0;

        check("facing_max_resultant", self.facing_max_resultant, (0.0..=2.0).contains(&self.facing_max_resultant), "[0, 2]")?;
        check("flat_max_grab", self.flat_max_grab, unit(self.flat_max_grab), "[0, 1]")?;
        check("open_min_spacing_mm", self.open_min_spacing_mm, pos(self.open_min_spacing_mm), "(0, inf)")?;
        check("line_variance_ratio", self.line_variance_ratio, self.line_variance_ratio > 1.0 / 3.0 && self.line_variance_ratio <= 1.0, "(1/3, 1]")?;
        check("circle_max_relative_residual", self.circle_max_relative_residual, pos(self.circle_max_relative_residual), "(0, inf)")?;
        check("circle_min_radius_mm", self.circle_min_radius_mm, pos(self.circle_min_radius_mm), "(0, inf)")?;
        check("circle_max_radius_mm", self.circle_max_radius_mm, self.circle_max_radius_mm > self.circle_min_radius_mm, "(circle_min_radius_mm, inf)")?;
        check("stationary_path_mm", self.stationary_path_mm, self.stationary_path_mm >= 0.0, "[0, inf)")?;
        check("min_oscillation_mm", self.min_oscillation_mm, self.min_oscillation_mm >= 0.0, "[0, inf)")?;
        check("orientation_vote", self.orientation_vote, self.orientation_vote > 0.0 && self.orientation_vote <= 1.0, "(0, 1]")?;
        check("stacked_min_resultant", self.stacked_min_resultant, (0.0..=2.0).contains(&self.stacked_min_resultant), "[0, 2]")?;
        check("stacked_max_angle_deg", self.stacked_max_angle_deg, (0.0..=90.0).contains(&self.stacked_max_angle_deg), "[0, 90]")?;
        check("facing_dwell_s", self.facing_dwell_s, self.facing_dwell_s >= 0.0, "[0, inf)")?;
        check("not_facing_alert_s", self.not_facing_alert_s, pos(self.not_facing_alert_s), "(0, inf)")?;
        check("approach_window_s", self.approach_window_s, pos(self.approach_window_s), "(0, inf)")?;
        check("approach_slope_mm_s", self.approach_slope_mm_s, self.approach_slope_mm_s < 0.0, "(-inf, 0)")?;
        check("contact_distance_mm", self.contact_distance_mm, pos(self.contact_distance_mm), "(0, inf)")?;
        check("rotation_sweep_deg", self.rotation_sweep_deg, pos(self.rotation_sweep_deg), "(0, inf)")?;
        check("rotation_min_speed_mm_s", self.rotation_min_speed_mm_s, self.rotation_min_speed_mm_s >= 0.0, "[0, inf)")?;
        check("rub_min_hz", self.rub_min_hz, pos(self.rub_min_hz), "(0, inf)")?;
        check("rub_max_hz", self.rub_max_hz, self.rub_max_hz >= self.rub_min_hz, "[rub_min_hz, inf)")?;
        check("stage_min_s", self.stage_min_s, self.stage_min_s >= 0.0, "[0, inf)")?;
        check("stage_max_s", self.stage_max_s, self.stage_max_s >= self.stage_min_s, "[stage_min_s, inf)")?;
        check("hands_lost_timeout_s", self.hands_lost_timeout_s, pos(self.hands_lost_timeout_s), "(0, inf)")?;
        Ok(())
    }
}
