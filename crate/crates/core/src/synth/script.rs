use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::frame_model::{Handedness, MAX_FPS, MIN_FPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    /// No hands in view.
    Idle,
    /// Both hands still at the current separation, palms facing.
    FacingHold,
    /// Palms close linearly towards contact separation.
    Approach,
    /// Palm-to-palm rub: palm circles in the contact plane.
    RubCircular,
    /// One palm over the other's dorsum, rubbing back and forth.
    Stage3Linear,
    /// Palm-to-palm pose moving along a primitive path.
    Primitive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveKind {
    #[serde(rename = "sinusoid_1d")]
    Sinusoid1D,
    Circle,
    Line,
    Static,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OcclusionModel {
    #[default]
    DropOneHandOnContact,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    pub kind: PhaseKind,
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rub_frequency_hz: Option<f64>,
    /// Circle radius for rubs, swing amplitude for linear motions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rub_radius_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approach_speed_mm_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_separation_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primitive: Option<PrimitiveKind>,
}

impl PhaseSpec {
    pub fn new(kind: PhaseKind, duration_s: f64) -> Self {
        Self {
            kind,
            duration_s,
            rub_frequency_hz: None,
            rub_radius_mm: None,
            approach_speed_mm_s: None,
            start_separation_mm: None,
            primitive: None,
        }
    }

    pub fn with_frequency(mut self, hz: f64) -> Self {
        self.rub_frequency_hz = Some(hz);
        self
    }

    pub fn with_radius(mut self, mm: f64) -> Self {
        self.rub_radius_mm = Some(mm);
        self
    }

    pub fn with_start_separation(mut self, mm: f64) -> Self {
        self.start_separation_mm = Some(mm);
        self
    }

    pub fn with_primitive(mut self, kind: PrimitiveKind) -> Self {
        self.primitive = Some(kind);
        self
    }

    pub fn frequency_hz(&self) -> f64 {
        self.rub_frequency_hz.unwrap_or(DEFAULT_RUB_HZ)
    }

    pub fn radius_mm(&self) -> f64 {
        self.rub_radius_mm.unwrap_or(match self.kind {
            PhaseKind::Stage3Linear => DEFAULT_STAGE3_AMPLITUDE_MM,
            _ => DEFAULT_RUB_RADIUS_MM,
        })
    }
}

pub const DEFAULT_RUB_HZ: f64 = 2.0;
pub const DEFAULT_RUB_RADIUS_MM: f64 = 30.0;
pub const DEFAULT_STAGE3_AMPLITUDE_MM: f64 = 20.0;
pub const DEFAULT_START_SEPARATION_MM: f64 = 150.0;

fn default_fps() -> f64 {
    100.0
}
fn default_true() -> bool {
    true
}
fn default_surviving() -> Handedness {
    Handedness::Right
}
fn default_contact() -> f64 {
    10.0
}
fn default_occlusion_distance() -> f64 {
    20.0
}

/// A scripted gesture sequence with its rendering parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GestureScript {
    #[serde(rename = "phase")]
    pub phases: Vec<PhaseSpec>,
    #[serde(default = "default_fps")]
    pub fps: f64,
    /// Gaussian palm-position noise, mm.
    #[serde(default)]
    pub noise_sigma_mm: f64,
    #[serde(default, rename = "occlusion")]
    pub occlusion_model: OcclusionModel,
    #[serde(default)]
    pub seed: u64,
    /// Hand kept when the other is hidden by contact.
    #[serde(default = "default_surviving")]
    pub surviving_hand: Handedness,
    /// When false, palm-to-palm phases hold both palms facing down.
    #[serde(default = "default_true")]
    pub palms_facing: bool,
    /// Palm-centre distance while in contact, mm.
    #[serde(default = "default_contact")]
    pub contact_separation_mm: f64,
    /// One hand is hidden while the separation is below this, mm.
    #[serde(default = "default_occlusion_distance")]
    pub occlusion_distance_mm: f64,
}

impl GestureScript {
    pub fn new(phases: Vec<PhaseSpec>) -> Self {
        Self {
            phases,
            fps: default_fps(),
            noise_sigma_mm: 0.0,
            occlusion_model: OcclusionModel::default(),
            seed: 0,
            surviving_hand: default_surviving(),
            palms_facing: true,
            contact_separation_mm: default_contact(),
            occlusion_distance_mm: default_occlusion_distance(),
        }
    }

    /// Facing hold 1 s, approach 1 s from 150 mm, then a circular rub.
    pub fn canonical(rub_hz: f64, rub_s: f64) -> Self {
        Self::new(vec![
            PhaseSpec::new(PhaseKind::FacingHold, 1.0).with_start_separation(DEFAULT_START_SEPARATION_MM),
            PhaseSpec::new(PhaseKind::Approach, 1.0),
            PhaseSpec::new(PhaseKind::RubCircular, rub_s).with_frequency(rub_hz),
        ])
    }

    pub fn with_noise(mut self, sigma_mm: f64) -> Self {
        self.noise_sigma_mm = sigma_mm;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_fps(mut self, fps: f64) -> Self {
        self.fps = fps;
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SynthError> {
        let script: GestureScript =
            toml::from_str(text).map_err(|e| SynthError::InvalidScript(e.to_string()))?;
        script.validate()?;
        Ok(script)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("script serializes")
    }

    pub fn total_duration_s(&self) -> f64 {
        self.phases.iter().map(|p| p.duration_s).sum()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidScript(msg));
        if !(MIN_FPS..=MAX_FPS).contains(&self.fps) {
            return bad(format!("fps {} outside [{MIN_FPS}, {MAX_FPS}]", self.fps));
        }
        if !(self.noise_sigma_mm >= 0.0 && self.noise_sigma_mm.is_finite()) {
            return bad(format!("noise_sigma_mm {} must be >= 0", self.noise_sigma_mm));
        }
        if !(self.contact_separation_mm >= 0.0) {
            return bad("contact_separation_mm must be >= 0".into());
        }
        if !(self.occlusion_distance_mm > self.contact_separation_mm) {
            return bad("occlusion_distance_mm must exceed contact_separation_mm".into());
        }
        if self.phases.is_empty() {
            return bad("script has no phases".into());
        }
        for (i, p) in self.phases.iter().enumerate() {
            if !(p.duration_s > 0.0 && p.duration_s.is_finite()) {
                return bad(format!("phase {i}: duration must be > 0"));
            }
            let positive = |v: Option<f64>| v.is_none_or(|x| x > 0.0 && x.is_finite());
            if !positive(p.rub_frequency_hz) || !positive(p.rub_radius_mm) || !positive(p.approach_speed_mm_s) {
                return bad(format!("phase {i}: kinematic parameters must be > 0"));
            }
            if p.start_separation_mm.is_some_and(|s| !(s >= 0.0 && s.is_finite())) {
                return bad(format!("phase {i}: start_separation_mm must be >= 0"));
            }
            if p.kind == PhaseKind::Primitive && p.primitive.is_none() {
                return bad(format!("phase {i}: primitive phase needs `primitive`"));
            }
        }
        Ok(())
    }

    /// Ground truth for the palm-to-palm stage, read off the script alone:
    /// facing palms held then brought into occluding contact, followed
    /// directly by a circular rub at 0.8-3.6 Hz, with at least 2 s of
    /// contact.
    pub fn expects_stage2_completion(&self) -> bool {
        self.scripted_contact().is_some_and(|(hz, contact_s)| (0.8..=3.6).contains(&hz) && contact_s >= 2.0)
    }

    /// Rub frequency and seconds of occluding contact (the tail of the
    /// approach plus the rub) for a hold, approach, rub sequence.
    pub fn scripted_contact(&self) -> Option<(f64, f64)> {
        if !self.palms_facing || self.occlusion_model != OcclusionModel::DropOneHandOnContact {
            return None;
        }
        let mut separation = DEFAULT_START_SEPARATION_MM;
        let mut held = false;
        for (i, p) in self.phases.iter().enumerate() {
            if let Some(s) = p.start_separation_mm {
                separation = s;
            }
            match p.kind {
                PhaseKind::FacingHold if separation >= self.occlusion_distance_mm => {
                    held |= p.duration_s >= 0.5;
                }
                PhaseKind::Approach if held => {
                    let speed = p.approach_speed_mm_s.unwrap_or(
                        (separation - self.contact_separation_mm).max(0.0) / p.duration_s,
                    );
                    let end = (separation - speed * p.duration_s).max(self.contact_separation_mm);
                    let reaches_contact = end < self.occlusion_distance_mm && separation - end >= 20.0;
                    if !reaches_contact {
                        return None;
                    }
                    let occluded_s = p.duration_s - (separation - self.occlusion_distance_mm) / speed;
                    return match self.phases.get(i + 1) {
                        Some(rub) if rub.kind == PhaseKind::RubCircular => {
                            Some((rub.frequency_hz(), occluded_s.max(0.0) + rub.duration_s))
                        }
                        _ => None,
                    };
                }
                PhaseKind::Approach => return None,
                _ => {}
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_value_script() {
        let text = r#"
fps = 100
noise_sigma_mm = 1.5
occlusion = "drop_one_hand_on_contact"
seed = 9

[[phase]]
kind = "facing_hold"
duration_s = 1.0
start_separation_mm = 150

[[phase]]
kind = "approach"
duration_s = 1.0

[[phase]]
kind = "rub_circular"
duration_s = 3.0
rub_frequency_hz = 2.0
"#;
        let s = GestureScript::from_toml_str(text).unwrap();
        assert_eq!(s.phases.len(), 3);
        assert_eq!(s.seed, 9);
        assert!(s.expects_stage2_completion());
        assert_eq!(GestureScript::from_toml_str(&s.to_toml_string()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_scripts() {
        let mut s = GestureScript::canonical(2.0, 3.0);
        s.fps = 30.0;
        assert!(s.validate().is_err());
        let mut s = GestureScript::canonical(2.0, 3.0);
        s.phases[0].duration_s = 0.0;
        assert!(s.validate().is_err());
        assert!(GestureScript::from_toml_str("fps = 100\nphase = []\nbogus = 1").is_err());
        let s = GestureScript::new(vec![PhaseSpec::new(PhaseKind::Primitive, 1.0)]);
        assert!(s.validate().is_err());
    }

    #[test]
    fn oracle_labels_ablations() {
        assert!(GestureScript::canonical(2.0, 3.0).expects_stage2_completion());
        let (hz, contact_s) = GestureScript::canonical(2.0, 3.0).scripted_contact().unwrap();
        assert_eq!(hz, 2.0);
        assert!((contact_s - (3.0 + 10.0 / 140.0)).abs() < 1e-12);
        assert!(!GestureScript::canonical(2.0, 1.5).expects_stage2_completion());
        assert!(!GestureScript::canonical(4.0, 3.0).expects_stage2_completion());
        let mut s = GestureScript::canonical(2.0, 3.0);
        s.palms_facing = false;
        assert!(!s.expects_stage2_completion());
        let mut s = GestureScript::canonical(2.0, 3.0);
        s.occlusion_model = OcclusionModel::None;
        assert!(!s.expects_stage2_completion());
        let mut s = GestureScript::canonical(2.0, 3.0);
        s.phases.remove(1);
        assert!(!s.expects_stage2_completion());
        let mut s = GestureScript::canonical(2.0, 3.0);
        s.phases[2] = PhaseSpec::new(PhaseKind::Primitive, 3.0).with_primitive(PrimitiveKind::Sinusoid1D);
        assert!(!s.expects_stage2_completion());
    }
}
