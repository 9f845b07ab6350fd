//! Seeded generator of ground-truth-labeled two-hand streams.
//!
//! Geometry: hands hover 200 mm above the sensor, palms facing along x with
//! the contact midpoint at `(0, 200, 0)`. The left hand is the point
//! reflection of the right through that midpoint, so a hidden hand can be
//! restored exactly from the surviving one. Noise perturbs palm positions
//! only; fingertips move rigidly with their palm.

mod perturb;
mod primitive;
mod script;

pub use perturb::{perturb, Perturbation};
pub use primitive::{generate_primitive, PrimitiveParams};
pub use script::{
    GestureScript, OcclusionModel, PhaseKind, PhaseSpec, PrimitiveKind, DEFAULT_RUB_HZ,
    DEFAULT_RUB_RADIUS_MM, DEFAULT_STAGE3_AMPLITUDE_MM, DEFAULT_START_SEPARATION_MM,
};

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::frame_model::{Frame, FrameError, FrameStream, HandObservation, Handedness};
use crate::geometry::Vec3;

pub const CONTACT_MIDPOINT: Vec3 = Vec3::new(0.0, 200.0, 0.0);
pub const FLAT_GRAB: f64 = 0.1;
pub const CLOSED_SPACING_MM: f64 = 10.0;
pub const OPEN_SPACING_MM: f64 = 20.0;
const FINGER_REACH_MM: f64 = 80.0;
const STAGE3_STACK_MM: f64 = 50.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid script: {0}")]
    InvalidScript(String),
    #[error("no frames labeled {0:?}")]
    UnknownPhase(PhaseKind),
    #[error("labels do not cover the stream ({labels} labels, {frames} frames)")]
    LabelMismatch { labels: usize, frames: usize },
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Ground truth for one generated frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameLabel {
    pub phase_index: usize,
    pub kind: PhaseKind,
    /// Set when a hand was hidden by contact; the point it mirrors through.
    pub contact_midpoint: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledStream {
    pub stream: FrameStream,
    pub labels: Vec<FrameLabel>,
}

/// Point reflection of a hand through `midpoint`, assigned to the other side.
pub fn mirror_hand(hand: &HandObservation, midpoint: &Vec3) -> HandObservation {
    let reflect = |p: &Vec3| 2.0 * midpoint - p;
    HandObservation {
        handedness: hand.handedness.other(),
        palm_position: reflect(&hand.palm_position),
        palm_normal: -hand.palm_normal,
        palm_velocity: Vec3::zeros() - hand.palm_velocity,
        grab_strength: hand.grab_strength,
        fingertips: hand.fingertips.map(|t| t.map(|p| reflect(&p))),
    }
}

pub(crate) fn shift_hand(hand: &mut HandObservation, offset: &Vec3) {
    hand.palm_position += offset;
    for tip in hand.fingertips.iter_mut().flatten() {
        *tip += offset;
    }
}

fn fingertips(palm: &Vec3, forward: &Vec3, across: &Vec3, spacing: f64) -> [Option<Vec3>; 5] {
    std::array::from_fn(|k| Some(palm + forward * FINGER_REACH_MM + across * ((k as f64 - 2.0) * spacing)))
}

/// Right hand in the palm-to-palm pose at `separation`, displaced by
/// `offset` and moving at `velocity`.
fn palm_to_palm_right(separation: f64, offset: Vec3, velocity: Vec3) -> HandObservation {
    let palm = CONTACT_MIDPOINT + Vec3::x() * (separation / 2.0) + offset;
    HandObservation {
        handedness: Handedness::Right,
        palm_position: palm,
        palm_normal: -Vec3::x(),
        palm_velocity: velocity,
        grab_strength: FLAT_GRAB,
        fingertips: fingertips(&palm, &-Vec3::z(), &Vec3::y(), CLOSED_SPACING_MM),
    }
}

struct Kinematics {
    separation: f64,
}

/// Both hands for one frame of a palm-to-palm phase, before occlusion.
fn palm_to_palm_pair(
    script: &GestureScript,
    right: HandObservation,
) -> (HandObservation, HandObservation) {
    let mut left = mirror_hand(&right, &CONTACT_MIDPOINT);
    let mut right = right;
    if !script.palms_facing {
        left.palm_normal = -Vec3::y();
        right.palm_normal = -Vec3::y();
    }
    (left, right)
}

fn primitive_offset(kind: PrimitiveKind, radius: f64, omega: f64, t: f64, duration: f64) -> (Vec3, Vec3) {
    match kind {
        PrimitiveKind::Sinusoid1D => (
            Vec3::z() * (radius * (omega * t).sin()),
            Vec3::z() * (radius * omega * (omega * t).cos()),
        ),
        PrimitiveKind::Circle => (
            (Vec3::y() * (omega * t).cos() + Vec3::z() * (omega * t).sin()) * radius,
            (-Vec3::y() * (omega * t).sin() + Vec3::z() * (omega * t).cos()) * (radius * omega),
        ),
        PrimitiveKind::Line => {
            let speed = 2.0 * radius / duration;
            (Vec3::z() * (-radius + speed * t), Vec3::z() * speed)
        }
        PrimitiveKind::Static => (Vec3::zeros(), Vec3::zeros()),
    }
}

/// Renders the script into a labeled stream. Deterministic given the seed.
pub fn generate(script: &GestureScript) -> Result<LabeledStream, SynthError> {
    script.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(script.seed);
    let noise = Normal::new(0.0, script.noise_sigma_mm.max(f64::MIN_POSITIVE))
        .map_err(|e| SynthError::InvalidScript(e.to_string()))?;
    let jitter = |rng: &mut ChaCha8Rng| {
        if script.noise_sigma_mm > 0.0 {
            Vec3::new(noise.sample(rng), noise.sample(rng), noise.sample(rng))
        } else {
            Vec3::zeros()
        }
    };

    let timestamp = |i: usize| (i as f64 * 1000.0 / script.fps).round() as u64;
    let mut frames = Vec::new();
    let mut labels = Vec::new();
    let mut state = Kinematics {
        separation: DEFAULT_START_SEPARATION_MM,
    };
    let mut elapsed = 0.0;
    for (phase_index, phase) in script.phases.iter().enumerate() {
        let first = (elapsed * script.fps).round() as usize;
        elapsed += phase.duration_s;
        let end = (elapsed * script.fps).round() as usize;
        if let Some(s) = phase.start_separation_mm {
            state.separation = s;
        }
        let start_separation = state.separation;
        let approach_speed = phase.approach_speed_mm_s.unwrap_or(
            (start_separation - script.contact_separation_mm).max(0.0) / phase.duration_s,
        );
        let omega = TAU * phase.frequency_hz();
        let radius = phase.radius_mm();
        let t0 = timestamp(first);

        for i in first..end {
            let ts = timestamp(i);
            let t = (ts - t0) as f64 / 1000.0;
            let mut frame = Frame::empty(ts);
            let mut label = FrameLabel {
                phase_index,
                kind: phase.kind,
                contact_midpoint: None,
            };
            let pair = match phase.kind {
                PhaseKind::Idle => None,
                PhaseKind::FacingHold => Some(palm_to_palm_pair(
                    script,
                    palm_to_palm_right(state.separation, Vec3::zeros(), Vec3::zeros()),
                )),
                PhaseKind::Approach => {
                    let sep = (start_separation - approach_speed * t).max(script.contact_separation_mm);
                    state.separation = sep;
                    let moving = sep > script.contact_separation_mm;
                    let v = if moving { -Vec3::x() * (approach_speed / 2.0) } else { Vec3::zeros() };
                    Some(palm_to_palm_pair(script, palm_to_palm_right(sep, Vec3::zeros(), v)))
                }
                PhaseKind::RubCircular => {
                    state.separation = script.contact_separation_mm;
                    let (offset, v) = primitive_offset(PrimitiveKind::Circle, radius, omega, t, phase.duration_s);
                    Some(palm_to_palm_pair(script, palm_to_palm_right(state.separation, offset, v)))
                }
                PhaseKind::Primitive => {
                    let kind = phase.primitive.expect("validated");
                    let (offset, v) = primitive_offset(kind, radius, omega, t, phase.duration_s);
                    Some(palm_to_palm_pair(script, palm_to_palm_right(state.separation, offset, v)))
                }
                PhaseKind::Stage3Linear => {
                    let (offset, v) = primitive_offset(PrimitiveKind::Sinusoid1D, radius, omega, t, phase.duration_s);
                    let across = Vec3::x();
                    let left_palm = CONTACT_MIDPOINT;
                    let right_palm = CONTACT_MIDPOINT + Vec3::y() * STAGE3_STACK_MM + offset;
                    let hand = |side, palm: Vec3, velocity| HandObservation {
                        handedness: side,
                        palm_position: palm,
                        palm_normal: -Vec3::y(),
                        palm_velocity: velocity,
                        grab_strength: FLAT_GRAB,
                        fingertips: fingertips(&palm, &-Vec3::z(), &across, OPEN_SPACING_MM),
                    };
                    Some((
                        hand(Handedness::Left, left_palm, Vec3::zeros()),
                        hand(Handedness::Right, right_palm, v),
                    ))
                }
            };
            if let Some((mut left, mut right)) = pair {
                shift_hand(&mut left, &jitter(&mut rng));
                shift_hand(&mut right, &jitter(&mut rng));
                frame.left = Some(left);
                frame.right = Some(right);
                let palm_phase = !matches!(phase.kind, PhaseKind::Stage3Linear | PhaseKind::Idle);
                if palm_phase
                    && script.occlusion_model == OcclusionModel::DropOneHandOnContact
                    && state.separation < script.occlusion_distance_mm
                {
                    *frame.hand_mut(script.surviving_hand.other()) = None;
                    label.contact_midpoint = Some(CONTACT_MIDPOINT);
                }
            }
            frames.push(frame);
            labels.push(label);
        }
    }
    Ok(LabeledStream {
        stream: FrameStream::new(frames, script.fps)?,
        labels,
    })
}
