//! Hand-hygiene feature extractors.
//!
//! Per-frame features (palm opposition, palm shape, finger spread,
//! inter-palm distance) and windowed ones (trajectory, movement frequency)
//! are composed by [`extract_feature_vector`] into a [`FeatureVector`].

mod frequency;
mod hand;
mod signature;
mod trajectory;

pub use frequency::{estimate_frequency, find_crossings, frequency_from_crossings, Crossings};
pub use hand::{
    classify_palm_shape, finger_spread, inter_palm_distance, is_stacked, palm_opposition,
    OppositionResult, PalmShape, Spread, SpreadResult,
};
pub use signature::{match_signature, Discriminative, SignatureMatch, StageId, StageSignature};
pub use trajectory::{
    classify_trajectory, fit_circle, path_length, CircleFit, Trajectory, MAX_TRAJECTORY_SPAN_S,
    MIN_TRAJECTORY_SAMPLES, MIN_TRAJECTORY_SPAN_S,
};

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::config::{Aggregation, Config};
use crate::frame_model::{Frame, Handedness};
use crate::geometry::{mean_of, median_of, Vec3};

/// Minimum fraction of window frames that must carry at least one hand.
pub const MIN_HAND_PRESENCE: f64 = 0.8;
pub const MIN_WINDOW_SPAN_S: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("palm normal has length {norm}, expected unit length")]
    NonUnitNormal { norm: f64 },
    #[error("grab strength {value} outside [0, 1]")]
    GrabOutOfRange { value: f64 },
    #[error("too few samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("window span {span_s} s outside [{MIN_TRAJECTORY_SPAN_S}, {MAX_TRAJECTORY_SPAN_S}] s")]
    WindowSpanOutOfRange { span_s: f64 },
    #[error("insufficient window: {0}")]
    InsufficientWindow(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PalmOrientation {
    FacingEachOther,
    OnePalmOverOther,
    Other,
}

/// Windowed feature summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureVector {
    pub palm_orientation: PalmOrientation,
    /// `None` when the hand never appears in the window.
    pub palm_shape_left: Option<PalmShape>,
    pub palm_shape_right: Option<PalmShape>,
    pub finger_spread_left: Spread,
    pub finger_spread_right: Spread,
    pub trajectory: Trajectory,
    /// Hz
    pub movement_frequency: Option<f64>,
    /// mm, over two-hand frames
    pub inter_palm_distance: Option<f64>,
    /// Seconds covered by the window's frames.
    pub window_span: f64,
    /// Aggregated grab strength per hand.
    pub grab_left: Option<f64>,
    pub grab_right: Option<f64>,
    /// Aggregated minimum adjacent fingertip distance per hand, mm.
    pub fingertip_distance_left: Option<f64>,
    pub fingertip_distance_right: Option<f64>,
}

impl fmt::Display for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn opt<T: fmt::Debug>(v: &Option<T>) -> String {
            v.as_ref().map_or("-".into(), |x| format!("{x:?}"))
        }
        fn num(v: Option<f64>) -> String {
            v.map_or("-".into(), |x| format!("{x:.3}"))
        }
        write!(
            f,
            "orientation={:?} shape_l={} shape_r={} spread_l={:?} spread_r={:?} trajectory={:?} freq_hz={} ipd_mm={} span_s={:.3}",
            self.palm_orientation,
            opt(&self.palm_shape_left),
            opt(&self.palm_shape_right),
            self.finger_spread_left,
            self.finger_spread_right,
            self.trajectory,
            num(self.movement_frequency),
            num(self.inter_palm_distance),
            self.window_span,
        )
    }
}

/// Duration covered by `frames`: first-to-last span plus one mean frame
/// interval, so 100 frames at 100 fps cover exactly one second.
pub fn covered_span_s(frames: &[Frame]) -> f64 {
    match frames {
        [] => 0.0,
        [_] => 0.0,
        [first, .., last] => {
            let span = (last.timestamp_ms - first.timestamp_ms) as f64 / 1000.0;
            span * frames.len() as f64 / (frames.len() - 1) as f64
        }
    }
}

fn aggregate(values: &[f64], how: Aggregation) -> Option<f64> {
    match how {
        Aggregation::Mean => mean_of(values),
        Aggregation::Median => median_of(values),
    }
}

/// The hand seen in more frames; ties go to the right hand.
fn dominant_hand(window: &[Frame]) -> Handedness {
    let left = window.iter().filter(|f| f.left.is_some()).count();
    let right = window.iter().filter(|f| f.right.is_some()).count();
    if left > right {
        Handedness::Left
    } else {
        Handedness::Right
    }
}

pub fn extract_feature_vector(window: &[Frame], cfg: &Config) -> Result<FeatureVector, FeatureError> {
    let window_span = covered_span_s(window);
    if window_span + 1e-9 < MIN_WINDOW_SPAN_S {
        return Err(FeatureError::InsufficientWindow(format!(
            "span {window_span:.3} s below {MIN_WINDOW_SPAN_S} s"
        )));
    }
    let with_hands = window.iter().filter(|f| f.hand_count() > 0).count();
    let presence = with_hands as f64 / window.len() as f64;
    if presence < MIN_HAND_PRESENCE {
        return Err(FeatureError::InsufficientWindow(format!(
            "hands present in {:.0}% of frames, need {:.0}%",
            presence * 100.0,
            MIN_HAND_PRESENCE * 100.0
        )));
    }

    // orientation vote over two-hand frames
    let (mut pairs, mut facing, mut stacked) = (0usize, 0usize, 0usize);
    let mut distances = Vec::new();
    for (l, r) in window.iter().filter_map(Frame::both) {
        pairs += 1;
        if palm_opposition(&l.palm_normal, &r.palm_normal, cfg)?.facing {
            facing += 1;
        } else if is_stacked(l, r, cfg) {
            stacked += 1;
        }
        distances.push(inter_palm_distance(&l.palm_position, &r.palm_position));
    }
    let vote = |count: usize| pairs > 0 && count as f64 >= cfg.orientation_vote * pairs as f64;
    let palm_orientation = if vote(facing) {
        PalmOrientation::FacingEachOther
    } else if vote(stacked) {
        PalmOrientation::OnePalmOverOther
    } else {
        PalmOrientation::Other
    };

    let per_hand = |side: Handedness| -> Result<HandSummary, FeatureError> {
        let hands: Vec<_> = window.iter().filter_map(|f| f.hand(side)).collect();
        let grabs: Vec<f64> = hands.iter().map(|h| h.grab_strength).collect();
        let grab = aggregate(&grabs, cfg.aggregation);
        let shape = grab.map(|g| classify_palm_shape(g, cfg)).transpose()?;
        let spacings: Vec<f64> = hands
            .iter()
            .map(|h| finger_spread(&h.fingertips, cfg))
            .filter(|s| s.spread != Spread::Unknown)
            .filter_map(|s| s.min_adjacent_distance)
            .collect();
        let spacing = aggregate(&spacings, cfg.aggregation);
        let spread = match spacing {
            Some(d) if d >= cfg.open_min_spacing_mm => Spread::Open,
            Some(_) => Spread::Closed,
            None => Spread::Unknown,
        };
        Ok((grab, shape, spacing, spread))
    };
    let (grab_left, palm_shape_left, fingertip_distance_left, finger_spread_left) = per_hand(Handedness::Left)?;
    let (grab_right, palm_shape_right, fingertip_distance_right, finger_spread_right) = per_hand(Handedness::Right)?;

    let side = dominant_hand(window);
    let (positions, times): (Vec<Vec3>, Vec<u64>) = window
        .iter()
        .filter_map(|f| f.hand(side).map(|h| (h.palm_position, f.timestamp_ms)))
        .unzip();
    let trajectory = trailing_trajectory(&positions, &times, cfg);
    let movement_frequency = match estimate_frequency(&positions, &times, cfg) {
        Ok(f) => f,
        Err(FeatureError::TooFewSamples { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(FeatureVector {
        palm_orientation,
        palm_shape_left,
        palm_shape_right,
        finger_spread_left,
        finger_spread_right,
        trajectory,
        movement_frequency,
        inter_palm_distance: aggregate(&distances, cfg.aggregation),
        window_span,
        grab_left,
        grab_right,
        fingertip_distance_left,
        fingertip_distance_right,
    })
}

/// Grab, palm shape, fingertip spacing and spread for one hand.
type HandSummary = (Option<f64>, Option<PalmShape>, Option<f64>, Spread);

/// Trajectory over at most the trailing five seconds of the hand's path.
fn trailing_trajectory(positions: &[Vec3], times: &[u64], cfg: &Config) -> Trajectory {
    let Some(&last) = times.last() else {
        return Trajectory::Indeterminate;
    };
    let horizon = (MAX_TRAJECTORY_SPAN_S * 1000.0) as u64;
    let start = times.partition_point(|&t| t + horizon < last);
    let span = (last - times[start]) as f64 / 1000.0;
    classify_trajectory(&positions[start..], span.clamp(MIN_TRAJECTORY_SPAN_S, MAX_TRAJECTORY_SPAN_S), cfg)
        .ok()
        .filter(|_| span >= MIN_TRAJECTORY_SPAN_S)
        .unwrap_or(Trajectory::Indeterminate)
}
