//! Frame-stream data model: per-hand observations, frames and streams.
//!
//! Coordinates follow the tracker convention: right-handed, origin at the
//! sensor centre, y up away from the sensor, millimetres. The convention is
//! documented, not enforced.

mod csv_io;
mod merge;

pub use csv_io::{parse_csv_stream, write_csv_stream, CsvError, CSV_HEADER};
pub use merge::{merge_hand_streams, HandRecord};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

/// Tolerance beyond which a palm normal is rejected rather than renormalized.
pub const NORMAL_TOLERANCE: f64 = 1e-3;
pub const MIN_FPS: f64 = 50.0;
pub const MAX_FPS: f64 = 200.0;
/// Rate assumed when a stream is too short to estimate one.
pub const DEFAULT_FPS: f64 = 100.0;

pub const FINGER_NAMES: [&str; 5] = ["thumb", "index", "middle", "ring", "pinky"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("frame at {timestamp_ms} ms has two {handedness} hands")]
    DuplicateHandedness {
        timestamp_ms: u64,
        handedness: Handedness,
    },
    #[error("palm normal has length {norm}, expected 1 within {NORMAL_TOLERANCE}")]
    NonUnitNormal { norm: f64 },
    #[error("grab strength {value} outside [0, 1]")]
    GrabOutOfRange { value: f64 },
    #[error("frame {index} ({timestamp_ms} ms) is not after its predecessor")]
    NonMonotonicTimestamp { index: usize, timestamp_ms: u64 },
    #[error("nominal rate {fps} fps outside [{MIN_FPS}, {MAX_FPS}]")]
    FpsOutOfRange { fps: f64 },
    #[error("non-finite value in hand observation")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Handedness {
    Left,
    Right,
}

impl Handedness {
    pub fn other(self) -> Self {
        match self {
            Handedness::Left => Handedness::Right,
            Handedness::Right => Handedness::Left,
        }
    }
}

impl fmt::Display for Handedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Handedness::Left => "Left",
            Handedness::Right => "Right",
        })
    }
}

/// One tracked hand in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct HandObservation {
    pub handedness: Handedness,
    /// mm
    pub palm_position: Vec3,
    /// Unit vector pointing out of the palm.
    pub palm_normal: Vec3,
    /// mm/s
    pub palm_velocity: Vec3,
    /// 0 is a flat hand, 1 a fist.
    pub grab_strength: f64,
    /// Thumb to pinky; `None` for an untracked finger.
    pub fingertips: [Option<Vec3>; 5],
}

impl HandObservation {
    /// Checks the observation invariants, renormalizing a near-unit normal.
    pub fn validated(mut self) -> Result<Self, FrameError> {
        let finite = |v: &Vec3| v.iter().all(|c| c.is_finite());
        if !finite(&self.palm_position)
            || !finite(&self.palm_normal)
            || !finite(&self.palm_velocity)
            || !self.fingertips.iter().flatten().all(finite)
        {
            return Err(FrameError::NonFinite);
        }
        let norm = self.palm_normal.norm();
        if (norm - 1.0).abs() > NORMAL_TOLERANCE {
            return Err(FrameError::NonUnitNormal { norm });
        }
        self.palm_normal /= norm;
        if !(0.0..=1.0).contains(&self.grab_strength) {
            return Err(FrameError::GrabOutOfRange {
                value: self.grab_strength,
            });
        }
        Ok(self)
    }
}

/// Unvalidated frame as delivered by a tracker or a file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFrame {
    pub timestamp_ms: u64,
    pub hands: Vec<HandObservation>,
}

/// A validated frame holding at most one hand of each side.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// Milliseconds since stream start.
    pub timestamp_ms: u64,
    pub left: Option<HandObservation>,
    pub right: Option<HandObservation>,
}

impl Frame {
    pub fn empty(timestamp_ms: u64) -> Self {
        Self {
            timestamp_ms,
            left: None,
            right: None,
        }
    }

    /// Number of tracked hands; a drop from two to one signals occlusion.
    pub fn hand_count(&self) -> usize {
        self.left.is_some() as usize + self.right.is_some() as usize
    }

    pub fn hand(&self, side: Handedness) -> Option<&HandObservation> {
        match side {
            Handedness::Left => self.left.as_ref(),
            Handedness::Right => self.right.as_ref(),
        }
    }

    pub fn hand_mut(&mut self, side: Handedness) -> &mut Option<HandObservation> {
        match side {
            Handedness::Left => &mut self.left,
            Handedness::Right => &mut self.right,
        }
    }

    pub fn hands(&self) -> impl Iterator<Item = &HandObservation> {
        self.left.iter().chain(self.right.iter())
    }

    pub fn both(&self) -> Option<(&HandObservation, &HandObservation)> {
        Some((self.left.as_ref()?, self.right.as_ref()?))
    }

    pub fn timestamp_s(&self) -> f64 {
        self.timestamp_ms as f64 / 1000.0
    }
}

/// Validates a raw frame, placing each hand in its slot.
pub fn validate_frame(raw: RawFrame) -> Result<Frame, FrameError> {
    let mut frame = Frame::empty(raw.timestamp_ms);
    for hand in raw.hands {
        let side = hand.handedness;
        let slot = frame.hand_mut(side);
        if slot.is_some() {
            return Err(FrameError::DuplicateHandedness {
                timestamp_ms: raw.timestamp_ms,
                handedness: side,
            });
        }
        *slot = Some(hand.validated()?);
    }
    Ok(frame)
}

/// Ordered frames with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStream {
    frames: Vec<Frame>,
    nominal_fps: f64,
}

impl FrameStream {
    pub fn new(frames: Vec<Frame>, nominal_fps: f64) -> Result<Self, FrameError> {
        if !(MIN_FPS..=MAX_FPS).contains(&nominal_fps) {
            return Err(FrameError::FpsOutOfRange { fps: nominal_fps });
        }
        for (index, pair) in frames.windows(2).enumerate() {
            if pair[1].timestamp_ms <= pair[0].timestamp_ms {
                return Err(FrameError::NonMonotonicTimestamp {
                    index: index + 1,
                    timestamp_ms: pair[1].timestamp_ms,
                });
            }
        }
        Ok(Self {
            frames,
            nominal_fps,
        })
    }

    /// Builds a stream whose rate is estimated from the frame timestamps.
    ///
    /// The estimate is clamped into the supported rate band; timestamps stay
    /// authoritative for every time-based computation.
    pub fn with_estimated_fps(frames: Vec<Frame>) -> Result<Self, FrameError> {
        let fps = estimate_fps(&frames)
            .unwrap_or(DEFAULT_FPS)
            .clamp(MIN_FPS, MAX_FPS);
        Self::new(frames, fps)
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn nominal_fps(&self) -> f64 {
        self.nominal_fps
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Span between first and last frame in seconds.
    pub fn span_s(&self) -> f64 {
        span_s(&self.frames)
    }

    /// Frames with `start_ms <= t < end_ms`.
    pub fn slice_ms(&self, start_ms: u64, end_ms: u64) -> &[Frame] {
        let lo = self.frames.partition_point(|f| f.timestamp_ms < start_ms);
        let hi = self.frames.partition_point(|f| f.timestamp_ms < end_ms);
        &self.frames[lo..hi.max(lo)]
    }
}

pub fn span_s(frames: &[Frame]) -> f64 {
    match (frames.first(), frames.last()) {
        (Some(a), Some(b)) => (b.timestamp_ms - a.timestamp_ms) as f64 / 1000.0,
        _ => 0.0,
    }
}

/// `(count - 1) / span` over the frame timestamps; `None` below two frames.
pub fn estimate_fps(frames: &[Frame]) -> Option<f64> {
    let span = span_s(frames);
    (frames.len() >= 2 && span > 0.0).then(|| (frames.len() - 1) as f64 / span)
}
