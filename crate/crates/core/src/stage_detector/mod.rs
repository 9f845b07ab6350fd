//! Palm-to-palm rub detector.
//!
//! A single-pass state machine: two facing hands, palms closing in, one hand
//! hidden by contact, rotational rubbing of the surviving hand, then a
//! verdict on rub frequency and duration once the rub ends.

mod report;

pub use report::{Alert, AlertKind, Event, EventKind, Phase, PhaseSpan, StageReport, Verdict};

use std::collections::VecDeque;

use thiserror::Error;

use crate::config::Config;
use crate::features::{estimate_frequency, inter_palm_distance, palm_opposition};
use crate::frame_model::{Frame, FrameStream, Handedness};
use nalgebra::Matrix3;

use crate::geometry::{fit_line, sorted_eigen, Vec3};

/// Largest per-frame change of velocity direction counted as rotation.
const MAX_SWEEP_STEP_DEG: f64 = 90.0;
/// Fraction of the approach window the distance samples must span.
const MIN_APPROACH_COVERAGE: f64 = 0.8;
const MIN_FIT_SAMPLES: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DetectorError {
    #[error("frame {index}: timestamp {timestamp_ms} ms does not follow {previous_ms} ms")]
    OutOfOrderFrame {
        index: usize,
        previous_ms: u64,
        timestamp_ms: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorState {
    pub phase: Phase,
    pub phase_entry_ms: u64,
    pub last_inter_palm_distance: Option<f64>,
    /// Net velocity-direction sweep since contact, degrees.
    pub accumulated_rotation_deg: f64,
    /// Contact start.
    pub rub_start_ms: Option<u64>,
    pub alert_log: Vec<Alert>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub events: Vec<Event>,
    pub report: StageReport,
}

#[derive(Debug, Clone)]
pub struct Stage2Detector {
    cfg: Config,
    state: DetectorState,
    transitions: Vec<(Phase, u64)>,
    frames_seen: usize,
    first_ms: Option<u64>,
    last_ms: Option<u64>,
    last_hand_ms: Option<u64>,
    prev_hand_count: usize,
    facing_since: Option<u64>,
    not_facing_since: Option<u64>,
    not_facing_alerted: bool,
    /// Two-hand palm distances within the approach window of the latest.
    distances: VecDeque<(u64, f64)>,
    surviving: Option<Handedness>,
    contact_positions: Vec<Vec3>,
    contact_times: Vec<u64>,
    sweep: SweepTracker,
    stage_duration_s: Option<f64>,
    rub_frequency_hz: Option<f64>,
}

impl Stage2Detector {
    pub fn new(cfg: &Config) -> Self {
        Self {
            cfg: cfg.clone(),
            state: DetectorState {
                phase: Phase::AwaitingTwoHands,
                phase_entry_ms: 0,
                last_inter_palm_distance: None,
                accumulated_rotation_deg: 0.0,
                rub_start_ms: None,
                alert_log: Vec::new(),
            },
            transitions: Vec::new(),
            frames_seen: 0,
            first_ms: None,
            last_ms: None,
            last_hand_ms: None,
            prev_hand_count: 0,
            facing_since: None,
            not_facing_since: None,
            not_facing_alerted: false,
            distances: VecDeque::new(),
            surviving: None,
            contact_positions: Vec::new(),
            contact_times: Vec::new(),
            sweep: SweepTracker::default(),
            stage_duration_s: None,
            rub_frequency_hz: None,
        }
    }

    pub fn state(&self) -> &DetectorState {
        &self.state
    }

    pub fn step(&mut self, frame: &Frame) -> Result<Vec<Event>, DetectorError> {
        let ts = frame.timestamp_ms;
        if let Some(previous_ms) = self.last_ms {
            if ts <= previous_ms {
                return Err(DetectorError::OutOfOrderFrame {
                    index: self.frames_seen,
                    previous_ms,
                    timestamp_ms: ts,
                });
            }
        }
        self.frames_seen += 1;
        self.last_ms = Some(ts);
        if self.first_ms.is_none() {
            self.first_ms = Some(ts);
            self.state.phase_entry_ms = ts;
            self.transitions.push((Phase::AwaitingTwoHands, ts));
        }
        let mut events = Vec::new();
        if self.state.phase.is_terminal() {
            return Ok(events);
        }

        let count = frame.hand_count();
        let lost_ms = (self.cfg.hands_lost_timeout_s * 1000.0).round() as u64;
        if count > 0 {
            self.last_hand_ms = Some(ts);
        } else if self.last_hand_ms.is_some_and(|seen| ts - seen > lost_ms) {
            if self.in_contact() {
                self.end_rub(&mut events, "hands_lost");
            } else {
                self.enter(&mut events, Phase::Failed, ts, "reason=hands_lost".into());
            }
            self.prev_hand_count = count;
            return Ok(events);
        }

        let pair = frame.both();
        if let Some((l, r)) = pair {
            let d = inter_palm_distance(&l.palm_position, &r.palm_position);
            self.state.last_inter_palm_distance = Some(d);
            let window_ms = (self.cfg.approach_window_s * 1000.0).round() as u64;
            self.distances.push_back((ts, d));
            while self.distances.front().is_some_and(|&(t, _)| ts - t > window_ms) {
                self.distances.pop_front();
            }
        }

        match self.state.phase {
            Phase::AwaitingTwoHands => {
                let facing = pair.map(|(l, r)| {
                    palm_opposition(&l.palm_normal, &r.palm_normal, &self.cfg).map(|o| (o.facing, o.resultant_magnitude))
                });
                match facing {
                    Some(Ok((true, resultant))) => {
                        self.not_facing_since = None;
                        self.not_facing_alerted = false;
                        let since = *self.facing_since.get_or_insert(ts);
                        if ms_to_s(ts - since) + 1e-9 >= self.cfg.facing_dwell_s {
                            self.enter(&mut events, Phase::PalmsFacing, ts, format!("resultant={resultant:.4}"));
                        }
                    }
                    Some(_) => {
                        self.facing_since = None;
                        let since = *self.not_facing_since.get_or_insert(ts);
                        let elapsed = ms_to_s(ts - since);
                        if !self.not_facing_alerted && elapsed + 1e-9 >= self.cfg.not_facing_alert_s {
                            self.not_facing_alerted = true;
                            self.state.alert_log.push(Alert {
                                timestamp_ms: ts,
                                kind: AlertKind::PalmsNotFacing,
                            });
                            events.push(Event {
                                timestamp_ms: ts,
                                kind: EventKind::Alert(AlertKind::PalmsNotFacing),
                                detail: format!("not_facing_s={elapsed:.2}"),
                            });
                        }
                    }
                    None => {
                        self.facing_since = None;
                        self.not_facing_since = None;
                        self.not_facing_alerted = false;
                    }
                }
            }
            Phase::PalmsFacing => {
                if pair.is_some() {
                    if let Some(slope) = self.approach_slope() {
                        if slope <= self.cfg.approach_slope_mm_s {
                            self.enter(&mut events, Phase::Approaching, ts, format!("slope_mm_s={slope:.1}"));
                        }
                    }
                }
            }
            Phase::Approaching => {
                if self.prev_hand_count == 2 && count == 1 {
                    if let Some(d) = self.contact_distance() {
                        if d < self.cfg.contact_distance_mm {
                            let hand = frame.hands().next().expect("one hand");
                            self.surviving = Some(hand.handedness);
                            self.state.rub_start_ms = Some(ts);
                            self.enter(
                                &mut events,
                                Phase::ContactOccluded,
                                ts,
                                format!("distance_mm={d:.1} surviving={}", hand.handedness),
                            );
                            self.track_contact(frame, &mut events);
                        }
                    }
                }
            }
            Phase::ContactOccluded | Phase::Rubbing => {
                let separated = pair.is_some_and(|(l, r)| {
                    inter_palm_distance(&l.palm_position, &r.palm_position) >= self.cfg.contact_distance_mm
                });
                let start = self.state.rub_start_ms.expect("contact started");
                let max_ms = (self.cfg.stage_max_s * 1000.0).round() as u64;
                if separated {
                    self.end_rub(&mut events, "separated");
                } else if ts - start > max_ms {
                    self.end_rub(&mut events, "time_cap");
                } else {
                    self.track_contact(frame, &mut events);
                }
            }
            Phase::Completed | Phase::Failed => {}
        }
        self.prev_hand_count = count;
        Ok(events)
    }

    /// Closes the run. An unfinished rub is judged as ending at the last
    /// frame; any earlier phase fails without adding to the timeline.
    pub fn finish(mut self) -> Detection {
        let mut events = Vec::new();
        if !self.state.phase.is_terminal() && self.first_ms.is_some() {
            if self.in_contact() {
                self.end_rub(&mut events, "stream_end");
            } else {
                let ts = self.last_ms.expect("frames seen");
                self.state.phase = Phase::Failed;
                self.state.phase_entry_ms = ts;
                events.push(Event {
                    timestamp_ms: ts,
                    kind: EventKind::Phase(Phase::Failed),
                    detail: "reason=stream_end".into(),
                });
            }
        }
        let last = self.last_ms.unwrap_or(0);
        let phase_timeline = self
            .transitions
            .iter()
            .enumerate()
            .map(|(i, &(phase, start_ms))| PhaseSpan {
                phase,
                start_ms,
                end_ms: self.transitions.get(i + 1).map_or(last.max(start_ms), |next| next.1),
            })
            .collect();
        let completed = self.state.phase == Phase::Completed;
        Detection {
            events,
            report: StageReport {
                verdict: if completed { Verdict::Completed } else { Verdict::NotCompleted },
                phase_timeline,
                stage_duration_s: self.stage_duration_s.filter(|_| completed),
                rub_frequency_hz: self.rub_frequency_hz,
                alerts: self.state.alert_log,
            },
        }
    }

    fn in_contact(&self) -> bool {
        matches!(self.state.phase, Phase::ContactOccluded | Phase::Rubbing)
    }

    fn enter(&mut self, events: &mut Vec<Event>, phase: Phase, ts: u64, detail: String) {
        debug_assert!(phase > self.state.phase);
        self.state.phase = phase;
        self.state.phase_entry_ms = ts;
        self.transitions.push((phase, ts));
        events.push(Event {
            timestamp_ms: ts,
            kind: EventKind::Phase(phase),
            detail,
        });
    }

    /// Least-squares slope of palm distance over the approach window.
    fn approach_slope(&self) -> Option<f64> {
        let (&(first, _), &(last, _)) = (self.distances.front()?, self.distances.back()?);
        let coverage = ms_to_s(last - first);
        if self.distances.len() < MIN_FIT_SAMPLES || coverage + 1e-9 < MIN_APPROACH_COVERAGE * self.cfg.approach_window_s {
            return None;
        }
        let (ts, ds) = self.distance_series(last);
        fit_line(&ts, &ds).map(|fit| fit.slope)
    }

    /// Palm distance at the last two-hand frame, smoothed by a line fit
    /// over the approach window when enough samples exist.
    fn contact_distance(&self) -> Option<f64> {
        let &(last, raw) = self.distances.back()?;
        if self.distances.len() < MIN_FIT_SAMPLES {
            return Some(raw);
        }
        let (ts, ds) = self.distance_series(last);
        Some(fit_line(&ts, &ds).map_or(raw, |fit| fit.at(0.0)))
    }

    fn distance_series(&self, origin: u64) -> (Vec<f64>, Vec<f64>) {
        self.distances
            .iter()
            .map(|&(t, d)| ((t as f64 - origin as f64) / 1000.0, d))
            .unzip()
    }

    fn track_contact(&mut self, frame: &Frame, events: &mut Vec<Event>) {
        let Some(hand) = self.surviving.and_then(|side| frame.hand(side)) else {
            return;
        };
        self.contact_positions.push(hand.palm_position);
        self.contact_times.push(frame.timestamp_ms);
        if hand.palm_velocity.norm() >= self.cfg.rotation_min_speed_mm_s {
            self.sweep.push(hand.palm_velocity);
        }
        if self.state.phase == Phase::ContactOccluded {
            let sweep = self.sweep.sweep_deg();
            self.state.accumulated_rotation_deg = sweep;
            if sweep >= self.cfg.rotation_sweep_deg {
                self.enter(events, Phase::Rubbing, frame.timestamp_ms, format!("sweep_deg={sweep:.1}"));
            }
        }
    }

    fn end_rub(&mut self, events: &mut Vec<Event>, reason: &str) {
        let start = self.state.rub_start_ms.expect("contact started");
        let end = self.contact_times.last().copied().unwrap_or(start);
        if self.state.phase == Phase::ContactOccluded {
            self.enter(events, Phase::Failed, end, format!("reason={reason} rotation=none"));
            return;
        }
        let duration = ms_to_s(end - start);
        self.stage_duration_s = Some(duration);
        let frequency = estimate_frequency(&self.contact_positions, &self.contact_times, &self.cfg)
            .ok()
            .flatten();
        self.rub_frequency_hz = frequency;
        let in_band = frequency.is_some_and(|f| (self.cfg.rub_min_hz..=self.cfg.rub_max_hz).contains(&f));
        let long_enough = duration + 1e-9 >= self.cfg.stage_min_s && duration <= self.cfg.stage_max_s + 1e-9;
        let freq_text = frequency.map_or("none".to_string(), |f| format!("{f:.2}"));
        if in_band && long_enough {
            self.enter(
                events,
                Phase::Completed,
                end,
                format!("duration_s={duration:.2} freq_hz={freq_text} end={reason}"),
            );
        } else {
            let why = if long_enough { "frequency" } else { "duration" };
            self.enter(
                events,
                Phase::Failed,
                end,
                format!("reason={why} duration_s={duration:.2} freq_hz={freq_text} end={reason}"),
            );
        }
    }
}

fn ms_to_s(ms: u64) -> f64 {
    ms as f64 / 1000.0
}

/// Net signed turn of a velocity direction about the normal of the
/// velocities' dominant plane. The plane is re-estimated with every sample;
/// each turn is measured about the plane current at that sample.
#[derive(Debug, Clone, Default)]
pub struct SweepTracker {
    moment: Matrix3<f64>,
    previous: Option<Vec3>,
    normal: Option<Vec3>,
    signed_rad: f64,
}

impl SweepTracker {
    pub fn push(&mut self, velocity: Vec3) {
        self.moment += velocity * velocity.transpose();
        let (_, axes) = sorted_eigen(self.moment);
        let mut normal = axes[2];
        if self.normal.is_some_and(|n| n.dot(&normal) < 0.0) {
            normal = -normal;
        }
        self.normal = Some(normal);
        if let Some(prev) = self.previous.replace(velocity) {
            let a = prev - normal * normal.dot(&prev);
            let b = velocity - normal * normal.dot(&velocity);
            let step = normal.dot(&a.cross(&b)).atan2(a.dot(&b));
            if step.abs().to_degrees() <= MAX_SWEEP_STEP_DEG {
                self.signed_rad += step;
            }
        }
    }

    /// Absolute net sweep, degrees.
    pub fn sweep_deg(&self) -> f64 {
        self.signed_rad.abs().to_degrees()
    }
}

pub fn planar_sweep_deg(velocities: &[Vec3]) -> f64 {
    let mut tracker = SweepTracker::default();
    velocities.iter().for_each(|v| tracker.push(*v));
    tracker.sweep_deg()
}

pub fn run_detector(frames: &[Frame], cfg: &Config) -> Result<Detection, DetectorError> {
    let mut detector = Stage2Detector::new(cfg);
    let mut events = Vec::new();
    for frame in frames {
        events.extend(detector.step(frame)?);
    }
    let mut done = detector.finish();
    events.append(&mut done.events);
    done.events = events;
    Ok(done)
}

pub fn detect_stage2(stream: &FrameStream, cfg: &Config) -> Result<StageReport, DetectorError> {
    run_detector(stream.frames(), cfg).map(|d| d.report)
}
