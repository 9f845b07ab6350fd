use std::f64::consts::TAU;

use super::{PrimitiveKind, SynthError};
use crate::frame_model::{MAX_FPS, MIN_FPS};
use crate::geometry::Vec3;

/// Parameters for an analytic test trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveParams {
    pub frequency_hz: f64,
    /// Sinusoid amplitude, circle radius, or half the line length, mm.
    pub amplitude_mm: f64,
    pub duration_s: f64,
    pub fps: f64,
    pub center: Vec3,
    /// Motion axis for lines and sinusoids; the circle lies in the plane
    /// spanned by `axis` and `secondary`.
    pub axis: Vec3,
    pub secondary: Vec3,
}

impl Default for PrimitiveParams {
    fn default() -> Self {
        Self {
            frequency_hz: 2.0,
            amplitude_mm: 30.0,
            duration_s: 3.0,
            fps: 100.0,
            center: Vec3::new(0.0, 200.0, 0.0),
            axis: Vec3::x(),
            secondary: Vec3::z(),
        }
    }
}

/// Exact positions and integer-millisecond timestamps.
pub fn generate_primitive(
    kind: PrimitiveKind,
    params: &PrimitiveParams,
) -> Result<(Vec<Vec3>, Vec<u64>), SynthError> {
    let p = params;
    if !(MIN_FPS..=MAX_FPS).contains(&p.fps) || !(p.duration_s > 0.0) || p.amplitude_mm < 0.0 {
        return Err(SynthError::InvalidScript(format!("bad primitive parameters {p:?}")));
    }
    let axis = p.axis.try_normalize(1e-12).ok_or_else(|| SynthError::InvalidScript("zero axis".into()))?;
    let secondary = (p.secondary - axis * axis.dot(&p.secondary))
        .try_normalize(1e-12)
        .ok_or_else(|| SynthError::InvalidScript("secondary axis parallel to axis".into()))?;
    let n = (p.duration_s * p.fps).round() as usize;
    let times: Vec<u64> = (0..n).map(|i| (i as f64 * 1000.0 / p.fps).round() as u64).collect();
    let omega = TAU * p.frequency_hz;
    let positions = times
        .iter()
        .map(|&ms| {
            let t = ms as f64 / 1000.0;
            match kind {
                PrimitiveKind::Sinusoid1D => p.center + axis * (p.amplitude_mm * (omega * t).sin()),
                PrimitiveKind::Circle => {
                    p.center + (axis * (omega * t).cos() + secondary * (omega * t).sin()) * p.amplitude_mm
                }
                PrimitiveKind::Line => {
                    p.center + axis * (p.amplitude_mm * (2.0 * t / p.duration_s - 1.0))
                }
                PrimitiveKind::Static => p.center,
            }
        })
        .collect();
    Ok((positions, times))
}
