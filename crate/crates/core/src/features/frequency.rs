//! Dominant oscillation frequency of a palm path from zero crossings.
//!
//! The path is projected on its principal axis and mean-removed. Crossings
//! are found with a Schmitt trigger at +-10% of the peak-to-peak swing and
//! timed by linear interpolation. Same-direction crossings repeat once per
//! period regardless of any residual offset, so the rate comes from the
//! rising-to-rising and falling-to-falling intervals; short windows fall back
//! to the half-period between opposite crossings, then to
//! `crossings / (2 * span)`.

use super::FeatureError;
use crate::config::Config;
use crate::geometry::{principal_axes, Vec3};

pub const MIN_FREQUENCY_SPAN_S: f64 = 1.0;
pub const MIN_FREQUENCY_RATE: f64 = 50.0;
const HYSTERESIS_FRACTION: f64 = 0.1;
const SMOOTHING_RADIUS: usize = 2;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Crossings {
    pub rising_s: Vec<f64>,
    pub falling_s: Vec<f64>,
}

impl Crossings {
    pub fn count(&self) -> usize {
        self.rising_s.len() + self.falling_s.len()
    }
}

fn moving_average(signal: &[f64], radius: usize) -> Vec<f64> {
    (0..signal.len())
        .map(|i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius + 1).min(signal.len());
            signal[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Schmitt-triggered zero crossings of `signal` sampled at `times_s`.
pub fn find_crossings(signal: &[f64], times_s: &[f64], hysteresis: f64) -> Crossings {
    #[derive(PartialEq)]
    enum Level {
        Unknown,
        Low,
        High,
    }
    let interpolate = |j: usize| {
        let (s0, s1) = (signal[j], signal[j + 1]);
        let frac = if s1 != s0 { -s0 / (s1 - s0) } else { 0.5 };
        times_s[j] + frac.clamp(0.0, 1.0) * (times_s[j + 1] - times_s[j])
    };
    let mut out = Crossings::default();
    let mut level = Level::Unknown;
    let (mut last_nonpos, mut last_nonneg) = (None, None);
    for (k, &s) in signal.iter().enumerate() {
        match level {
            Level::Low if s > hysteresis => {
                if let Some(j) = last_nonpos {
                    out.rising_s.push(interpolate(j));
                }
                level = Level::High;
            }
            Level::High if s < -hysteresis => {
                if let Some(j) = last_nonneg {
                    out.falling_s.push(interpolate(j));
                }
                level = Level::Low;
            }
            Level::Unknown if s > hysteresis => level = Level::High,
            Level::Unknown if s < -hysteresis => level = Level::Low,
            _ => {}
        }
        if s <= 0.0 {
            last_nonpos = Some(k);
        }
        if s >= 0.0 {
            last_nonneg = Some(k);
        }
    }
    out
}

/// Frequency in Hz from crossing times; `span_s` is the signal duration.
pub fn frequency_from_crossings(c: &Crossings, span_s: f64) -> f64 {
    let spread = |ts: &[f64]| match ts {
        [first, .., last] => (ts.len() - 1, last - first),
        _ => (0, 0.0),
    };
    let (nr, tr) = spread(&c.rising_s);
    let (nf, tf) = spread(&c.falling_s);
    if nr + nf > 0 && tr + tf > 0.0 {
        return (nr + nf) as f64 / (tr + tf);
    }
    if let ([r], [f]) = (c.rising_s.as_slice(), c.falling_s.as_slice()) {
        let half = (r - f).abs();
        if half > 0.0 {
            return 1.0 / (2.0 * half);
        }
    }
    if span_s > 0.0 {
        c.count() as f64 / (2.0 * span_s)
    } else {
        0.0
    }
}

/// `None` when the swing along the principal axis is below
/// `min_oscillation_mm`.
pub fn estimate_frequency(
    palm_positions: &[Vec3],
    timestamps_ms: &[u64],
    cfg: &Config,
) -> Result<Option<f64>, FeatureError> {
    let n = palm_positions.len().min(timestamps_ms.len());
    let too_few = FeatureError::TooFewSamples {
        needed: (MIN_FREQUENCY_SPAN_S * MIN_FREQUENCY_RATE) as usize + 1,
        got: n,
    };
    if n < 2 {
        return Err(too_few);
    }
    let span_s = (timestamps_ms[n - 1].saturating_sub(timestamps_ms[0])) as f64 / 1000.0;
    if span_s + 1e-9 < MIN_FREQUENCY_SPAN_S || ((n - 1) as f64) < MIN_FREQUENCY_RATE * span_s - 1e-9 {
        return Err(too_few);
    }
    let positions = &palm_positions[..n];
    let pa = principal_axes(positions);
    let mut signal: Vec<f64> = positions.iter().map(|p| (p - pa.centroid).dot(&pa.axes[0])).collect();
    let mean = signal.iter().sum::<f64>() / n as f64;
    signal.iter_mut().for_each(|s| *s -= mean);

    let (lo, hi) = signal
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if hi - lo < cfg.min_oscillation_mm {
        return Ok(None);
    }
    let smooth = moving_average(&signal, SMOOTHING_RADIUS);
    let (slo, shi) = smooth
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let times_s: Vec<f64> = timestamps_ms[..n].iter().map(|&t| t as f64 / 1000.0).collect();
    let crossings = find_crossings(&smooth, &times_s, HYSTERESIS_FRACTION * (shi - slo));
    Ok(Some(frequency_from_crossings(&crossings, span_s)))
}
