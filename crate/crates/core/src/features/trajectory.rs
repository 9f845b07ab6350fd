//! Linear / circular hand-path classification.
//!
//! A path is Linear when its first principal axis carries at least
//! `line_variance_ratio` of the positional variance. Otherwise a circle is
//! fitted (algebraic least squares) in the plane of the two leading axes.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::FeatureError;
use crate::config::Config;
use crate::geometry::{principal_axes, Vec3};

pub const MIN_TRAJECTORY_SAMPLES: usize = 10;
pub const MIN_TRAJECTORY_SPAN_S: f64 = 0.25;
pub const MAX_TRAJECTORY_SPAN_S: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Trajectory {
    Linear,
    Circular,
    Indeterminate,
}

/// Planar circle fit: centre in plane coordinates, radius and RMS radial
/// residual, all in mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: (f64, f64),
    pub radius: f64,
    pub rms_residual: f64,
}

/// Kasa fit: least squares on `u^2 + v^2 = a u + b v + c`.
pub fn fit_circle(points: &[(f64, f64)]) -> Option<CircleFit> {
    if points.len() < 3 {
        return None;
    }
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    for &(u, v) in points {
        let row = Vector3::new(u, v, 1.0);
        ata += row * row.transpose();
        atb += row * (u * u + v * v);
    }
    let sol = ata.lu().solve(&atb)?;
    let center = (sol[0] / 2.0, sol[1] / 2.0);
    let r2 = sol[2] + center.0 * center.0 + center.1 * center.1;
    if !(r2 > 0.0) {
        return None;
    }
    let radius = r2.sqrt();
    let ss: f64 = points
        .iter()
        .map(|&(u, v)| {
            let d = ((u - center.0).powi(2) + (v - center.1).powi(2)).sqrt() - radius;
            d * d
        })
        .sum();
    Some(CircleFit {
        center,
        radius,
        rms_residual: (ss / points.len() as f64).sqrt(),
    })
}

pub fn path_length(positions: &[Vec3]) -> f64 {
    positions.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

pub fn classify_trajectory(
    palm_positions: &[Vec3],
    window_span_s: f64,
    cfg: &Config,
) -> Result<Trajectory, FeatureError> {
    if palm_positions.len() < MIN_TRAJECTORY_SAMPLES {
        return Err(FeatureError::TooFewSamples {
            needed: MIN_TRAJECTORY_SAMPLES,
            got: palm_positions.len(),
        });
    }
    if !(MIN_TRAJECTORY_SPAN_S..=MAX_TRAJECTORY_SPAN_S).contains(&window_span_s) {
        return Err(FeatureError::WindowSpanOutOfRange {
            span_s: window_span_s,
        });
    }
    if path_length(palm_positions) < cfg.stationary_path_mm {
        return Ok(Trajectory::Indeterminate);
    }
    let pa = principal_axes(palm_positions);
    let total = pa.total_variance();
    if total <= 0.0 {
        return Ok(Trajectory::Indeterminate);
    }
    if pa.variances[0] / total >= cfg.line_variance_ratio {
        return Ok(Trajectory::Linear);
    }
    let planar: Vec<(f64, f64)> = palm_positions
        .iter()
        .map(|p| {
            let d = p - pa.centroid;
            (d.dot(&pa.axes[0]), d.dot(&pa.axes[1]))
        })
        .collect();
    Ok(match fit_circle(&planar) {
        Some(fit)
            if (cfg.circle_min_radius_mm..=cfg.circle_max_radius_mm).contains(&fit.radius)
                && fit.rms_residual <= cfg.circle_max_relative_residual * fit.radius =>
        {
            Trajectory::Circular
        }
        _ => Trajectory::Indeterminate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::TAU;

    fn circle(radius: f64, n: usize, center: Vec3, u: Vec3, v: Vec3) -> Vec<Vec3> {
        (0..n)
            .map(|i| {
                let a = TAU * i as f64 / n as f64;
                center + u * (radius * a.cos()) + v * (radius * a.sin())
            })
            .collect()
    }

    #[test]
    fn perfect_circle_is_circular() {
        let pts = circle(50.0, 50, Vec3::new(0.0, 200.0, 0.0), Vec3::x(), Vec3::z());
        assert_eq!(classify_trajectory(&pts, 1.0, &Config::default()).unwrap(), Trajectory::Circular);
        let fit = fit_circle(&pts.iter().map(|p| (p.x, p.z)).collect::<Vec<_>>()).unwrap();
        assert!((fit.radius - 50.0).abs() < 1e-9);
        assert!(fit.rms_residual < 1e-9);
    }

    #[test]
    fn collinear_points_are_linear() {
        let pts: Vec<Vec3> = (0..50).map(|i| Vec3::new(0.0, 200.0, 80.0 * i as f64 / 49.0)).collect();
        assert_eq!(classify_trajectory(&pts, 1.0, &Config::default()).unwrap(), Trajectory::Linear);
    }

    #[test]
    fn noisy_circle_stays_circular() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 2.0).unwrap();
        let pts: Vec<Vec3> = circle(50.0, 100, Vec3::zeros(), Vec3::x(), Vec3::y())
            .into_iter()
            .map(|p| p + Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng)))
            .collect();
        // oracle: radial residual of the noise about the true circle is about 2/50 = 4%
        let rms: f64 = (pts.iter().map(|p| (p.xy().norm() - 50.0).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
        assert!(rms / 50.0 < 0.1);
        assert_eq!(classify_trajectory(&pts, 1.0, &Config::default()).unwrap(), Trajectory::Circular);
    }

    #[test]
    fn stationary_and_scattered_are_indeterminate() {
        let still = vec![Vec3::new(1.0, 2.0, 3.0); 20];
        assert_eq!(classify_trajectory(&still, 1.0, &Config::default()).unwrap(), Trajectory::Indeterminate);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let blob: Vec<Vec3> = (0..100)
            .map(|_| Vec3::new(rng.random_range(-40.0..40.0), rng.random_range(-40.0..40.0), 0.0))
            .collect();
        assert_eq!(classify_trajectory(&blob, 1.0, &Config::default()).unwrap(), Trajectory::Indeterminate);
    }

    #[test]
    fn too_large_circle_is_not_circular() {
        let pts = circle(400.0, 50, Vec3::zeros(), Vec3::x(), Vec3::y());
        assert_eq!(classify_trajectory(&pts, 1.0, &Config::default()).unwrap(), Trajectory::Indeterminate);
    }

    #[test]
    fn preconditions() {
        let pts = vec![Vec3::zeros(); 9];
        assert!(matches!(
            classify_trajectory(&pts, 1.0, &Config::default()),
            Err(FeatureError::TooFewSamples { needed: 10, got: 9 })
        ));
        let pts = vec![Vec3::zeros(); 10];
        assert!(matches!(
            classify_trajectory(&pts, 6.0, &Config::default()),
            Err(FeatureError::WindowSpanOutOfRange { .. })
        ));
    }
}
