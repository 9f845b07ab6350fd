//! Per-frame hand features: palm opposition, palm shape, finger spread and
//! inter-palm distance.

use serde::Serialize;

use super::FeatureError;
use crate::config::Config;
use crate::frame_model::{HandObservation, NORMAL_TOLERANCE};
use crate::geometry::Vec3;

/// Resultant of the two palm normals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OppositionResult {
    /// `|left + right|`, in `[0, 2]` for unit normals.
    pub resultant_magnitude: f64,
    pub facing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PalmShape {
    Flat,
    Curved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Spread {
    Open,
    Closed,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadResult {
    /// Smallest distance over adjacent tracked fingertip pairs, mm.
    pub min_adjacent_distance: Option<f64>,
    pub spread: Spread,
}

fn check_unit(v: &Vec3) -> Result<(), FeatureError> {
    let norm = v.norm();
    if (norm - 1.0).abs() > NORMAL_TOLERANCE || !norm.is_finite() {
        return Err(FeatureError::NonUnitNormal { norm });
    }
    Ok(())
}

/// Palms face each other when their unit normals nearly cancel:
/// `|left + right| < facing_max_resultant` (strict).
pub fn palm_opposition(
    normal_left: &Vec3,
    normal_right: &Vec3,
    cfg: &Config,
) -> Result<OppositionResult, FeatureError> {
    check_unit(normal_left)?;
    check_unit(normal_right)?;
    let resultant_magnitude = (normal_left + normal_right).norm();
    Ok(OppositionResult {
        resultant_magnitude,
        facing: resultant_magnitude < cfg.facing_max_resultant,
    })
}

/// Flat for grab strength in `[0, flat_max_grab]`, boundary included.
pub fn classify_palm_shape(grab_strength: f64, cfg: &Config) -> Result<PalmShape, FeatureError> {
    if !(0.0..=1.0).contains(&grab_strength) {
        return Err(FeatureError::GrabOutOfRange {
            value: grab_strength,
        });
    }
    Ok(if grab_strength <= cfg.flat_max_grab {
        PalmShape::Flat
    } else {
        PalmShape::Curved
    })
}

/// Open when every adjacent tracked fingertip pair (thumb-index,
/// index-middle, ...) is at least `open_min_spacing_mm` apart. Fewer than two
/// adjacent tracked pairs gives [`Spread::Unknown`].
pub fn finger_spread(fingertips: &[Option<Vec3>], cfg: &Config) -> SpreadResult {
    let distances: Vec<f64> = fingertips
        .iter()
        .take(5)
        .collect::<Vec<_>>()
        .windows(2)
        .filter_map(|w| Some((w[0].as_ref()? - w[1].as_ref()?).norm()))
        .collect();
    let min_adjacent_distance = distances.iter().copied().reduce(f64::min);
    let spread = match min_adjacent_distance {
        Some(_) if distances.len() < 2 => Spread::Unknown,
        Some(d) if d >= cfg.open_min_spacing_mm => Spread::Open,
        Some(_) => Spread::Closed,
        None => Spread::Unknown,
    };
    SpreadResult {
        min_adjacent_distance,
        spread,
    }
}

pub fn inter_palm_distance(palm_left: &Vec3, palm_right: &Vec3) -> f64 {
    (palm_left - palm_right).norm()
}

/// One palm over the other: normals nearly parallel and the palm-to-palm
/// displacement within `stacked_max_angle_deg` of their shared direction.
pub fn is_stacked(left: &HandObservation, right: &HandObservation, cfg: &Config) -> bool {
    let sum = left.palm_normal + right.palm_normal;
    let magnitude = sum.norm();
    if magnitude <= cfg.stacked_min_resultant {
        return false;
    }
    let shared = sum / magnitude;
    let d = right.palm_position - left.palm_position;
    let len = d.norm();
    if len == 0.0 {
        return false;
    }
    d.dot(&shared).abs() / len >= cfg.stacked_max_angle_deg.to_radians().cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn exact_opposition_and_parallel() {
        let r = palm_opposition(&Vec3::y(), &-Vec3::y(), &cfg()).unwrap();
        assert_eq!(r.resultant_magnitude, 0.0);
        assert!(r.facing);
        let r = palm_opposition(&Vec3::y(), &Vec3::y(), &cfg()).unwrap();
        assert_eq!(r.resultant_magnitude, 2.0);
        assert!(!r.facing);
    }

    #[test]
    fn small_tilt_matches_chord_length() {
        let a = Vec3::new(0.2f64.sin(), 0.2f64.cos(), 0.0);
        let r = palm_opposition(&a, &-Vec3::y(), &cfg()).unwrap();
        let chord = 2.0 * (0.1f64).sin();
        assert!((r.resultant_magnitude - chord).abs() < 1e-12);
        assert!((r.resultant_magnitude - 0.1997).abs() < 1e-4);
        assert!(r.facing);
    }

    #[test]
    fn non_unit_normal_rejected() {
        assert!(matches!(
            palm_opposition(&Vec3::new(0.0, 2.0, 0.0), &Vec3::y(), &cfg()),
            Err(FeatureError::NonUnitNormal { .. })
        ));
    }

    #[test]
    fn palm_shape_boundaries() {
        let c = cfg();
        assert_eq!(classify_palm_shape(0.0, &c).unwrap(), PalmShape::Flat);
        assert_eq!(classify_palm_shape(0.3, &c).unwrap(), PalmShape::Flat);
        assert_eq!(classify_palm_shape(0.300001, &c).unwrap(), PalmShape::Curved);
        assert_eq!(classify_palm_shape(1.0, &c).unwrap(), PalmShape::Curved);
        assert!(classify_palm_shape(-0.1, &c).is_err());
        assert!(classify_palm_shape(f64::NAN, &c).is_err());
    }

    fn line_of_tips(spacing: f64) -> [Option<Vec3>; 5] {
        std::array::from_fn(|i| Some(Vec3::new(i as f64 * spacing, 0.0, 0.0)))
    }

    #[test]
    fn spread_open_closed_unknown() {
        let c = cfg();
        let r = finger_spread(&line_of_tips(20.0), &c);
        assert_eq!(r.min_adjacent_distance, Some(20.0));
        assert_eq!(r.spread, Spread::Open);
        let r = finger_spread(&line_of_tips(5.0), &c);
        assert_eq!(r.min_adjacent_distance, Some(5.0));
        assert_eq!(r.spread, Spread::Closed);
        assert_eq!(finger_spread(&line_of_tips(17.0), &c).spread, Spread::Open);
        assert_eq!(finger_spread(&line_of_tips(16.9), &c).spread, Spread::Closed);

        let mut thumb_only = [None; 5];
        thumb_only[0] = Some(Vec3::zeros());
        assert_eq!(finger_spread(&thumb_only, &c).spread, Spread::Unknown);
        // one adjacent pair is not enough
        let mut pair = thumb_only;
        pair[1] = Some(Vec3::x() * 30.0);
        let r = finger_spread(&pair, &c);
        assert_eq!(r.spread, Spread::Unknown);
        assert_eq!(r.min_adjacent_distance, Some(30.0));
        // non-adjacent tips are never compared
        let mut gappy = [None; 5];
        gappy[0] = Some(Vec3::zeros());
        gappy[2] = Some(Vec3::x());
        gappy[4] = Some(Vec3::x() * 2.0);
        assert_eq!(finger_spread(&gappy, &c).min_adjacent_distance, None);
    }

    #[test]
    fn distances() {
        assert_eq!(inter_palm_distance(&Vec3::new(0.0, 200.0, 0.0), &Vec3::new(100.0, 200.0, 0.0)), 100.0);
        assert_eq!(inter_palm_distance(&Vec3::x(), &Vec3::x()), 0.0);
        assert_eq!(inter_palm_distance(&Vec3::zeros(), &Vec3::new(3.0, 4.0, 0.0)), 5.0);
    }

    fn unit() -> impl Strategy<Value = Vec3> {
        (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| {
            let r = (1.0 - z * z).sqrt();
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
    }

    fn point() -> impl Strategy<Value = Vec3> {
        (-500.0f64..500.0, -500.0f64..500.0, -500.0f64..500.0).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn opposition_is_rotation_invariant(a in unit(), b in unit(), axis in unit(), angle in 0.0f64..std::f64::consts::TAU) {
            let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
            let c = cfg();
            let m0 = palm_opposition(&a, &b, &c).unwrap().resultant_magnitude;
            let m1 = palm_opposition(&(rot * a), &(rot * b), &c).unwrap().resultant_magnitude;
            prop_assert!((m0 - m1).abs() < 1e-9);
        }

        #[test]
        fn palm_shape_is_monotone(g1 in 0.0f64..=1.0, g2 in 0.0f64..=1.0) {
            let c = cfg();
            let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
            if classify_palm_shape(hi, &c).unwrap() == PalmShape::Flat {
                prop_assert_eq!(classify_palm_shape(lo, &c).unwrap(), PalmShape::Flat);
            }
        }

        #[test]
        fn distance_is_a_metric(a in point(), b in point(), c in point()) {
            prop_assert_eq!(inter_palm_distance(&a, &b), inter_palm_distance(&b, &a));
            prop_assert!(inter_palm_distance(&a, &b) >= 0.0);
            prop_assert!(inter_palm_distance(&a, &c) <= inter_palm_distance(&a, &b) + inter_palm_distance(&b, &c) + 1e-9);
        }
    }
}
