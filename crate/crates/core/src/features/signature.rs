//! Stage signatures for the palm-to-palm (stage 2) and palm-over-dorsum
//! (stage 3) washing stages, and matching of feature vectors against them.

use serde::Serialize;

use super::{FeatureVector, PalmOrientation, PalmShape, Spread, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StageId {
    Stage2,
    Stage3,
}

/// Which features separate this stage from its sibling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Discriminative {
    pub orientation: bool,
    pub shape: bool,
    pub spread: bool,
    pub trajectory: bool,
    pub frequency: bool,
    pub duration: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageSignature {
    pub stage_id: StageId,
    pub orientation: PalmOrientation,
    pub shape: PalmShape,
    pub spread: Spread,
    pub trajectories: Vec<Trajectory>,
    /// Inclusive, Hz.
    pub frequency_hz: (f64, f64),
    /// Inclusive, seconds. Used by stage detectors, not by window matching.
    pub duration_s: (f64, f64),
    pub discriminative: Discriminative,
}

const TABLE_DISCRIMINATIVE: Discriminative = Discriminative {
    orientation: true,
    shape: false,
    spread: true,
    trajectory: false,
    frequency: false,
    duration: false,
};

impl StageSignature {
    /// Rub hands palm to palm.
    pub fn stage2() -> Self {
        Self {
            stage_id: StageId::Stage2,
            orientation: PalmOrientation::FacingEachOther,
            shape: PalmShape::Flat,
            spread: Spread::Closed,
            trajectories: vec![Trajectory::Linear, Trajectory::Circular],
            frequency_hz: (0.8, 3.6),
            duration_s: (2.0, 7.0),
            discriminative: TABLE_DISCRIMINATIVE,
        }
    }

    /// Right palm over left dorsum and vice versa.
    pub fn stage3() -> Self {
        Self {
            stage_id: StageId::Stage3,
            orientation: PalmOrientation::OnePalmOverOther,
            shape: PalmShape::Flat,
            spread: Spread::Open,
            trajectories: vec![Trajectory::Linear],
            frequency_hz: (1.0, 3.0),
            duration_s: (1.0, 10.0),
            discriminative: TABLE_DISCRIMINATIVE,
        }
    }

    pub fn for_stage(stage: StageId) -> Self {
        match stage {
            StageId::Stage2 => Self::stage2(),
            StageId::Stage3 => Self::stage3(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignatureMatch {
    pub matched: bool,
    /// Fraction of discriminative features satisfied.
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Check {
    Satisfied,
    Unknown,
    Contradicted,
}

fn all_equal<T: PartialEq + Copy>(values: impl Iterator<Item = T>, expected: T) -> Check {
    let mut seen = false;
    for v in values {
        if v != expected {
            return Check::Contradicted;
        }
        seen = true;
    }
    if seen {
        Check::Satisfied
    } else {
        Check::Unknown
    }
}

/// All discriminative features must be satisfied; the others may be
/// unknown but must not contradict the signature.
pub fn match_signature(v: &FeatureVector, s: &StageSignature) -> SignatureMatch {
    let orientation = if v.palm_orientation == s.orientation {
        Check::Satisfied
    } else {
        Check::Contradicted
    };
    let shape = all_equal(
        [v.palm_shape_left, v.palm_shape_right].into_iter().flatten(),
        s.shape,
    );
    let spread = all_equal(
        [v.finger_spread_left, v.finger_spread_right]
            .into_iter()
            .filter(|sp| *sp != Spread::Unknown),
        s.spread,
    );
    let trajectory = match v.trajectory {
        Trajectory::Indeterminate => Check::Unknown,
        t if s.trajectories.contains(&t) => Check::Satisfied,
        _ => Check::Contradicted,
    };
    let frequency = match v.movement_frequency {
        None => Check::Unknown,
        Some(f) if (s.frequency_hz.0..=s.frequency_hz.1).contains(&f) => Check::Satisfied,
        Some(_) => Check::Contradicted,
    };

    let d = s.discriminative;
    let checks = [
        (d.orientation, orientation),
        (d.shape, shape),
        (d.spread, spread),
        (d.trajectory, trajectory),
        (d.frequency, frequency),
    ];
    let total = checks.iter().filter(|(disc, _)| *disc).count();
    let satisfied = checks
        .iter()
        .filter(|(disc, c)| *disc && *c == Check::Satisfied)
        .count();
    let matched = checks.iter().all(|(disc, c)| {
        if *disc {
            *c == Check::Satisfied
        } else {
            *c != Check::Contradicted
        }
    });
    SignatureMatch {
        matched,
        score: if total == 0 { 1.0 } else { satisfied as f64 / total as f64 },
    }
}
