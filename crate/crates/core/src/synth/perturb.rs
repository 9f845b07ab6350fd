use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{mirror_hand, shift_hand, LabeledStream, PhaseKind, SynthError};
use crate::frame_model::FrameStream;
use crate::geometry::Vec3;

/// Post-hoc edits used to build negative and robustness cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    /// Extra Gaussian jitter on every palm, sigma in mm.
    AddNoise(f64),
    /// Deletes every frame generated by phases of this kind.
    RemovePhaseFrames(PhaseKind),
    /// Restores the hand hidden by contact.
    SuppressOcclusion,
    /// Drops each frame independently with this probability.
    DropFrames(f64),
}

pub fn perturb(
    input: &LabeledStream,
    perturbation: Perturbation,
    seed: u64,
) -> Result<LabeledStream, SynthError> {
    let frames = input.stream.frames();
    if frames.len() != input.labels.len() {
        return Err(SynthError::LabelMismatch {
            labels: input.labels.len(),
            frames: frames.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out_frames = Vec::with_capacity(frames.len());
    let mut out_labels = Vec::with_capacity(frames.len());
    match perturbation {
        Perturbation::AddNoise(sigma) => {
            let normal = Normal::new(0.0, sigma)
                .map_err(|_| SynthError::InvalidScript(format!("noise sigma {sigma} must be >= 0")))?;
            for frame in frames {
                let mut frame = frame.clone();
                for side in [crate::Handedness::Left, crate::Handedness::Right] {
                    if let Some(hand) = frame.hand_mut(side) {
                        let offset = Vec3::new(normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng));
                        shift_hand(hand, &offset);
                    }
                }
                out_frames.push(frame);
            }
            out_labels = input.labels.clone();
        }
        Perturbation::RemovePhaseFrames(kind) => {
            if !input.labels.iter().any(|l| l.kind == kind) {
                return Err(SynthError::UnknownPhase(kind));
            }
            for (frame, label) in frames.iter().zip(&input.labels) {
                if label.kind != kind {
                    out_frames.push(frame.clone());
                    out_labels.push(*label);
                }
            }
        }
        Perturbation::SuppressOcclusion => {
            for (frame, label) in frames.iter().zip(&input.labels) {
                let mut frame = frame.clone();
                let mut label = *label;
                if let Some(midpoint) = label.contact_midpoint.take() {
                    if frame.hand_count() == 1 {
                        let survivor = frame.hands().next().cloned().expect("one hand");
                        *frame.hand_mut(survivor.handedness.other()) = Some(mirror_hand(&survivor, &midpoint));
                    }
                }
                out_frames.push(frame);
                out_labels.push(label);
            }
        }
        Perturbation::DropFrames(rate) => {
            if !(0.0..1.0).contains(&rate) {
                return Err(SynthError::InvalidScript(format!("drop rate {rate} outside [0, 1)")));
            }
            for (frame, label) in frames.iter().zip(&input.labels) {
                if !rng.random_bool(rate) {
                    out_frames.push(frame.clone());
                    out_labels.push(*label);
                }
            }
        }
    }
    Ok(LabeledStream {
        stream: FrameStream::new(out_frames, input.stream.nominal_fps())?,
        labels: out_labels,
    })
}
