use thiserror::Error;

use super::{Frame, FrameError, FrameStream, HandObservation, Handedness};

/// Records closer than this are treated as one frame: half the frame
/// period at 100 fps.
pub const MERGE_WINDOW_MS: u64 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct HandRecord {
    pub timestamp_ms: u64,
    pub hand: HandObservation,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MergeError {
    #[error("{side} record {index} ({timestamp_ms} ms) is not after its predecessor")]
    NonMonotonicTimestamp {
        side: Handedness,
        index: usize,
        timestamp_ms: u64,
    },
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Aligns per-hand records into frames.
///
/// Records whose timestamps differ by at most [`MERGE_WINDOW_MS`] share a
/// frame stamped with the left record's time. A head record is emitted alone
/// when its own successor is still no later than the other head, so each
/// record pairs with its nearest in-window partner and output time never
/// goes backwards.
pub fn merge_hand_streams(
    left: &[HandRecord],
    right: &[HandRecord],
) -> Result<FrameStream, MergeError> {
    check_sorted(left, Handedness::Left)?;
    check_sorted(right, Handedness::Right)?;

    let place = |frame: &mut Frame, side: Handedness, rec: &HandRecord| {
        let mut hand = rec.hand.clone();
        hand.handedness = side;
        *frame.hand_mut(side) = Some(hand);
    };
    let single = |side: Handedness, rec: &HandRecord| {
        let mut frame = Frame::empty(rec.timestamp_ms);
        place(&mut frame, side, rec);
        frame
    };

    let mut frames = Vec::with_capacity(left.len().max(right.len()));
    let (mut i, mut j) = (0, 0);
    while i < left.len() || j < right.len() {
        match (left.get(i), right.get(j)) {
            (Some(l), Some(r)) => {
                let (tl, tr) = (l.timestamp_ms, r.timestamp_ms);
                if tl.abs_diff(tr) <= MERGE_WINDOW_MS {
                    // a closer partner for the earlier record may follow it
                    let earlier_has_closer = if tl <= tr {
                        left.get(i + 1).is_some_and(|n| n.timestamp_ms <= tr)
                    } else {
                        right.get(j + 1).is_some_and(|n| n.timestamp_ms <= tl)
                    };
                    if earlier_has_closer {
                        if tl <= tr {
                            frames.push(single(Handedness::Left, l));
                            i += 1;
                        } else {
                            frames.push(single(Handedness::Right, r));
                            j += 1;
                        }
                    } else {
                        let mut frame = Frame::empty(tl);
                        place(&mut frame, Handedness::Left, l);
                        place(&mut frame, Handedness::Right, r);
                        frames.push(frame);
                        i += 1;
                        j += 1;
                    }
                } else if tl < tr {
                    frames.push(single(Handedness::Left, l));
                    i += 1;
                } else {
                    frames.push(single(Handedness::Right, r));
                    j += 1;
                }
            }
            (Some(l), None) => {
                frames.push(single(Handedness::Left, l));
                i += 1;
            }
            (None, Some(r)) => {
                frames.push(single(Handedness::Right, r));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    Ok(FrameStream::with_estimated_fps(frames)?)
}

fn check_sorted(records: &[HandRecord], side: Handedness) -> Result<(), MergeError> {
    for (index, pair) in records.windows(2).enumerate() {
        if pair[1].timestamp_ms <= pair[0].timestamp_ms {
            return Err(MergeError::NonMonotonicTimestamp {
                side,
                index: index + 1,
                timestamp_ms: pair[1].timestamp_ms,
            });
        }
    }
    Ok(())
}
