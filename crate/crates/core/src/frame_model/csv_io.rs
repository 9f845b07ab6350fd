//! Per-hand CSV files: one file per hand, 26 columns, `\n` line endings,
//! empty cells for untracked fingertips.

use std::fmt::Write as _;

use thiserror::Error;

use super::merge::{merge_hand_streams, HandRecord, MergeError};
use super::{FrameError, FrameStream, HandObservation, Handedness};
use crate::geometry::Vec3;

pub const CSV_HEADER: &str = "timestamp_ms,palm_x,palm_y,palm_z,normal_x,normal_y,normal_z,\
vel_x,vel_y,vel_z,grab_strength,thumb_x,thumb_y,thumb_z,index_x,index_y,index_z,\
middle_x,middle_y,middle_z,ring_x,ring_y,ring_z,pinky_x,pinky_y,pinky_z";

const COLUMNS: usize = 26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CsvError {
    #[error("{side} file: header mismatch, found `{found}`")]
    HeaderMismatch { side: Handedness, found: String },
    #[error("{side} file line {line}: malformed value in column {column}")]
    MalformedRow {
        side: Handedness,
        line: usize,
        column: String,
    },
    #[error("{side} file line {line}: timestamp not after previous row")]
    NonMonotonicTimestamp { side: Handedness, line: usize },
    #[error("{side} file line {line}: {source}")]
    InvalidHand {
        side: Handedness,
        line: usize,
        source: FrameError,
    },
    #[error(transparent)]
    Stream(#[from] FrameError),
}

impl CsvError {
    pub fn line(&self) -> Option<usize> {
        match self {
            CsvError::MalformedRow { line, .. }
            | CsvError::NonMonotonicTimestamp { line, .. }
            | CsvError::InvalidHand { line, .. } => Some(*line),
            CsvError::HeaderMismatch { .. } => Some(1),
            CsvError::Stream(_) => None,
        }
    }
}

fn column_name(index: usize) -> String {
    CSV_HEADER.split(',').nth(index).unwrap_or("?").to_string()
}

/// Parses the left and right hand files and merges them into one stream.
pub fn parse_csv_stream(left_file: &str, right_file: &str) -> Result<FrameStream, CsvError> {
    let left = parse_hand_file(left_file, Handedness::Left)?;
    let right = parse_hand_file(right_file, Handedness::Right)?;
    merge_hand_streams(&left, &right).map_err(|e| match e {
        // both inputs were checked row by row above
        MergeError::NonMonotonicTimestamp { side, index, .. } => {
            CsvError::NonMonotonicTimestamp { side, line: index + 2 }
        }
        MergeError::Frame(f) => CsvError::Stream(f),
    })
}

fn parse_hand_file(text: &str, side: Handedness) -> Result<Vec<HandRecord>, CsvError> {
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header = lines.next().unwrap_or("");
    if header != CSV_HEADER {
        return Err(CsvError::HeaderMismatch {
            side,
            found: header.to_string(),
        });
    }
    let mut records: Vec<HandRecord> = Vec::new();
    for (offset, row) in lines.enumerate() {
        let line = offset + 2;
        if row.is_empty() {
            continue;
        }
        let record = parse_row(row, side, line)?;
        if let Some(prev) = records.last() {
            if record.timestamp_ms <= prev.timestamp_ms {
                return Err(CsvError::NonMonotonicTimestamp { side, line });
            }
        }
        records.push(record);
    }
    Ok(records)
}

fn parse_row(row: &str, side: Handedness, line: usize) -> Result<HandRecord, CsvError> {
    let cells: Vec<&str> = row.split(',').collect();
    if cells.len() != COLUMNS {
        return Err(CsvError::MalformedRow {
            side,
            line,
            column: if cells.len() < COLUMNS {
                column_name(cells.len())
            } else {
                format!("extra column {}", cells.len() + 1)
            },
        });
    }
    let malformed = |index: usize| CsvError::MalformedRow {
        side,
        line,
        column: column_name(index),
    };
    let num = |index: usize| -> Result<f64, CsvError> {
        cells[index]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| malformed(index))
    };
    let vec3 = |start: usize| -> Result<Vec3, CsvError> {
        Ok(Vec3::new(num(start)?, num(start + 1)?, num(start + 2)?))
    };

    let timestamp_ms = cells[0].parse::<u64>().map_err(|_| malformed(0))?;
    let mut fingertips = [None; 5];
    for (finger, tip) in fingertips.iter_mut().enumerate() {
        let start = 11 + 3 * finger;
        let empty = cells[start..start + 3].iter().filter(|c| c.is_empty()).count();
        *tip = match empty {
            3 => None,
            0 => Some(vec3(start)?),
            _ => {
                let first_empty = (start..start + 3).find(|&i| cells[i].is_empty()).unwrap();
                return Err(malformed(first_empty));
            }
        };
    }
    let hand = HandObservation {
        handedness: side,
        palm_position: vec3(1)?,
        palm_normal: vec3(4)?,
        palm_velocity: vec3(7)?,
        grab_strength: num(10)?,
        fingertips,
    }
    .validated()
    .map_err(|source| CsvError::InvalidHand { side, line, source })?;
    Ok(HandRecord { timestamp_ms, hand })
}

/// Writes the stream as a `(left, right)` pair of per-hand files.
pub fn write_csv_stream(stream: &FrameStream) -> (String, String) {
    let mut left = format!("{CSV_HEADER}\n");
    let mut right = left.clone();
    for frame in stream.frames() {
        if let Some(h) = &frame.left {
            write_row(&mut left, frame.timestamp_ms, h);
        }
        if let Some(h) = &frame.right {
            write_row(&mut right, frame.timestamp_ms, h);
        }
    }
    (left, right)
}

fn write_row(out: &mut String, timestamp_ms: u64, h: &HandObservation) {
    // `{}` on f64 prints the shortest representation that parses back exactly
    let _ = write!(out, "{timestamp_ms}");
    for v in [&h.palm_position, &h.palm_normal, &h.palm_velocity] {
        let _ = write!(out, ",{},{},{}", v.x, v.y, v.z);
    }
    let _ = write!(out, ",{}", h.grab_strength);
    for tip in &h.fingertips {
        match tip {
            Some(v) => {
                let _ = write!(out, ",{},{},{}", v.x, v.y, v.z);
            }
            None => out.push_str(",,,"),
        }
    }
    out.push('\n');
}
