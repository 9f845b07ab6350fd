//! Two-hand tracking stream engine.
//!
//! Ingests per-hand frame streams from a LEAP-class 3D hand tracker,
//! extracts hand-hygiene gesture features and runs a finite-state detector
//! for the "rub hands palm to palm" washing stage. A seeded synthetic
//! stream generator doubles as the test oracle, and `mlprep` turns labeled
//! windows into a flat feature dataset.

pub mod cli;
pub mod config;
pub mod features;
pub mod frame_model;
pub mod geometry;
pub mod mlprep;
pub mod stage_detector;
pub mod synth;

pub use config::Config;
pub use frame_model::{Frame, FrameStream, HandObservation, Handedness};
pub use geometry::Vec3;
