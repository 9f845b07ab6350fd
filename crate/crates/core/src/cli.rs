//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O or parse error,
//! 3 stage not completed (`detect` only).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::features::extract_feature_vector;
use crate::frame_model::{parse_csv_stream, write_csv_stream, CsvError, FrameStream, Handedness};
use crate::mlprep::{build_dataset, read_manifest, write_dataset, LabeledWindow};
use crate::stage_detector::{run_detector, Verdict};
use crate::synth::{generate, GestureScript};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_COMPLETED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hge", version, about = "Two-hand tracking streams: synthesis, features and rub-stage detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct StreamArgs {
    /// Left-hand CSV file
    #[arg(long)]
    left: PathBuf,
    /// Right-hand CSV file
    #[arg(long)]
    right: PathBuf,
}

#[derive(Debug, clap::Args)]
struct ConfigArg {
    /// Threshold file (TOML)
    #[arg(long, env = "HGE_CONFIG")]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a gesture script into a left/right CSV pair
    Synth {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out_left: PathBuf,
        #[arg(long)]
        out_right: PathBuf,
    },
    /// Run the rub-stage detector; exits 3 when the stage is not completed
    Detect {
        #[command(flatten)]
        stream: StreamArgs,
        #[command(flatten)]
        config: ConfigArg,
        /// Event log destination (default: stdout)
        #[arg(long)]
        events: Option<PathBuf>,
        /// Report destination (default: stdout)
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print one feature vector per consecutive window
    Features {
        #[command(flatten)]
        stream: StreamArgs,
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value_t = 2000)]
        window_ms: u64,
    },
    /// Build a labeled dataset from a manifest of stream windows
    Mlprep {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Check that a CSV pair parses
    Validate {
        #[command(flatten)]
        stream: StreamArgs,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn input(path: &Path, message: impl ToString) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_config(arg: &ConfigArg) -> Result<Config, CliError> {
    let Some(path) = &arg.config else {
        return Ok(Config::default());
    };
    Config::load(path).map_err(|e| match e {
        ConfigError::Io { path, source } => CliError::Io { path: path.into(), source },
        other => CliError::input(path, other),
    })
}

fn load_stream(args: &StreamArgs) -> Result<FrameStream, CliError> {
    let left = read(&args.left)?;
    let right = read(&args.right)?;
    parse_csv_stream(&left, &right).map_err(|e| {
        let path = match &e {
            CsvError::HeaderMismatch { side, .. }
            | CsvError::MalformedRow { side, .. }
            | CsvError::NonMonotonicTimestamp { side, .. }
            | CsvError::InvalidHand { side, .. } => match side {
                Handedness::Left => &args.left,
                Handedness::Right => &args.right,
            },
            CsvError::Stream(_) => &args.left,
        };
        CliError::input(path, e)
    })
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Other(format!("writing output: {e}")))
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Synth {
            script,
            out_left,
            out_right,
        } => {
            let text = read(&script)?;
            let script_def = GestureScript::from_toml_str(&text).map_err(|e| CliError::input(&script, e))?;
            let generated = generate(&script_def).map_err(|e| CliError::input(&script, e))?;
            let (left, right) = write_csv_stream(&generated.stream);
            write(&out_left, &left)?;
            write(&out_right, &right)?;
            emit(out, &format!("frames={}\n", generated.stream.len()))?;
            Ok(EXIT_OK)
        }
        Command::Detect {
            stream,
            config,
            events,
            report,
        } => {
            let cfg = load_config(&config)?;
            let frames = load_stream(&stream)?;
            let detection = run_detector(frames.frames(), &cfg).map_err(|e| CliError::input(&stream.left, e))?;
            let event_text: String = detection.events.iter().map(|e| format!("{e}\n")).collect();
            match &events {
                Some(path) => write(path, &event_text)?,
                None => emit(out, &event_text)?,
            }
            let report_text = detection.report.to_text();
            match &report {
                Some(path) => write(path, &report_text)?,
                None => emit(out, &report_text)?,
            }
            Ok(match detection.report.verdict {
                Verdict::Completed => EXIT_OK,
                Verdict::NotCompleted => EXIT_NOT_COMPLETED,
            })
        }
        Command::Features {
            stream,
            config,
            window_ms,
        } => {
            if window_ms == 0 {
                return Err(CliError::Other("--window-ms must be positive".into()));
            }
            let cfg = load_config(&config)?;
            let frames = load_stream(&stream)?;
            let all = frames.frames();
            let (Some(first), Some(last)) = (all.first(), all.last()) else {
                return Ok(EXIT_OK);
            };
            let mut start = first.timestamp_ms;
            while start <= last.timestamp_ms {
                let end = start + window_ms;
                let window = frames.slice_ms(start, end);
                let line = match extract_feature_vector(window, &cfg) {
                    Ok(v) => format!("{start} {end} {v}\n"),
                    Err(e) => format!("{start} {end} skipped: {e}\n"),
                };
                emit(out, &line)?;
                start = end;
            }
            Ok(EXIT_OK)
        }
        Command::Mlprep {
            manifest,
            out: out_path,
            config,
        } => {
            let cfg = load_config(&config)?;
            let entries = read_manifest(&manifest).map_err(|e| CliError::input(&manifest, e))?;
            let mut streams = Vec::with_capacity(entries.len());
            for e in &entries {
                streams.push(load_stream(&StreamArgs {
                    left: e.left.clone(),
                    right: e.right.clone(),
                })?);
            }
            let windows: Vec<LabeledWindow<'_>> = entries
                .iter()
                .zip(&streams)
                .map(|(e, s)| LabeledWindow {
                    frames: s.slice_ms(e.start_ms, e.end_ms),
                    label: &e.label,
                })
                .collect();
            let rows = build_dataset(&windows, &cfg).map_err(|e| CliError::input(&manifest, e))?;
            let text = write_dataset(&rows).map_err(|e| CliError::Other(e.to_string()))?;
            write(&out_path, &text)?;
            emit(out, &format!("rows={}\n", rows.len()))?;
            Ok(EXIT_OK)
        }
        Command::Validate { stream } => {
            let frames = load_stream(&stream)?;
            emit(
                out,
                &format!("ok frames={} fps={:.1}\n", frames.len(), frames.nominal_fps()),
            )?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the CLI, writing normal output to `out` and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
