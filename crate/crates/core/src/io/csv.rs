//! Point CSV: one row per return.
//!
//! `frame_id,channel,azimuth_deg,elevation_deg,range_m,x,y,z,intensity,kind,source_id`
//!
//! Floats carry 6 significant digits. `kind` is `target`, `dust`, or `recorded`
//! (injected output of an unlabeled recording, with an empty `source_id`).

use std::fmt::Write as _;

use crate::error::ParseError;
use crate::geom::Vec3;
use crate::sim::{Frame, LidarReturn, ReturnKind};

pub const CSV_HEADER: &str =
    "frame_id,channel,azimuth_deg,elevation_deg,range_m,x,y,z,intensity,kind,source_id";

/// A point read back from CSV; the input of the injection path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordedPoint {
    pub frame_id: u64,
    pub channel: u16,
    pub azimuth_deg: f64,
    pub range: f64,
    pub intensity: u8,
    pub kind: ReturnKind,
    /// Recorded Cartesian position, kept verbatim for unmodified points.
    pub point: Option<Vec3>,
}

impl From<&LidarReturn> for RecordedPoint {
    fn from(r: &LidarReturn) -> Self {
        Self {
            frame_id: 0,
            channel: r.channel,
            azimuth_deg: r.azimuth_deg,
            range: r.range,
            intensity: r.intensity,
            kind: r.kind,
            point: Some(r.point),
        }
    }
}

/// Formats with 6 significant digits, using the shortest text that reads back the same.
pub fn fmt_sig6(x: f64) -> String {
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        // Avoid "-0".
        return "0".to_string();
    }
    format!("{rounded}")
}

fn kind_fields(kind: ReturnKind) -> (&'static str, String) {
    match kind {
        ReturnKind::Target(id) => ("target", id.to_string()),
        ReturnKind::Dust(id) => ("dust", id.to_string()),
        ReturnKind::Recorded => ("recorded", String::new()),
    }
}

/// Appends one row (with trailing newline).
pub fn push_row(out: &mut String, frame_id: u64, r: &LidarReturn) {
    let (kind, source) = kind_fields(r.kind);
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{}",
        frame_id,
        r.channel,
        fmt_sig6(r.azimuth_deg),
        fmt_sig6(r.elevation_deg),
        fmt_sig6(r.range),
        fmt_sig6(r.point.x),
        fmt_sig6(r.point.y),
        fmt_sig6(r.point.z),
        r.intensity,
        kind,
        source
    );
}

/// Rows of one frame without the header.
pub fn frame_rows(frame: &Frame) -> String {
    let mut out = String::with_capacity(frame.returns.len() * 64);
    for r in &frame.returns {
        push_row(&mut out, frame.frame_id, r);
    }
    out
}

/// Header plus one row per return.
pub fn write_csv(frame: &Frame) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    out.push_str(&frame_rows(frame));
    out
}

fn field<T: std::str::FromStr>(line: usize, name: &str, raw: &str) -> Result<T, ParseError> {
    raw.trim().parse().map_err(|_| ParseError::Line {
        line,
        message: format!("invalid {name} `{raw}`"),
    })
}

/// Parses CSV produced by [`write_csv`] (or any file with the same header).
pub fn read_csv(text: &str) -> Result<Vec<RecordedPoint>, ParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == CSV_HEADER => {}
        Some((_, h)) => {
            return Err(ParseError::Line {
                line: 1,
                message: format!("unexpected header `{h}`, expected `{CSV_HEADER}`"),
            })
        }
        None => {
            return Err(ParseError::Line {
                line: 1,
                message: "missing header".into(),
            })
        }
    }
    let mut points = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 11 {
            return Err(ParseError::Line {
                line: n,
                message: format!("expected 11 fields, found {}", cols.len()),
            });
        }
        let range: f64 = field(n, "range_m", cols[4])?;
        if !(range.is_finite() && range > 0.0) {
            return Err(ParseError::Line {
                line: n,
                message: format!("range_m must be > 0, got {range}"),
            });
        }
        let azimuth_deg: f64 = field(n, "azimuth_deg", cols[2])?;
        if !azimuth_deg.is_finite() {
            return Err(ParseError::Line {
                line: n,
                message: "azimuth_deg must be finite".into(),
            });
        }
        let source = cols[10].trim();
        let kind = match cols[9].trim() {
            "target" => ReturnKind::Target(field(n, "source_id", source)?),
            "dust" => ReturnKind::Dust(field(n, "source_id", source)?),
            "recorded" | "" => ReturnKind::Recorded,
            other => {
                return Err(ParseError::Line {
                    line: n,
                    message: format!("invalid kind `{other}`"),
                })
            }
        };
        let xyz: [&str; 3] = [cols[5], cols[6], cols[7]];
        let point = if xyz.iter().all(|c| c.trim().is_empty()) {
            None
        } else {
            Some(Vec3::new(
                field(n, "x", xyz[0])?,
                field(n, "y", xyz[1])?,
                field(n, "z", xyz[2])?,
            ))
        };
        points.push(RecordedPoint {
            frame_id: field(n, "frame_id", cols[0])?,
            channel: field(n, "channel", cols[1])?,
            azimuth_deg,
            range,
            intensity: field(n, "intensity", cols[8])?,
            kind,
            point,
        });
    }
    Ok(points)
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub fn read_csv_file(path: impl AsRef<std::path::Path>) -> Result<Vec<RecordedPoint>, ReadError> {
    let text = std::fs::read_to_string(path)?;
    Ok(read_csv(&text)?)
}
