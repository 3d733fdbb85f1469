//! Plain-text on-disk formats: matrices, feature tracks, and label lists.
//!
//! Values are written with 17 significant digits, enough for an exact f64
//! round trip, so saved fixtures reproduce SVD-sensitive results bit for bit.
//! Parse errors name the offending line (1-based).

use std::fs;
use std::path::Path;

use nls_core::datagen::TrajectorySet;
use nls_core::{Labeling, Matrix};

use crate::error::{CliError, Result};

fn fmt_value(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_value(token: &str, path: &Path, line_no: usize) -> Result<f64> {
    let value: f64 = token.trim().parse().map_err(|_| {
        CliError::Data(format!(
            "{}:{line_no}: cannot parse '{}' as a number",
            path.display(),
            token.trim()
        ))
    })?;
    if !value.is_finite() {
        return Err(CliError::Data(format!(
            "{}:{line_no}: non-finite value {value}",
            path.display()
        )));
    }
    Ok(value)
}

/// Writes a matrix as CSV: a "rows,cols" header, then one line per row.
pub fn write_matrix(path: &Path, matrix: &Matrix) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("{},{}\n", matrix.rows(), matrix.cols()));
    for i in 0..matrix.rows() {
        let row: Vec<String> = (0..matrix.cols()).map(|j| fmt_value(matrix.get(i, j))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Reads a matrix written by [`write_matrix`].
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| {
        CliError::Data(format!("{}:1: empty file, expected 'rows,cols' header", path.display()))
    })?;
    let dims: Vec<&str> = header.split(',').collect();
    let parse_dim = |s: &str| -> Result<usize> {
        s.trim().parse().map_err(|_| {
            CliError::Data(format!(
                "{}:1: malformed header '{header}', expected 'rows,cols'",
                path.display()
            ))
        })
    };
    if dims.len() != 2 {
        return Err(CliError::Data(format!(
            "{}:1: malformed header '{header}', expected 'rows,cols'",
            path.display()
        )));
    }
    let rows = parse_dim(dims[0])?;
    let cols = parse_dim(dims[1])?;
    if rows == 0 || cols == 0 {
        return Err(CliError::Data(format!(
            "{}:1: matrix must be nonempty, declared {rows}x{cols}",
            path.display()
        )));
    }

    let mut matrix = Matrix::zeros(rows, cols);
    let mut filled = 0;
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if filled == rows {
            return Err(CliError::Data(format!(
                "{}:{line_no}: more than the declared {rows} rows",
                path.display()
            )));
        }
        let tokens: Vec<&str> = line.split(',').collect();
        if tokens.len() != cols {
            return Err(CliError::Data(format!(
                "{}:{line_no}: {} values on the line, expected {cols}",
                path.display(),
                tokens.len()
            )));
        }
        for (j, token) in tokens.iter().enumerate() {
            matrix.set(filled, j, parse_value(token, path, line_no)?);
        }
        filled += 1;
    }
    if filled != rows {
        return Err(CliError::Data(format!(
            "{}: {filled} data rows, header declared {rows}",
            path.display()
        )));
    }
    Ok(matrix)
}

/// Writes one label per line.
pub fn write_labels(path: &Path, labels: &Labeling) -> Result<()> {
    let mut out = String::new();
    for label in labels {
        out.push_str(&label.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Reads a labels file: one non-negative integer per line.
pub fn read_labels(path: &Path) -> Result<Labeling> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let label: usize = line.trim().parse().map_err(|_| {
            CliError::Data(format!(
                "{}:{}: cannot parse '{}' as a label",
                path.display(),
                idx + 1,
                line.trim()
            ))
        })?;
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(CliError::Data(format!("{}: no labels found", path.display())));
    }
    Ok(labels)
}

/// Writes tracks as "frames=F points=N" plus one line per track with its
/// 2F interleaved coordinates. Ground-truth labels, when present, go to the
/// companion `.labels` file next to `path`.
pub fn write_tracks(path: &Path, tracks: &TrajectorySet) -> Result<()> {
    tracks.validate().map_err(CliError::from)?;
    let mut out = String::new();
    out.push_str(&format!("frames={} points={}\n", tracks.num_frames, tracks.num_tracks()));
    for track in &tracks.tracks {
        let mut fields = Vec::with_capacity(2 * tracks.num_frames);
        for &(x, y) in track {
            fields.push(fmt_value(x));
            fields.push(fmt_value(y));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if let Some(labels) = &tracks.labels {
        write_labels(&path.with_extension("labels"), labels)?;
    }
    Ok(())
}

/// Reads a tracks file; attaches labels from the companion `.labels` file
/// when one exists, otherwise leaves them absent.
pub fn load_tracks(path: &Path) -> Result<TrajectorySet> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| {
        CliError::Data(format!(
            "{}:1: empty file, expected 'frames=F points=N' header",
            path.display()
        ))
    })?;
    let bad_header = || {
        CliError::Data(format!(
            "{}:1: malformed header '{header}', expected 'frames=F points=N'",
            path.display()
        ))
    };
    let mut parts = header.split_whitespace();
    let frames: usize = parts
        .next()
        .and_then(|t| t.strip_prefix("frames="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(bad_header)?;
    let points: usize = parts
        .next()
        .and_then(|t| t.strip_prefix("points="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(bad_header)?;
    if parts.next().is_some() {
        return Err(bad_header());
    }

    let mut tracks = Vec::with_capacity(points);
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if tracks.len() == points {
            return Err(CliError::Data(format!(
                "{}:{line_no}: more than the declared {points} tracks",
                path.display()
            )));
        }
        let tokens: Vec<&str> = line.split(',').collect();
        if tokens.len() != 2 * frames {
            return Err(CliError::Data(format!(
                "{}:{line_no}: {} values on the line, expected {}",
                path.display(),
                tokens.len(),
                2 * frames
            )));
        }
        let mut track = Vec::with_capacity(frames);
        for pair in tokens.chunks(2) {
            let x = parse_value(pair[0], path, line_no)?;
            let y = parse_value(pair[1], path, line_no)?;
            track.push((x, y));
        }
        tracks.push(track);
    }
    if tracks.len() != points {
        return Err(CliError::Data(format!(
            "{}: {} tracks, header declared {points}",
            path.display(),
            tracks.len()
        )));
    }

    let labels_path = path.with_extension("labels");
    let labels = if labels_path.exists() {
        let labels = read_labels(&labels_path)?;
        if labels.len() != points {
            return Err(CliError::Data(format!(
                "{}: {} labels for {points} tracks",
                labels_path.display(),
                labels.len()
            )));
        }
        Some(labels)
    } else {
        None
    };

    let set = TrajectorySet { num_frames: frames, tracks, labels };
    set.validate().map_err(CliError::from)?;
    Ok(set)
}

/// Optional per-sequence metadata: `key=value` lines, currently `group` and
/// `motions`.
#[derive(Debug, Default, Clone)]
pub struct SequenceMeta {
    pub group: Option<String>,
    pub motions: Option<usize>,
}

/// Reads the `.meta` companion of a sequence, if present.
pub fn load_meta(path: &Path) -> Result<SequenceMeta> {
    let mut meta = SequenceMeta::default();
    if !path.exists() {
        return Ok(meta);
    }
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Data(format!(
                "{}:{}: expected 'key=value', got '{line}'",
                path.display(),
                idx + 1
            ))
        })?;
        match key.trim() {
            "group" => meta.group = Some(value.trim().to_string()),
            "motions" => {
                meta.motions = Some(value.trim().parse().map_err(|_| {
                    CliError::Data(format!(
                        "{}:{}: cannot parse motions count '{}'",
                        path.display(),
                        idx + 1,
                        value.trim()
                    ))
                })?)
            }
            other => {
                return Err(CliError::Data(format!(
                    "{}:{}: unknown key '{other}'",
                    path.display(),
                    idx + 1
                )))
            }
        }
    }
    Ok(meta)
}
