//! File formats: matrix and frame JSON schemas, a CSV alternative for
//! matrices, and a deterministic JSON writer that prints every float with
//! 17 significant digits (enough to round-trip f64 bit-exactly).

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::frame::FrameSystem;
use crate::matrix::LinearMap;

/// Matrix schema: `{"rows": n, "cols": m, "data": [[re, im], ...]}` with
/// `data` in row-major order.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for LinearMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut data = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let z = self.entry(i, j);
                data.push([z.re, z.im]);
            }
        }
        MatrixJson {
            rows: self.rows(),
            cols: self.cols(),
            data,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LinearMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        let entries: Vec<Complex64> = raw
            .data
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        LinearMap::from_rows(raw.rows, raw.cols, &entries).map_err(D::Error::custom)
    }
}

/// Frame schema: `{"dim": n, "vectors": [[[re, im], ...], ...]}`.
#[derive(Serialize, Deserialize)]
struct FrameJson {
    dim: usize,
    vectors: Vec<Vec<[f64; 2]>>,
}

impl Serialize for FrameSystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let vectors = (0..self.count())
            .map(|j| {
                let v = self.vector(j);
                v.iter().map(|z| [z.re, z.im]).collect()
            })
            .collect();
        FrameJson {
            dim: self.dim(),
            vectors,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FrameSystem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = FrameJson::deserialize(deserializer)?;
        let vectors: Vec<Vec<Complex64>> = raw
            .vectors
            .iter()
            .map(|v| v.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            .collect();
        FrameSystem::from_vectors(raw.dim, &vectors).map_err(D::Error::custom)
    }
}

/// Formats a float with 17 significant digits, round-trippable to the bit.
fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_value(out: &mut String, value: &serde_json::Value, indent: usize) {
    match value {
        serde_json::Value::Null => out.push_str("null"),
        serde_json::Value::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                let _ = write!(out, "{}", format_f64(n.as_f64().unwrap_or(0.0)));
            }
        }
        serde_json::Value::String(s) => {
            let _ = write!(out, "{}", serde_json::Value::String(s.clone()));
        }
        serde_json::Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent + 1));
                write_value(out, item, indent + 1);
            }
            out.push('\n');
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        serde_json::Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (k, (key, item)) in map.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent + 1));
                let _ = write!(out, "{}: ", serde_json::Value::String(key.clone()));
                write_value(out, item, indent + 1);
            }
            out.push('\n');
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
    }
}

/// Serializes any value to deterministic JSON text with 17-digit floats.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let tree = serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    let mut out = String::new();
    write_value(&mut out, &tree, 0);
    out.push('\n');
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Reads a matrix from `.json` or `.csv` depending on the extension.
pub fn read_matrix(path: &Path) -> Result<LinearMap> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_matrix_csv(path),
        _ => read_json(path),
    }
}

pub fn write_matrix(path: &Path, m: &LinearMap) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => write_matrix_csv(path, m),
        _ => write_json(path, m),
    }
}

pub fn read_frame(path: &Path) -> Result<FrameSystem> {
    read_json(path)
}

/// Formats a complex scalar as `re+imi` (e.g. `1.5e0-2.25e0i`).
pub fn format_complex(z: Complex64) -> String {
    if z.im >= 0.0 || z.im.is_nan() {
        format!("{}+{}i", format_f64(z.re), format_f64(z.im))
    } else {
        format!("{}-{}i", format_f64(z.re), format_f64(-z.im))
    }
}

/// Parses `re`, `imi`, or `re±imi` cells.
pub fn parse_complex(cell: &str) -> Result<Complex64> {
    let s = cell.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty complex cell".into()));
    }
    if let Some(body) = s.strip_suffix(['i', 'I']) {
        // Split at the last +/- that is not part of an exponent or leading sign.
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let b = bytes[k];
            if (b == b'+' || b == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re: f64 = body[..k]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad real part in {s:?}")))?;
                let sign = if bytes[k] == b'-' { -1.0 } else { 1.0 };
                let im_text = &body[k + 1..];
                let im: f64 = if im_text.is_empty() {
                    1.0
                } else {
                    im_text
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad imaginary part in {s:?}")))?
                };
                Ok(Complex64::new(re, sign * im))
            }
            None => {
                let im: f64 = if body.is_empty() {
                    1.0
                } else {
                    body.parse()
                        .map_err(|_| Error::Parse(format!("bad imaginary part in {s:?}")))?
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = s
            .parse()
            .map_err(|_| Error::Parse(format!("bad real cell {s:?}")))?;
        Ok(Complex64::new(re, 0.0))
    }
}

pub fn write_matrix_csv(path: &Path, m: &LinearMap) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_complex(m.entry(i, j)));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<LinearMap> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<Complex64>> = line.split(',').map(parse_complex).collect();
        rows.push(row?);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty CSV matrix".into()));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("ragged CSV matrix".into()));
    }
    let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
    LinearMap::from_rows(flat.len() / cols, cols, &flat)
}
