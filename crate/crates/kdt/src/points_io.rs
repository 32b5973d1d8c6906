//! The `kdt-points v1` file format: a `# kdt-points v1` header line, then
//! one `x,y` pair per line in the shortest decimal form that round-trips.
//! Additional `#` lines are comments; the generator writes the run
//! manifest into one of them.

use crate::error::{Error, Result};
use crate::geometry::Point;
use std::fmt::Write as _;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

pub const POINTS_HEADER: &str = "# kdt-points v1";
const MANIFEST_PREFIX: &str = "# manifest: ";

pub fn write_points_file(
    path: &Path,
    points: &[Point],
    manifest: Option<&serde_json::Value>,
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    let mut buf = String::new();
    buf.push_str(POINTS_HEADER);
    buf.push('\n');
    if let Some(m) = manifest {
        let _ = writeln!(buf, "{MANIFEST_PREFIX}{m}");
    }
    for p in points {
        let _ = writeln!(buf, "{},{}", p.x, p.y);
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

#[derive(Debug)]
pub struct PointsFile {
    pub points: Vec<Point>,
    pub manifest: Option<serde_json::Value>,
}

pub fn read_points_file(path: &Path) -> Result<PointsFile> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut points = Vec::new();
    let mut manifest = None;
    let mut saw_header = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if lineno == 1 {
            if trimmed != POINTS_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header '{POINTS_HEADER}'"),
                });
            }
            saw_header = true;
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix(MANIFEST_PREFIX) {
            manifest = serde_json::from_str(rest).ok();
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        let (xs, ys) = trimmed.split_once(',').ok_or_else(|| Error::Parse {
            line: lineno,
            message: "expected 'x,y'".to_string(),
        })?;
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad coordinate '{s}': {e}"),
            })
        };
        let p = Point::new(parse(xs)?, parse(ys)?);
        if !p.is_finite() {
            return Err(Error::Parse {
                line: lineno,
                message: "non-finite coordinate".to_string(),
            });
        }
        points.push(p);
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header '{POINTS_HEADER}'"),
        });
    }
    Ok(PointsFile { points, manifest })
}
