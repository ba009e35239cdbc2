//! ASCII OFF meshes and curve snapshot CSV files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::axi::GridCurve;
use crate::error::{Error, Result};
use crate::mesh::{TriSurface, Vec3};
use crate::shapes::Vec2;

pub const CURVE_CSV_HEADER: &str = "rho,x1,x2";

/// Formats a surface as OFF text. Coordinates are written with 17
/// significant digits, so a read round trip is exact.
pub fn off_string(surface: &TriSurface) -> String {
    let mut s = String::with_capacity(64 * surface.vertex_count());
    s.push_str("OFF\n");
    let _ = writeln!(s, "{} {} 0", surface.vertex_count(), surface.triangle_count());
    for p in surface.positions() {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", p.x, p.y, p.z);
    }
    for t in surface.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

pub fn write_off(path: &Path, surface: &TriSurface) -> Result<()> {
    fs::write(path, off_string(surface))?;
    Ok(())
}

pub fn read_off(path: &Path) -> Result<TriSurface> {
    parse_off(&fs::read_to_string(path)?, path)
}

/// Parses OFF text; `path` only labels error messages. `#` starts a comment.
/// The result must be a closed, consistently oriented, nondegenerate
/// triangulation.
pub fn parse_off(text: &str, path: &Path) -> Result<TriSurface> {
    let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line_no, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    // the counts may share the header line
    let rest = match header.strip_prefix("OFF") {
        Some(rest) => rest.trim().to_string(),
        None => return Err(err(line_no, format!("expected OFF header, found {header:?}"))),
    };
    let (counts_line, counts) = if rest.is_empty() {
        let (n, l) = lines.next().ok_or_else(|| err(line_no, "missing counts line".into()))?;
        (n, l.to_string())
    } else {
        (line_no, rest)
    };
    let nums: Vec<&str> = counts.split_whitespace().collect();
    if nums.len() != 3 {
        return Err(err(counts_line, format!("expected \"V F E\", found {counts:?}")));
    }
    let parse_count = |s: &str| s.parse::<usize>().map_err(|e| err(counts_line, format!("bad count {s:?}: {e}")));
    let (nv, nf) = (parse_count(nums[0])?, parse_count(nums[1])?);
    parse_count(nums[2])?;

    let mut positions = Vec::with_capacity(nv);
    for k in 0..nv {
        let (n, l) = lines.next().ok_or_else(|| err(counts_line, format!("file ends after {k} of {nv} vertices")))?;
        let c: Vec<&str> = l.split_whitespace().collect();
        if c.len() < 3 {
            return Err(err(n, format!("vertex line needs 3 coordinates, found {}", c.len())));
        }
        let mut v = [0.0; 3];
        for i in 0..3 {
            v[i] = c[i].parse::<f64>().map_err(|e| err(n, format!("bad coordinate {:?}: {e}", c[i])))?;
            if !v[i].is_finite() {
                return Err(err(n, "non-finite coordinate".into()));
            }
        }
        positions.push(Vec3::new(v[0], v[1], v[2]));
    }
    let mut triangles = Vec::with_capacity(nf);
    for k in 0..nf {
        let (n, l) = lines.next().ok_or_else(|| err(counts_line, format!("file ends after {k} of {nf} faces")))?;
        let c: Vec<&str> = l.split_whitespace().collect();
        let arity = c
            .first()
            .ok_or_else(|| err(n, "empty face".into()))?
            .parse::<usize>()
            .map_err(|e| err(n, format!("bad face size: {e}")))?;
        if arity != 3 {
            return Err(err(n, format!("face {k} has {arity} vertices, only triangles are supported")));
        }
        if c.len() < 4 {
            return Err(err(n, format!("face {k} lists {} of 3 indices", c.len() - 1)));
        }
        let mut t = [0usize; 3];
        for i in 0..3 {
            t[i] = c[i + 1].parse::<usize>().map_err(|e| err(n, format!("bad index {:?}: {e}", c[i + 1])))?;
            if t[i] >= nv {
                return Err(err(n, format!("vertex index {} out of range (have {nv})", t[i])));
            }
        }
        triangles.push(t);
    }
    if let Some((n, _)) = lines.next() {
        return Err(err(n, "unexpected data after the last face".into()));
    }
    TriSurface::new(positions, triangles).map_err(|e| err(0, e.to_string()))
}

/// Writes `rho,x1,x2` rows for the current level of a curve.
pub fn curve_csv_string(curve: &GridCurve) -> String {
    let h = curve.h();
    let mut s = String::with_capacity(64 * curve.len());
    s.push_str(CURVE_CSV_HEADER);
    s.push('\n');
    for (j, x) in curve.positions().iter().enumerate() {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", j as f64 * h, x.x, x.y);
    }
    s
}

pub fn write_curve_csv(path: &Path, curve: &GridCurve) -> Result<()> {
    fs::write(path, curve_csv_string(curve))?;
    Ok(())
}

/// Reads `(ρ, x)` rows from a curve CSV.
pub fn read_curve_csv(path: &Path) -> Result<Vec<(f64, Vec2)>> {
    let text = fs::read_to_string(path)?;
    let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CURVE_CSV_HEADER => {}
        _ => return Err(err(1, format!("expected header {CURVE_CSV_HEADER:?}"))),
    }
    let mut out = Vec::new();
    for (i, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = l.split(',').map(str::trim).collect();
        if f.len() != 3 {
            return Err(err(i + 1, format!("expected 3 fields, found {}", f.len())));
        }
        let mut v = [0.0; 3];
        for k in 0..3 {
            v[k] = f[k].parse::<f64>().map_err(|e| err(i + 1, format!("bad number {:?}: {e}", f[k])))?;
        }
        out.push((v[0], Vec2::new(v[1], v[2])));
    }
    Ok(out)
}
