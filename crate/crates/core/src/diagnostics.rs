//! Per-step observables and the evolution report.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::axi::{discrete_curvature_vector, GridCurve, Topology};
use crate::error::{Error, Result};
use crate::mesh::{self, TriSurface, TriangleGeometry};

pub const CSV_HEADER: &str = "step,time,area,energy_E,energy_Etilde,inv_kinf,quality";

/// Sum of the triangle areas.
pub fn surface_area(surface: &TriSurface) -> Result<f64> {
    mesh::total_area(surface)
}

/// `A = 2π h Σ_{j=1}^{J} (x_j·e1) q_j`, the area of the surface generated by
/// rotating the curve.
pub fn curve_area(curve: &GridCurve) -> f64 {
    let x = curve.positions();
    let h = curve.h();
    let n = x.len();
    let sum: f64 = (1..=curve.j_count()).map(|j| x[j % n].x * curve.q(j)).sum();
    2.0 * std::f64::consts::PI * h * sum
}

/// `K∞ = max_j |y_j|`.
pub fn kinf(curve: &GridCurve) -> Result<f64> {
    Ok(discrete_curvature_vector(curve)?.iter().map(|y| y.norm()).fold(0.0, f64::max))
}

/// `max_k |Y_k|` for the discrete mean curvature vector of a surface.
pub fn surface_kinf(surface: &TriSurface) -> Result<f64> {
    Ok(mesh::discrete_mean_curvature(surface)?.iter().map(|y| y.norm()).fold(0.0, f64::max))
}

/// `E = Σ w_k (s_k/2 + 1)` and `Ẽ = Σ w_k exp(s_k/2)` for nodal weights `w`.
pub fn weighted_energies(weights: &[f64], velocity_squared: &[f64]) -> (f64, f64) {
    weights.iter().zip(velocity_squared).fold((0.0, 0.0), |(e, et), (w, s)| {
        (e + w * (0.5 * s + 1.0), et + w * (0.5 * s).exp())
    })
}

/// Nodal velocity squared of a surface, `|p_k - prev_k|²/Δt²`.
pub fn surface_velocity_squared(surface: &TriSurface, dt: f64) -> Vec<f64> {
    let inv = 1.0 / (dt * dt);
    surface
        .positions()
        .iter()
        .zip(surface.prev_positions())
        .map(|(p, q)| (p - q).norm_squared() * inv)
        .collect()
}

/// Mass-lumped discrete energies `(E, Ẽ)` of a surface at its current level.
pub fn surface_energies(surface: &TriSurface, dt: f64) -> Result<(f64, f64)> {
    let mass = mesh::lumped_mass_diagonal(surface)?;
    Ok(weighted_energies(&mass, &surface_velocity_squared(surface, dt)))
}

/// Nodal weights `2π (x_j·e1) ½(q_j + q_{j+1}) h`; axis nodes use their single
/// adjacent segment.
pub fn curve_weights(curve: &GridCurve) -> Vec<f64> {
    let x = curve.positions();
    let n = x.len();
    let h = curve.h();
    let q = curve.segment_lengths();
    let two_pi = 2.0 * std::f64::consts::PI;
    (0..n)
        .map(|j| {
            let len = match curve.topology() {
                Topology::Periodic => 0.5 * (q[(j + n - 1) % n] + q[j]),
                Topology::Open if j == 0 => 0.5 * q[0],
                Topology::Open if j == n - 1 => 0.5 * q[n - 2],
                Topology::Open => 0.5 * (q[j - 1] + q[j]),
            };
            two_pi * x[j].x * len * h
        })
        .collect()
}

/// Discrete energies `(E, Ẽ)` of a curve using the backward velocity.
pub fn curve_energies(curve: &GridCurve) -> Result<(f64, f64)> {
    Ok(weighted_energies(&curve_weights(curve), &curve.velocity_squared()))
}

/// `max q / min q`.
pub fn curve_quality(curve: &GridCurve) -> f64 {
    let q = curve.segment_lengths();
    let (lo, hi) = q.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi / lo
}

/// Ratio of the largest to the smallest triangle area.
pub fn surface_quality(geom: &[TriangleGeometry]) -> f64 {
    let (lo, hi) = geom.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), g| (lo.min(g.area), hi.max(g.area)));
    hi / lo
}

/// Why an evolution stopped.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum HaltReason {
    #[default]
    Completed,
    DegenerateTriangle { index: usize, area: f64 },
    SolverFailure { iterations: usize, residual: f64 },
    SegmentCollapse { index: usize, q: f64 },
    AxisCollision { index: usize, x1: f64 },
    CurvatureBlowup { inv_kinf: f64 },
    Other(String),
}

impl HaltReason {
    pub fn from_error(e: &Error) -> Self {
        match *e {
            Error::DegenerateTriangle { index, area } => HaltReason::DegenerateTriangle { index, area },
            Error::SolverFailure { iterations, residual } => HaltReason::SolverFailure { iterations, residual },
            Error::DegenerateSegment { index } => HaltReason::SegmentCollapse { index, q: 0.0 },
            Error::AxisCollision { index, x1 } => HaltReason::AxisCollision { index, x1 },
            _ => HaltReason::Other(e.to_string()),
        }
    }

    pub fn is_completed(&self) -> bool {
        *self == HaltReason::Completed
    }
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltReason::Completed => write!(f, "completed"),
            HaltReason::DegenerateTriangle { index, area } => {
                write!(f, "degenerate_triangle(index={index},area={area:e})")
            }
            HaltReason::SolverFailure { iterations, residual } => {
                write!(f, "solver_failure(iterations={iterations},residual={residual:e})")
            }
            HaltReason::SegmentCollapse { index, q } => write!(f, "segment_collapse(index={index},q={q:e})"),
            HaltReason::AxisCollision { index, x1 } => write!(f, "axis_collision(index={index},x1={x1:e})"),
            HaltReason::CurvatureBlowup { inv_kinf } => write!(f, "curvature_blowup(inv_kinf={inv_kinf:e})"),
            HaltReason::Other(msg) => write!(f, "error({msg})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportRow {
    pub step: usize,
    pub time: f64,
    pub area: f64,
    pub energy_e: f64,
    pub energy_etilde: f64,
    pub inv_kinf: f64,
    pub quality: f64,
}

/// Time series of observables plus run metadata and the halt reason.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvolutionReport {
    pub rows: Vec<ReportRow>,
    pub halt: HaltReason,
    /// Ordered `key = value` pairs.
    pub metadata: Vec<(String, String)>,
}

impl EvolutionReport {
    pub fn push(&mut self, row: ReportRow) {
        debug_assert!(self.rows.last().map_or(true, |r| r.time < row.time), "times must increase");
        self.rows.push(row);
    }

    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.metadata.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.metadata.push((key.to_string(), value)),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn last(&self) -> Option<&ReportRow> {
        self.rows.last()
    }

    pub fn max_area(&self) -> f64 {
        self.rows.iter().map(|r| r.area).fold(0.0, f64::max)
    }

    /// Largest relative deviation of an energy from its initial value over
    /// the rows whose area is at least `area_fraction` of the maximum area.
    /// Stops at the first row below the threshold.
    pub fn energy_drift(&self, energy: Energy, area_fraction: f64) -> f64 {
        let Some(first) = self.rows.first() else { return 0.0 };
        let pick = |r: &ReportRow| match energy {
            Energy::E => r.energy_e,
            Energy::Etilde => r.energy_etilde,
        };
        let e0 = pick(first);
        let cutoff = area_fraction * self.max_area();
        self.rows
            .iter()
            .take_while(|r| r.area >= cutoff)
            .map(|r| ((pick(r) - e0) / e0).abs())
            .fold(0.0, f64::max)
    }

    /// Rows with `step % every == 0`, plus the last one.
    pub fn sampled(&self, every: usize) -> Vec<ReportRow> {
        let every = every.max(1);
        let mut out: Vec<ReportRow> = self.rows.iter().filter(|r| r.step % every == 0).copied().collect();
        if let Some(last) = self.rows.last() {
            if out.last() != Some(last) {
                out.push(*last);
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W, every: usize) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in self.sampled(every) {
            writeln!(
                w,
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                r.step, r.time, r.area, r.energy_e, r.energy_etilde, r.inv_kinf, r.quality
            )?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path, every: usize) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, every)?;
        fs::write(path, buf)?;
        Ok(())
    }

    /// Writes the metadata, followed by the halt reason, as `key=value` lines.
    pub fn write_metadata_file(&self, path: &Path) -> Result<()> {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            s.push_str(&format!("{k}={v}\n"));
        }
        s.push_str(&format!("halt_reason={}\n", self.halt));
        if let Some(r) = self.rows.last() {
            s.push_str(&format!("final_step={}\nfinal_time={:.12e}\n", r.step, r.time));
        }
        fs::write(path, s)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Energy {
    /// `½∫(V² + 2)`, conserved by `g = 1 + s/2`.
    E,
    /// `∫ exp(V²/2)`, conserved by `g = 1`.
    Etilde,
}

/// Reads a report CSV written by [`EvolutionReport::write_csv`].
pub fn read_report_csv(path: &Path) -> Result<Vec<ReportRow>> {
    let text = fs::read_to_string(path)?;
    let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((_, h)) => return Err(err(1, format!("unexpected header {h:?}"))),
        None => return Err(err(1, "empty file".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(err(line_no, format!("expected 7 fields, found {}", fields.len())));
        }
        let step = fields[0].parse::<usize>().map_err(|e| err(line_no, format!("step: {e}")))?;
        let mut v = [0.0; 6];
        for (k, f) in fields[1..].iter().enumerate() {
            v[k] = f.parse::<f64>().map_err(|e| err(line_no, format!("field {}: {e}", k + 2)))?;
        }
        if let Some(prev) = rows.last().map(|r: &ReportRow| r.time) {
            if !(v[0] > prev) {
                return Err(err(line_no, "times must be strictly increasing".into()));
            }
        }
        rows.push(ReportRow {
            step,
            time: v[0],
            area: v[1],
            energy_e: v[2],
            energy_etilde: v[3],
            inv_kinf: v[4],
            quality: v[5],
        });
    }
    Ok(rows)
}

/// Reads `key=value` lines.
pub fn read_metadata_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: "expected key=value".into(),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::FlowLaw;
    use crate::mesh::test_meshes::tetrahedron;
    use crate::shapes::{make_curve, make_sphere_mesh, ShapeKind, Vec2};
    use std::f64::consts::PI;

    #[test]
    fn tetrahedron_area() {
        assert!((surface_area(&tetrahedron()).unwrap() - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn sphere_area_converges() {
        let errs: Vec<f64> = (2..6)
            .map(|l| (surface_area(&make_sphere_mesh(1.0, l).unwrap()).unwrap() - 4.0 * PI).abs())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < 0.3 * w[0]), "{errs:?}");
        assert!(errs[3] < 1.5e-2);
    }

    fn semicircle(r: f64, j: usize) -> GridCurve {
        GridCurve::new(Topology::Open, make_curve(ShapeKind::Sphere { r }, j).unwrap(), 0.1, FlowLaw::Constant)
            .unwrap()
    }

    #[test]
    fn curve_area_second_order() {
        let errs: Vec<f64> = [32, 64, 128].iter().map(|&j| (curve_area(&semicircle(1.0, j)) - 4.0 * PI).abs()).collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.9, "{errs:?}");
        }
    }

    #[test]
    fn cylinder_segment_area() {
        let (d, len) = (0.5, 2.0);
        let pts = vec![Vec2::new(0.0, -1.0), Vec2::new(d, 0.0), Vec2::new(d, len), Vec2::new(0.0, len + 1.0)];
        let c = GridCurve::new(Topology::Open, pts, 0.1, FlowLaw::Constant).unwrap();
        // second segment is the lateral cylinder
        let h = c.h();
        let contribution = 2.0 * PI * h * c.positions()[2].x * c.q(2);
        assert!((contribution - 2.0 * PI * d * len).abs() < 1e-14);
    }

    #[test]
    fn torus_curve_area() {
        // 4π² R r
        let pts = make_curve(ShapeKind::Torus { major: 2.0, minor: 1.0 }, 512).unwrap();
        let c = GridCurve::new(Topology::Periodic, pts, 0.1, FlowLaw::Constant).unwrap();
        assert!((curve_area(&c) - 8.0 * PI * PI).abs() < 1e-3);
    }

    #[test]
    fn kinf_of_spheres() {
        for (r, expect) in [(1.0, 2.0), (2.0, 1.0)] {
            let mut last = f64::INFINITY;
            for j in [32, 64, 128] {
                let c = semicircle(r, j);
                let dev = (kinf(&c).unwrap() * r - 2.0).abs();
                assert!(dev < 30.0 / (j * j) as f64, "r={r} J={j} dev={dev}");
                // the axis nodes are exact; the equator converges
                let mid = (discrete_curvature_vector(&c).unwrap()[j / 2].norm() * r - 2.0).abs();
                assert!(mid < last);
                last = mid;
            }
            assert!((kinf(&semicircle(r, 256)).unwrap() - expect).abs() < 1e-3);
        }
    }

    #[test]
    fn kinf_grows_at_a_kink() {
        // a cone-like profile with a corner at (1, 0)
        let make = |j: usize| {
            let pts: Vec<Vec2> = (0..=j)
                .map(|k| {
                    let s = k as f64 / j as f64;
                    if s <= 0.5 {
                        Vec2::new(2.0 * s, -1.0 + 2.0 * s)
                    } else {
                        Vec2::new(2.0 - 2.0 * s, 2.0 * s - 1.0)
                    }
                })
                .collect();
            GridCurve::new(Topology::Open, pts, 0.1, FlowLaw::Constant).unwrap()
        };
        let k: Vec<f64> = [16, 32, 64].iter().map(|&j| kinf(&make(j)).unwrap()).collect();
        assert!((k[1] / k[0] - 2.0).abs() < 0.2 && (k[2] / k[1] - 2.0).abs() < 0.2, "{k:?}");
    }

    #[test]
    fn energies_at_rest_and_constant_speed() {
        let s = make_sphere_mesh(1.0, 2).unwrap();
        let area = surface_area(&s).unwrap();
        let (e, et) = surface_energies(&s, 0.01).unwrap();
        assert!((e - area).abs() < 1e-13 && (et - area).abs() < 1e-13);

        let c = 0.8;
        let mass = mesh::lumped_mass_diagonal(&s).unwrap();
        let (e, et) = weighted_energies(&mass, &vec![c * c; mass.len()]);
        assert!((e - (0.5 * c * c + 1.0) * area).abs() < 1e-12);
        assert!((et - (0.5 * c * c).exp() * area).abs() < 1e-12);
    }

    #[test]
    fn curve_energy_at_rest_is_the_weight_sum() {
        let c = semicircle(1.0, 128);
        let (e, et) = curve_energies(&c).unwrap();
        let w: f64 = curve_weights(&c).iter().sum();
        assert!((e - w).abs() < 1e-13 && (et - w).abs() < 1e-13);
        assert!((w - 4.0 * PI).abs() < 1e-2);
    }

    #[test]
    fn report_csv_round_trip() {
        let mut rep = EvolutionReport::default();
        for k in 0..5 {
            rep.push(ReportRow {
                step: k,
                time: 0.1 * k as f64,
                area: 1.0 / (k + 1) as f64,
                energy_e: 2.0,
                energy_etilde: 3.0 + k as f64 * 1e-9,
                inv_kinf: 0.5,
                quality: 1.25,
            });
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        rep.write_csv_file(&path, 2).unwrap();
        let rows = read_report_csv(&path).unwrap();
        assert_eq!(rows.iter().map(|r| r.step).collect::<Vec<_>>(), vec![0, 2, 4]);
        for r in &rows {
            let orig = rep.rows[r.step];
            assert!((r.area - orig.area).abs() <= 1e-12 * orig.area);
            assert!((r.energy_etilde - orig.energy_etilde).abs() <= 1e-11);
        }
        assert!(rep.energy_drift(Energy::Etilde, 0.0) > 1e-9);
        assert_eq!(rep.energy_drift(Energy::E, 0.0), 0.0);
    }

    #[test]
    fn halt_reason_text() {
        assert_eq!(HaltReason::Completed.to_string(), "completed");
        let h = HaltReason::from_error(&Error::DegenerateTriangle { index: 3, area: 0.0 });
        assert!(h.to_string().starts_with("degenerate_triangle(index=3"));
    }
}
