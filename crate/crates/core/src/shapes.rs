//! Initial surfaces and generating curves.
//!
//! Surfaces of revolution are rotated about the `x2`-axis: a generating
//! point `(x1, x2)` sweeps `(x1 cos θ, x2, x1 sin θ)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::Vector2;

use crate::axi::Topology;
use crate::error::{Error, Result};
use crate::mesh::{TriSurface, Vec3};

pub type Vec2 = Vector2<f64>;

/// Coefficients of the Evans-Fung biconcave profile
/// `x2 = ±(R/2) sqrt(1 - u) (c0 + c1 u + c2 u²)` with `u = (x1/R)²`.
///
/// This is a generic red-cell-like disk, not a reproduction of any
/// particular published input mesh.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiconcaveParams {
    pub radius: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for BiconcaveParams {
    fn default() -> Self {
        Self { radius: 2.1, c0: 0.207161, c1: 2.002558, c2: -1.122762 }
    }
}

impl BiconcaveParams {
    fn height(&self, u: f64) -> f64 {
        0.5 * self.radius * (self.c0 + self.c1 * u + self.c2 * u * u)
    }
}

/// Initial shape families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShapeKind {
    Sphere { r: f64 },
    /// Semi-axes along `e1`, `e2`, `e3`.
    Ellipsoid { a: f64, b: f64, c: f64 },
    Torus { major: f64, minor: f64 },
    Biconcave(BiconcaveParams),
}

impl ShapeKind {
    /// The 2:1:1 cigar with its long axis along `e2`.
    pub fn cigar() -> Self {
        ShapeKind::Ellipsoid { a: 1.0, b: 2.0, c: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            ShapeKind::Sphere { r } => positive("radius", r),
            ShapeKind::Ellipsoid { a, b, c } => {
                positive("a", a)?;
                positive("b", b)?;
                positive("c", c)
            }
            ShapeKind::Torus { major, minor } => {
                positive("major radius", major)?;
                positive("minor radius", minor)?;
                if major <= minor {
                    return Err(Error::Domain(format!("torus needs R > r, got R={major}, r={minor}")));
                }
                Ok(())
            }
            ShapeKind::Biconcave(p) => {
                positive("radius", p.radius)?;
                // half thickness must stay positive on u in [0, 1)
                let min = (0..=1000).map(|k| p.height(k as f64 / 1000.0)).fold(f64::INFINITY, f64::min);
                positive("biconcave half thickness", min)
            }
        }
    }

    /// Whether the surface has genus 0 (open generating curve) or 1.
    pub fn topology(&self) -> Topology {
        match self {
            ShapeKind::Torus { .. } => Topology::Periodic,
            _ => Topology::Open,
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeKind::Sphere { r } => write!(f, "sphere(r={r})"),
            ShapeKind::Ellipsoid { a, b, c } => write!(f, "ellipsoid(a={a},b={b},c={c})"),
            ShapeKind::Torus { major, minor } => write!(f, "torus(R={major},r={minor})"),
            ShapeKind::Biconcave(p) => {
                write!(f, "biconcave(radius={},c0={},c1={},c2={})", p.radius, p.c0, p.c1, p.c2)
            }
        }
    }
}

/// A shape with its resolution: refinement level for surfaces, `J` for
/// curves (for the torus surface, `4·2^level × 2·2^level` cells).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub resolution: usize,
}

impl ShapeSpec {
    pub fn surface(&self) -> Result<TriSurface> {
        match self.kind {
            ShapeKind::Sphere { r } => make_sphere_mesh(r, self.resolution),
            ShapeKind::Ellipsoid { a, b, c } => make_ellipsoid_mesh(a, b, c, self.resolution),
            ShapeKind::Torus { major, minor } => {
                let nv = 4usize << self.resolution;
                make_torus_mesh(major, minor, 2 * nv, nv)
            }
            ShapeKind::Biconcave(p) => make_biconcave_mesh(p, self.resolution),
        }
    }

    pub fn curve(&self) -> Result<Vec<Vec2>> {
        make_curve(self.kind, self.resolution)
    }
}

/// Unit-radius octahedron refined `level` times by midpoint subdivision,
/// projecting new vertices onto the sphere after each pass, then scaled to
/// radius `r`. Has `8·4^level` triangles.
pub fn make_sphere_mesh(r: f64, level: usize) -> Result<TriSurface> {
    ShapeKind::Sphere { r }.validate()?;
    let (p, t) = unit_sphere(level);
    TriSurface::new(p.into_iter().map(|x| x * r).collect(), t)
}

fn unit_sphere(level: usize) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let mut p = vec![
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(-1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, -1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(0.0, 0.0, -1.0),
    ];
    let mut t = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, p: &mut Vec<Vec3>| {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                p.push(((p[a] + p[b]) * 0.5).normalize());
                p.len() - 1
            })
        };
        let mut next = Vec::with_capacity(4 * t.len());
        for &[a, b, c] in &t {
            let ab = midpoint(a, b, &mut p);
            let bc = midpoint(b, c, &mut p);
            let ca = midpoint(c, a, &mut p);
            next.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        t = next;
    }
    (p, t)
}

/// Sphere mesh scaled to semi-axes `a`, `b`, `c` along `e1`, `e2`, `e3`.
pub fn make_ellipsoid_mesh(a: f64, b: f64, c: f64, level: usize) -> Result<TriSurface> {
    ShapeKind::Ellipsoid { a, b, c }.validate()?;
    let (p, t) = unit_sphere(level);
    TriSurface::new(p.into_iter().map(|x| Vec3::new(a * x.x, b * x.y, c * x.z)).collect(), t)
}

/// Structured torus mesh, `nu` cells around the `x2`-axis and `nv` around
/// the tube, two triangles per cell.
pub fn make_torus_mesh(major: f64, minor: f64, nu: usize, nv: usize) -> Result<TriSurface> {
    ShapeKind::Torus { major, minor }.validate()?;
    if nu < 3 || nv < 3 {
        return Err(Error::Domain(format!("torus mesh needs nu, nv >= 3, got {nu}, {nv}")));
    }
    let mut p = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let theta = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let phi = 2.0 * PI * j as f64 / nv as f64;
            let x1 = major + minor * phi.cos();
            p.push(Vec3::new(x1 * theta.cos(), minor * phi.sin(), x1 * theta.sin()));
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut t = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            t.push([a, c, b]);
            t.push([a, d, c]);
        }
    }
    TriSurface::new(p, t)
}

/// Sphere mesh mapped onto the biconcave profile rotated about `e2`.
pub fn make_biconcave_mesh(params: BiconcaveParams, level: usize) -> Result<TriSurface> {
    ShapeKind::Biconcave(params).validate()?;
    let (p, t) = unit_sphere(level);
    let mapped = p
        .into_iter()
        .map(|x| {
            let u = x.x * x.x + x.z * x.z;
            Vec3::new(params.radius * x.x, x.y * params.height(u), params.radius * x.z)
        })
        .collect();
    TriSurface::new(mapped, t)
}

/// Uniformly sampled generating curve.
///
/// Open shapes return `J+1` points from the lower to the upper axis point
/// with `x1 = 0` imposed exactly at both ends; the torus returns `J` points
/// of the periodic circle.
pub fn make_curve(shape: ShapeKind, j_count: usize) -> Result<Vec<Vec2>> {
    shape.validate()?;
    if j_count < 2 {
        return Err(Error::Domain(format!("need J >= 2, got {j_count}")));
    }
    let h = 1.0 / j_count as f64;
    let mut pts: Vec<Vec2> = match shape {
        ShapeKind::Sphere { r } => (0..=j_count)
            .map(|j| {
                let a = 1.5 * PI + PI * (j as f64 * h);
                Vec2::new(r * a.cos(), r * a.sin())
            })
            .collect(),
        ShapeKind::Ellipsoid { a, b, c } => {
            if a != c {
                return Err(Error::Domain(format!(
                    "axisymmetric ellipsoid needs equal e1/e3 semi-axes, got a={a}, c={c}"
                )));
            }
            (0..=j_count)
                .map(|j| {
                    let s = PI * (j as f64 * h);
                    Vec2::new(a * s.sin(), -b * s.cos())
                })
                .collect()
        }
        ShapeKind::Torus { major, minor } => {
            return Ok((0..j_count)
                .map(|j| {
                    let s = 2.0 * PI * (j as f64 * h);
                    Vec2::new(major + minor * s.cos(), minor * s.sin())
                })
                .collect())
        }
        ShapeKind::Biconcave(p) => (0..=j_count)
            .map(|j| {
                let s = PI * (j as f64 * h);
                let (sin, cos) = s.sin_cos();
                Vec2::new(p.radius * sin, -cos * p.height(sin * sin))
            })
            .collect(),
    };
    pts[0].x = 0.0;
    pts[j_count].x = 0.0;
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::total_area;

    #[test]
    fn sphere_levels() {
        let s0 = make_sphere_mesh(1.5, 0).unwrap();
        assert_eq!((s0.vertex_count(), s0.triangle_count()), (6, 8));
        assert!(s0.positions().iter().all(|p| (p.norm() - 1.5).abs() < 1e-15));
        let s3 = make_sphere_mesh(1.0, 3).unwrap();
        assert_eq!(s3.triangle_count(), 512);
        assert_eq!(s3.euler_characteristic(), 2);
    }

    #[test]
    fn sphere_area_converges() {
        let errs: Vec<f64> = (2..=6)
            .map(|l| (total_area(&make_sphere_mesh(1.0, l).unwrap()).unwrap() - 4.0 * PI).abs())
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0] / 3.0, "{errs:?}");
        }
        assert!(errs[4] < 2e-3 * 4.0 * PI);
    }

    #[test]
    fn ellipsoid_vertices_on_quadric() {
        let (a, b, c) = (1.0, 2.0, 1.0);
        let s = make_ellipsoid_mesh(a, b, c, 3).unwrap();
        for p in s.positions() {
            let q = (p.x / a).powi(2) + (p.y / b).powi(2) + (p.z / c).powi(2);
            assert!((q - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.euler_characteristic(), 2);
        let area = total_area(&s).unwrap();
        assert!(area > 4.0 * PI && area < 16.0 * PI);
    }

    #[test]
    fn torus_mesh() {
        let (rr, r) = (2.0, 1.0);
        let s = make_torus_mesh(rr, r, 32, 16).unwrap();
        assert_eq!(s.euler_characteristic(), 0);
        for p in s.positions() {
            let d = ((p.x * p.x + p.z * p.z).sqrt() - rr).powi(2) + p.y * p.y;
            assert!((d - r * r).abs() < 1e-12);
        }
        let exact = 4.0 * PI * PI * rr * r;
        let coarse = (total_area(&s).unwrap() - exact).abs();
        let fine = (total_area(&make_torus_mesh(rr, r, 128, 64).unwrap()).unwrap() - exact).abs();
        assert!(fine < coarse / 10.0);
        assert!(make_torus_mesh(1.0, 1.0, 8, 8).is_err());
    }

    #[test]
    fn curves() {
        let c = make_curve(ShapeKind::Sphere { r: 1.0 }, 16).unwrap();
        assert_eq!(c.len(), 17);
        assert_eq!(c[0], Vec2::new(0.0, -1.0));
        assert_eq!(c[16], Vec2::new(0.0, 1.0));
        assert!(c.iter().all(|p| (p.norm() - 1.0).abs() < 1e-15));

        let t = make_curve(ShapeKind::Torus { major: 2.0, minor: 1.0 }, 20).unwrap();
        assert_eq!(t.len(), 20);
        let min = t.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        assert!((min - 1.0).abs() < 1e-15);

        let cigar = make_curve(ShapeKind::cigar(), 8).unwrap();
        assert_eq!(cigar[0], Vec2::new(0.0, -2.0));
        assert_eq!(cigar[8], Vec2::new(0.0, 2.0));
        assert!(make_curve(ShapeKind::Ellipsoid { a: 1.0, b: 2.0, c: 3.0 }, 8).is_err());
    }

    #[test]
    fn biconcave_shapes_are_valid() {
        let p = BiconcaveParams::default();
        let s = make_biconcave_mesh(p, 3).unwrap();
        assert_eq!(s.euler_characteristic(), 2);
        let c = make_curve(ShapeKind::Biconcave(p), 64).unwrap();
        assert!(c[1..64].iter().all(|q| q.x > 0.0));
        // dimple: the centre is thinner than the rim
        let centre = c[0].y.abs();
        let thickest = c.iter().map(|q| q.y.abs()).fold(0.0, f64::max);
        assert!(thickest > 2.0 * centre);
    }
}
