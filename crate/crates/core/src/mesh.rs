//! Closed triangulated surfaces and the piecewise linear operators used by
//! the parametric finite element scheme.
//!
//! Nodal fields are plain slices (`&[f64]` or `&[Vector3<f64>]`) whose length
//! equals the vertex count. All integrals are exact for piecewise linear
//! data: the hat function gradients are constant on each triangle.

use std::collections::HashMap;
use std::ops::{Add, AddAssign, Mul, Sub};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::linsolve::CsrMatrix;

pub type Vec3 = Vector3<f64>;

/// Triangles with area below this multiple of their squared longest edge are
/// treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-14;

/// Values that can be stored at mesh vertices and combined linearly.
pub trait Nodal: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + AddAssign {
    fn zero() -> Self;
}

impl Nodal for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Nodal for Vec3 {
    fn zero() -> Self {
        Vec3::zeros()
    }
}

/// Area, oriented unit normal and hat function gradients of one triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleGeometry {
    pub area: f64,
    pub normal: Vec3,
    /// In-plane gradient of the hat function of each local vertex.
    pub grad: [Vec3; 3],
}

impl TriangleGeometry {
    pub fn from_points(p: [Vec3; 3], index: usize) -> Result<Self> {
        let e0 = p[2] - p[1];
        let e1 = p[0] - p[2];
        let e2 = p[1] - p[0];
        let cross = e2.cross(&(-e1));
        let area = 0.5 * cross.norm();
        let longest = e0.norm_squared().max(e1.norm_squared()).max(e2.norm_squared());
        if !(area > DEGENERACY_TOL * longest) {
            return Err(Error::DegenerateTriangle { index, area });
        }
        let normal = cross / (2.0 * area);
        let s = 1.0 / (2.0 * area);
        let grad = [normal.cross(&e0) * s, normal.cross(&e1) * s, normal.cross(&e2) * s];
        Ok(Self { area, normal, grad })
    }

    /// `area * ∇φ_a · ∇φ_b` for local vertices `a`, `b`.
    #[inline]
    pub fn stiffness(&self, a: usize, b: usize) -> f64 {
        self.area * self.grad[a].dot(&self.grad[b])
    }
}

/// A closed, consistently oriented triangulated surface with fixed
/// connectivity, carrying the current vertex positions and the nodal values
/// of the map back to the previous time level.
#[derive(Clone, Debug, PartialEq)]
pub struct TriSurface {
    positions: Vec<Vec3>,
    prev_positions: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
}

impl TriSurface {
    /// Validates and builds a surface; the previous positions start equal to
    /// the current ones.
    ///
    /// Checks: indices in range, every vertex used, every triangle
    /// nondegenerate, every edge shared by exactly two oppositely oriented
    /// triangles, and positive enclosed volume (outward orientation).
    pub fn new(positions: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let surface = Self { prev_positions: positions.clone(), positions, triangles };
        surface.validate_topology()?;
        surface.geometry()?;
        let volume = surface.signed_volume();
        if !(volume > 0.0) {
            return Err(Error::InvalidSurface(format!(
                "enclosed signed volume {volume:e} is not positive; triangles must be oriented outward"
            )));
        }
        Ok(surface)
    }

    fn validate_topology(&self) -> Result<()> {
        let n = self.positions.len();
        if self.triangles.is_empty() {
            return Err(Error::InvalidSurface("no triangles".into()));
        }
        let mut used = vec![false; n];
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * self.triangles.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(Error::InvalidSurface(format!("triangle {t} references vertex {v} of {n}")));
                }
                used[v] = true;
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidSurface(format!("triangle {t} repeats a vertex")));
            }
            for k in 0..3 {
                let edge = (tri[k], tri[(k + 1) % 3]);
                if directed.insert(edge, t).is_some() {
                    return Err(Error::InvalidSurface(format!(
                        "edge ({}, {}) is used twice with the same orientation",
                        edge.0, edge.1
                    )));
                }
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidSurface(format!("vertex {v} belongs to no triangle")));
        }
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) {
                return Err(Error::InvalidSurface(format!("edge ({a}, {b}) has no opposite half-edge; surface is open")));
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn prev_positions(&self) -> &[Vec3] {
        &self.prev_positions
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Replaces the previous-level positions.
    pub fn set_prev_positions(&mut self, prev: Vec<Vec3>) -> Result<()> {
        check_len(self, prev.len())?;
        self.prev_positions = prev;
        Ok(())
    }

    /// Moves the vertices to `next`; the old positions become the previous
    /// level. Connectivity is unchanged.
    pub fn advance(&mut self, next: Vec<Vec3>) -> Result<()> {
        check_len(self, next.len())?;
        self.prev_positions = std::mem::replace(&mut self.positions, next);
        Ok(())
    }

    pub fn corners(&self, tri_index: usize) -> [Vec3; 3] {
        let t = self.triangles[tri_index];
        [self.positions[t[0]], self.positions[t[1]], self.positions[t[2]]]
    }

    /// Signed volume enclosed by the surface (positive for outward orientation).
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = [self.positions[t[0]], self.positions[t[1]], self.positions[t[2]]];
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Largest triangle diameter (longest edge).
    pub fn max_diameter(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = [self.positions[t[0]], self.positions[t[1]], self.positions[t[2]]];
                (a - b).norm().max((b - c).norm()).max((c - a).norm())
            })
            .fold(0.0, f64::max)
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        3 * self.triangles.len() / 2
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.triangle_count() as i64
    }

    /// Geometry of every triangle, in triangle order.
    pub fn geometry(&self) -> Result<Vec<TriangleGeometry>> {
        (0..self.triangles.len())
            .map(|j| TriangleGeometry::from_points(self.corners(j), j))
            .collect()
    }

    /// Vertex-vertex sparsity pattern of the P1 stiffness matrix.
    pub fn stiffness_pattern(&self) -> Vec<Vec<usize>> {
        let mut rows: Vec<Vec<usize>> = (0..self.vertex_count()).map(|i| vec![i]).collect();
        for t in &self.triangles {
            for &a in t {
                for &b in t {
                    if a != b {
                        rows[a].push(b);
                    }
                }
            }
        }
        rows
    }
}

fn check_len(surface: &TriSurface, got: usize) -> Result<()> {
    if got != surface.vertex_count() {
        return Err(Error::FieldLength { expected: surface.vertex_count(), got });
    }
    Ok(())
}

/// Area, unit normal and hat function gradients of one triangle.
pub fn triangle_geometry(surface: &TriSurface, tri_index: usize) -> Result<TriangleGeometry> {
    if tri_index >= surface.triangle_count() {
        return Err(Error::Dimension(format!("triangle {tri_index} of {}", surface.triangle_count())));
    }
    TriangleGeometry::from_points(surface.corners(tri_index), tri_index)
}

/// Diagonal of the mass lumped inner product: a third of the incident
/// triangle areas at each vertex.
pub fn lumped_mass_diagonal(surface: &TriSurface) -> Result<Vec<f64>> {
    Ok(lumped_mass_from(surface, &surface.geometry()?))
}

pub(crate) fn lumped_mass_from(surface: &TriSurface, geom: &[TriangleGeometry]) -> Vec<f64> {
    let mut mass = vec![0.0; surface.vertex_count()];
    for (t, g) in surface.triangles().iter().zip(geom) {
        for &v in t {
            mass[v] += g.area / 3.0;
        }
    }
    mass
}

/// Galerkin stiffness action `∫ w ∇u·∇φ_k` on piecewise linear `u`, with
/// the weight taken as the mean of its three vertex values on each triangle.
pub fn stiffness_apply<T: Nodal>(surface: &TriSurface, field: &[T], weight: Option<&[f64]>) -> Result<Vec<T>> {
    check_len(surface, field.len())?;
    if let Some(w) = weight {
        check_len(surface, w.len())?;
    }
    Ok(stiffness_apply_from(surface, &surface.geometry()?, field, weight))
}

pub(crate) fn stiffness_apply_from<T: Nodal>(
    surface: &TriSurface,
    geom: &[TriangleGeometry],
    field: &[T],
    weight: Option<&[f64]>,
) -> Vec<T> {
    let mut out = vec![T::zero(); surface.vertex_count()];
    for (t, g) in surface.triangles().iter().zip(geom) {
        let w = weight.map_or(1.0, |w| (w[t[0]] + w[t[1]] + w[t[2]]) / 3.0);
        for a in 0..3 {
            let mut acc = T::zero();
            for b in 0..3 {
                acc += field[t[b]] * (w * g.stiffness(a, b));
            }
            out[t[a]] += acc;
        }
    }
    out
}

/// Assembles the (optionally weighted) stiffness matrix.
pub fn assemble_stiffness(surface: &TriSurface, geom: &[TriangleGeometry], weight: Option<&[f64]>) -> Result<CsrMatrix> {
    let mut a = CsrMatrix::from_pattern(surface.stiffness_pattern())?;
    for (t, g) in surface.triangles().iter().zip(geom) {
        let w = weight.map_or(1.0, |w| (w[t[0]] + w[t[1]] + w[t[2]]) / 3.0);
        for i in 0..3 {
            for j in 0..3 {
                a.add(t[i], t[j], w * g.stiffness(i, j));
            }
        }
    }
    Ok(a)
}

/// `∫ ∇f · φ_k` for a piecewise linear scalar `f`, one 3-vector per vertex.
pub fn gradient_rhs(surface: &TriSurface, scalar_field: &[f64]) -> Result<Vec<Vec3>> {
    check_len(surface, scalar_field.len())?;
    Ok(gradient_rhs_from(surface, &surface.geometry()?, scalar_field))
}

pub(crate) fn gradient_rhs_from(surface: &TriSurface, geom: &[TriangleGeometry], f: &[f64]) -> Vec<Vec3> {
    let mut out = vec![Vec3::zeros(); surface.vertex_count()];
    for (t, g) in surface.triangles().iter().zip(geom) {
        let grad = g.grad[0] * f[t[0]] + g.grad[1] * f[t[1]] + g.grad[2] * f[t[2]];
        let contrib = grad * (g.area / 3.0);
        for &v in t {
            out[v] += contrib;
        }
    }
    out
}

/// Vertex normal defined by the lumped projection of the triangle normals:
/// the area-weighted mean of incident normals. Not unit length in general.
pub fn discrete_normal(surface: &TriSurface) -> Result<Vec<Vec3>> {
    Ok(discrete_normal_from(surface, &surface.geometry()?))
}

pub(crate) fn discrete_normal_from(surface: &TriSurface, geom: &[TriangleGeometry]) -> Vec<Vec3> {
    let mut acc = vec![Vec3::zeros(); surface.vertex_count()];
    let mut area = vec![0.0; surface.vertex_count()];
    for (t, g) in surface.triangles().iter().zip(geom) {
        for &v in t {
            acc[v] += g.normal * g.area;
            area[v] += g.area;
        }
    }
    acc.iter().zip(&area).map(|(n, a)| n / *a).collect()
}

/// Discrete mean curvature vector `Y ≈ H ν`: minus the stiffness action on
/// the identity map divided by the lumped mass. A unit sphere gives
/// `Y ≈ -2 ν`.
pub fn discrete_mean_curvature(surface: &TriSurface) -> Result<Vec<Vec3>> {
    Ok(discrete_mean_curvature_from(surface, &surface.geometry()?))
}

pub(crate) fn discrete_mean_curvature_from(surface: &TriSurface, geom: &[TriangleGeometry]) -> Vec<Vec3> {
    let mass = lumped_mass_from(surface, geom);
    stiffness_apply_from(surface, geom, surface.positions(), None)
        .into_iter()
        .zip(&mass)
        .map(|(a, m)| -a / *m)
        .collect()
}

/// Sum of triangle areas.
pub fn total_area(surface: &TriSurface) -> Result<f64> {
    Ok(surface.geometry()?.iter().map(|g| g.area).sum())
}
