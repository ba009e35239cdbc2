//! Reference solutions for shrinking and expanding spheres, error norms and
//! experimental orders of convergence.
//!
//! For `g = 1` the radius obeys `r'' = -2/r`; with zero initial velocity it
//! has the closed form `r(t) = r0 exp(-[erf⁻¹(2t/(√π r0))]²)`, otherwise it
//! is integrated numerically. For `g = 1 + s/2` the radius is
//! `r(t) = sqrt(r0² + 2 r0 V0 t - 2t²)`.

use std::f64::consts::PI;

use crate::axi::GridCurve;
use crate::error::{Error, Result};
use crate::law::FlowLaw;
use crate::mesh::TriSurface;
use crate::shapes::Vec2;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Gauss error function, accurate to about 1e-15 absolute.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return -erf(-x);
    }
    if x < 1.0 {
        erf_series(x)
    } else {
        1.0 - erfc_continued_fraction(x)
    }
}

/// Complementary error function; the Laplace continued fraction (modified
/// Lentz) for `x >= 1`, the series below.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - erfc(-x)
    } else if x < 1.0 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

fn erf_series(x: f64) -> f64 {
    // erf(x) = 2/√π Σ (-1)^n x^(2n+1) / (n! (2n+1))
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= -x2 / n;
        let add = term / (2.0 * n + 1.0);
        sum += add;
        if add.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

fn erfc_continued_fraction(x: f64) -> f64 {
    // erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..5000 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

/// Inverse error function on `(-1, 1)` by safeguarded Newton iteration.
pub fn erf_inv(y: f64) -> Result<f64> {
    if !(y > -1.0 && y < 1.0) {
        return Err(Error::Domain(format!("erf_inv argument {y} outside (-1, 1)")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y < 0.0 {
        return erf_inv(-y).map(|x| -x);
    }
    // Initial guess from the tail asymptotics or the Taylor series.
    let mut x = if y > 0.9 {
        let t = (-(1.0 - y).ln()).sqrt();
        (t * t - 0.5 * (PI * t * t).ln()).max(0.5).sqrt()
    } else {
        let z = 0.5 * PI.sqrt() * y;
        z + z.powi(3) / 3.0 + 7.0 * z.powi(5) / 30.0
    };
    let (mut lo, mut hi) = (0.0, 6.0);
    for _ in 0..100 {
        // erf(x) - y, in the complementary form near y = 1 to keep precision
        let f = if y > 0.5 { (1.0 - y) - erfc(x) } else { erf(x) - y };
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let mut next = x - f / (FRAC_2_SQRT_PI * (-x * x).exp());
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - x).abs() <= 1e-15 * x.abs().max(1.0);
        x = next;
        if done {
            break;
        }
    }
    Ok(x)
}

/// Radially symmetric solution starting from a sphere of radius `r0` with
/// constant normal velocity `v0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereSolution {
    pub law: FlowLaw,
    pub r0: f64,
    pub v0: f64,
}

impl SphereSolution {
    pub fn new(law: FlowLaw, r0: f64, v0: f64) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::Domain(format!("r0 must be positive, got {r0}")));
        }
        Ok(Self { law, r0, v0 })
    }

    /// Time at which the sphere shrinks to a point.
    pub fn vanishing_time(&self) -> f64 {
        let (r0, v0) = (self.r0, self.v0);
        match self.law {
            FlowLaw::LeFloch => 0.5 * r0 * (v0 + (v0 * v0 + 2.0).sqrt()),
            FlowLaw::Constant => {
                // the first integral r'²/2 = 2 ln(r0/r) + v0²/2 gives the
                // radius of rest r0·exp(v0²/4); from rest the shrink takes √π/2·r_rest
                let r_rest = r0 * (0.25 * v0 * v0).exp();
                let climb = 0.5 * PI.sqrt() * r_rest * erf(0.5 * v0.abs());
                let fall = 0.5 * PI.sqrt() * r_rest;
                if v0 >= 0.0 {
                    climb + fall
                } else {
                    fall - climb
                }
            }
        }
    }

    /// Time at which the radius is largest (zero unless `v0 > 0`).
    pub fn time_of_max_radius(&self) -> f64 {
        if self.v0 <= 0.0 {
            return 0.0;
        }
        match self.law {
            FlowLaw::LeFloch => 0.5 * self.r0 * self.v0,
            FlowLaw::Constant => {
                let r_rest = self.r0 * (0.25 * self.v0 * self.v0).exp();
                0.5 * PI.sqrt() * r_rest * erf(0.5 * self.v0)
            }
        }
    }

    /// Radius at time `t >= 0`.
    pub fn radius(&self, t: f64) -> Result<f64> {
        let t_max = self.vanishing_time();
        if !(t >= 0.0 && t < t_max) {
            return Err(Error::OutsideExistence { t, t_max });
        }
        if t == 0.0 {
            return Ok(self.r0);
        }
        let (r0, v0) = (self.r0, self.v0);
        match self.law {
            FlowLaw::LeFloch => Ok((r0 * r0 + 2.0 * r0 * v0 * t - 2.0 * t * t).sqrt()),
            FlowLaw::Constant if v0 == 0.0 => {
                let z = erf_inv(2.0 * t / (PI.sqrt() * r0))?;
                Ok(r0 * (-z * z).exp())
            }
            FlowLaw::Constant => integrate_constant_law(r0, v0, t),
        }
    }

    /// Radial velocity at time `t`.
    pub fn radial_velocity(&self, t: f64) -> Result<f64> {
        let r = self.radius(t)?;
        let (r0, v0) = (self.r0, self.v0);
        Ok(match self.law {
            FlowLaw::LeFloch => (r0 * v0 - 2.0 * t) / r,
            FlowLaw::Constant => {
                let speed = (4.0 * (r0 / r).ln() + v0 * v0).max(0.0).sqrt();
                if t < self.time_of_max_radius() {
                    speed
                } else {
                    -speed
                }
            }
        })
    }

    /// Exact generating curve of the sphere at time `t`, `r(t)/r0 · x0(ρ)`.
    pub fn curve_point(&self, initial: Vec2, t: f64) -> Result<Vec2> {
        Ok(initial * (self.radius(t)? / self.r0))
    }
}

const RK_LOCAL_TOL: f64 = 1e-12;

/// Integrates `r'' = -2/r`, `r(0) = r0`, `r'(0) = v0` up to time `t` with
/// classical Runge-Kutta and step doubling.
fn integrate_constant_law(r0: f64, v0: f64, t: f64) -> Result<f64> {
    let rhs = |y: [f64; 2]| [y[1], -2.0 / y[0]];
    let rk4 = |y: [f64; 2], h: f64| {
        let k1 = rhs(y);
        let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
        [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    };
    let mut y = [r0, v0];
    let mut time = 0.0;
    let mut h = (t / 64.0).min(1e-3 * r0);
    let mut steps = 0usize;
    while time < t {
        if steps > 50_000_000 {
            return Err(Error::Domain("radius ODE integration stalled".into()));
        }
        steps += 1;
        let h_try = h.min(t - time);
        let full = rk4(y, h_try);
        let half = rk4(rk4(y, 0.5 * h_try), 0.5 * h_try);
        if !(half[0] > 0.0) {
            h *= 0.25;
            continue;
        }
        let err = ((half[0] - full[0]).abs() / half[0].max(1e-3 * r0))
            .max((half[1] - full[1]).abs() / half[1].abs().max(1.0))
            / 15.0;
        if err <= RK_LOCAL_TOL || h_try < 1e-14 * r0 {
            time += h_try;
            // Richardson extrapolation of the two estimates
            y = [half[0] + (half[0] - full[0]) / 15.0, half[1] + (half[1] - full[1]) / 15.0];
            let grow = if err > 0.0 { 0.9 * (RK_LOCAL_TOL / err).powf(0.2) } else { 4.0 };
            h = h_try * grow.clamp(0.2, 4.0);
        } else {
            h = h_try * (0.9 * (RK_LOCAL_TOL / err).powf(0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(y[0])
}

/// Largest deviation of a vertex distance from the exact radius on one surface.
pub fn radius_deviation(surface: &TriSurface, radius: f64) -> f64 {
    surface
        .positions()
        .iter()
        .map(|p| (p.norm() - radius).abs())
        .fold(0.0, f64::max)
}

/// `max_m max_k | |p_k^m| - r(t_m) |` over a sequence of `(time, surface)`.
pub fn error_surface<'a, I>(run: I, sol: &SphereSolution) -> Result<f64>
where
    I: IntoIterator<Item = (f64, &'a TriSurface)>,
{
    run.into_iter()
        .try_fold(0.0f64, |acc, (t, s)| Ok(acc.max(radius_deviation(s, sol.radius(t)?))))
}

/// Largest nodal distance between a curve and the exact map at one time.
pub fn curve_deviation<F>(curve: &GridCurve, exact_map: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<Vec2>,
{
    let h = curve.h();
    curve
        .positions()
        .iter()
        .enumerate()
        .try_fold(0.0f64, |acc, (j, x)| Ok(acc.max((exact_map(j as f64 * h, curve.time())? - x).norm())))
}

/// `max_m max_j |x(ρ_j, t_m) - x_j^m|` over a sequence of curves.
pub fn error_curve<'a, I, F>(run: I, exact_map: F) -> Result<f64>
where
    I: IntoIterator<Item = &'a GridCurve>,
    F: Fn(f64, f64) -> Result<Vec2>,
{
    run.into_iter()
        .try_fold(0.0f64, |acc, c| Ok(acc.max(curve_deviation(c, &exact_map)?)))
}

/// One row of a convergence table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRecord {
    /// `J` for curves, triangle count for surfaces.
    pub resolution: usize,
    /// Mesh size: `1/J` or the largest triangle diameter.
    pub h: f64,
    pub error: f64,
    pub eoc: Option<f64>,
}

/// `EOC_i = ln(e_{i-1}/e_i) / ln(h_{i-1}/h_i)`; the first entry is `None`.
pub fn eoc(records: &[(f64, f64)]) -> Result<Vec<Option<f64>>> {
    if records.is_empty() {
        return Ok(Vec::new());
    }
    for &(h, e) in records {
        if !(h > 0.0) || !(e > 0.0) {
            return Err(Error::Domain(format!("EOC needs positive h and error, got h={h}, e={e}")));
        }
    }
    let mut out = vec![None];
    for w in records.windows(2) {
        let ((h0, e0), (h1, e1)) = (w[0], w[1]);
        if h1 == h0 {
            return Err(Error::Domain(format!("repeated mesh size {h0}")));
        }
        out.push(Some((e0 / e1).ln() / (h0 / h1).ln()));
    }
    Ok(out)
}

/// Builds table rows from `(resolution, h, error)` triples.
pub fn convergence_table(rows: &[(usize, f64, f64)]) -> Result<Vec<ConvergenceRecord>> {
    let pairs: Vec<(f64, f64)> = rows.iter().map(|&(_, h, e)| (h, e)).collect();
    Ok(rows
        .iter()
        .zip(eoc(&pairs)?)
        .map(|(&(resolution, h, error), eoc)| ConvergenceRecord { resolution, h, error, eoc })
        .collect())
}
