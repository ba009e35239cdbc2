//! Parametric finite elements for hyperbolic mean curvature flow of closed
//! triangulated surfaces.
//!
//! Each step solves one symmetric positive definite system shared by the
//! three coordinates. With `s` the nodal velocity squared and `M`, `A` the
//! lumped mass and stiffness matrices on the current surface:
//!
//! * `g = 1`: `(M/Δt² + ½A) X = M(2p - p⁻)/Δt² - ½A p⁻ - ½G(s)`
//! * `g = 1 + s/2`: `(M/Δt² + ¼A_{s+2}) X = M(2p - p⁻)/Δt² - ¼A_{s+2} p⁻ - G(s)`
//!
//! where `G(s)_k = ∫ ∇(π s) φ_k` and `A_w` weights each triangle by the mean
//! of `w` over its corners.

use crate::diagnostics::{self, EvolutionReport, HaltReason, ReportRow};
use crate::error::{Error, Result};
use crate::law::FlowLaw;
use crate::linsolve::{solve_spd_multi_from, CgOptions, CsrMatrix, SparseSystem};
use crate::mesh::{self, TriSurface, Vec3};

/// A surface with its previous time level.
#[derive(Clone, Debug)]
pub struct FemState {
    pub surface: TriSurface,
    pub time: f64,
    pub step: usize,
    pub dt: f64,
    pub law: FlowLaw,
}

impl FemState {
    pub fn velocity_squared(&self) -> Vec<f64> {
        diagnostics::surface_velocity_squared(&self.surface, self.dt)
    }
}

/// Sets the previous level to `p - Δt V0 ω + ½Δt² g(V0²) Y`, with `ω` the
/// area-averaged vertex normal and `Y` the discrete mean curvature vector.
pub fn fem_initialize(mut surface: TriSurface, v0: f64, dt: f64, law: FlowLaw) -> Result<FemState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    let geom = surface.geometry()?;
    let omega = mesh::discrete_normal_from(&surface, &geom);
    let y = mesh::discrete_mean_curvature_from(&surface, &geom);
    let accel = 0.5 * dt * dt * law.evaluate(v0 * v0);
    let prev: Vec<Vec3> = surface
        .positions()
        .iter()
        .zip(omega.iter().zip(&y))
        .map(|(p, (w, y))| p - w * (dt * v0) + y * accel)
        .collect();
    surface.set_prev_positions(prev)?;
    Ok(FemState { surface, time: 0.0, step: 0, dt, law })
}

/// The step matrix and the three coordinate right-hand sides.
pub struct FemSystem {
    pub system: SparseSystem,
    pub rhs: [Vec<f64>; 3],
}

pub fn assemble_system(state: &FemState) -> Result<FemSystem> {
    let surface = &state.surface;
    let geom = surface.geometry()?;
    let dt2 = state.dt * state.dt;
    let mass = mesh::lumped_mass_from(surface, &geom);
    let s = state.velocity_squared();
    let (factor, grad_factor, weight): (f64, f64, Option<Vec<f64>>) = match state.law {
        FlowLaw::Constant => (0.5, 0.5, None),
        FlowLaw::LeFloch => (0.25, 1.0, Some(s.iter().map(|v| v + 2.0).collect())),
    };
    let mut matrix: CsrMatrix = mesh::assemble_stiffness(surface, &geom, weight.as_deref())?;
    let prev = surface.prev_positions();
    let a_prev = mesh::stiffness_apply_from(surface, &geom, prev, weight.as_deref());
    matrix.scale(factor);
    matrix.add_diagonal(&mass.iter().map(|m| m / dt2).collect::<Vec<_>>());
    let grad = mesh::gradient_rhs_from(surface, &geom, &s);

    let mut rhs = [vec![0.0; mass.len()], vec![0.0; mass.len()], vec![0.0; mass.len()]];
    for (k, p) in surface.positions().iter().enumerate() {
        let v = (2.0 * p - prev[k]) * (mass[k] / dt2) - a_prev[k] * factor - grad[k] * grad_factor;
        for c in 0..3 {
            rhs[c][k] = v[c];
        }
    }
    Ok(FemSystem { system: SparseSystem::new(matrix)?, rhs })
}

/// One step of the scheme; the new state's previous level is the old
/// current level.
pub fn fem_step(state: &FemState) -> Result<FemState> {
    fem_step_with(state, CgOptions::default())
}

pub fn fem_step_with(state: &FemState, opts: CgOptions) -> Result<FemState> {
    let FemSystem { system, rhs } = assemble_system(state)?;
    let p = state.surface.positions();
    let prev = state.surface.prev_positions();
    let guess: Vec<Vec<f64>> =
        (0..3).map(|c| p.iter().zip(prev).map(|(a, b)| 2.0 * a[c] - b[c]).collect()).collect();
    let sol = solve_spd_multi_from(
        &system,
        &[&rhs[0], &rhs[1], &rhs[2]],
        &[&guess[0], &guess[1], &guess[2]],
        opts,
    )?;
    let next: Vec<Vec3> = (0..p.len()).map(|k| Vec3::new(sol[0][k], sol[1][k], sol[2][k])).collect();
    let old_geom = state.surface.geometry()?;
    let mut surface = state.surface.clone();
    surface.advance(next)?;
    // a triangle whose orientation reverses has collapsed during the step
    for (index, (g, old)) in surface.geometry()?.iter().zip(&old_geom).enumerate() {
        if g.normal.dot(&old.normal) <= 0.0 {
            return Err(Error::DegenerateTriangle { index, area: g.area });
        }
    }
    Ok(FemState { surface, time: (state.step + 1) as f64 * state.dt, step: state.step + 1, dt: state.dt, law: state.law })
}

/// Result of [`fem_run`]: the last valid state and its report.
#[derive(Clone, Debug)]
pub struct FemRun {
    pub state: FemState,
    pub report: EvolutionReport,
}

/// Steps until `t_final` or until a triangle degenerates or the solver
/// fails. The observer sees the initial state and every accepted step.
pub fn fem_run<F>(mut state: FemState, t_final: f64, mut observer: F) -> Result<FemRun>
where
    F: FnMut(&FemState),
{
    if t_final < state.time {
        return Err(Error::Domain(format!("t_final {t_final} is before the current time {}", state.time)));
    }
    let mut report = EvolutionReport::default();
    report.push(surface_row(&state)?);
    observer(&state);
    let steps = crate::axi::total_steps(state.time, t_final, state.dt);
    let mut halt = HaltReason::Completed;
    while state.step < steps {
        let next = match fem_step(&state).and_then(|s| surface_row(&s).map(|r| (s, r))) {
            Ok(n) => n,
            Err(e) => {
                halt = HaltReason::from_error(&e);
                break;
            }
        };
        state = next.0;
        report.push(next.1);
        observer(&state);
    }
    report.halt = halt;
    Ok(FemRun { state, report })
}

fn surface_row(state: &FemState) -> Result<ReportRow> {
    let surface = &state.surface;
    let geom = surface.geometry()?;
    let mass = mesh::lumped_mass_from(surface, &geom);
    let (e, et) = diagnostics::weighted_energies(&mass, &state.velocity_squared());
    let kinf = mesh::discrete_mean_curvature_from(surface, &geom).iter().map(|y| y.norm()).fold(0.0, f64::max);
    Ok(ReportRow {
        step: state.step,
        time: state.time,
        area: geom.iter().map(|g| g.area).sum(),
        energy_e: e,
        energy_etilde: et,
        inv_kinf: 1.0 / kinf,
        quality: diagnostics::surface_quality(&geom),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::test_meshes::octahedron;
    use crate::mesh::{discrete_mean_curvature, stiffness_apply};
    use crate::shapes::make_sphere_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn initialization_on_sphere_follows_backward_radius() {
        let dt = 0.01;
        let s = make_sphere_mesh(1.0, 4).unwrap();
        let y = discrete_mean_curvature(&s).unwrap();
        let st = fem_initialize(s.clone(), 0.0, dt, FlowLaw::Constant).unwrap();
        for ((q, p), y) in st.surface.prev_positions().iter().zip(s.positions()).zip(&y) {
            assert!((q - p - y * (0.5 * dt * dt)).norm() < 1e-16);
        }
        // r(-dt) = 1 - dt² + O(dt⁴) from r'' = -2/r, up to the pointwise
        // curvature error of the mesh (largest at the valence-4 vertices)
        let mut radii: Vec<f64> = st.surface.prev_positions().iter().map(|p| p.norm()).collect();
        radii.sort_by(f64::total_cmp);
        assert!((radii[radii.len() / 2] - (1.0 - dt * dt)).abs() < 0.03 * dt * dt);
        assert!(radii.iter().all(|r| (r - (1.0 - dt * dt)).abs() < 0.6 * dt * dt));

        let s = make_sphere_mesh(1.0, 4).unwrap();
        let st = fem_initialize(s, 1.0, dt, FlowLaw::LeFloch).unwrap();
        let exact = (1.0 - 2.0 * dt - 2.0 * dt * dt).sqrt();
        for p in st.surface.prev_positions() {
            assert!((p.norm() - exact).abs() < 2e-4, "{} vs {exact}", p.norm());
        }
    }

    #[test]
    fn one_step_from_rest_moves_by_curvature() {
        // prev = current: the scheme gives X ≈ p + Δt² Y for g = 1
        let dt = 1e-3;
        let s = make_sphere_mesh(4.0, 3).unwrap();
        let y = discrete_mean_curvature(&s).unwrap();
        let st = FemState { surface: s.clone(), time: 0.0, step: 0, dt, law: FlowLaw::Constant };
        let next = fem_step(&st).unwrap();
        for ((a, b), y) in next.surface.positions().iter().zip(s.positions()).zip(&y) {
            let d = a - b;
            assert!((d - y * (dt * dt)).norm() < 1e-3 * dt * dt * y.norm());
        }
        // the Taylor initialisation at rest halves that displacement
        let st = fem_initialize(s.clone(), 0.0, dt, FlowLaw::Constant).unwrap();
        let next = fem_step(&st).unwrap();
        for ((a, b), y) in next.surface.positions().iter().zip(s.positions()).zip(&y) {
            assert!(((a - b) - y * (0.5 * dt * dt)).norm() < 1e-3 * dt * dt * y.norm());
        }
    }

    #[test]
    fn matrix_is_positive_definite() {
        let s = make_sphere_mesh(1.0, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for law in [FlowLaw::Constant, FlowLaw::LeFloch] {
            let st = fem_initialize(s.clone(), 0.7, 0.05, law).unwrap();
            let sys = assemble_system(&st).unwrap();
            for _ in 0..100 {
                let x: Vec<f64> = (0..s.vertex_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                assert!(sys.system.matrix().quadratic_form(&x) > 0.0);
            }
        }
    }

    #[test]
    fn rhs_matches_direct_assembly() {
        let s = make_sphere_mesh(1.0, 1).unwrap();
        let st = fem_initialize(s, -0.5, 0.05, FlowLaw::LeFloch).unwrap();
        let sys = assemble_system(&st).unwrap();
        let surf = &st.surface;
        let s2 = st.velocity_squared();
        let w: Vec<f64> = s2.iter().map(|v| v + 2.0).collect();
        let a_prev = stiffness_apply(surf, surf.prev_positions(), Some(&w)).unwrap();
        let mass = mesh::lumped_mass_diagonal(surf).unwrap();
        let g = mesh::gradient_rhs(surf, &s2).unwrap();
        for k in 0..surf.vertex_count() {
            let p = surf.positions()[k];
            let q = surf.prev_positions()[k];
            let v = (2.0 * p - q) * (mass[k] / 0.0025) - a_prev[k] * 0.25 - g[k];
            for c in 0..3 {
                assert!((sys.rhs[c][k] - v[c]).abs() < 1e-10 * v.norm().max(1.0));
            }
        }
    }

    #[test]
    fn octahedron_radii_stay_equal() {
        for (law, v0) in [(FlowLaw::Constant, 0.0), (FlowLaw::LeFloch, 1.0), (FlowLaw::Constant, -0.5)] {
            let st = fem_initialize(octahedron(1.0), v0, 0.01, law).unwrap();
            let run = fem_run(st, 0.1, |_| {}).unwrap();
            let r: Vec<f64> = run.state.surface.positions().iter().map(|p| p.norm()).collect();
            let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
            assert_eq!(run.state.step, 10);
            assert!((hi - lo) / hi < 1e-8);
        }
    }

    #[test]
    fn run_to_current_time_is_empty() {
        let st = fem_initialize(make_sphere_mesh(1.0, 1).unwrap(), 0.0, 0.01, FlowLaw::Constant).unwrap();
        let run = fem_run(st, 0.0, |_| {}).unwrap();
        assert_eq!(run.report.rows.len(), 1);
        assert_eq!(run.report.halt, HaltReason::Completed);
    }

    #[test]
    fn shrinking_sphere_halts_gracefully() {
        let st = fem_initialize(make_sphere_mesh(1.0, 2).unwrap(), 0.0, 0.01, FlowLaw::LeFloch).unwrap();
        let run = fem_run(st, 2.0, |_| {}).unwrap();
        assert!(matches!(run.report.halt, HaltReason::DegenerateTriangle { .. }), "{}", run.report.halt);
        assert!(run.state.time < 0.8);
        assert!(run.report.last().unwrap().area < 0.05 * run.report.rows[0].area);
    }
}
