//! Batch drivers behind the `evolve`, `converge` and `compare` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use crate::axi::{axi_initialize, axi_run, GridCurve};
use crate::config::{Method, RunConfig, TimeStep};
use crate::diagnostics::{read_metadata_file, read_report_csv, EvolutionReport, ReportRow};
use crate::error::{Error, Result};
use crate::exact::{convergence_table, radius_deviation, ConvergenceRecord, SphereSolution};
use crate::fem::{fem_initialize, fem_run, FemState};
use crate::io::{write_curve_csv, write_off};
use crate::shapes::{make_curve, ShapeKind, ShapeSpec, Vec2};

/// Progress messages on stderr unless quiet.
#[derive(Clone, Copy, Debug, Default)]
pub struct Log {
    pub quiet: bool,
}

impl Log {
    pub fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// One finished evolution.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub report: EvolutionReport,
    /// `1/J` for curves, largest triangle diameter for surfaces.
    pub h: f64,
    pub dt: f64,
    /// Max-over-steps error against the exact sphere solution, when tracked.
    pub error: Option<f64>,
}

struct Plan<'a> {
    cfg: &'a RunConfig,
    resolution: usize,
    out: Option<&'a Path>,
    exact: Option<SphereSolution>,
}

fn snapshot_dir(out: &Path) -> Result<PathBuf> {
    let dir = out.join("snapshots");
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn run_plan(plan: &Plan) -> Result<RunSummary> {
    match plan.cfg.method {
        Method::Axi => run_axi(plan),
        Method::Fem => run_fem(plan),
    }
}

fn run_axi(plan: &Plan) -> Result<RunSummary> {
    let cfg = plan.cfg;
    let j = plan.resolution;
    let x0 = make_curve(cfg.shape, j)?;
    let h = 1.0 / j as f64;
    let dt = cfg.dt.resolve(h, cfg.t_final);
    let curve = axi_initialize(x0.clone(), cfg.v0, dt, cfg.law, cfg.shape.topology())?;
    let snaps = plan.out.map(snapshot_dir).transpose()?;
    let mut error: Option<f64> = plan.exact.map(|_| 0.0);
    let mut failure: Option<Error> = None;
    let run = axi_run(curve, cfg.t_final, |c: &GridCurve| {
        if failure.is_some() {
            return;
        }
        if let (Some(sol), Some(err)) = (&plan.exact, error.as_mut()) {
            if c.step() > 0 {
                match sol.radius(c.time()) {
                    Ok(r) => {
                        let scale = r / sol.r0;
                        for (p, q) in c.positions().iter().zip(&x0) {
                            *err = err.max((p - q * scale).norm());
                        }
                    }
                    Err(e) => failure = Some(e),
                }
            }
        }
        if let Some(dir) = &snaps {
            if c.step() % cfg.output_every == 0 {
                if let Err(e) = write_curve_csv(&dir.join(format!("curve_{:07}.csv", c.step())), c) {
                    failure = Some(e);
                }
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if let Some(dir) = &snaps {
        let last = &run.curve;
        if last.step() % cfg.output_every != 0 {
            write_curve_csv(&dir.join(format!("curve_{:07}.csv", last.step())), last)?;
        }
    }
    let mut report = run.report;
    fill_metadata(&mut report, cfg, j, h, dt);
    report.set_meta("nodes", x0.len());
    report.set_meta("topology", cfg.shape.topology().name());
    if let Some(out) = plan.out {
        // curves record every step
        finish_output(&report, cfg, j, dt, out, 1)?;
    }
    Ok(RunSummary { report, h, dt, error })
}

fn run_fem(plan: &Plan) -> Result<RunSummary> {
    let cfg = plan.cfg;
    let surface = ShapeSpec { kind: cfg.shape, resolution: plan.resolution }.surface()?;
    let h = surface.max_diameter();
    let dt = cfg.dt.resolve(h, cfg.t_final);
    let (nv, nt) = (surface.vertex_count(), surface.triangle_count());
    let state = fem_initialize(surface, cfg.v0, dt, cfg.law)?;
    let snaps = plan.out.map(snapshot_dir).transpose()?;
    let mut error: Option<f64> = plan.exact.map(|_| 0.0);
    let mut failure: Option<Error> = None;
    let run = fem_run(state, cfg.t_final, |s: &FemState| {
        if failure.is_some() {
            return;
        }
        if let (Some(sol), Some(err)) = (&plan.exact, error.as_mut()) {
            if s.step > 0 {
                match sol.radius(s.time) {
                    Ok(r) => *err = err.max(radius_deviation(&s.surface, r)),
                    Err(e) => failure = Some(e),
                }
            }
        }
        if let Some(dir) = &snaps {
            if s.step % cfg.output_every == 0 {
                if let Err(e) = write_off(&dir.join(format!("surface_{:07}.off", s.step)), &s.surface) {
                    failure = Some(e);
                }
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if let Some(dir) = &snaps {
        if run.state.step % cfg.output_every != 0 {
            write_off(&dir.join(format!("surface_{:07}.off", run.state.step)), &run.state.surface)?;
        }
    }
    let mut report = run.report;
    fill_metadata(&mut report, cfg, plan.resolution, h, dt);
    report.set_meta("vertices", nv);
    report.set_meta("triangles", nt);
    if let Some(out) = plan.out {
        finish_output(&report, cfg, plan.resolution, dt, out, cfg.output_every)?;
    }
    Ok(RunSummary { report, h, dt, error })
}

fn fill_metadata(report: &mut EvolutionReport, cfg: &RunConfig, resolution: usize, h: f64, dt: f64) {
    report.set_meta("method", cfg.method);
    report.set_meta("law", cfg.law.name());
    report.set_meta("shape", cfg.shape);
    report.set_meta("v0", format!("{:?}", cfg.v0));
    report.set_meta("dt", format!("{dt:?}"));
    report.set_meta("t_final", format!("{:?}", cfg.t_final));
    report.set_meta("resolution", resolution);
    report.set_meta("h", format!("{h:?}"));
    report.set_meta("output_every", cfg.output_every);
}

/// Writes `report.csv`, `metadata.txt` and a `config.txt` that re-runs the
/// job exactly.
fn finish_output(report: &EvolutionReport, cfg: &RunConfig, resolution: usize, dt: f64, out: &Path, every: usize) -> Result<()> {
    fs::create_dir_all(out)?;
    report.write_csv_file(&out.join("report.csv"), every)?;
    report.write_metadata_file(&out.join("metadata.txt"))?;
    let rerun = RunConfig {
        dt: TimeStep::Fixed(dt),
        resolutions: vec![resolution],
        output_dir: out.to_path_buf(),
        ..cfg.clone()
    };
    fs::write(out.join("config.txt"), rerun.to_config_string())?;
    Ok(())
}

/// Runs a single evolution and writes its outputs to `out`.
pub fn evolve(cfg: &RunConfig, out: &Path, log: Log) -> Result<RunSummary> {
    let resolution = cfg.resolution()?;
    log.info(format!("evolve: {} {} {} resolution {resolution}", cfg.method, cfg.law.name(), cfg.shape));
    let summary = run_plan(&Plan { cfg, resolution, out: Some(out), exact: None })?;
    let last = summary.report.last().copied();
    log.info(format!(
        "  {} steps, dt = {:e}, final time {:.6}, halt: {}",
        last.map_or(0, |r| r.step),
        summary.dt,
        last.map_or(0.0, |r| r.time),
        summary.report.halt
    ));
    log.info(format!("  output in {}", out.display()));
    Ok(summary)
}

/// Runs an evolution without writing files, for library use.
pub fn simulate(cfg: &RunConfig) -> Result<RunSummary> {
    run_plan(&Plan { cfg, resolution: cfg.resolution()?, out: None, exact: None })
}

/// The exact solution a convergence study compares against.
pub fn exact_solution(cfg: &RunConfig) -> Result<SphereSolution> {
    match cfg.shape {
        ShapeKind::Sphere { r } => SphereSolution::new(cfg.law, r, cfg.v0),
        other => Err(Error::Config(format!("no exact solution is available for {other}; use shape=sphere"))),
    }
}

/// Simultaneous space/time refinement against the exact sphere solution.
/// Without `out` nothing is written.
pub fn convergence_study(cfg: &RunConfig, out: Option<&Path>) -> Result<(Vec<ConvergenceRecord>, Vec<RunSummary>)> {
    let sol = exact_solution(cfg)?;
    let dirs: Vec<Option<PathBuf>> =
        cfg.resolutions.iter().map(|r| out.map(|o| o.join(format!("resolution_{r}")))).collect();
    let results: Vec<Result<RunSummary>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .resolutions
            .iter()
            .zip(&dirs)
            .map(|(&resolution, dir)| {
                scope.spawn(move || run_plan(&Plan { cfg, resolution, out: dir.as_deref(), exact: Some(sol) }))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let rows: Vec<(usize, f64, f64)> = cfg
        .resolutions
        .iter()
        .zip(&runs)
        .map(|(&r, s)| (table_resolution(cfg, r, s), s.h, s.error.unwrap_or(f64::NAN)))
        .collect();
    Ok((convergence_table(&rows)?, runs))
}

fn table_resolution(cfg: &RunConfig, resolution: usize, run: &RunSummary) -> usize {
    match cfg.method {
        Method::Axi => resolution,
        Method::Fem => run.report.meta("triangles").and_then(|v| v.parse().ok()).unwrap_or(resolution),
    }
}

/// Plain-text table: resolution, h, error, EOC.
pub fn format_table(records: &[ConvergenceRecord], method: Method) -> String {
    let label = match method {
        Method::Axi => "J",
        Method::Fem => "triangles",
    };
    let mut s = format!("{label:>10} {:>12} {:>12} {:>6}\n", "h", "error", "EOC");
    for r in records {
        let eoc = r.eoc.map_or("-".to_string(), |e| format!("{e:.2}"));
        s.push_str(&format!("{:>10} {:>12.5e} {:>12.4e} {:>6}\n", r.resolution, r.h, r.error, eoc));
    }
    s
}

/// Runs the sweep, prints the table and writes `convergence.csv`.
pub fn converge(cfg: &RunConfig, out: &Path, log: Log) -> Result<Vec<ConvergenceRecord>> {
    log.info(format!(
        "converge: {} {} {} v0 = {} resolutions {:?}",
        cfg.method,
        cfg.law.name(),
        cfg.shape,
        cfg.v0,
        cfg.resolutions
    ));
    let (records, runs) = convergence_study(cfg, Some(out))?;
    for (r, run) in cfg.resolutions.iter().zip(&runs) {
        if !run.report.halt.is_completed() {
            log.info(format!("  resolution {r} halted early: {}", run.report.halt));
        }
    }
    let mut csv = String::from("resolution,h,dt,error,eoc\n");
    for (r, run) in records.iter().zip(&runs) {
        csv.push_str(&format!(
            "{},{:.12e},{:.12e},{:.12e},{}\n",
            r.resolution,
            r.h,
            run.dt,
            r.error,
            r.eoc.map_or(String::new(), |e| format!("{e:.6}"))
        ));
    }
    fs::create_dir_all(out)?;
    fs::write(out.join("convergence.csv"), csv)?;
    if !log.quiet {
        print!("{}", format_table(&records, cfg.method));
    }
    Ok(records)
}

/// Outcome of comparing two area time series.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    /// `max |A - B| / min(A, B)` over the common time interval.
    pub max_relative_discrepancy: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    pub warnings: Vec<String>,
}

fn linear_area(rows: &[ReportRow], t: f64) -> f64 {
    let k = rows.partition_point(|r| r.time < t);
    if k == 0 {
        return rows[0].area;
    }
    if k == rows.len() {
        return rows[k - 1].area;
    }
    let (a, b) = (&rows[k - 1], &rows[k]);
    let w = (t - a.time) / (b.time - a.time);
    a.area + w * (b.area - a.area)
}

/// Compares areas of two reports, interpolating each series linearly at the
/// other's sample times.
pub fn compare_rows(a: &[ReportRow], b: &[ReportRow]) -> Result<Comparison> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("cannot compare an empty report".into()));
    }
    let t_start = a[0].time.max(b[0].time);
    let t_end = a[a.len() - 1].time.min(b[b.len() - 1].time);
    if t_end < t_start {
        return Err(Error::Domain(format!("reports do not overlap in time ({t_start} > {t_end})")));
    }
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    let tol = 1e-12 * t_end.abs().max(1.0);
    for (own, other) in [(a, b), (b, a)] {
        for r in own.iter().filter(|r| r.time >= t_start - tol && r.time <= t_end + tol) {
            let o = linear_area(other, r.time);
            let denom = r.area.min(o);
            let rel = if r.area == o { 0.0 } else { (r.area - o).abs() / denom };
            worst = worst.max(rel);
            samples += 1;
        }
    }
    Ok(Comparison { max_relative_discrepancy: worst, t_start, t_end, samples, warnings: Vec::new() })
}

fn report_paths(p: &Path) -> (PathBuf, Option<PathBuf>) {
    if p.is_dir() {
        let meta = p.join("metadata.txt");
        (p.join("report.csv"), meta.exists().then_some(meta))
    } else {
        let meta = p.with_file_name("metadata.txt");
        (p.to_path_buf(), meta.exists().then_some(meta))
    }
}

/// Compares two run outputs (directories or `report.csv` paths).
pub fn compare(a: &Path, b: &Path, log: Log) -> Result<Comparison> {
    let (ra, ma) = report_paths(a);
    let (rb, mb) = report_paths(b);
    let mut cmp = compare_rows(&read_report_csv(&ra)?, &read_report_csv(&rb)?)?;
    let law = |m: &Option<PathBuf>| -> Result<Option<String>> {
        Ok(match m {
            Some(p) => read_metadata_file(p)?.into_iter().find(|(k, _)| k == "law").map(|(_, v)| v),
            None => None,
        })
    };
    match (law(&ma)?, law(&mb)?) {
        (Some(la), Some(lb)) if la != lb => cmp.warnings.push(format!("laws differ: {la} vs {lb}")),
        (None, _) | (_, None) => cmp.warnings.push("metadata missing; laws not checked".into()),
        _ => {}
    }
    for w in &cmp.warnings {
        log.info(format!("warning: {w}"));
    }
    Ok(cmp)
}

/// Exact curve of a sphere run, `x(ρ, t) = r(t)/r0 · x0(ρ)`.
pub fn sphere_curve_map(sol: SphereSolution, x0: Vec<Vec2>) -> impl Fn(f64, f64) -> Result<Vec2> {
    let j = x0.len() - 1;
    move |rho, t| {
        let k = (rho * j as f64).round() as usize;
        sol.curve_point(x0[k.min(j)], t)
    }
}
