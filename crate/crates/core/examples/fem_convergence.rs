//! Sphere refinement study with the finite element scheme, `g = 1`,
//! `Δt = 0.25 h0` on `[0, 0.25]`.

use hypmcf::commands::{convergence_study, format_table};
use hypmcf::config::{Method, RunConfig, TimeStep};
use hypmcf::shapes::ShapeKind;
use hypmcf::FlowLaw;

fn main() -> hypmcf::Result<()> {
    let cfg = RunConfig {
        method: Method::Fem,
        law: FlowLaw::Constant,
        shape: ShapeKind::Sphere { r: 1.0 },
        v0: 0.0,
        dt: TimeStep::Scaled { scale: 0.25, power: 1.0 },
        t_final: 0.25,
        resolutions: vec![3, 4, 5, 6],
        output_dir: "fem_convergence".into(),
        output_every: 1,
    };
    let (records, _) = convergence_study(&cfg, None)?;
    print!("{}", format_table(&records, cfg.method));
    Ok(())
}
