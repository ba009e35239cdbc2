//! Refinement study for the shrinking sphere with the axisymmetric scheme,
//! `g = 1`, `V0 = 0`, `Δt = h`, on `[0, 0.5]`.

use hypmcf::commands::{convergence_study, format_table};
use hypmcf::config::{Method, RunConfig, TimeStep};
use hypmcf::shapes::ShapeKind;
use hypmcf::FlowLaw;

fn main() -> hypmcf::Result<()> {
    let cfg = RunConfig {
        method: Method::Axi,
        law: FlowLaw::Constant,
        shape: ShapeKind::Sphere { r: 1.0 },
        v0: 0.0,
        dt: TimeStep::Scaled { scale: 1.0, power: 1.0 },
        t_final: 0.5,
        resolutions: vec![32, 64, 128, 256, 512],
        output_dir: "axi_convergence".into(),
        output_every: 1,
    };
    let (records, _) = convergence_study(&cfg, None)?;
    print!("{}", format_table(&records, cfg.method));
    Ok(())
}
