//! The LeFloch law converges linearly with `Δt = h` and quadratically
//! with `Δt = h²` (axisymmetric scheme, three initial velocities).

use hypmcf::commands::{convergence_study, format_table};
use hypmcf::config::{Method, RunConfig, TimeStep};
use hypmcf::shapes::ShapeKind;
use hypmcf::FlowLaw;

fn main() -> hypmcf::Result<()> {
    for power in [1.0, 2.0] {
        for (v0, t_final) in [(0.0, 0.5), (1.0, 0.5), (-1.0, 0.25)] {
            let cfg = RunConfig {
                method: Method::Axi,
                law: FlowLaw::LeFloch,
                shape: ShapeKind::Sphere { r: 1.0 },
                v0,
                dt: TimeStep::Scaled { scale: 1.0, power },
                t_final,
                resolutions: vec![32, 64, 128, 256],
                output_dir: "lefloch".into(),
                output_every: 1,
            };
            let (records, _) = convergence_study(&cfg, None)?;
            println!("dt = h^{power}, V0 = {v0}, T = {t_final}");
            print!("{}", format_table(&records, cfg.method));
        }
    }
    Ok(())
}
