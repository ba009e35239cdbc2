//! Relative drift of the conserved energy (`E` for LeFloch, `Ẽ` for the
//! constant law) until the sphere has lost 95% of its area.

use hypmcf::commands::simulate;
use hypmcf::config::{Method, RunConfig, TimeStep};
use hypmcf::diagnostics::Energy;
use hypmcf::exact::SphereSolution;
use hypmcf::shapes::ShapeKind;
use hypmcf::FlowLaw;

fn main() -> hypmcf::Result<()> {
    for law in [FlowLaw::LeFloch, FlowLaw::Constant] {
        let energy = match law {
            FlowLaw::LeFloch => Energy::E,
            FlowLaw::Constant => Energy::Etilde,
        };
        for v0 in [-1.0, 0.0, 1.0] {
            let t_final = 1.2 * SphereSolution::new(law, 1.0, v0)?.vanishing_time();
            let cfg = RunConfig {
                method: Method::Axi,
                law,
                shape: ShapeKind::Sphere { r: 1.0 },
                v0,
                dt: TimeStep::Fixed(1e-4),
                t_final,
                resolutions: vec![256],
                output_dir: "energy".into(),
                output_every: 1,
            };
            let run = simulate(&cfg)?;
            println!("{:>7} V0 = {v0:>4}: drift {:.3e}", law.name(), run.report.energy_drift(energy, 0.05));
        }
    }
    Ok(())
}
