//! The same shrinking sphere computed on a triangulation and on its
//! generating curve; the surface areas agree.

use hypmcf::commands::{compare_rows, simulate};
use hypmcf::config::{Method, RunConfig, TimeStep};
use hypmcf::shapes::ShapeKind;
use hypmcf::FlowLaw;

fn main() -> hypmcf::Result<()> {
    let base = RunConfig {
        method: Method::Fem,
        law: FlowLaw::Constant,
        shape: ShapeKind::Sphere { r: 1.0 },
        v0: 0.0,
        dt: TimeStep::Scaled { scale: 0.25, power: 1.0 },
        t_final: 0.7,
        resolutions: vec![4],
        output_dir: "fem".into(),
        output_every: 1,
    };
    let fem = simulate(&base)?;
    let axi = simulate(&RunConfig {
        method: Method::Axi,
        dt: TimeStep::Scaled { scale: 1.0, power: 1.0 },
        resolutions: vec![512],
        ..base.clone()
    })?;
    let cmp = compare_rows(&fem.report.rows, &axi.report.rows)?;
    println!(
        "max relative area discrepancy on [{:.2}, {:.2}]: {:.3e}",
        cmp.t_start, cmp.t_end, cmp.max_relative_discrepancy
    );
    Ok(())
}
