//! Torus `R = 2`, `r = 1` with an inward kick: the inner hole closes.

use hypmcf::axi::{axi_initialize, axi_run};
use hypmcf::shapes::{make_curve, ShapeKind};
use hypmcf::FlowLaw;

fn main() -> hypmcf::Result<()> {
    let shape = ShapeKind::Torus { major: 2.0, minor: 1.0 };
    let curve = axi_initialize(make_curve(shape, 512)?, 0.5, 1e-4, FlowLaw::Constant, shape.topology())?;
    let run = axi_run(curve, 1.3, |c| {
        if c.step() % 1000 == 0 {
            let inner = c.positions().iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
            println!("t = {:.2}  inner radius = {inner:.4}", c.time());
        }
    })?;
    println!("halt: {}", run.report.halt);
    Ok(())
}
