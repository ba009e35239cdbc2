//! A 2:1:1 cigar released from rest. Prints area and `1/K∞`; the indicator
//! collapses when a flat region forms.

use hypmcf::axi::{axi_initialize, axi_run};
use hypmcf::diagnostics::{curve_area, kinf};
use hypmcf::shapes::{make_curve, ShapeKind};
use hypmcf::FlowLaw;

fn main() -> hypmcf::Result<()> {
    let shape = ShapeKind::cigar();
    let curve = axi_initialize(make_curve(shape, 512)?, 0.0, 1e-4, FlowLaw::Constant, shape.topology())?;
    println!("{:>6} {:>10} {:>10}", "t", "area", "1/K");
    let run = axi_run(curve, 1.0, |c| {
        if c.step() % 500 == 0 {
            let inv = kinf(c).map_or(f64::NAN, |k| 1.0 / k);
            println!("{:>6.3} {:>10.4} {:>10.4e}", c.time(), curve_area(c), inv);
        }
    })?;
    println!("halt: {} at t = {:.4}", run.report.halt, run.curve.time());
    Ok(())
}
