//! Writes a torus triangulation as OFF, reads it back and evolves the file
//! contents for a few steps.

use hypmcf::diagnostics::surface_area;
use hypmcf::fem::{fem_initialize, fem_run};
use hypmcf::io::{read_off, write_off};
use hypmcf::shapes::make_torus_mesh;
use hypmcf::FlowLaw;

fn main() -> hypmcf::Result<()> {
    let path = std::env::temp_dir().join("hypmcf_torus.off");
    write_off(&path, &make_torus_mesh(2.0, 1.0, 48, 24)?)?;
    let surface = read_off(&path)?;
    println!("{}: {} vertices, {} triangles", path.display(), surface.vertex_count(), surface.triangle_count());

    let state = fem_initialize(surface, 0.0, 1e-2, FlowLaw::Constant)?;
    let run = fem_run(state, 0.5, |_| {})?;
    println!("area {:.4} at t = {:.2}", surface_area(&run.state.surface)?, run.state.time);
    Ok(())
}
