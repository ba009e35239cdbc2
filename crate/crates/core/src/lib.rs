//! Hyperbolic mean curvature flow `∂ₜV = g(V²) H` of closed surfaces.
//!
//! Two discretisations are provided:
//!
//! * [`fem`]: parametric linear finite elements on triangulated surfaces;
//! * [`axi`]: finite differences on the generating curve of an
//!   axisymmetric surface.
//!
//! Both support the constant law `g = 1` and `g(s) = 1 + s/2`
//! (see [`FlowLaw`]). [`exact`] has the radially symmetric reference
//! solutions, [`diagnostics`] the area, curvature and energy monitors, and
//! [`commands`] the batch drivers used by the `hypmcf` binary.

pub mod axi;
pub mod commands;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod fem;
pub mod io;
pub mod law;
pub mod linsolve;
pub mod mesh;
pub mod shapes;

pub use axi::{axi_initialize, axi_run, axi_step, GridCurve, Topology};
pub use diagnostics::{EvolutionReport, HaltReason, ReportRow};
pub use error::{Error, Result};
pub use exact::SphereSolution;
pub use fem::{fem_initialize, fem_run, fem_step, FemState};
pub use law::FlowLaw;
pub use mesh::{TriSurface, Vec3};
pub use shapes::{ShapeKind, ShapeSpec, Vec2};
