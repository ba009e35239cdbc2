use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Coefficient function `g` of the flow `dV/dt = g(V^2) H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlowLaw {
    /// `g(s) = 1`.
    Constant,
    /// `g(s) = 1 + s/2`.
    LeFloch,
}

impl FlowLaw {
    #[inline]
    pub fn evaluate(self, s: f64) -> f64 {
        match self {
            FlowLaw::Constant => 1.0,
            FlowLaw::LeFloch => 1.0 + 0.5 * s,
        }
    }

    /// Name used in config files and metadata.
    pub fn name(self) -> &'static str {
        match self {
            FlowLaw::Constant => "gurtin",
            FlowLaw::LeFloch => "lefloch",
        }
    }
}

impl fmt::Display for FlowLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FlowLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gurtin" | "constant" => Ok(FlowLaw::Constant),
            "lefloch" => Ok(FlowLaw::LeFloch),
            other => Err(Error::Config(format!(
                "unknown law '{other}' (expected gurtin or lefloch)"
            ))),
        }
    }
}
