//! Flat `key = value` run configuration.
//!
//! ```text
//! # unit sphere, axisymmetric
//! method = axi
//! law = gurtin
//! shape = sphere
//! radius = 1
//! v0 = 0
//! dt = 0.001
//! t_final = 0.5
//! resolution = 512
//! ```
//!
//! Blank lines and `#` comments are ignored; unknown or repeated keys are
//! errors.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::law::FlowLaw;
use crate::shapes::{BiconcaveParams, ShapeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Finite elements on a triangulated surface.
    Fem,
    /// Finite differences on the generating curve.
    Axi,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Fem => "fem",
            Method::Axi => "axi",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fem" => Ok(Method::Fem),
            "axi" => Ok(Method::Axi),
            other => Err(Error::Config(format!("unknown method {other:?} (expected fem or axi)"))),
        }
    }
}

/// How the time step is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    /// `Δt = scale · h^power`, with `h = 1/J` for curves and the largest
    /// triangle diameter for surfaces, shortened so that whole steps end
    /// exactly at `t_final`.
    Scaled { scale: f64, power: f64 },
}

impl TimeStep {
    pub fn resolve(&self, h: f64, t_final: f64) -> f64 {
        match *self {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Scaled { scale, power } => {
                let dt = scale * h.powf(power);
                if t_final > 0.0 {
                    // the 1e-9 slack keeps exact ratios like 0.5/(1/32) intact
                    t_final / (t_final / dt - 1e-9).ceil().max(1.0)
                } else {
                    dt
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub law: FlowLaw,
    pub shape: ShapeKind,
    pub v0: f64,
    pub dt: TimeStep,
    pub t_final: f64,
    /// Refinement level (surfaces) or `J` (curves) for `evolve`; the sweep
    /// for `converge`.
    pub resolutions: Vec<usize>,
    pub output_dir: PathBuf,
    pub output_every: usize,
}

const KEYS: &[&str] = &[
    "method", "law", "shape", "radius", "a", "b", "c", "major", "minor", "scale", "c0", "c1", "c2", "v0", "dt",
    "dt_scale", "dt_power", "t_final", "resolution", "resolutions", "output_dir", "output_every",
];

impl RunConfig {
    /// The single resolution of an `evolve` run.
    pub fn resolution(&self) -> Result<usize> {
        match self.resolutions.as_slice() {
            [r] => Ok(*r),
            _ => Err(Error::Config(format!("expected a single resolution, got {:?}", self.resolutions))),
        }
    }

    /// Canonical text form; parsing it gives back the same configuration.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| s.push_str(&format!("{k}={v}\n"));
        put("method", self.method.to_string());
        put("law", self.law.name().to_string());
        match self.shape {
            ShapeKind::Sphere { r } => {
                put("shape", "sphere".into());
                put("radius", fmt_f64(r));
            }
            ShapeKind::Ellipsoid { a, b, c } => {
                put("shape", "ellipsoid".into());
                put("a", fmt_f64(a));
                put("b", fmt_f64(b));
                put("c", fmt_f64(c));
            }
            ShapeKind::Torus { major, minor } => {
                put("shape", "torus".into());
                put("major", fmt_f64(major));
                put("minor", fmt_f64(minor));
            }
            ShapeKind::Biconcave(p) => {
                put("shape", "biconcave".into());
                put("radius", fmt_f64(p.radius));
                put("c0", fmt_f64(p.c0));
                put("c1", fmt_f64(p.c1));
                put("c2", fmt_f64(p.c2));
            }
        }
        put("v0", fmt_f64(self.v0));
        match self.dt {
            TimeStep::Fixed(dt) => put("dt", fmt_f64(dt)),
            TimeStep::Scaled { scale, power } => {
                put("dt_scale", fmt_f64(scale));
                put("dt_power", fmt_f64(power));
            }
        }
        put("t_final", fmt_f64(self.t_final));
        if self.resolutions.len() == 1 {
            put("resolution", self.resolutions[0].to_string());
        } else {
            let list: Vec<String> = self.resolutions.iter().map(|r| r.to_string()).collect();
            put("resolutions", list.join(","));
        }
        put("output_dir", self.output_dir.display().to_string());
        put("output_every", self.output_every.to_string());
        s
    }
}

/// Shortest text that parses back to the same `f64`.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    parse_config(&fs::read_to_string(path)?, path)
}

pub fn parse_config(text: &str, path: &Path) -> Result<RunConfig> {
    let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut map: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| err(i + 1, format!("expected key=value, found {line:?}")))?;
        let (k, v) = (k.trim().to_ascii_lowercase(), v.trim().to_string());
        if !KEYS.contains(&k.as_str()) {
            return Err(err(i + 1, format!("unknown key {k:?}")));
        }
        if v.is_empty() {
            return Err(err(i + 1, format!("empty value for {k:?}")));
        }
        if let Some((first, _)) = map.get(&k) {
            return Err(err(i + 1, format!("duplicate key {k:?} (first set on line {first})")));
        }
        map.insert(k, (i + 1, v));
    }

    let mut used: Vec<&str> = Vec::new();
    let mut get = |key: &'static str| -> Option<(usize, String)> {
        used.push(key);
        map.get(key).cloned()
    };
    let num = |key: &str, entry: Option<(usize, String)>| -> Result<Option<f64>> {
        match entry {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| err(line, format!("{key} must be a number, got {v:?}"))),
        }
    };
    let required = |key: &str, v: Option<f64>| v.ok_or_else(|| Error::Config(format!("missing required key {key:?}")));

    let method = match get("method") {
        None => Method::Fem,
        Some((line, v)) => v.parse().map_err(|e: Error| err(line, e.to_string()))?,
    };
    let law: FlowLaw = match get("law") {
        None => return Err(Error::Config("missing required key \"law\"".into())),
        Some((line, v)) => v.parse().map_err(|e: Error| err(line, e.to_string()))?,
    };
    let (shape_line, shape_name) = get("shape").ok_or_else(|| Error::Config("missing required key \"shape\"".into()))?;
    let radius = num("radius", get("radius"))?;
    let (a, b, c) = (num("a", get("a"))?, num("b", get("b"))?, num("c", get("c"))?);
    let (major, minor) = (num("major", get("major"))?, num("minor", get("minor"))?);
    let scale = num("scale", get("scale"))?;
    let (c0, c1, c2) = (num("c0", get("c0"))?, num("c1", get("c1"))?, num("c2", get("c2"))?);
    let mut allowed: Vec<&str> = vec!["shape"];
    let shape = match shape_name.to_ascii_lowercase().as_str() {
        "sphere" => {
            allowed.push("radius");
            ShapeKind::Sphere { r: radius.unwrap_or(1.0) }
        }
        "ellipsoid" => {
            allowed.extend(["a", "b", "c"]);
            ShapeKind::Ellipsoid { a: required("a", a)?, b: required("b", b)?, c: required("c", c)? }
        }
        "cigar" => {
            allowed.push("scale");
            let s = scale.unwrap_or(1.0);
            ShapeKind::Ellipsoid { a: s, b: 2.0 * s, c: s }
        }
        "torus" => {
            allowed.extend(["major", "minor"]);
            ShapeKind::Torus { major: required("major", major)?, minor: required("minor", minor)? }
        }
        "biconcave" => {
            allowed.extend(["radius", "c0", "c1", "c2"]);
            let d = BiconcaveParams::default();
            ShapeKind::Biconcave(BiconcaveParams {
                radius: radius.unwrap_or(d.radius),
                c0: c0.unwrap_or(d.c0),
                c1: c1.unwrap_or(d.c1),
                c2: c2.unwrap_or(d.c2),
            })
        }
        other => return Err(err(shape_line, format!("unknown shape {other:?}"))),
    };
    for key in ["radius", "a", "b", "c", "major", "minor", "scale", "c0", "c1", "c2"] {
        if map.contains_key(key) && !allowed.contains(&key) {
            return Err(err(map[key].0, format!("key {key:?} does not apply to shape {shape_name:?}")));
        }
    }
    shape.validate().map_err(|e| err(shape_line, e.to_string()))?;

    let v0 = num("v0", get("v0"))?.unwrap_or(0.0);
    let dt_fixed = num("dt", get("dt"))?;
    let dt_scale = num("dt_scale", get("dt_scale"))?;
    let dt_power = num("dt_power", get("dt_power"))?;
    let dt = match (dt_fixed, dt_scale) {
        (Some(_), Some(_)) => return Err(Error::Config("give either dt or dt_scale, not both".into())),
        (Some(dt), None) => {
            if dt_power.is_some() {
                return Err(Error::Config("dt_power needs dt_scale".into()));
            }
            TimeStep::Fixed(dt)
        }
        (None, Some(scale)) => TimeStep::Scaled { scale, power: dt_power.unwrap_or(1.0) },
        (None, None) => return Err(Error::Config("missing required key \"dt\"".into())),
    };
    let dt_ok = match dt {
        TimeStep::Fixed(v) => v > 0.0,
        TimeStep::Scaled { scale, power } => scale > 0.0 && power > 0.0,
    };
    if !dt_ok {
        return Err(Error::Config("time step parameters must be positive".into()));
    }
    let t_final = required("t_final", num("t_final", get("t_final"))?)?;
    if !(t_final >= 0.0) {
        return Err(Error::Config(format!("t_final must be nonnegative, got {t_final}")));
    }

    let parse_res = |line: usize, v: &str| -> Result<usize> {
        v.trim().parse::<usize>().map_err(|e| err(line, format!("bad resolution {v:?}: {e}")))
    };
    let resolutions = match (get("resolution"), get("resolutions")) {
        (Some(_), Some((line, _))) => return Err(err(line, "give either resolution or resolutions".into())),
        (Some((line, v)), None) => vec![parse_res(line, &v)?],
        (None, Some((line, v))) => v.split(',').map(|s| parse_res(line, s)).collect::<Result<Vec<_>>>()?,
        (None, None) => return Err(Error::Config("missing required key \"resolution\"".into())),
    };
    if method == Method::Axi && resolutions.iter().any(|&j| j < 2) {
        return Err(Error::Config("curve resolutions need J >= 2".into()));
    }
    let output_dir = PathBuf::from(get("output_dir").map(|(_, v)| v).unwrap_or_else(|| "output".into()));
    let output_every = match get("output_every") {
        None => 1,
        Some((line, v)) => match v.parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return Err(err(line, format!("output_every must be a positive integer, got {v:?}"))),
        },
    };
    debug_assert!(map.keys().all(|k| used.contains(&k.as_str())));

    Ok(RunConfig { method, law, shape, v0, dt, t_final, resolutions, output_dir, output_every })
}
