//! Flat key-value run configuration: strict parsing (unknown keys are
//! errors), range validation, `dt = auto` resolution, and a
//! deterministic serializer that round-trips.

use crate::grid::Grid;
use crate::initial::Shape;
use crate::solver::{stability_limit, Scheme, SolverConfig};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("missing key {0:?}")]
    MissingKey(String),
    #[error("key {key:?}: {reason}")]
    Invalid { key: String, reason: String },
}

/// A parsed run: solver parameters plus the output location.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
}

const KNOWN_KEYS: &[&str] = &[
    "dim",
    "nodes",
    "extent",
    "shape.kind",
    "shape.center",
    "shape.radius",
    "shape.r_inner",
    "shape.r_outer",
    "shape.c1",
    "shape.r1",
    "shape.c2",
    "shape.r2",
    "epsilon",
    "delta",
    "scheme",
    "dt",
    "t_end",
    "snapshot_every",
    "diagnostics_every",
    "output_dir",
];

fn invalid(key: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn take(&mut self, key: &str) -> Result<String, ConfigError> {
        self.0
            .remove(key)
            .ok_or_else(|| ConfigError::MissingKey(key.to_string()))
    }

    fn take_opt(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    fn take_f64(&mut self, key: &str) -> Result<f64, ConfigError> {
        self.take(key)?
            .parse::<f64>()
            .map_err(|e| invalid(key, e))
    }

    fn take_usize(&mut self, key: &str) -> Result<usize, ConfigError> {
        self.take(key)?
            .parse::<usize>()
            .map_err(|e| invalid(key, e))
    }

    fn take_point(&mut self, key: &str, dim: usize) -> Result<[f64; 3], ConfigError> {
        let raw = self.take(key)?;
        let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
        if parts.len() != dim {
            return Err(invalid(
                key,
                format!("expected {dim} comma-separated coordinates, got {}", parts.len()),
            ));
        }
        let mut p = [0.0; 3];
        for (a, s) in parts.iter().enumerate() {
            p[a] = s.parse::<f64>().map_err(|e| invalid(key, e))?;
        }
        Ok(p)
    }
}

/// Parses the flat `key = value` format (one pair per line, `#` comments).
pub fn parse_config_str(text: &str) -> Result<RunSpec, ConfigError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: lineno + 1,
            text: raw.to_string(),
        })?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(invalid(&key, "duplicate key"));
        }
    }
    let mut f = Fields(map);

    let dim = f.take_usize("dim")?;
    let nodes = f.take_usize("nodes")?;
    let extent = f.take_f64("extent")?;
    let grid = Grid::new(dim, nodes, extent).map_err(|e| invalid("dim/nodes/extent", e))?;

    let kind = f.take("shape.kind")?;
    let shape = match kind.as_str() {
        "sphere" => Shape::Sphere {
            center: f.take_point("shape.center", dim)?,
            radius: f.take_f64("shape.radius")?,
        },
        "annulus" => Shape::Annulus {
            center: f.take_point("shape.center", dim)?,
            r_inner: f.take_f64("shape.r_inner")?,
            r_outer: f.take_f64("shape.r_outer")?,
        },
        "two_spheres" => Shape::TwoSpheres {
            c1: f.take_point("shape.c1", dim)?,
            r1: f.take_f64("shape.r1")?,
            c2: f.take_point("shape.c2", dim)?,
            r2: f.take_f64("shape.r2")?,
        },
        other => {
            return Err(invalid(
                "shape.kind",
                format!("expected sphere | annulus | two_spheres, got {other:?}"),
            ))
        }
    };
    shape.validate().map_err(|e| invalid("shape", e))?;

    let epsilon = f.take_f64("epsilon")?;
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon", "must be positive"));
    }
    let scheme = match f.take("scheme")?.as_str() {
        "Yosida" => Scheme::Yosida,
        "Projection" => Scheme::Projection,
        other => {
            return Err(invalid(
                "scheme",
                format!("expected Yosida | Projection, got {other:?}"),
            ))
        }
    };
    let delta = match (scheme, f.take_opt("delta")) {
        (Scheme::Yosida, Some(raw)) => {
            let d = raw.parse::<f64>().map_err(|e| invalid("delta", e))?;
            if !(d > 0.0 && d < 0.5) {
                return Err(invalid("delta", format!("must lie in (0, 1/2), got {d}")));
            }
            Some(d)
        }
        (Scheme::Yosida, None) => return Err(ConfigError::MissingKey("delta".into())),
        (Scheme::Projection, Some(_)) => {
            return Err(invalid(
                "delta",
                "Projection is the delta -> 0 problem; remove the delta key",
            ))
        }
        (Scheme::Projection, None) => None,
    };

    let t_end = f.take_f64("t_end")?;
    if !(t_end >= 0.0) {
        return Err(invalid("t_end", "must be nonnegative"));
    }
    let snapshot_every = f.take_usize("snapshot_every")?;
    let diagnostics_every = f.take_usize("diagnostics_every")?;
    if snapshot_every == 0 || diagnostics_every == 0 {
        return Err(invalid(
            "snapshot_every/diagnostics_every",
            "must be >= 1",
        ));
    }
    let output_dir = PathBuf::from(f.take("output_dir")?);

    let dt_raw = f.take("dt")?;
    let mut solver = SolverConfig {
        grid,
        shape,
        epsilon,
        delta,
        scheme,
        dt: 1.0, // placeholder until resolved below
        t_end,
        snapshot_every,
        diagnostics_every,
    };
    solver.dt = if dt_raw == "auto" {
        0.9 * stability_limit(&solver)
    } else {
        let dt = dt_raw.parse::<f64>().map_err(|e| invalid("dt", e))?;
        if !(dt > 0.0) {
            return Err(invalid("dt", "must be positive"));
        }
        dt
    };
    solver.validate().map_err(|e| invalid("config", e))?;

    debug_assert!(f.0.is_empty(), "all known keys consumed");
    Ok(RunSpec { solver, output_dir })
}

/// Reads and parses a config file.
pub fn parse_config(path: &Path) -> Result<RunSpec, ConfigError> {
    parse_config_str(&std::fs::read_to_string(path)?)
}

fn fmt_point(p: [f64; 3], dim: usize) -> String {
    (0..dim)
        .map(|a| format!("{}", p[a]))
        .collect::<Vec<_>>()
        .join(",")
}

/// Serializes a spec back to the flat format; `parse_config_str`
/// round-trips it to an equal spec (dt is written resolved).
pub fn serialize(spec: &RunSpec) -> String {
    let s = &spec.solver;
    let dim = s.grid.dim();
    let mut out = String::new();
    out.push_str(&format!("dim = {}\n", dim));
    out.push_str(&format!("nodes = {}\n", s.grid.nodes()));
    out.push_str(&format!("extent = {}\n", s.grid.extent()));
    match s.shape {
        Shape::Sphere { center, radius } => {
            out.push_str("shape.kind = sphere\n");
            out.push_str(&format!("shape.center = {}\n", fmt_point(center, dim)));
            out.push_str(&format!("shape.radius = {}\n", radius));
        }
        Shape::Annulus {
            center,
            r_inner,
            r_outer,
        } => {
            out.push_str("shape.kind = annulus\n");
            out.push_str(&format!("shape.center = {}\n", fmt_point(center, dim)));
            out.push_str(&format!("shape.r_inner = {}\n", r_inner));
            out.push_str(&format!("shape.r_outer = {}\n", r_outer));
        }
        Shape::TwoSpheres { c1, r1, c2, r2 } => {
            out.push_str("shape.kind = two_spheres\n");
            out.push_str(&format!("shape.c1 = {}\n", fmt_point(c1, dim)));
            out.push_str(&format!("shape.r1 = {}\n", r1));
            out.push_str(&format!("shape.c2 = {}\n", fmt_point(c2, dim)));
            out.push_str(&format!("shape.r2 = {}\n", r2));
        }
    }
    out.push_str(&format!("epsilon = {}\n", s.epsilon));
    if let Some(d) = s.delta {
        out.push_str(&format!("delta = {}\n", d));
    }
    out.push_str(&format!(
        "scheme = {}\n",
        match s.scheme {
            Scheme::Yosida => "Yosida",
            Scheme::Projection => "Projection",
        }
    ));
    out.push_str(&format!("dt = {}\n", s.dt));
    out.push_str(&format!("t_end = {}\n", s.t_end));
    out.push_str(&format!("snapshot_every = {}\n", s.snapshot_every));
    out.push_str(&format!("diagnostics_every = {}\n", s.diagnostics_every));
    out.push_str(&format!("output_dir = {}\n", spec.output_dir.display()));
    out
}
