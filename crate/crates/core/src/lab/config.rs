//! Flat `key = value` run configuration shared by the config file and the
//! command line.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::parabolic::IntegratorConfig;
use crate::problem::{BoundarySpec, DomainSpec, ExponentPair, ForcingSpec, ProblemError, ProblemSpec};

use super::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryKind {
    Radial,
    Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Every setting a subcommand may read. Keys are the long flag names.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub p: f64,
    pub q: f64,
    pub dim: usize,
    pub geometry: GeometryKind,
    pub resolution: usize,
    pub bc: BoundarySpec,
    pub lambda: f64,
    pub alpha: Vec<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub dt0: f64,
    pub tmax: f64,
    /// Target width of the α bisection; zero disables bisection.
    pub width: f64,
    pub bracket: (f64, f64),
    pub rel_tol: f64,
    pub ladder: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ic = IntegratorConfig::default();
        RunConfig {
            p: 3.0,
            q: 3.0,
            dim: 2,
            geometry: GeometryKind::Radial,
            resolution: 512,
            bc: BoundarySpec::Dirichlet,
            lambda: 0.0,
            alpha: Vec::new(),
            out: None,
            format: Format::Json,
            seed: 0,
            dt0: ic.dt0,
            tmax: ic.t_max,
            width: 0.02,
            bracket: (1e-2, 1e2),
            rel_tol: 0.02,
            ladder: vec![128, 256, 512],
        }
    }
}

/// Keys in canonical order.
pub const KEYS: &[&str] = &[
    "p", "q", "dim", "geometry", "resolution", "bc", "lambda", "alpha", "out", "format", "seed", "dt0",
    "tmax", "width", "bracket", "rel-tol", "ladder",
];

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> LabError {
    LabError::Config(format!("{key} = {value}: {why}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, LabError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| bad(key, value, e))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, LabError>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

/// Parses `dirichlet` or `robin:<beta>`.
pub fn parse_bc(value: &str) -> Result<BoundarySpec, LabError> {
    let v = value.trim();
    if v == "dirichlet" {
        return Ok(BoundarySpec::Dirichlet);
    }
    match v.strip_prefix("robin:") {
        Some(b) => {
            let beta: f64 = num("bc", b)?;
            if beta > 0.0 {
                Ok(BoundarySpec::Robin { beta })
            } else {
                Err(bad("bc", value, "Robin coefficient must be positive"))
            }
        }
        None => Err(bad("bc", value, "expected dirichlet or robin:<beta>")),
    }
}

impl RunConfig {
    /// Assigns one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), LabError> {
        match key {
            "p" => self.p = num(key, value)?,
            "q" => self.q = num(key, value)?,
            "dim" => self.dim = num(key, value)?,
            "geometry" => {
                self.geometry = match value.trim() {
                    "radial" => GeometryKind::Radial,
                    "rect" => GeometryKind::Rect,
                    _ => return Err(bad(key, value, "expected radial or rect")),
                }
            }
            "resolution" => self.resolution = num(key, value)?,
            "bc" => self.bc = parse_bc(value)?,
            "lambda" => self.lambda = num(key, value)?,
            "alpha" => self.alpha = list(key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "format" => {
                self.format = match value.trim() {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(bad(key, value, "expected csv or json")),
                }
            }
            "seed" => self.seed = num(key, value)?,
            "dt0" => self.dt0 = num(key, value)?,
            "tmax" => self.tmax = num(key, value)?,
            "width" => self.width = num(key, value)?,
            "bracket" => {
                let v: Vec<f64> = list(key, value)?;
                match v[..] {
                    [lo, hi] if lo > 0.0 && hi > lo => self.bracket = (lo, hi),
                    _ => return Err(bad(key, value, "expected lo,hi with 0 < lo < hi")),
                }
            }
            "rel-tol" => self.rel_tol = num(key, value)?,
            "ladder" => self.ladder = list(key, value)?,
            _ => return Err(LabError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a config file: `key = value` lines, `#` comments.
    pub fn apply_text(&mut self, text: &str) -> Result<(), LabError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LabError::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| LabError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, LabError> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    fn value_text(&self, key: &str) -> Option<String> {
        let join = |v: &[String]| v.join(",");
        Some(match key {
            "p" => self.p.to_string(),
            "q" => self.q.to_string(),
            "dim" => self.dim.to_string(),
            "geometry" => match self.geometry {
                GeometryKind::Radial => "radial".into(),
                GeometryKind::Rect => "rect".into(),
            },
            "resolution" => self.resolution.to_string(),
            "bc" => self.bc.to_string(),
            "lambda" => self.lambda.to_string(),
            "alpha" if self.alpha.is_empty() => return None,
            "alpha" => join(&self.alpha.iter().map(f64::to_string).collect::<Vec<_>>()),
            "out" => return None,
            "format" => match self.format {
                Format::Csv => "csv".into(),
                Format::Json => "json".into(),
            },
            "seed" => self.seed.to_string(),
            "dt0" => self.dt0.to_string(),
            "tmax" => self.tmax.to_string(),
            "width" => self.width.to_string(),
            "bracket" => format!("{},{}", self.bracket.0, self.bracket.1),
            "rel-tol" => self.rel_tol.to_string(),
            "ladder" => join(&self.ladder.iter().map(usize::to_string).collect::<Vec<_>>()),
            _ => return None,
        })
    }

    /// Canonical config text: every key that affects results, in [`KEYS`]
    /// order. The output directory is left out. Floats use the shortest
    /// representation that parses back to the same value, so
    /// `from_text(canonical_text())` reproduces `self` up to `out`.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            if let Some(v) = self.value_text(key) {
                let _ = writeln!(s, "{key} = {v}");
            }
        }
        s
    }

    pub fn exponents(&self) -> Result<ExponentPair, ProblemError> {
        ExponentPair::new(self.p, self.q)
    }

    pub fn domain(&self) -> Result<DomainSpec, LabError> {
        match self.geometry {
            GeometryKind::Radial => Ok(DomainSpec::ball(self.dim, 1.0)),
            GeometryKind::Rect if self.dim == 2 => Ok(DomainSpec::rectangle(1.0, 1.0)),
            GeometryKind::Rect => Err(LabError::Config(format!("rect geometry needs dim = 2, got {}", self.dim))),
        }
    }

    /// Problem with unit forcing profiles scaled by `lambda`.
    pub fn problem_spec(&self) -> Result<ProblemSpec, LabError> {
        let forcing = if self.lambda == 0.0 {
            ForcingSpec::none()
        } else {
            ForcingSpec::uniform(self.lambda)
        };
        Ok(ProblemSpec::homogeneous(self.exponents()?, self.domain()?)
            .with_boundary(self.bc)
            .with_forcing(forcing))
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, LabError> {
        let mut ic = IntegratorConfig {
            dt0: self.dt0,
            t_max: self.tmax,
            ..IntegratorConfig::default()
        };
        // A coarser dt0 than dt_max would be rejected outright; widen the cap.
        if ic.dt0 > ic.dt_max {
            ic.dt_max = ic.dt0;
        }
        ic.validate().map_err(|e| LabError::Config(e.to_string()))?;
        Ok(ic)
    }
}
