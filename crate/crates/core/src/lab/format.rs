//! Trajectory CSV, nodal snapshots and result JSON.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::analysis::{Row, TrajectoryRecord};
use crate::discrete::{FieldPair, Model};
use crate::parabolic::Outcome;
use crate::problem::{BoundarySpec, Geometry};

use super::config::parse_bc;
use super::LabError;

pub const CSV_HEADER: &str = "t,dt,phi,energy,bigT,sup_u,sup_v,dphi_lhs,dphi_rhs,bound_rhs";

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_row(w: &mut impl Write, r: &Row) -> io::Result<()> {
    let fields = [
        r.t, r.dt, r.phi, r.energy, r.big_t, r.sup_u, r.sup_v, r.dphi_lhs, r.dphi_rhs, r.bound_rhs,
    ];
    let line: Vec<String> = fields.iter().map(|&x| num(x)).collect();
    writeln!(w, "{}", line.join(","))
}

pub fn write_trajectory_csv(w: &mut impl Write, record: &TrajectoryRecord) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in record.rows() {
        write_row(w, r)?;
    }
    Ok(())
}

pub fn read_trajectory_csv(r: impl BufRead) -> Result<Vec<Row>, LabError> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != CSV_HEADER {
        return Err(LabError::Format(format!("unexpected CSV header `{header}`")));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        let v: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let v = v.map_err(|e| LabError::Format(format!("row {}: {e}", n + 1)))?;
        if v.len() != 10 {
            return Err(LabError::Format(format!("row {}: expected 10 fields, got {}", n + 1, v.len())));
        }
        rows.push(Row {
            t: v[0],
            dt: v[1],
            phi: v[2],
            energy: v[3],
            big_t: v[4],
            sup_u: v[5],
            sup_v: v[6],
            dphi_lhs: v[7],
            dphi_rhs: v[8],
            bound_rhs: v[9],
        });
    }
    Ok(rows)
}

/// Nodal state with the metadata needed to reuse it.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub geometry: Geometry,
    pub resolution: usize,
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub bc: BoundarySpec,
    pub pair: FieldPair,
}

fn geometry_text(g: &Geometry) -> String {
    g.to_string()
}

fn parse_geometry(s: &str) -> Result<Geometry, LabError> {
    let err = || LabError::Format(format!("bad geometry `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts[..] {
        ["radial", n, r] => Ok(Geometry::RadialBall {
            dimension: n.parse().map_err(|_| err())?,
            radius: r.parse().map_err(|_| err())?,
        }),
        ["rect", wh] => {
            let (w, h) = wh.split_once('x').ok_or_else(err)?;
            Ok(Geometry::Rectangle {
                width: w.parse().map_err(|_| err())?,
                height: h.parse().map_err(|_| err())?,
            })
        }
        ["interval", l] => Ok(Geometry::Interval {
            length: l.parse().map_err(|_| err())?,
        }),
        _ => Err(err()),
    }
}

impl Snapshot {
    pub fn of(model: &Model, pair: &FieldPair) -> Self {
        let spec = model.spec();
        Snapshot {
            geometry: spec.domain.geometry,
            resolution: model.grid().resolution()[0],
            p: spec.exponents.p,
            q: spec.exponents.q,
            lambda: spec.lambda(),
            bc: spec.boundary,
            pair: pair.clone(),
        }
    }

    /// Whether the snapshot was taken on `model`'s grid and problem.
    pub fn matches(&self, model: &Model) -> bool {
        let spec = model.spec();
        self.geometry == spec.domain.geometry
            && self.resolution == model.grid().resolution()[0]
            && self.p == spec.exponents.p
            && self.q == spec.exponents.q
            && self.bc == spec.boundary
            && self.pair.len() == model.len()
    }

    pub fn write(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "# geometry = {}", geometry_text(&self.geometry))?;
        writeln!(w, "# resolution = {}", self.resolution)?;
        writeln!(w, "# p = {}", self.p)?;
        writeln!(w, "# q = {}", self.q)?;
        writeln!(w, "# lambda = {}", self.lambda)?;
        writeln!(w, "# bc = {}", self.bc)?;
        for (u, v) in self.pair.u.iter().zip(&self.pair.v) {
            writeln!(w, "{} {}", num(*u), num(*v))?;
        }
        Ok(())
    }

    pub fn read(r: impl BufRead) -> Result<Self, LabError> {
        let mut header = BTreeMap::new();
        let (mut u, mut v) = (Vec::new(), Vec::new());
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                if let Some((k, val)) = h.split_once('=') {
                    header.insert(k.trim().to_string(), val.trim().to_string());
                }
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => {
                    u.push(a);
                    v.push(b);
                }
                _ => return Err(LabError::Format(format!("line {}: expected two numbers", n + 1))),
            }
        }
        let get = |k: &str| {
            header
                .get(k)
                .cloned()
                .ok_or_else(|| LabError::Format(format!("snapshot header lacks `{k}`")))
        };
        let f = |k: &str| -> Result<f64, LabError> {
            get(k)?
                .parse()
                .map_err(|_| LabError::Format(format!("bad `{k}` in snapshot header")))
        };
        Ok(Snapshot {
            geometry: parse_geometry(&get("geometry")?)?,
            resolution: get("resolution")?
                .parse()
                .map_err(|_| LabError::Format("bad `resolution` in snapshot header".into()))?,
            p: f("p")?,
            q: f("q")?,
            lambda: f("lambda")?,
            bc: parse_bc(&get("bc")?)?,
            pair: FieldPair::new(u, v),
        })
    }
}

/// One classified run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    pub outcome: String,
    pub t_end: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_blowup_est: Option<f64>,
    pub steps: usize,
}

impl RunRecord {
    pub fn new(outcome: &Outcome, steps: usize) -> Self {
        RunRecord {
            alpha: None,
            lambda: None,
            outcome: outcome.label().to_string(),
            t_end: outcome.t_end(),
            t_blowup_est: match outcome {
                Outcome::BlowUp { t_est, .. } => Some(*t_est),
                _ => None,
            },
            steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Canonical config; rerun with `--config` on a file holding this text.
    pub config: String,
    /// SHA-256 of `config`.
    pub spec_digest: String,
    pub resolution: usize,
    pub dt0: f64,
    pub seed: u64,
}

/// A named pass/fail measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub resolution: Option<usize>,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Top-level result document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_blowup_est: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub brackets: Option<BTreeMap<String, [f64; 2]>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub runs: Vec<RunRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub checks: Vec<Check>,
    /// Named scalar measurements.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub values: BTreeMap<String, f64>,
    pub provenance: Provenance,
}

impl ExperimentResult {
    pub fn new(experiment: &str, outcome: &str, provenance: Provenance) -> Self {
        ExperimentResult {
            experiment: experiment.to_string(),
            outcome: outcome.to_string(),
            t_end: None,
            t_blowup_est: None,
            alpha: None,
            lambda: None,
            brackets: None,
            runs: Vec::new(),
            checks: Vec::new(),
            values: BTreeMap::new(),
            provenance,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| LabError::Format(e.to_string()))
    }
}

pub fn write_checks_csv(w: &mut impl Write, checks: &[Check]) -> io::Result<()> {
    writeln!(w, "name,resolution,value,tol,pass")?;
    for c in checks {
        let res = c.resolution.map(|r| r.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{}", c.name, res, num(c.value), num(c.tol), c.pass)?;
    }
    Ok(())
}

pub fn write_runs_csv(w: &mut impl Write, runs: &[RunRecord]) -> io::Result<()> {
    writeln!(w, "alpha,lambda,outcome,t_end,t_blowup_est,steps")?;
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    for r in runs {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            opt(r.alpha),
            opt(r.lambda),
            r.outcome,
            num(r.t_end),
            opt(r.t_blowup_est),
            r.steps
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{DomainSpec, ExponentPair, ProblemSpec};

    fn model() -> Model {
        let spec = ProblemSpec::homogeneous(ExponentPair::new(3.0, 2.0).unwrap(), DomainSpec::unit_disk())
            .with_boundary(BoundarySpec::Robin { beta: 0.5 });
        Model::new(spec, 8).unwrap()
    }

    #[test]
    fn snapshot_roundtrip_is_exact() {
        let m = model();
        let u = m.grid().sample_radial(|r| (1.0 + r).ln() / 3.0);
        let v = m.grid().sample_radial(|r| std::f64::consts::PI * (1.0 - r));
        let snap = Snapshot::of(&m, &FieldPair::new(u, v));
        let mut buf = Vec::new();
        snap.write(&mut buf).unwrap();
        let back = Snapshot::read(&buf[..]).unwrap();
        assert_eq!(back, snap);
        assert!(back.matches(&m));
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let m = model();
        let mut rec = TrajectoryRecord::new(&m);
        for k in 0..4 {
            let x = m.grid().sample_radial(|r| (0.3 * k as f64 + 1.0) / (1.0 + r));
            rec.push(&m, k as f64 / 7.0, if k == 0 { 0.0 } else { 1.0 / 7.0 }, &FieldPair::diagonal(x));
        }
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &rec).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        let rows = read_trajectory_csv(&buf[..]).unwrap();
        assert_eq!(rows.as_slice(), rec.rows());
    }

    #[test]
    fn bad_snapshot_rejected() {
        assert!(Snapshot::read(&b"# p = 3\n1 2 3\n"[..]).is_err());
        assert!(Snapshot::read(&b"1 2\n"[..]).is_err());
    }
}
