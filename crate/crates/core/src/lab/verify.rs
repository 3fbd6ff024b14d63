//! Property checks over a resolution ladder, and the trajectory monitors
//! they share with the experiments.

use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{evaluate_identity, power_mean_check, IdentityForm, TrajectoryRecord};
use crate::discrete::{backward_error, build_laplacian, dirichlet_energy, solve_shifted, FieldPair, Model, SOLVE_TOL};
use crate::elliptic::{is_positive, power, shooting_oracle, solve_seeded, NewtonOptions, ShootingOptions, STEADY_TOL};
use crate::parabolic::{evolve_observed, evolve_ordered, step, IntegratorConfig, Outcome};
use crate::problem::{BoundarySpec, DomainSpec, ExponentPair, Geometry, ProblemSpec};

use super::format::Check;
use super::LabError;

/// Expected direction of a trajectory started from a strict sub- or
/// super-solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Nonincreasing,
    Nondecreasing,
}

/// Per-step tolerance of the monotonicity and squeeze checks, relative to
/// `max(1, sup)`.
pub const STEP_TOL: f64 = 1e-10;
/// Allowed energy increase per step, relative to `max(1, |E(0)|)`.
pub const ENERGY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct TrajectoryChecks {
    pub outcome: Outcome,
    pub steps: usize,
    pub record: TrajectoryRecord,
    /// Largest step against `direction`, relative to `max(1, sup)`.
    pub wrong_way: f64,
    /// Largest excursion below zero or above the ceiling, relative to
    /// `max(1, sup)`.
    pub squeeze_excess: f64,
    /// Largest `E_{k+1} − E_k` over `max(1, |E(0)|)`.
    pub energy_increase: f64,
    /// Largest shortfall of `Δφ/Δt` below `−2E(0) + Cφ^γ − tol_b`, with
    /// `tol_b` the row's identity residual, over `max(1, |bound|)`.
    pub bound_shortfall: f64,
    /// Same without the `tol_b` allowance.
    pub bound_shortfall_raw: f64,
    /// Whether `T(t)` never decreased.
    pub big_t_monotone: bool,
}

/// Evolves `initial` and measures the monotone-trajectory properties.
pub fn trajectory_checks(
    model: &Model,
    initial: &FieldPair,
    ceiling: Option<&FieldPair>,
    direction: Direction,
    config: &IntegratorConfig,
) -> Result<TrajectoryChecks, LabError> {
    let mut wrong_way = 0.0f64;
    let mut squeeze_excess = 0.0f64;
    let run = evolve_observed(model, initial, config, |info| {
        let scale = info.previous.sup_norm().max(1.0);
        let d = info.state.minus(info.previous);
        let w = match direction {
            Direction::Nonincreasing => d.u.iter().chain(&d.v).fold(f64::NEG_INFINITY, |m, &x| m.max(x)),
            Direction::Nondecreasing => d.u.iter().chain(&d.v).fold(f64::NEG_INFINITY, |m, &x| m.max(-x)),
        };
        wrong_way = wrong_way.max(w / scale);
        squeeze_excess = squeeze_excess.max(-info.state.min_value() / scale);
        if let Some(c) = ceiling {
            let over = info.state.minus(c);
            squeeze_excess = squeeze_excess.max(over.u.iter().chain(&over.v).fold(f64::NEG_INFINITY, |m, &x| m.max(x)) / scale);
        }
        ControlFlow::Continue(())
    })?;
    let rows = run.record.rows();
    let e0 = rows[0].energy;
    let energy_increase = rows
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(f64::NEG_INFINITY, f64::max)
        / e0.abs().max(1.0);
    let (mut shortfall, mut raw) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (k, r) in rows.iter().enumerate().skip(1) {
        let tol_b = run.record.dphi_identity_residual(k);
        let s = r.bound_rhs.abs().max(1.0);
        shortfall = shortfall.max((r.bound_rhs - tol_b - r.dphi_lhs) / s);
        raw = raw.max((r.bound_rhs - r.dphi_lhs) / s);
    }
    let big_t_monotone = rows.windows(2).all(|w| match direction {
        Direction::Nondecreasing => w[1].big_t >= w[0].big_t,
        Direction::Nonincreasing => w[1].big_t <= w[0].big_t,
    });
    Ok(TrajectoryChecks {
        outcome: run.outcome,
        steps: run.steps,
        wrong_way: wrong_way.max(0.0),
        squeeze_excess: squeeze_excess.max(0.0),
        energy_increase,
        bound_shortfall: shortfall,
        bound_shortfall_raw: raw,
        big_t_monotone,
        record: run.record,
    })
}

/// Largest `|⟨Ax,y⟩_w − ⟨x,Ay⟩_w| / (|x| |y|)` over `samples` random pairs,
/// with `|·|` the Euclidean norm of the nodal vector.
pub fn duality_defect(model: &Model, samples: usize, rng: &mut impl Rng) -> f64 {
    let grid = model.grid();
    let op = model.op();
    let n = model.len();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d = (dirichlet_energy(grid, op, &x, &y) - dirichlet_energy(grid, op, &y, &x)).abs();
        let norm = |z: &[f64]| z.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst = worst.max(d / (norm(&x) * norm(&y)));
    }
    worst
}

/// Seeded sampling of `x^a + y^a ≤ 2^{1−a}(x+y)^a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalitySampling {
    pub samples: usize,
    pub violations: usize,
    /// Largest `(lhs − rhs)/rhs` seen.
    pub worst_ratio: f64,
    /// Largest `|lhs − rhs|/rhs` over the equality cases `x = y`.
    pub equality_error: f64,
}

/// `x`, `y` log-uniform in `[1e−6, 1e6]`, `a` uniform in `(0, 1)`.
pub fn sample_power_inequality(samples: usize, seed: u64) -> InequalitySampling {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = InequalitySampling {
        samples,
        violations: 0,
        worst_ratio: f64::NEG_INFINITY,
        equality_error: 0.0,
    };
    for _ in 0..samples {
        let x = 10f64.powf(rng.gen_range(-6.0..=6.0));
        let y = 10f64.powf(rng.gen_range(-6.0..=6.0));
        let a = loop {
            let a: f64 = rng.gen();
            if a > 0.0 {
                break a;
            }
        };
        let r = power_mean_check(x, y, a).expect("sampled arguments are in range");
        if !r.holds {
            out.violations += 1;
        }
        out.worst_ratio = out.worst_ratio.max((r.lhs - r.rhs) / r.rhs);
        let eq = power_mean_check(x, x, a).expect("sampled arguments are in range");
        out.equality_error = out.equality_error.max((eq.lhs - eq.rhs).abs() / eq.rhs);
    }
    out
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub exponents: ExponentPair,
    pub dimension: usize,
    pub boundary: BoundarySpec,
    pub ladder: Vec<usize>,
    pub seed: u64,
    pub integrator: IntegratorConfig,
    /// Number of random pairs in the duality check.
    pub duality_samples: usize,
    /// Number of random triples in the scalar inequality check.
    pub inequality_samples: usize,
    /// Replace the operator by a slightly asymmetric one (negative control).
    pub broken_operator: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            exponents: ExponentPair { p: 3.0, q: 3.0 },
            dimension: 2,
            boundary: BoundarySpec::Dirichlet,
            ladder: vec![128, 256, 512],
            seed: 0,
            integrator: IntegratorConfig::default(),
            duality_samples: 100,
            inequality_samples: 100_000,
            broken_operator: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str, resolution: Option<usize>) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name && c.resolution == resolution)
    }
}

fn check(name: &str, resolution: Option<usize>, value: f64, tol: f64) -> Check {
    Check {
        name: name.to_string(),
        resolution,
        value,
        tol,
        pass: value <= tol,
    }
}

fn flag(name: &str, resolution: Option<usize>, ok: bool) -> Check {
    check(name, resolution, if ok { 0.0 } else { 1.0 }, 0.0)
}

/// Measurements at one resolution that feed the cross-resolution checks.
#[derive(Debug, Clone, Copy, Default)]
struct LevelData {
    oracle_error: Option<f64>,
    blowup_time: Option<f64>,
}

fn level_checks(opts: &VerifyOptions, res: usize) -> (Vec<Check>, LevelData) {
    let at = Some(res);
    let mut out = Vec::new();
    let mut data = LevelData::default();
    let spec = ProblemSpec::homogeneous(opts.exponents, DomainSpec::ball(opts.dimension, 1.0)).with_boundary(opts.boundary);
    let model = match Model::new(spec, res) {
        Ok(m) => m,
        Err(e) => {
            out.push(Check {
                name: format!("model: {e}"),
                resolution: at,
                value: f64::NAN,
                tol: 0.0,
                pass: false,
            });
            return (out, data);
        }
    };
    let model = if opts.broken_operator {
        let n = model.len();
        model.with_operator(build_laplacian(model.grid()).with_asymmetric_defect(n / 2, 1.5))
    } else {
        model
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (res as u64).rotate_left(32));

    out.push(check("duality", at, duality_defect(&model, opts.duality_samples, &mut rng), 1e-12));
    out.push(flag("m_matrix", at, model.op().is_m_matrix()));

    let rhs: Vec<f64> = (0..model.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    match solve_shifted(model.op(), 0.0, &rhs) {
        Ok(x) => {
            out.push(check("solve_backward_error", at, backward_error(model.op(), 0.0, &x, &rhs), SOLVE_TOL));
            out.push(flag("solve_max_principle", at, x.iter().all(|&v| v >= 0.0)));
        }
        Err(_) => out.push(check("solve_backward_error", at, f64::NAN, SOLVE_TOL)),
    }

    let positive: Vec<f64> = (0..model.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    let pos = FieldPair::diagonal(positive);
    out.push(flag(
        "step_positivity",
        at,
        step(&model, &pos, opts.integrator.dt_max).is_ok_and(|s| s.min_value() >= 0.0),
    ));

    let eq = match solve_seeded(&model, &[], &NewtonOptions::default()) {
        Ok(eq) => eq,
        Err(_) => {
            out.push(check("equilibrium_residual", at, f64::NAN, STEADY_TOL));
            return (out, data);
        }
    };
    out.push(check("equilibrium_residual", at, eq.residual_norm, STEADY_TOL));
    out.push(flag("equilibrium_positive", at, is_positive(&eq.pair)));

    if let Geometry::RadialBall { dimension, radius } = model.spec().domain.geometry {
        if let Ok(sol) = shooting_oracle(opts.exponents, dimension, radius, opts.boundary, &ShootingOptions::default()) {
            let err = (eq.sup_norm() - sol.sup_norm()).abs() / sol.sup_norm();
            data.oracle_error = Some(err);
            out.push(check("oracle_relative_error", at, err, 1e-3));
        } else {
            out.push(check("oracle_relative_error", at, f64::NAN, 1e-3));
        }
    }

    // ⟨AU, V⟩ = ∫ V^{p+1} = ∫ U^{q+1} at an equilibrium.
    let grid = model.grid();
    let (p, q) = (opts.exponents.p, opts.exponents.q);
    let a_uv = grid.dot(&model.op().apply(&eq.pair.u), &eq.pair.v);
    let iv: f64 = grid.weights().iter().zip(&eq.pair.v).map(|(w, v)| w * v * power(*v, p)).sum();
    let iu: f64 = grid.weights().iter().zip(&eq.pair.u).map(|(w, u)| w * u * power(*u, q)).sum();
    out.push(check("energy_consistency", at, ((a_uv - iv).abs().max((a_uv - iu).abs())) / iv, 1e-8));

    let same = evaluate_identity(&model, &eq.pair, &eq.pair, &IdentityForm::Plain);
    out.push(check("identity_equal_pairs", at, same.gap, 0.0));
    let perturbed = FieldPair {
        u: eq.pair.u.iter().map(|x| x + 0.1).collect(),
        v: eq.pair.v.iter().map(|x| x + 0.1).collect(),
    };
    let ctrl = evaluate_identity(&model, &eq.pair, &perturbed, &IdentityForm::Plain);
    out.push(flag("identity_perturbed_sign", at, ctrl.lhs < 0.0 && 0.0 < ctrl.rhs));

    let cfg = &opts.integrator;
    match trajectory_checks(&model, &eq.pair.scaled(0.5), Some(&eq.pair), Direction::Nonincreasing, cfg) {
        Ok(tc) => {
            out.push(flag("decay_outcome", at, tc.outcome.is_decay()));
            out.push(check("decay_monotone", at, tc.wrong_way, STEP_TOL));
            out.push(check("decay_squeeze", at, tc.squeeze_excess, STEP_TOL));
            out.push(check("decay_energy", at, tc.energy_increase, ENERGY_TOL));
        }
        Err(_) => out.push(flag("decay_outcome", at, false)),
    }
    match trajectory_checks(&model, &eq.pair.scaled(1.5), None, Direction::Nondecreasing, cfg) {
        Ok(tc) => {
            out.push(flag("blowup_outcome", at, tc.outcome.is_blow_up()));
            if let Outcome::BlowUp { t_est, .. } = tc.outcome {
                data.blowup_time = Some(t_est);
            }
            out.push(check("blowup_monotone", at, tc.wrong_way, STEP_TOL));
            out.push(check("blowup_energy", at, tc.energy_increase, ENERGY_TOL));
            out.push(check("blowup_bound", at, tc.bound_shortfall, 0.0));
            out.push(flag("blowup_big_t_increasing", at, tc.big_t_monotone));
        }
        Err(_) => out.push(flag("blowup_outcome", at, false)),
    }
    let ordered = evolve_ordered(&model, &eq.pair.scaled(0.3), &eq.pair.scaled(0.6), cfg, 0.0);
    out.push(flag("ordering", at, ordered.is_ok_and(|r| r.violation.is_none())));
    (out, data)
}

/// Runs every check at each ladder resolution, plus the convergence and
/// sampling checks across the ladder. Output order is fixed by the ladder.
pub fn verify_suite(opts: &VerifyOptions) -> VerifyReport {
    let levels: Vec<(Vec<Check>, LevelData)> = opts.ladder.par_iter().map(|&r| level_checks(opts, r)).collect();
    let mut checks: Vec<Check> = levels.iter().flat_map(|(c, _)| c.iter().cloned()).collect();

    for (k, w) in levels.windows(2).enumerate() {
        let (coarse, fine) = (opts.ladder[k], opts.ladder[k + 1]);
        if let (Some(a), Some(b)) = (w[0].1.oracle_error, w[1].1.oracle_error) {
            // Error ratio per doubling; 4 for a second-order scheme.
            let ratio = (a / b).powf(1.0 / (fine as f64 / coarse as f64).log2());
            checks.push(check("oracle_convergence_ratio", Some(fine), (ratio / 4.0 - 1.0).abs(), 0.25));
        }
    }
    let times: Vec<f64> = levels.iter().filter_map(|(_, d)| d.blowup_time).collect();
    if times.len() >= 2 {
        let lo = times.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        checks.push(check("blowup_time_spread", None, (hi - lo) / lo, 0.2));
    }
    let s = sample_power_inequality(opts.inequality_samples, opts.seed);
    checks.push(check("power_inequality_violations", None, s.violations as f64, 0.0));
    checks.push(check("power_inequality_equality", None, s.equality_error, 1e-14));
    VerifyReport { checks }
}
