//! Threshold, extremal-λ and Robin experiments.

use rayon::prelude::*;

use crate::discrete::{FieldPair, Model};
use crate::elliptic::{
    lambda_star, residual, shooting_oracle, solve_monotone, solve_seeded, Equilibrium, LambdaStar,
    MonotoneOptions, NewtonOptions, ShootingOptions, STEADY_TOL,
};
use crate::parabolic::{evolve, IntegratorConfig, Outcome};
use crate::problem::{BoundarySpec, Geometry};

use super::LabError;

/// One evolve run from `α·(U,V)` (or from zero for forced problems).
#[derive(Debug, Clone)]
pub struct ClassifiedRun {
    pub parameter: f64,
    pub outcome: Outcome,
    pub steps: usize,
}

fn run_scaled(model: &Model, eq: &FieldPair, alpha: f64, config: &IntegratorConfig) -> Result<ClassifiedRun, LabError> {
    let run = evolve(model, &eq.scaled(alpha), config)?;
    Ok(ClassifiedRun {
        parameter: alpha,
        outcome: run.outcome,
        steps: run.steps,
    })
}

#[derive(Debug, Clone)]
pub struct ThresholdOptions {
    /// Initial α values, run concurrently.
    pub alphas: Vec<f64>,
    /// Bisect until the bracket is at most this wide; `None` skips bisection.
    pub width: Option<f64>,
    pub config: IntegratorConfig,
    pub max_bisections: usize,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions {
            alphas: vec![0.5, 1.5],
            width: Some(0.02),
            config: IntegratorConfig::default(),
            max_bisections: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThresholdReport {
    /// All runs sorted by α.
    pub runs: Vec<ClassifiedRun>,
    /// Largest decaying α and smallest blowing-up α above it.
    pub bracket: Option<(f64, f64)>,
    /// Whether runs that were neither decay nor blow-up lie inside the bracket.
    pub undecided_inside: bool,
}

impl ThresholdReport {
    pub fn width(&self) -> Option<f64> {
        self.bracket.map(|(lo, hi)| hi - lo)
    }

    fn bracket_from(runs: &[ClassifiedRun]) -> Option<(f64, f64)> {
        let lo = runs
            .iter()
            .filter(|r| r.outcome.is_decay())
            .map(|r| r.parameter)
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = runs
            .iter()
            .filter(|r| r.outcome.is_blow_up() && r.parameter > lo)
            .map(|r| r.parameter)
            .fold(f64::INFINITY, f64::min);
        (lo.is_finite() && hi.is_finite()).then_some((lo, hi))
    }
}

/// Classifies runs from `α·(U,V)` and bisects between the largest decaying
/// and the smallest blowing-up α.
///
/// A midpoint that neither decays nor blows up ends the bisection; the
/// reported bracket then keeps it inside.
pub fn threshold_experiment(model: &Model, eq: &Equilibrium, opts: &ThresholdOptions) -> Result<ThresholdReport, LabError> {
    if model.lambda() != 0.0 {
        return Err(LabError::Precondition("threshold experiment needs λ = 0".into()));
    }
    if !(eq.residual_norm <= STEADY_TOL) || eq.pair.len() != model.len() {
        return Err(LabError::Precondition(format!(
            "equilibrium residual {:e} above {STEADY_TOL:e} or wrong grid",
            eq.residual_norm
        )));
    }
    let mut runs: Vec<ClassifiedRun> = opts
        .alphas
        .par_iter()
        .map(|&a| run_scaled(model, &eq.pair, a, &opts.config))
        .collect::<Result<_, _>>()?;
    let sort = |runs: &mut Vec<ClassifiedRun>| runs.sort_by(|a, b| a.parameter.total_cmp(&b.parameter));
    sort(&mut runs);
    let mut undecided_inside = false;
    if let Some(width) = opts.width {
        for _ in 0..opts.max_bisections {
            let Some((lo, hi)) = ThresholdReport::bracket_from(&runs) else { break };
            if hi - lo <= width {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let r = run_scaled(model, &eq.pair, mid, &opts.config)?;
            let decided = r.outcome.is_decay() || r.outcome.is_blow_up();
            runs.push(r);
            if !decided {
                undecided_inside = true;
                break;
            }
        }
        sort(&mut runs);
    }
    let bracket = ThresholdReport::bracket_from(&runs);
    if let Some((lo, hi)) = bracket {
        undecided_inside |= runs
            .iter()
            .any(|r| r.parameter > lo && r.parameter < hi && !(r.outcome.is_decay() || r.outcome.is_blow_up()));
    }
    Ok(ThresholdReport {
        runs,
        bracket,
        undecided_inside,
    })
}

#[derive(Debug, Clone)]
pub struct LambdaStarReport {
    pub search: LambdaStar,
    /// `0.5·λ_lo`, run from zero.
    pub below: ClassifiedRun,
    /// Minimal solution at `below.parameter` from monotone iteration.
    pub minimal: Equilibrium,
    /// `‖final − minimal‖_∞ / ‖minimal‖_∞` when `below` reached a steady state.
    pub distance_to_minimal: Option<f64>,
    /// `2·λ_hi`, run from zero.
    pub above: ClassifiedRun,
}

/// Brackets the extremal forcing scale and checks the dynamics on both sides.
pub fn lambda_star_experiment(
    model: &Model,
    bracket: (f64, f64),
    rel_tol: f64,
    config: &IntegratorConfig,
) -> Result<LambdaStarReport, LabError> {
    let mono = MonotoneOptions::default();
    let search = lambda_star(model, bracket, rel_tol, &mono)?;
    let lam_below = 0.5 * search.bracket.0;
    let lam_above = 2.0 * search.bracket.1;
    let zero = FieldPair::zeros(model.len());
    let below_model = model.with_lambda(lam_below);
    let above_model = model.with_lambda(lam_above);
    let (below, above) = rayon::join(
        || -> Result<_, LabError> {
            let run = evolve(&below_model, &zero, config)?;
            let (minimal, _) = solve_monotone(&below_model, &zero, &mono)?;
            Ok((run, minimal))
        },
        || evolve(&above_model, &zero, config),
    );
    let (below, minimal) = below?;
    let above = above?;
    let distance_to_minimal = match &below.outcome {
        Outcome::SteadyConvergence { limit, .. } => Some(limit.minus(&minimal.pair).sup_norm() / minimal.sup_norm()),
        _ => None,
    };
    Ok(LambdaStarReport {
        search,
        below: ClassifiedRun {
            parameter: lam_below,
            outcome: below.outcome,
            steps: below.steps,
        },
        minimal,
        distance_to_minimal,
        above: ClassifiedRun {
            parameter: lam_above,
            outcome: above.outcome,
            steps: above.steps,
        },
    })
}

#[derive(Debug, Clone)]
pub struct RobinReport {
    pub beta: f64,
    pub equilibrium: Option<Equilibrium>,
    /// Why the equilibrium search failed, when it did.
    pub skipped: Option<String>,
    /// `|U′(R) + βU(R)|` and `|V′(R) + βV(R)|` of the radial oracle, relative
    /// to its sup norm.
    pub oracle_boundary_residual: Option<f64>,
    /// Relative sup-norm difference between the discrete and oracle solutions.
    pub oracle_sup_error: Option<f64>,
    /// Scaled residual of the discrete boundary rows.
    pub boundary_row_residual: Option<f64>,
    pub threshold: Option<ThresholdReport>,
}

/// Threshold runs against the Robin equilibrium.
pub fn robin_experiment(model: &Model, opts: &ThresholdOptions) -> Result<RobinReport, LabError> {
    let BoundarySpec::Robin { beta } = model.spec().boundary else {
        return Err(LabError::Precondition("Robin experiment needs a Robin boundary".into()));
    };
    let mut report = RobinReport {
        beta,
        equilibrium: None,
        skipped: None,
        oracle_boundary_residual: None,
        oracle_sup_error: None,
        boundary_row_residual: None,
        threshold: None,
    };
    let eq = match solve_seeded(model, &[], &NewtonOptions::default()) {
        Ok(eq) => eq,
        Err(e) => {
            report.skipped = Some(e.to_string());
            return Ok(report);
        }
    };
    report.boundary_row_residual = Some(boundary_row_residual(model, &eq.pair));
    if let Geometry::RadialBall { dimension, radius } = model.spec().domain.geometry {
        if let Ok(sol) = shooting_oracle(model.spec().exponents, dimension, radius, model.spec().boundary, &ShootingOptions::default()) {
            let [u, du, v, dv] = sol.boundary_values;
            let bc = (du + beta * u).abs().max((dv + beta * v).abs());
            report.oracle_boundary_residual = Some(bc / sol.sup_norm());
            report.oracle_sup_error = Some((eq.sup_norm() - sol.sup_norm()).abs() / sol.sup_norm());
        }
    }
    report.threshold = Some(threshold_experiment(model, &eq, opts)?);
    report.equilibrium = Some(eq);
    Ok(report)
}

/// Largest residual over the boundary rows, relative to `max(1, sup)`.
pub fn boundary_row_residual(model: &Model, pair: &FieldPair) -> f64 {
    let r = residual(model, pair);
    let grid = model.grid();
    let worst = (0..grid.len())
        .filter(|&i| grid.is_boundary_node(i))
        .map(|i| r.u[i].abs().max(r.v[i].abs()))
        .fold(0.0, f64::max);
    worst / pair.sup_norm().max(1.0)
}
