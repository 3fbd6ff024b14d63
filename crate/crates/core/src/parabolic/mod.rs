//! Semi-implicit time stepping and run classification.

use std::ops::ControlFlow;

use thiserror::Error;

use crate::analysis::TrajectoryRecord;
use crate::discrete::{solve_shifted_from, DiscreteError, FieldPair, Model};
use crate::elliptic::power;
use crate::problem::ExponentPair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt0: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Reaction safety factor `η`.
    pub eta: f64,
    pub m_blow: f64,
    pub eps_decay: f64,
    pub eps_steady: f64,
    pub t_max: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt0: 1e-3,
            dt_min: 1e-10,
            dt_max: 1e-2,
            eta: 0.1,
            m_blow: 1e6,
            eps_decay: 1e-8,
            eps_steady: 1e-8,
            t_max: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParabolicError {
    #[error("invalid integrator configuration: {0}")]
    Config(String),
    #[error("initial data must be finite and nonnegative")]
    InvalidInitial,
    #[error("non-finite state at t = {t} after {steps} steps")]
    NonFinite { t: f64, steps: usize },
    #[error(transparent)]
    Discrete(#[from] DiscreteError),
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), ParabolicError> {
        let ok = self.dt_min > 0.0
            && self.dt_min <= self.dt0
            && self.dt0 <= self.dt_max
            && self.eta > 0.0
            && self.eta < 1.0
            && self.m_blow > 1.0
            && self.eps_decay > 0.0
            && self.eps_decay < 1.0
            && self.eps_steady > 0.0
            && self.t_max > 0.0;
        if ok {
            Ok(())
        } else {
            Err(ParabolicError::Config(format!("{self:?}")))
        }
    }

    /// Every step-size control scaled by `factor`: `dt0`, `dt_min`, `dt_max`
    /// and `η`. With `factor = 1/2` each step of the adaptive sequence is
    /// halved, which is what a time-refinement study needs; halving `dt0`
    /// alone would leave the reaction-limited steps unchanged.
    pub fn refined(&self, factor: f64) -> Self {
        IntegratorConfig {
            dt0: self.dt0 * factor,
            dt_min: self.dt_min * factor,
            dt_max: self.dt_max * factor,
            eta: self.eta * factor,
            ..*self
        }
    }
}

/// Classification of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Decay { t: f64 },
    BlowUp { t_est: f64, sup_at_stop: f64 },
    SteadyConvergence { t: f64, limit: FieldPair },
    Undecided { t_reached: f64 },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Decay { .. } => "decay",
            Outcome::BlowUp { .. } => "blowup",
            Outcome::SteadyConvergence { .. } => "steady",
            Outcome::Undecided { .. } => "undecided",
        }
    }

    pub fn is_decay(&self) -> bool {
        matches!(self, Outcome::Decay { .. })
    }

    pub fn is_blow_up(&self) -> bool {
        matches!(self, Outcome::BlowUp { .. })
    }

    pub fn is_undecided(&self) -> bool {
        matches!(self, Outcome::Undecided { .. })
    }

    /// Time at which the run stopped.
    pub fn t_end(&self) -> f64 {
        match *self {
            Outcome::Decay { t } => t,
            Outcome::BlowUp { t_est, .. } => t_est,
            Outcome::SteadyConvergence { t, .. } => t,
            Outcome::Undecided { t_reached } => t_reached,
        }
    }
}

/// One semi-implicit step: `(I + dt A) u⁺ = u + dt (φ_p(v) + λf)` and
/// likewise for `v`.
pub fn step(model: &Model, state: &FieldPair, dt: f64) -> Result<FieldPair, ParabolicError> {
    let n = model.len();
    state.check_len(n)?;
    let (p, q, lambda) = (model.p(), model.q(), model.lambda());
    let inv = 1.0 / dt;
    let rhs_u: Vec<f64> = (0..n)
        .map(|i| inv * state.u[i] + power(state.v[i], p) + lambda * model.f()[i])
        .collect();
    let rhs_v: Vec<f64> = (0..n)
        .map(|i| inv * state.v[i] + power(state.u[i], q) + lambda * model.g()[i])
        .collect();
    Ok(FieldPair {
        u: solve_shifted_from(model.op(), inv, &rhs_u, Some(&state.u))?,
        v: solve_shifted_from(model.op(), inv, &rhs_v, Some(&state.v))?,
    })
}

/// Reaction-limited step `clamp(η / ρ, dt_min, dt_max)` with
/// `ρ = max(p‖v‖^{p−1}, q‖u‖^{q−1}, η/dt_max)`, so a state with negligible
/// reaction takes the full `dt_max`.
pub fn adapt_dt(state: &FieldPair, e: ExponentPair, config: &IntegratorConfig) -> f64 {
    let rate = (e.p * state.sup_v().powf(e.p - 1.0))
        .max(e.q * state.sup_u().powf(e.q - 1.0))
        .max(config.eta / config.dt_max);
    (config.eta / rate).clamp(config.dt_min, config.dt_max)
}

/// What the observer sees after each accepted step.
#[derive(Debug)]
pub struct StepInfo<'a> {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub previous: &'a FieldPair,
    pub state: &'a FieldPair,
}

/// Result of [`evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub outcome: Outcome,
    pub record: TrajectoryRecord,
    pub final_state: FieldPair,
    pub steps: usize,
}

fn check_initial(initial: &FieldPair) -> Result<(), ParabolicError> {
    if initial.is_finite() && initial.min_value() >= 0.0 {
        Ok(())
    } else {
        Err(ParabolicError::InvalidInitial)
    }
}

/// Tracks the classification tests for one trajectory.
struct Classifier {
    initial_sup: f64,
    lambda: f64,
}

impl Classifier {
    fn classify(
        &self,
        config: &IntegratorConfig,
        t: f64,
        dt: f64,
        previous: &FieldPair,
        state: &FieldPair,
    ) -> Option<Outcome> {
        let sup = state.sup_norm();
        if sup >= config.m_blow && dt <= config.dt_min {
            return Some(Outcome::BlowUp {
                t_est: t,
                sup_at_stop: sup,
            });
        }
        if self.lambda == 0.0 && sup <= config.eps_decay * self.initial_sup {
            return Some(Outcome::Decay { t });
        }
        if self.lambda > 0.0 && sup > 0.0 {
            let change = state.minus(previous).sup_norm() / (dt * sup);
            if change <= config.eps_steady {
                return Some(Outcome::SteadyConvergence {
                    t,
                    limit: state.clone(),
                });
            }
        }
        None
    }
}

/// Evolves from `initial` until the run is classified or `t_max` is reached.
pub fn evolve(model: &Model, initial: &FieldPair, config: &IntegratorConfig) -> Result<Evolution, ParabolicError> {
    evolve_observed(model, initial, config, |_| ControlFlow::Continue(()))
}

/// [`evolve`] with a callback after each accepted step; returning
/// `ControlFlow::Break` stops the run as `Undecided`.
pub fn evolve_observed(
    model: &Model,
    initial: &FieldPair,
    config: &IntegratorConfig,
    mut observer: impl FnMut(&StepInfo<'_>) -> ControlFlow<()>,
) -> Result<Evolution, ParabolicError> {
    config.validate()?;
    initial.check_len(model.len())?;
    check_initial(initial)?;
    let e = model.spec().exponents;
    let mut record = TrajectoryRecord::new(model);
    record.push(model, 0.0, 0.0, initial);
    let classifier = Classifier {
        initial_sup: initial.sup_norm(),
        lambda: model.lambda(),
    };
    if model.lambda() == 0.0 && classifier.initial_sup == 0.0 {
        return Ok(Evolution {
            outcome: Outcome::Decay { t: 0.0 },
            record,
            final_state: initial.clone(),
            steps: 0,
        });
    }
    let mut state = initial.clone();
    let mut t = 0.0;
    let mut steps = 0;
    let mut dt = config.dt0.min(adapt_dt(&state, e, config));
    loop {
        let dt_step = dt.min(config.t_max - t).max(config.dt_min);
        let next = step(model, &state, dt_step)?;
        steps += 1;
        if !next.is_finite() {
            return Err(ParabolicError::NonFinite { t, steps });
        }
        t += dt_step;
        record.push(model, t, dt_step, &next);
        let info = StepInfo {
            step: steps,
            t,
            dt: dt_step,
            previous: &state,
            state: &next,
        };
        let flow = observer(&info);
        let verdict = classifier.classify(config, t, dt_step, &state, &next);
        state = next;
        if let Some(outcome) = verdict {
            return Ok(Evolution {
                outcome,
                record,
                final_state: state,
                steps,
            });
        }
        if flow.is_break() || t >= config.t_max {
            return Ok(Evolution {
                outcome: Outcome::Undecided { t_reached: t },
                record,
                final_state: state,
                steps,
            });
        }
        dt = adapt_dt(&state, e, config);
    }
}

/// First nodewise violation of `low ≤ high + tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingViolation {
    pub step: usize,
    pub t: f64,
    pub node: usize,
    /// 0 for `u`, 1 for `v`.
    pub component: usize,
    /// `low − high` at the offending node.
    pub excess: f64,
}

#[derive(Debug, Clone)]
pub struct OrderingReport {
    pub steps: usize,
    pub t_end: f64,
    pub violation: Option<OrderingViolation>,
    pub low_outcome: Option<Outcome>,
    pub high_outcome: Option<Outcome>,
    /// Smallest `min(high − low)` seen over all steps.
    pub min_gap: f64,
}

fn first_violation(low: &FieldPair, high: &FieldPair, tol: f64) -> Option<(usize, usize, f64)> {
    for (c, (a, b)) in [(&low.u, &high.u), (&low.v, &high.v)].into_iter().enumerate() {
        for i in 0..a.len() {
            if a[i] > b[i] + tol {
                return Some((i, c, a[i] - b[i]));
            }
        }
    }
    None
}

fn min_gap(low: &FieldPair, high: &FieldPair) -> f64 {
    high.minus(low).min_value()
}

/// Co-evolves two ordered states with a shared step sequence and reports
/// the first step where `low ≤ high + tol_order` fails.
///
/// The shared step is the smaller of the two adaptive steps. The run ends
/// when both states are classified, when one of them blows up, or at
/// `t_max`.
pub fn evolve_ordered(
    model: &Model,
    low: &FieldPair,
    high: &FieldPair,
    config: &IntegratorConfig,
    tol_order: f64,
) -> Result<OrderingReport, ParabolicError> {
    config.validate()?;
    low.check_len(model.len())?;
    high.check_len(model.len())?;
    check_initial(low)?;
    check_initial(high)?;
    let e = model.spec().exponents;
    let mut report = OrderingReport {
        steps: 0,
        t_end: 0.0,
        violation: None,
        low_outcome: None,
        high_outcome: None,
        min_gap: min_gap(low, high),
    };
    if let Some((node, component, excess)) = first_violation(low, high, tol_order) {
        report.violation = Some(OrderingViolation {
            step: 0,
            t: 0.0,
            node,
            component,
            excess,
        });
        return Ok(report);
    }
    let cl_low = Classifier {
        initial_sup: low.sup_norm(),
        lambda: model.lambda(),
    };
    let cl_high = Classifier {
        initial_sup: high.sup_norm(),
        lambda: model.lambda(),
    };
    let (mut a, mut b) = (low.clone(), high.clone());
    let mut t = 0.0;
    let mut dt = config
        .dt0
        .min(adapt_dt(&a, e, config))
        .min(adapt_dt(&b, e, config));
    while t < config.t_max {
        let dt_step = dt.min(config.t_max - t).max(config.dt_min);
        let na = step(model, &a, dt_step)?;
        let nb = step(model, &b, dt_step)?;
        report.steps += 1;
        t += dt_step;
        if !na.is_finite() || !nb.is_finite() {
            return Err(ParabolicError::NonFinite { t, steps: report.steps });
        }
        report.min_gap = report.min_gap.min(min_gap(&na, &nb));
        if let Some((node, component, excess)) = first_violation(&na, &nb, tol_order) {
            report.violation = Some(OrderingViolation {
                step: report.steps,
                t,
                node,
                component,
                excess,
            });
            report.t_end = t;
            return Ok(report);
        }
        if report.low_outcome.is_none() {
            report.low_outcome = cl_low.classify(config, t, dt_step, &a, &na);
        }
        if report.high_outcome.is_none() {
            report.high_outcome = cl_high.classify(config, t, dt_step, &b, &nb);
        }
        a = na;
        b = nb;
        let blown = |o: &Option<Outcome>| matches!(o, Some(Outcome::BlowUp { .. }));
        if (report.low_outcome.is_some() && report.high_outcome.is_some())
            || blown(&report.low_outcome)
            || blown(&report.high_outcome)
        {
            break;
        }
        dt = adapt_dt(&a, e, config).min(adapt_dt(&b, e, config));
    }
    report.t_end = t;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{first_eigenvector, solve_seeded, NewtonOptions};
    use crate::problem::{DomainSpec, ForcingSpec, ProblemSpec};

    fn disk(res: usize) -> Model {
        let spec = ProblemSpec::homogeneous(ExponentPair::new(3.0, 3.0).unwrap(), DomainSpec::unit_disk());
        Model::new(spec, res).unwrap()
    }

    #[test]
    fn zero_state_is_invariant() {
        let m = disk(32);
        let z = FieldPair::zeros(m.len());
        let next = step(&m, &z, 1e-3).unwrap();
        assert!(next.u.iter().chain(&next.v).all(|&x| x == 0.0));
        let run = evolve(&m, &z, &IntegratorConfig::default()).unwrap();
        assert_eq!(run.outcome, Outcome::Decay { t: 0.0 });
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let m = disk(64);
        let eq = solve_seeded(&m, &[], &NewtonOptions::default()).unwrap();
        let next = step(&m, &eq.pair, 1e-3).unwrap();
        let change = next.minus(&eq.pair).sup_norm() / eq.sup_norm();
        assert!(change < 1e-11, "{change}");
    }

    #[test]
    fn half_steps_agree_to_second_order() {
        // Smooth data: a multiple of the first eigenvector, so the stiff
        // modes that backward Euler damps at first order are absent.
        let m = disk(64);
        let (_, phi1) = first_eigenvector(&m).unwrap();
        let x0 = FieldPair::diagonal(phi1.iter().map(|x| 2.0 * x).collect());
        let mut prev = f64::NAN;
        for dt in [4e-3, 2e-3, 1e-3] {
            let one = step(&m, &x0, dt).unwrap();
            let two = step(&m, &step(&m, &x0, dt / 2.0).unwrap(), dt / 2.0).unwrap();
            let d = one.minus(&two).sup_norm();
            if prev.is_finite() {
                let ratio = prev / d;
                assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
            }
            prev = d;
        }
    }

    #[test]
    fn adapt_dt_examples() {
        let e = ExponentPair::new(3.0, 3.0).unwrap();
        let c = IntegratorConfig::default();
        assert_eq!(adapt_dt(&FieldPair::zeros(4), e, &c), c.dt_max);
        let sat = (c.eta / c.dt_min / 3.0).sqrt();
        let s = FieldPair::diagonal(vec![sat; 4]);
        assert!((adapt_dt(&s, e, &c) - c.dt_min).abs() < 1e-20);
        let a = adapt_dt(&FieldPair::diagonal(vec![10.0; 4]), e, &c);
        let b = adapt_dt(&FieldPair::diagonal(vec![20.0; 4]), e, &c);
        assert!((a / b - 4.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        let bad = IntegratorConfig {
            dt0: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let r = IntegratorConfig::default().refined(0.5);
        assert!(r.validate().is_ok());
        assert_eq!(r.dt0, 5e-4);
    }

    #[test]
    fn negative_initial_data_rejected() {
        let m = disk(16);
        let mut x = FieldPair::zeros(m.len());
        x.u[0] = -1.0;
        assert_eq!(evolve(&m, &x, &Default::default()).unwrap_err(), ParabolicError::InvalidInitial);
    }

    #[test]
    fn ordered_with_zero_low_state() {
        let m = disk(32);
        let high = FieldPair::diagonal(m.grid().sample_radial(|r| 1.0 - r * r));
        let rep = evolve_ordered(&m, &FieldPair::zeros(m.len()), &high, &Default::default(), 0.0).unwrap();
        assert!(rep.violation.is_none());
        assert!(rep.min_gap >= 0.0);
    }

    #[test]
    fn equal_states_stay_equal() {
        let m = disk(32);
        let x = FieldPair::diagonal(m.grid().sample_radial(|r| 1.5 * (1.0 - r * r)));
        let rep = evolve_ordered(&m, &x, &x, &Default::default(), 0.0).unwrap();
        assert!(rep.violation.is_none());
        assert_eq!(rep.min_gap, 0.0);
    }

    #[test]
    fn forced_run_from_zero_reaches_steady_state() {
        let spec = ProblemSpec::homogeneous(ExponentPair::new(2.0, 2.0).unwrap(), DomainSpec::unit_disk())
            .with_forcing(ForcingSpec::uniform(0.5));
        let m = Model::new(spec, 32).unwrap();
        let run = evolve(&m, &FieldPair::zeros(m.len()), &Default::default()).unwrap();
        assert!(matches!(run.outcome, Outcome::SteadyConvergence { .. }), "{:?}", run.outcome.label());
    }
}
