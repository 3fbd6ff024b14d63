//! Equilibria of `-Δu = v^p + λf`, `-Δv = u^q + λg`.

mod continuation;
mod monotone;
mod newton;
mod ode;
mod shooting;

use thiserror::Error;

use crate::discrete::{DiscreteError, FieldPair, Model};
use crate::problem::ProblemSpec;

pub use continuation::{lambda_star, monotone_converges, LambdaStar, SpotCheck};
pub use monotone::{solve_monotone, MonotoneOptions, MonotoneStats, ShiftPolicy};
pub use newton::{
    amplitude_prescan, first_eigenvector, scaled_merit, solve_newton, solve_seeded, NewtonOptions,
    Prescan,
};
pub use ode::{Dopri5, OdeError};
pub use shooting::{shooting_oracle, ShootingOptions, ShootingSolution};

/// Default equilibrium tolerance on [`residual_norm`].
pub const STEADY_TOL: f64 = 1e-10;

/// Sign-preserving power `φ_s(x) = |x|^{s-1} x`.
#[inline]
pub fn power(x: f64, s: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(s - 1.0) * x
    }
}

/// `φ_s′(x) = s |x|^{s-1}`.
#[inline]
pub fn power_slope(x: f64, s: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        s * x.abs().powf(s - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Newton,
    Monotone,
    Shooting,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Newton => "newton",
            Method::Monotone => "monotone",
            Method::Shooting => "shooting",
        })
    }
}

/// A positive discrete steady state.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub pair: FieldPair,
    /// [`residual_norm`] at `pair`.
    pub residual_norm: f64,
    pub spec: ProblemSpec,
    pub method: Method,
    pub iterations: usize,
}

impl Equilibrium {
    pub fn sup_norm(&self) -> f64 {
        self.pair.sup_norm()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EllipticError {
    #[error("no convergence after {iterations} iterations (best residual {best_residual:e})")]
    MaxIterations { iterations: usize, best_residual: f64 },
    #[error("singular Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("converged to known solution #{index} despite deflation")]
    ConvergedToKnown { index: usize },
    #[error("line search failed at iteration {iteration} (residual {residual:e})")]
    LineSearch { iteration: usize, residual: f64 },
    #[error("converged to a solution that is not positive (min value {min_value:e}, residual {residual:e})")]
    NonPositive {
        min_value: f64,
        residual: f64,
        pair: FieldPair,
    },
    #[error("monotone iteration diverged after {iterations} iterations (sup {sup:e})")]
    Divergence { iterations: usize, sup: f64 },
    #[error("monotone iteration stagnated after {iterations} iterations (residual {residual:e})")]
    Stagnation { iterations: usize, residual: f64 },
    #[error("monotone iteration lost monotonicity at iteration {iteration} (drop {drop:e})")]
    NotMonotone { iteration: usize, drop: f64 },
    #[error("bracket does not straddle the threshold (lower converges: {lo_converges}, upper converges: {hi_converges})")]
    InvalidBracket { lo_converges: bool, hi_converges: bool },
    #[error("shooting root find failed (boundary residual {residual:e})")]
    RootFindFailure { residual: f64 },
    #[error("operation needs a radial ball geometry")]
    NotRadial,
    #[error(transparent)]
    Discrete(#[from] DiscreteError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// `(A u − φ_p(v) − λf, A v − φ_q(u) − λg)`.
pub fn residual(model: &Model, pair: &FieldPair) -> FieldPair {
    let (p, q, lambda) = (model.p(), model.q(), model.lambda());
    let mut ru = model.op().apply(&pair.u);
    let mut rv = model.op().apply(&pair.v);
    for i in 0..ru.len() {
        ru[i] -= power(pair.v[i], p) + lambda * model.f()[i];
        rv[i] -= power(pair.u[i], q) + lambda * model.g()[i];
    }
    FieldPair { u: ru, v: rv }
}

/// The source pair `(φ_p(v) + λf, φ_q(u) + λg)`.
pub fn source(model: &Model, pair: &FieldPair) -> FieldPair {
    let (p, q, lambda) = (model.p(), model.q(), model.lambda());
    let u = (0..pair.len())
        .map(|i| power(pair.v[i], p) + lambda * model.f()[i])
        .collect();
    let v = (0..pair.len())
        .map(|i| power(pair.u[i], q) + lambda * model.g()[i])
        .collect();
    FieldPair { u, v }
}

/// Equilibrium residual in scaled units: `‖R‖_w / max(1, ‖S‖_w)` with `S`
/// the [`source`] pair.
pub fn residual_norm(model: &Model, pair: &FieldPair) -> f64 {
    let grid = model.grid();
    let r = residual(model, pair).norm(grid);
    let s = source(model, pair).norm(grid);
    r / s.max(1.0)
}

/// Interior positivity: every degree of freedom of both components is `> 0`.
pub fn is_positive(pair: &FieldPair) -> bool {
    pair.u.iter().chain(&pair.v).all(|&x| x > 0.0)
}
