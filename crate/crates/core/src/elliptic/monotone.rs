use crate::discrete::{solve_shifted, FieldPair, Model};

use super::{power, residual_norm, EllipticError, Equilibrium, Method, STEADY_TOL};

/// Shift `σ` in `(σI + A) u_{k+1} = σ u_k + φ_p(v_k) + λf`.
///
/// The cross-coupled update is order preserving already with `σ = 0`,
/// because `A⁻¹ ≥ 0` and `φ_p`, `φ_q` are nondecreasing. `MaxSlope` uses
/// the largest nonlinearity slope over the current iterate instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftPolicy {
    #[default]
    None,
    MaxSlope,
}

#[derive(Debug, Clone, Copy)]
pub struct MonotoneOptions {
    pub steady_tol: f64,
    pub max_iter: usize,
    /// Divergence once the sup norm exceeds this.
    pub m_big: f64,
    pub shift: ShiftPolicy,
    /// Allowed per-iterate decrease, relative to `max(1, sup)`.
    pub monotone_slack: f64,
}

impl Default for MonotoneOptions {
    fn default() -> Self {
        MonotoneOptions {
            steady_tol: STEADY_TOL,
            max_iter: 10_000,
            m_big: 1e8,
            shift: ShiftPolicy::None,
            monotone_slack: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MonotoneStats {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// `‖x_{k+1} − x_k‖_∞` per iteration.
    pub increments: Vec<f64>,
}

/// Monotone iteration upward from a sub-solution.
///
/// Returns the limit (the minimal solution above `from_below`) with the
/// iteration history. Each iterate is checked to dominate its predecessor.
pub fn solve_monotone(
    model: &Model,
    from_below: &FieldPair,
    opts: &MonotoneOptions,
) -> Result<(Equilibrium, MonotoneStats), EllipticError> {
    let n = model.len();
    from_below.check_len(n)?;
    let (p, q, lambda) = (model.p(), model.q(), model.lambda());
    let (f, g) = (model.f(), model.g());
    let mut x = from_below.clone();
    let mut stats = MonotoneStats::default();
    loop {
        let rn = residual_norm(model, &x);
        stats.residual_history.push(rn);
        if rn <= opts.steady_tol {
            return Ok((
                Equilibrium {
                    pair: x,
                    residual_norm: rn,
                    spec: *model.spec(),
                    method: Method::Monotone,
                    iterations: stats.iterations,
                },
                stats,
            ));
        }
        let sup = x.sup_norm();
        if !(sup <= opts.m_big) {
            return Err(EllipticError::Divergence {
                iterations: stats.iterations,
                sup,
            });
        }
        if stats.iterations >= opts.max_iter {
            let k = stats.increments.len();
            let recent = stats.increments[k - 1];
            let earlier = stats.increments[k - 1 - k / 10];
            return Err(if recent > earlier {
                EllipticError::Divergence {
                    iterations: stats.iterations,
                    sup,
                }
            } else {
                EllipticError::Stagnation {
                    iterations: stats.iterations,
                    residual: rn,
                }
            });
        }
        let sigma = match opts.shift {
            ShiftPolicy::None => 0.0,
            ShiftPolicy::MaxSlope => {
                let su = x.sup_u();
                let sv = x.sup_v();
                (p * sv.powf(p - 1.0)).max(q * su.powf(q - 1.0))
            }
        };
        let rhs_u: Vec<f64> = (0..n)
            .map(|i| sigma * x.u[i] + power(x.v[i], p) + lambda * f[i])
            .collect();
        let rhs_v: Vec<f64> = (0..n)
            .map(|i| sigma * x.v[i] + power(x.u[i], q) + lambda * g[i])
            .collect();
        let next = FieldPair {
            u: solve_shifted(model.op(), sigma, &rhs_u)?,
            v: solve_shifted(model.op(), sigma, &rhs_v)?,
        };
        let slack = opts.monotone_slack * next.sup_norm().max(1.0);
        let diff = next.minus(&x);
        let drop = -diff.min_value();
        if drop > slack {
            return Err(EllipticError::NotMonotone {
                iteration: stats.iterations,
                drop,
            });
        }
        stats.increments.push(diff.sup_norm());
        stats.iterations += 1;
        x = next;
    }
}
