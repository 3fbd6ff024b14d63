use crate::discrete::{FieldPair, Model};

use super::{solve_monotone, EllipticError, MonotoneOptions};

/// A predicate evaluation recorded during the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpotCheck {
    pub lambda: f64,
    pub converges: bool,
    /// Whether the answer agrees with the final bracket.
    pub consistent: bool,
}

#[derive(Debug, Clone)]
pub struct LambdaStar {
    /// Midpoint of the final bracket.
    pub estimate: f64,
    pub bracket: (f64, f64),
    /// Every `(λ, converges)` evaluation in order.
    pub evaluations: Vec<(f64, bool)>,
    pub spot_checks: Vec<SpotCheck>,
}

impl LambdaStar {
    pub fn relative_width(&self) -> f64 {
        (self.bracket.1 - self.bracket.0) / self.estimate
    }

    pub fn spot_checks_consistent(&self) -> bool {
        self.spot_checks.iter().all(|s| s.consistent)
    }
}

/// Whether monotone iteration from zero stays bounded at this `λ`.
///
/// Bounded nondecreasing iterates converge, so hitting the iteration cap
/// without divergence counts as convergence.
pub fn monotone_converges(model: &Model, lambda: f64, opts: &MonotoneOptions) -> Result<bool, EllipticError> {
    let m = model.with_lambda(lambda);
    match solve_monotone(&m, &FieldPair::zeros(m.len()), opts) {
        Ok(_) | Err(EllipticError::Stagnation { .. }) => Ok(true),
        Err(EllipticError::Divergence { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Bisection for the largest forcing scale admitting a solution, using
/// monotone-iteration convergence as the predicate.
///
/// Midpoints are geometric so that wide initial brackets shrink quickly;
/// the search stops when `hi − lo ≤ rel_tol · (lo + hi)/2`.
pub fn lambda_star(
    model: &Model,
    bracket: (f64, f64),
    rel_tol: f64,
    opts: &MonotoneOptions,
) -> Result<LambdaStar, EllipticError> {
    let (orig_lo, orig_hi) = bracket;
    assert!(orig_lo > 0.0 && orig_hi > orig_lo, "bracket must satisfy 0 < lo < hi");
    let mut evaluations = Vec::new();
    let mut eval = |lambda: f64| -> Result<bool, EllipticError> {
        let c = monotone_converges(model, lambda, opts)?;
        evaluations.push((lambda, c));
        Ok(c)
    };
    let lo_converges = eval(orig_lo)?;
    let hi_converges = eval(orig_hi)?;
    if !lo_converges || hi_converges {
        return Err(EllipticError::InvalidBracket {
            lo_converges,
            hi_converges,
        });
    }
    let (mut lo, mut hi) = (orig_lo, orig_hi);
    while hi - lo > rel_tol * 0.5 * (lo + hi) {
        let mid = (lo * hi).sqrt();
        if eval(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let below_1 = (orig_lo * lo).sqrt();
    let below_2 = (below_1 * lo).sqrt();
    let above = (hi * orig_hi).sqrt();
    let mut spot_checks = Vec::new();
    for (lambda, expect) in [(below_1, true), (below_2, true), (above, false)] {
        let converges = eval(lambda)?;
        spot_checks.push(SpotCheck {
            lambda,
            converges,
            consistent: converges == expect,
        });
    }
    Ok(LambdaStar {
        estimate: 0.5 * (lo + hi),
        bracket: (lo, hi),
        evaluations,
        spot_checks,
    })
}
