//! Runtime diagnostics: the product and energy functionals along a flow,
//! the integral identities between equilibria and the scalar inequality
//! used to close the blow-up argument.

mod identity;
mod record;

use thiserror::Error;

use crate::discrete::{dirichlet_energy, FieldPair, Grid, Model};
use crate::problem::{gamma, ExponentPair};

pub use identity::{check_duality_identity, evaluate_identity, IdentityCheck, IdentityForm};
pub use record::{energy_monotonicity_violation, Row, TrajectoryRecord};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("argument out of range: {0}")]
    Domain(String),
    #[error("pair {which} is not an equilibrium (residual {residual:e} above {tol:e})")]
    NotEquilibrium { which: usize, residual: f64, tol: f64 },
}

/// `φ = ∫ u v`.
pub fn phi(grid: &Grid, pair: &FieldPair) -> f64 {
    grid.dot(&pair.u, &pair.v)
}

/// `∫ |u|^{q+1}` and `∫ |v|^{p+1}`.
fn power_integrals(grid: &Grid, pair: &FieldPair, e: ExponentPair) -> (f64, f64) {
    let iu: f64 = grid
        .weights()
        .iter()
        .zip(&pair.u)
        .map(|(w, u)| w * u.abs().powf(e.q + 1.0))
        .sum();
    let iv: f64 = grid
        .weights()
        .iter()
        .zip(&pair.v)
        .map(|(w, v)| w * v.abs().powf(e.p + 1.0))
        .sum();
    (iu, iv)
}

/// `E = ⟨Au, v⟩_w − ∫|v|^{p+1}/(p+1) − ∫|u|^{q+1}/(q+1)`.
///
/// With Robin data `⟨Au, v⟩_w` already carries the boundary term.
pub fn energy(grid: &Grid, a: &crate::discrete::DiscreteLaplacian, pair: &FieldPair, e: ExponentPair) -> f64 {
    let (iu, iv) = power_integrals(grid, pair, e);
    dirichlet_energy(grid, a, &pair.u, &pair.v) - iv / (e.p + 1.0) - iu / (e.q + 1.0)
}

/// `T = ∫|u|^{q+1} + ∫|v|^{p+1}`.
pub fn big_t(grid: &Grid, pair: &FieldPair, e: ExponentPair) -> f64 {
    let (iu, iv) = power_integrals(grid, pair, e);
    iu + iv
}

/// Right side of the `dφ/dt` identity,
/// `−2E + (p−1)/(p+1) ∫|v|^{p+1} + (q−1)/(q+1) ∫|u|^{q+1}`,
/// plus `λ ∫(f v + g u)` for forced problems.
pub fn dphi_rhs(model: &Model, pair: &FieldPair) -> f64 {
    let grid = model.grid();
    let e = model.spec().exponents;
    let (iu, iv) = power_integrals(grid, pair, e);
    let mut out = -2.0 * energy(grid, model.op(), pair, e)
        + (e.p - 1.0) / (e.p + 1.0) * iv
        + (e.q - 1.0) / (e.q + 1.0) * iu;
    let lambda = model.lambda();
    if lambda != 0.0 {
        out += lambda * (grid.dot(model.f(), &pair.v) + grid.dot(model.g(), &pair.u));
    }
    out
}

/// Constant `C` in `dφ/dt ≥ −2E(0) + C φ^γ`.
///
/// Young's inequality with the conjugate exponents `(q+1)/γ`, `(p+1)/γ`,
/// Hölder on each term and the scalar inequality `x^a + y^a ≤ 2^{1−a}(x+y)^a`
/// give `φ ≤ K T^{1/γ}` with
/// `K = max(γ/(q+1), γ/(p+1)) |Ω|^{1−1/γ} 2^{1−1/γ}`; the identity then
/// yields `C = min((p−1)/(p+1), (q−1)/(q+1)) K^{−γ}`.
pub fn blowup_bound_constant(e: ExponentPair, volume: f64) -> f64 {
    let g = gamma(e);
    let k = (g / (e.q + 1.0)).max(g / (e.p + 1.0))
        * volume.powf(1.0 - 1.0 / g)
        * 2f64.powf(1.0 - 1.0 / g);
    let c = ((e.p - 1.0) / (e.p + 1.0)).min((e.q - 1.0) / (e.q + 1.0));
    c * k.powf(-g)
}

/// Both sides of `x^a + y^a ≤ 2^{1−a} (x+y)^a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerMean {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Slack used by [`power_mean_check`].
pub const POWER_MEAN_SLACK: f64 = 1e-12;

pub fn power_mean_check(x: f64, y: f64, a: f64) -> Result<PowerMean, AnalysisError> {
    if !(x > 0.0 && y > 0.0) {
        return Err(AnalysisError::Domain(format!("need x, y > 0, got x = {x}, y = {y}")));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(AnalysisError::Domain(format!("need 0 < a < 1, got {a}")));
    }
    let lhs = x.powf(a) + y.powf(a);
    let rhs = 2f64.powf(1.0 - a) * (x + y).powf(a);
    Ok(PowerMean {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + POWER_MEAN_SLACK),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::build_laplacian;
    use crate::problem::{BoundarySpec, DomainSpec, ProblemSpec};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn disk(res: usize) -> Model {
        let spec = ProblemSpec::homogeneous(ExponentPair::new(3.0, 3.0).unwrap(), DomainSpec::unit_disk());
        Model::new(spec, res).unwrap()
    }

    #[test]
    fn phi_examples() {
        let m = disk(256);
        let g = m.grid();
        assert_eq!(phi(g, &FieldPair::zeros(g.len())), 0.0);
        let r = Model::new(m.spec().with_boundary(BoundarySpec::Robin { beta: 1.0 }), 256).unwrap();
        let ones = FieldPair::diagonal(vec![1.0; r.len()]);
        assert!((phi(r.grid(), &ones) - PI).abs() < 1e-12);
        let para = FieldPair::diagonal(g.sample_radial(|r| 1.0 - r * r));
        assert!((phi(g, &para) - PI / 3.0).abs() < 1e-4);
    }

    #[test]
    fn big_t_of_ones() {
        let spec = ProblemSpec::homogeneous(ExponentPair::new(3.0, 3.0).unwrap(), DomainSpec::unit_disk())
            .with_boundary(BoundarySpec::Robin { beta: 1.0 });
        let m = Model::new(spec, 64).unwrap();
        let ones = FieldPair::diagonal(vec![1.0; m.len()]);
        assert!((big_t(m.grid(), &ones, m.spec().exponents) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn energy_of_zero() {
        let m = disk(32);
        let z = FieldPair::zeros(m.len());
        assert_eq!(energy(m.grid(), m.op(), &z, m.spec().exponents), 0.0);
        assert_eq!(dphi_rhs(&m, &z), 0.0);
    }

    #[test]
    fn robin_energy_includes_boundary_term() {
        // ⟨A1, 1⟩_w = β |∂Ω| for constants.
        let spec = ProblemSpec::homogeneous(ExponentPair::new(3.0, 3.0).unwrap(), DomainSpec::unit_disk())
            .with_boundary(BoundarySpec::Robin { beta: 2.0 });
        let m = Model::new(spec, 32).unwrap();
        let a = build_laplacian(m.grid());
        let ones = vec![1.0; m.len()];
        assert!((dirichlet_energy(m.grid(), &a, &ones, &ones) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn bound_constant_examples() {
        let e = ExponentPair::new(3.0, 3.0).unwrap();
        assert!((blowup_bound_constant(e, PI) - 1.0 / PI).abs() < 1e-15);
        let e = ExponentPair::new(2.0, 2.0).unwrap();
        // Symmetric case: K = (γ/(q+1)) (2|Ω|)^{1−1/γ}.
        let g = gamma(e);
        let k = g / 3.0 * (2.0 * 1.7f64).powf(1.0 - 1.0 / g);
        assert!((blowup_bound_constant(e, 1.7) - (1.0 / 3.0) * k.powf(-g)).abs() < 1e-15);
    }

    #[test]
    fn power_mean_examples() {
        let eq = power_mean_check(1.0, 1.0, 0.5).unwrap();
        assert!((eq.lhs - 2.0).abs() < 1e-14 && (eq.rhs - 2.0).abs() < 1e-14 && eq.holds);
        let r = power_mean_check(4.0, 1.0, 0.5).unwrap();
        assert_eq!(r.lhs, 3.0);
        assert!((r.rhs - 10f64.sqrt()).abs() < 1e-14);
        assert!(power_mean_check(0.0, 1.0, 0.5).is_err());
        assert!(power_mean_check(1.0, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn power_mean_never_violated(lx in -6.0f64..6.0, ly in -6.0f64..6.0, a in 1e-9f64..0.999_999_999) {
            let r = power_mean_check(10f64.powf(lx), 10f64.powf(ly), a).unwrap();
            prop_assert!(r.holds);
        }

        #[test]
        fn bound_constant_is_positive(p in 1.01f64..8.0, q in 1.01f64..8.0, vol in 0.01f64..100.0) {
            let c = blowup_bound_constant(ExponentPair::new(p, q).unwrap(), vol);
            prop_assert!(c > 0.0 && c.is_finite());
        }
    }
}
