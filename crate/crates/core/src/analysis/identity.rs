use crate::discrete::{FieldPair, Model};
use crate::elliptic::{power, power_slope, residual_norm};

use super::AnalysisError;

/// Which integral identity between two equilibria to evaluate.
#[derive(Debug, Clone)]
pub enum IdentityForm {
    /// `∫ g U (g^{q−1} − U^{q−1}) = ∫ h V (V^{p−1} − h^{p−1})` for
    /// `pair1 = (g, h)`, `pair2 = (U, V)`. For forced problems the right
    /// side gains `λ ∫ [f (h − V) + g_f (g − U)]`.
    Plain,
    /// The identity for the problem shifted by the minimal solution,
    /// `∫ U₁U₂ (G(U₂) − G(U₁)) = ∫ V₁V₂ (H(V₁) − H(V₂))` with
    /// `U_k = u_k − u_min`, `G(u) = ((u + u_min)^q − u_min^q)/u` and
    /// likewise `H` with `p`.
    Shifted { minimal: FieldPair },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs|`.
    pub gap: f64,
    /// Sum of the absolute values of the integrals entering both sides;
    /// the natural unit for `gap`.
    pub scale: f64,
}

/// Relative switch to the analytic limit of the shifted quotients.
const QUOTIENT_SWITCH: f64 = 1e-8;

/// `((u + m)^s − m^s)/u`, continuous at `u = 0` with value `s m^{s−1}`.
fn shifted_quotient(u: f64, m: f64, s: f64, scale: f64) -> f64 {
    if u.abs() < QUOTIENT_SWITCH * scale {
        return power_slope(m, s);
    }
    if m > 0.0 && u + m > 0.0 {
        // m^s (exp(s log1p(u/m)) − 1) avoids the cancellation in the
        // difference of powers.
        m.powf(s) * (s * (u / m).ln_1p()).exp_m1() / u
    } else {
        (power(u + m, s) - power(m, s)) / u
    }
}

/// Evaluates the identity without checking that the pairs are equilibria
/// (for negative controls).
pub fn evaluate_identity(model: &Model, pair1: &FieldPair, pair2: &FieldPair, form: &IdentityForm) -> IdentityCheck {
    let grid = model.grid();
    let (p, q) = (model.p(), model.q());
    let w = grid.weights();
    let n = grid.len();
    match form {
        IdentityForm::Plain => {
            let (g, h) = (&pair1.u, &pair1.v);
            let (uu, vv) = (&pair2.u, &pair2.v);
            let (mut l1, mut l2, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..n {
                l1 += w[i] * uu[i] * power(g[i], q);
                l2 += w[i] * g[i] * power(uu[i], q);
                r1 += w[i] * h[i] * power(vv[i], p);
                r2 += w[i] * vv[i] * power(h[i], p);
            }
            let lhs = l1 - l2;
            let mut rhs = r1 - r2;
            let mut scale = l1.abs() + l2.abs() + r1.abs() + r2.abs();
            let lambda = model.lambda();
            if lambda != 0.0 {
                let (f, gf) = (model.f(), model.g());
                let (mut c1, mut c2) = (0.0, 0.0);
                for i in 0..n {
                    c1 += w[i] * f[i] * (h[i] - vv[i]);
                    c2 += w[i] * gf[i] * (g[i] - uu[i]);
                }
                rhs += lambda * (c1 + c2);
                scale += lambda * (c1.abs() + c2.abs());
            }
            IdentityCheck {
                lhs,
                rhs,
                gap: (lhs - rhs).abs(),
                scale,
            }
        }
        IdentityForm::Shifted { minimal } => {
            let su = pair1.minus(minimal);
            let sv = pair2.minus(minimal);
            let scale_u = su.sup_u().max(sv.sup_u()).max(minimal.sup_u());
            let scale_v = su.sup_v().max(sv.sup_v()).max(minimal.sup_v());
            let (mut l1, mut l2, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0);
            for i in 0..n {
                let m_u = minimal.u[i];
                let m_v = minimal.v[i];
                let prod_u = w[i] * su.u[i] * sv.u[i];
                let prod_v = w[i] * su.v[i] * sv.v[i];
                l1 += prod_u * shifted_quotient(sv.u[i], m_u, q, scale_u);
                l2 += prod_u * shifted_quotient(su.u[i], m_u, q, scale_u);
                r1 += prod_v * shifted_quotient(su.v[i], m_v, p, scale_v);
                r2 += prod_v * shifted_quotient(sv.v[i], m_v, p, scale_v);
            }
            let lhs = l1 - l2;
            let rhs = r1 - r2;
            IdentityCheck {
                lhs,
                rhs,
                gap: (lhs - rhs).abs(),
                scale: l1.abs() + l2.abs() + r1.abs() + r2.abs(),
            }
        }
    }
}

/// Evaluates the identity after checking that both pairs are equilibria
/// of `model` with [`residual_norm`] at most `residual_tol`.
pub fn check_duality_identity(
    model: &Model,
    pair1: &FieldPair,
    pair2: &FieldPair,
    form: &IdentityForm,
    residual_tol: f64,
) -> Result<IdentityCheck, AnalysisError> {
    for (which, pair) in [(1, pair1), (2, pair2)] {
        let residual = residual_norm(model, pair);
        if !(residual <= residual_tol) {
            return Err(AnalysisError::NotEquilibrium {
                which,
                residual,
                tol: residual_tol,
            });
        }
    }
    Ok(evaluate_identity(model, pair1, pair2, form))
}
