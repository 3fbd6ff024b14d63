use crate::discrete::linsolve::BandMatrix;
use crate::discrete::{solve_shifted, DiscreteError, FieldPair, Grid, Model};

use super::{
    is_positive, power_slope, residual, residual_norm, source, EllipticError, Equilibrium,
    Method, STEADY_TOL,
};

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub steady_tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Relative distance below which a limit counts as an already known
    /// solution.
    pub known_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            steady_tol: STEADY_TOL,
            max_iter: 50,
            max_halvings: 30,
            known_tol: 1e-6,
        }
    }
}

/// `Π_k (1/‖x − x_k‖²_w + 1)`.
fn deflation_factor(grid: &Grid, x: &FieldPair, known: &[FieldPair]) -> f64 {
    known
        .iter()
        .map(|k| {
            let d2 = x.minus(k).norm(grid).powi(2);
            1.0 / d2 + 1.0
        })
        .product()
}

/// Directional derivative of `log M` along `dir`.
fn deflation_log_slope(grid: &Grid, x: &FieldPair, dir: &FieldPair, known: &[FieldPair]) -> f64 {
    known
        .iter()
        .map(|k| {
            let e = x.minus(k);
            let d2 = e.norm(grid).powi(2);
            let proj = grid.dot(&e.u, &dir.u) + grid.dot(&e.v, &dir.v);
            -2.0 * proj / (d2 * (d2 + 1.0))
        })
        .sum()
}

fn merit(model: &Model, x: &FieldPair, known: &[FieldPair]) -> f64 {
    residual(model, x).norm(model.grid()) * deflation_factor(model.grid(), x, known)
}

/// Scale-free residual `‖R‖ / (‖A u‖ + ‖S‖)` times the deflation factor.
pub fn scaled_merit(model: &Model, x: &FieldPair, known: &[FieldPair]) -> f64 {
    let grid = model.grid();
    let r = residual(model, x).norm(grid);
    let au = FieldPair {
        u: model.op().apply(&x.u),
        v: model.op().apply(&x.v),
    }
    .norm(grid);
    let s = source(model, x).norm(grid);
    let den = au + s;
    let base = if den == 0.0 { 1.0 } else { r / den };
    base * deflation_factor(grid, x, known)
}

/// Principal eigenpair of `A` by inverse iteration, normalized to sup 1.
pub fn first_eigenvector(model: &Model) -> Result<(f64, Vec<f64>), DiscreteError> {
    let op = model.op();
    let mut x = vec![1.0; op.len()];
    for _ in 0..500 {
        let mut y = solve_shifted(op, 0.0, &x)?;
        let s = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        y.iter_mut().for_each(|v| *v /= s);
        let change = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = y;
        if change < 1e-14 {
            break;
        }
    }
    let grid = model.grid();
    let mu = grid.dot(&op.apply(&x), &x) / grid.dot(&x, &x);
    Ok((mu, x))
}

/// Outcome of [`amplitude_prescan`].
#[derive(Debug, Clone)]
pub struct Prescan {
    pub amplitude: f64,
    pub merit: f64,
    pub guess: FieldPair,
}

fn shaped_guess(model: &Model, mu: f64, phi1: &[f64], c: f64) -> FieldPair {
    let u: Vec<f64> = phi1.iter().map(|x| c * x).collect();
    let v = if model.p() == model.q() {
        u.clone()
    } else {
        // Balance μ c = b^p of the first equation projected on φ₁.
        let b = (mu * c).powf(1.0 / model.p());
        phi1.iter().map(|x| b * x).collect()
    };
    FieldPair { u, v }
}

/// Scans amplitudes `c` along `c · φ₁` (first eigenvector of `A`) and keeps
/// the one with smallest [`scaled_merit`].
pub fn amplitude_prescan(model: &Model, known: &[FieldPair]) -> Result<Prescan, DiscreteError> {
    let (mu, phi1) = first_eigenvector(model)?;
    let mut best: Option<Prescan> = None;
    let steps = 400;
    let (lo, hi) = (-3.0f64, 5.0f64);
    for k in 0..=steps {
        let c = 10f64.powf(lo + (hi - lo) * k as f64 / steps as f64);
        let guess = shaped_guess(model, mu, &phi1, c);
        let m = scaled_merit(model, &guess, known);
        if m.is_finite() && best.as_ref().is_none_or(|b| m < b.merit) {
            best = Some(Prescan {
                amplitude: c,
                merit: m,
                guess,
            });
        }
    }
    Ok(best.expect("prescan evaluates at least one finite candidate"))
}

fn assemble_jacobian(model: &Model, x: &FieldPair) -> BandMatrix {
    let op = model.op();
    let n = op.len();
    let bw = op.bandwidth();
    let (p, q) = (model.p(), model.q());
    let mut jac = BandMatrix::zeros(2 * n, 2 * bw, 2 * bw);
    for i in 0..n {
        let w = op.weights()[i];
        let d = op.diag(i);
        jac.add(2 * i, 2 * i, d);
        jac.add(2 * i + 1, 2 * i + 1, d);
        for (j, c) in op.row(i) {
            jac.add(2 * i, 2 * j, -c / w);
            jac.add(2 * i + 1, 2 * j + 1, -c / w);
        }
        jac.add(2 * i, 2 * i + 1, -power_slope(x.v[i], p));
        jac.add(2 * i + 1, 2 * i, -power_slope(x.u[i], q));
    }
    jac
}

/// Damped Newton for the coupled steady system, optionally deflated away
/// from `known` solutions.
///
/// Deflation multiplies the merit `‖R‖_w` by `Π_k (1/‖x − x_k‖²_w + 1)`;
/// the Newton step is rescaled by the matching factor
/// `1/(1 − ∇log M · δ)` so it is the Newton step of the deflated residual.
pub fn solve_newton(
    model: &Model,
    guess: &FieldPair,
    known: &[FieldPair],
    opts: &NewtonOptions,
) -> Result<Equilibrium, EllipticError> {
    let n = model.len();
    guess.check_len(n)?;
    assert!(guess.is_finite(), "initial guess must be finite");
    let grid = model.grid();
    let mut x = guess.clone();
    let mut current = merit(model, &x, known);
    let mut best = residual_norm(model, &x);
    let mut iterations = 0;
    loop {
        let rn = residual_norm(model, &x);
        best = best.min(rn);
        if rn <= opts.steady_tol {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(EllipticError::MaxIterations {
                iterations,
                best_residual: best,
            });
        }
        let r = residual(model, &x);
        let lu = assemble_jacobian(model, &x)
            .factor()
            .map_err(|_| EllipticError::SingularJacobian { iteration: iterations })?;
        let mut rhs = vec![0.0; 2 * n];
        for i in 0..n {
            rhs[2 * i] = -r.u[i];
            rhs[2 * i + 1] = -r.v[i];
        }
        let z = lu.solve(&rhs);
        if z.iter().any(|v| !v.is_finite()) {
            return Err(EllipticError::SingularJacobian { iteration: iterations });
        }
        let delta = FieldPair {
            u: (0..n).map(|i| z[2 * i]).collect(),
            v: (0..n).map(|i| z[2 * i + 1]).collect(),
        };
        let mut tau = 1.0;
        if !known.is_empty() {
            let denom = 1.0 - deflation_log_slope(grid, &x, &delta, known);
            if denom > 1e-2 {
                tau = 1.0 / denom;
            }
        }
        let mut t = tau;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = x.plus(&delta.scaled(t));
            let m = merit(model, &trial, known);
            if m.is_finite() && m < current {
                accepted = Some((trial, m));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, m)) => {
                x = trial;
                current = m;
            }
            None => {
                return Err(EllipticError::LineSearch {
                    iteration: iterations,
                    residual: rn,
                })
            }
        }
        iterations += 1;
    }

    let rn = residual_norm(model, &x);
    for (index, k) in known.iter().enumerate() {
        let scale = k.norm(grid).max(f64::MIN_POSITIVE);
        if x.minus(k).norm(grid) <= opts.known_tol * scale {
            return Err(EllipticError::ConvergedToKnown { index });
        }
    }
    if !is_positive(&x) {
        return Err(EllipticError::NonPositive {
            min_value: x.min_value(),
            residual: rn,
            pair: x,
        });
    }
    Ok(Equilibrium {
        pair: x,
        residual_norm: rn,
        spec: *model.spec(),
        method: Method::Newton,
        iterations,
    })
}

/// Pre-scan plus Newton: the default way to compute a positive equilibrium
/// of the homogeneous problem, or a further solution when `known` is not
/// empty.
pub fn solve_seeded(
    model: &Model,
    known: &[FieldPair],
    opts: &NewtonOptions,
) -> Result<Equilibrium, EllipticError> {
    let seed = amplitude_prescan(model, known)?;
    solve_newton(model, &seed.guess, known, opts)
}
