//! Grids, quadrature, the discrete Laplacian and the shifted linear solve.

mod grid;
mod laplacian;
pub mod linsolve;
mod model;

use thiserror::Error;

pub use grid::{build_grid, build_grid_axes, Grid, Layout, MIN_RESOLUTION};
pub use laplacian::{build_laplacian, DiscreteLaplacian, Structure};
pub use model::{Model, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscreteError {
    #[error("resolution {got} is below the minimum of {min} cells per axis")]
    ResolutionTooSmall { got: usize, min: usize },
    #[error("unsupported discretization: {0}")]
    Unsupported(String),
    #[error("linear solve broke down at row {row}")]
    Breakdown { row: usize },
    #[error("linear solve did not converge: relative residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Nodal values of the two components `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FieldPair {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Self {
        assert_eq!(u.len(), v.len(), "components must have equal length");
        FieldPair { u, v }
    }

    pub fn zeros(n: usize) -> Self {
        FieldPair {
            u: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    /// Both components equal to `x`.
    pub fn diagonal(x: Vec<f64>) -> Self {
        FieldPair { u: x.clone(), v: x }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn check_len(&self, n: usize) -> Result<(), DiscreteError> {
        if self.u.len() != n || self.v.len() != n {
            return Err(DiscreteError::LengthMismatch {
                expected: n,
                got: self.u.len().max(self.v.len()),
            });
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        FieldPair {
            u: self.u.iter().map(|x| alpha * x).collect(),
            v: self.v.iter().map(|x| alpha * x).collect(),
        }
    }

    /// `self + other`.
    pub fn plus(&self, other: &FieldPair) -> Self {
        FieldPair {
            u: self.u.iter().zip(&other.u).map(|(a, b)| a + b).collect(),
            v: self.v.iter().zip(&other.v).map(|(a, b)| a + b).collect(),
        }
    }

    /// `self - other`.
    pub fn minus(&self, other: &FieldPair) -> Self {
        FieldPair {
            u: self.u.iter().zip(&other.u).map(|(a, b)| a - b).collect(),
            v: self.v.iter().zip(&other.v).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn sup_u(&self) -> f64 {
        self.u.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn sup_v(&self) -> f64 {
        self.v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `max(‖u‖_∞, ‖v‖_∞)`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_u().max(self.sup_v())
    }

    /// Smallest nodal value over both components.
    pub fn min_value(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .fold(f64::INFINITY, |m, &x| m.min(x))
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    /// `(u, v) ≤ (other.u, other.v) + tol` at every node.
    pub fn le_with_tol(&self, other: &FieldPair, tol: f64) -> bool {
        self.u.iter().zip(&other.u).all(|(a, b)| *a <= b + tol)
            && self.v.iter().zip(&other.v).all(|(a, b)| *a <= b + tol)
    }

    /// Weighted `L²` norm of the stacked pair.
    pub fn norm(&self, grid: &Grid) -> f64 {
        (grid.dot(&self.u, &self.u) + grid.dot(&self.v, &self.v)).sqrt()
    }
}

/// `∫_Ω x dx ≈ Σ w_i x_i`.
pub fn integrate(grid: &Grid, x: &[f64]) -> f64 {
    grid.integrate(x)
}

/// `⟨A x, y⟩_w`, the discrete `∫ ∇x·∇y` (plus `β∮ x y` for Robin data).
pub fn dirichlet_energy(grid: &Grid, op: &DiscreteLaplacian, x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(grid.len(), op.len());
    // `w_i (A x)_i = (K x)_i`; skipping the division keeps the form free of
    // the `1/w` rounding, which dominates near the center of radial grids.
    neumaier_sum((0..op.len()).map(|i| op.stiffness_row(i, x) * y[i]))
}

/// Compensated summation; the plain sum loses `O(n ε max|term|)`, which on
/// fine grids is visible next to the duality tolerance.
fn neumaier_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Target relative residual of [`solve_shifted`].
pub const SOLVE_TOL: f64 = 1e-12;

/// Solves `(σ I + A) x = rhs` for `σ ≥ 0`.
///
/// One-dimensional layouts use a direct tridiagonal solve on the symmetric
/// form `(σW + K) x = W rhs`; tensor grids use Jacobi-preconditioned
/// conjugate gradients on the same form.
pub fn solve_shifted(
    op: &DiscreteLaplacian,
    sigma: f64,
    rhs: &[f64],
) -> Result<Vec<f64>, DiscreteError> {
    solve_shifted_from(op, sigma, rhs, None)
}

/// [`solve_shifted`] with an optional starting iterate (used only by the
/// iterative path).
pub fn solve_shifted_from(
    op: &DiscreteLaplacian,
    sigma: f64,
    rhs: &[f64],
    guess: Option<&[f64]>,
) -> Result<Vec<f64>, DiscreteError> {
    assert!(sigma >= 0.0, "shift must be nonnegative");
    let n = op.len();
    if rhs.len() != n {
        return Err(DiscreteError::LengthMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    let w = op.weights();
    let b: Vec<f64> = rhs.iter().zip(w).map(|(r, wi)| r * wi).collect();
    let diag: Vec<f64> = (0..n).map(|i| sigma * w[i] + op.stiffness_diag(i)).collect();
    match op.structure() {
        Structure::Tridiagonal => {
            let mut lower = vec![0.0; n];
            let mut upper = vec![0.0; n];
            for (i, (lo, up)) in lower.iter_mut().zip(upper.iter_mut()).enumerate() {
                for (j, c) in op.row(i) {
                    if j + 1 == i {
                        *lo = -c;
                    } else if j == i + 1 {
                        *up = -c;
                    }
                }
            }
            linsolve::solve_tridiagonal(&lower, &diag, &upper, &b)
        }
        Structure::Banded { .. } => {
            let apply = |x: &[f64], out: &mut [f64]| {
                for i in 0..n {
                    out[i] = sigma * w[i] * x[i] + op.stiffness_row(i, x);
                }
            };
            let res = linsolve::pcg(apply, &diag, &b, guess, 1e-14, 20 * n + 100);
            let x = res.x;
            let backward = backward_error(op, sigma, &x, rhs);
            if backward > SOLVE_TOL {
                return Err(DiscreteError::NotConverged {
                    residual: shifted_residual(op, sigma, &x, rhs),
                    iterations: res.iterations,
                });
            }
            Ok(x)
        }
    }
}

/// `‖(σI + A)x − rhs‖_∞ / ‖rhs‖_∞` (zero when both vanish).
pub fn shifted_residual(op: &DiscreteLaplacian, sigma: f64, x: &[f64], rhs: &[f64]) -> f64 {
    let ax = op.apply(x);
    let num = ax
        .iter()
        .zip(x)
        .zip(rhs)
        .map(|((a, xi), b)| (sigma * xi + a - b).abs())
        .fold(0.0, f64::max);
    let den = rhs.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Normwise backward error `‖r‖_∞ / (‖rhs‖_∞ + ‖σI + A‖_∞ ‖x‖_∞)`.
pub fn backward_error(op: &DiscreteLaplacian, sigma: f64, x: &[f64], rhs: &[f64]) -> f64 {
    let ax = op.apply(x);
    let num = ax
        .iter()
        .zip(x)
        .zip(rhs)
        .map(|((a, xi), b)| (sigma * xi + a - b).abs())
        .fold(0.0, f64::max);
    let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bn = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let den = bn + (sigma + op.inf_norm()) * xn;
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{BoundarySpec, DomainSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_grids(res: usize) -> Vec<Grid> {
        let domains = [
            DomainSpec::unit_disk(),
            DomainSpec::ball(3, 1.0),
            DomainSpec::rectangle(1.0, 1.5),
            DomainSpec::interval(1.0),
        ];
        let mut out = Vec::new();
        for d in domains {
            for bc in [BoundarySpec::Dirichlet, BoundarySpec::Robin { beta: 1.0 }] {
                out.push(build_grid(&d, bc, res).unwrap());
            }
        }
        out
    }

    #[test]
    fn zero_rhs_gives_zero() {
        for g in all_grids(16) {
            let a = build_laplacian(&g);
            let x = solve_shifted(&a, 0.0, &vec![0.0; g.len()]).unwrap();
            assert!(x.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn random_rhs_residual_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in all_grids(32) {
            let a = build_laplacian(&g);
            for sigma in [0.0, 1.0, 1e3] {
                let rhs: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let x = solve_shifted(&a, sigma, &rhs).unwrap();
                let rel = shifted_residual(&a, sigma, &x, &rhs);
                assert!(rel <= SOLVE_TOL, "{:?} sigma={sigma} rel={rel:e}", g.geometry());
            }
        }
    }

    #[test]
    fn disk_poisson_recovers_paraboloid() {
        let g = build_grid(&DomainSpec::unit_disk(), BoundarySpec::Dirichlet, 128).unwrap();
        let a = build_laplacian(&g);
        let x = solve_shifted(&a, 0.0, &vec![4.0; g.len()]).unwrap();
        let exact = g.sample_radial(|r| 1.0 - r * r);
        let err = x.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn maximum_principle_on_nonnegative_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for g in all_grids(24) {
            let a = build_laplacian(&g);
            for sigma in [0.0, 10.0] {
                let rhs: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
                let x = solve_shifted(&a, sigma, &rhs).unwrap();
                assert!(x.iter().all(|&v| v >= 0.0));
            }
        }
    }

    #[test]
    fn duality_on_every_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for g in all_grids(40) {
            let a = build_laplacian(&g);
            for _ in 0..20 {
                let x: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let y: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let gap = dirichlet_energy(&g, &a, &x, &y) - dirichlet_energy(&g, &a, &y, &x);
                let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!(gap.abs() <= 1e-12 * nx * ny);
            }
        }
    }

    #[test]
    fn broken_operator_fails_duality() {
        let g = build_grid(&DomainSpec::unit_disk(), BoundarySpec::Dirichlet, 32).unwrap();
        let a = build_laplacian(&g).with_asymmetric_defect(5, 1.5);
        let mut x = vec![0.0; g.len()];
        let mut y = vec![0.0; g.len()];
        x[4] = 1.0;
        y[5] = 1.0;
        let gap = dirichlet_energy(&g, &a, &x, &y) - dirichlet_energy(&g, &a, &y, &x);
        assert!(gap.abs() > 1.0);
    }

    #[test]
    fn energy_of_paraboloid() {
        // ∫|∇(1-r²)|² over the unit disk = 2π ∫ 4r² r dr = 2π.
        let mut prev = f64::NAN;
        for res in [64, 128, 256] {
            let g = build_grid(&DomainSpec::unit_disk(), BoundarySpec::Dirichlet, res).unwrap();
            let a = build_laplacian(&g);
            let x = g.sample_radial(|r| 1.0 - r * r);
            let err = (dirichlet_energy(&g, &a, &x, &x) - 2.0 * std::f64::consts::PI).abs();
            if prev.is_finite() {
                let ratio = prev / err;
                assert!((3.2..4.8).contains(&ratio), "ratio {ratio}");
            }
            prev = err;
        }
    }

    #[test]
    fn integral_of_paraboloid_converges_second_order() {
        let mut prev = f64::NAN;
        for res in [64, 128, 256] {
            let g = build_grid(&DomainSpec::unit_disk(), BoundarySpec::Dirichlet, res).unwrap();
            let x = g.sample_radial(|r| 1.0 - r * r);
            let err = (integrate(&g, &x) - std::f64::consts::FRAC_PI_2).abs();
            if prev.is_finite() {
                let ratio = prev / err;
                assert!((3.2..4.8).contains(&ratio), "ratio {ratio}");
            }
            prev = err;
        }
    }
}
