//! Radial shooting for positive solutions on balls, independent of the
//! finite-volume discretization.

use crate::discrete::{FieldPair, Grid, Layout};
use crate::problem::{BoundarySpec, ExponentPair};

use super::ode::Dopri5;
use super::{power, power_slope, EllipticError};

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    pub ode: Dopri5,
    /// Series start radius as a fraction of `R`.
    pub start_fraction: f64,
    pub max_polish: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            ode: Dopri5::default(),
            start_fraction: 1e-3,
            max_polish: 30,
        }
    }
}

/// Radial solution `(U(r), V(r))` with `U(0) = a`, `V(0) = b`.
#[derive(Debug, Clone)]
pub struct ShootingSolution {
    pub exponents: ExponentPair,
    pub dimension: usize,
    pub radius: f64,
    pub boundary: BoundarySpec,
    /// Center values `(a, b)`.
    pub center: (f64, f64),
    /// `max` of the two boundary-condition residuals at `r = R`.
    pub boundary_residual: f64,
    /// `[U(R), U′(R), V(R), V′(R)]`.
    pub boundary_values: [f64; 4],
    opts: ShootingOptions,
}

struct Radial {
    p: f64,
    q: f64,
    n: f64,
}

impl Radial {
    fn rhs(&self, r: f64, y: &[f64; 4]) -> [f64; 4] {
        let k = (self.n - 1.0) / r;
        [
            y[1],
            -power(y[2], self.p) - k * y[1],
            y[3],
            -power(y[0], self.q) - k * y[3],
        ]
    }

    /// Fourth-order Taylor data at small `r`.
    fn series(&self, a: f64, b: f64, r: f64) -> [f64; 4] {
        let n = self.n;
        let u2 = -power(b, self.p) / (2.0 * n);
        let v2 = -power(a, self.q) / (2.0 * n);
        let u4 = -power_slope(b, self.p) * v2 / (4.0 * (n + 2.0));
        let v4 = -power_slope(a, self.q) * u2 / (4.0 * (n + 2.0));
        let r2 = r * r;
        [
            a + u2 * r2 + u4 * r2 * r2,
            2.0 * u2 * r + 4.0 * u4 * r2 * r,
            b + v2 * r2 + v4 * r2 * r2,
            2.0 * v2 * r + 4.0 * v4 * r2 * r,
        ]
    }
}

fn boundary_functional(bc: BoundarySpec, r_scale: f64, value: f64, slope: f64, r: f64) -> f64 {
    match bc {
        BoundarySpec::Dirichlet => value,
        // r U′ + β R U, which at r = R is R (U′ + β U).
        BoundarySpec::Robin { beta } => r * slope + beta * r_scale * value,
    }
}

impl ShootingSolution {
    fn system(&self) -> Radial {
        Radial {
            p: self.exponents.p,
            q: self.exponents.q,
            n: self.dimension as f64,
        }
    }

    /// `max(U(0), V(0))`, the sup norm of a radially decreasing solution.
    pub fn sup_norm(&self) -> f64 {
        self.center.0.max(self.center.1)
    }

    /// `[U, U′, V, V′]` at each of the given nondecreasing radii.
    pub fn profile(&self, radii: &[f64]) -> Result<Vec<[f64; 4]>, EllipticError> {
        let sys = self.system();
        let (a, b) = self.center;
        let r0 = self.opts.start_fraction * self.radius;
        let mut out = Vec::with_capacity(radii.len());
        let mut r = r0;
        let mut y = sys.series(a, b, r0);
        for &target in radii {
            if target <= r0 {
                out.push(sys.series(a, b, target));
                continue;
            }
            y = self.opts.ode.integrate(|t, s| sys.rhs(t, s), r, y, target)?;
            r = target;
            out.push(y);
        }
        Ok(out)
    }

    /// Nodal values on a radial grid of the same ball.
    pub fn sample(&self, grid: &Grid) -> Result<FieldPair, EllipticError> {
        if !matches!(grid.layout(), Layout::Radial { .. }) {
            return Err(EllipticError::NotRadial);
        }
        let radii: Vec<f64> = (0..grid.len()).map(|i| grid.distance_from_center(i)).collect();
        let prof = self.profile(&radii)?;
        Ok(FieldPair {
            u: prof.iter().map(|y| y[0]).collect(),
            v: prof.iter().map(|y| y[2]).collect(),
        })
    }
}

fn shoot_to(
    sys: &Radial,
    ode: &Dopri5,
    a: f64,
    b: f64,
    r0: f64,
    r1: f64,
) -> Result<[f64; 4], EllipticError> {
    let y0 = sys.series(a, b, r0);
    Ok(ode.integrate(|t, s| sys.rhs(t, s), r0, y0, r1)?)
}

/// First zeros of the boundary functionals of `U` and `V` for the scaled
/// problem with `U(0) = 1`, `V(0) = t`.
fn first_roots(
    sys: &Radial,
    ode: &Dopri5,
    bc: BoundarySpec,
    radius: f64,
    t: f64,
) -> Result<(f64, f64), EllipticError> {
    let s0 = 1e-4;
    let ds = 0.02;
    let s_max = 500.0;
    let bu = |s: f64, y: &[f64; 4]| boundary_functional(bc, radius, y[0], y[1], s);
    let bv = |s: f64, y: &[f64; 4]| boundary_functional(bc, radius, y[2], y[3], s);
    let mut s = s0;
    let mut y = sys.series(1.0, t, s0);
    let mut root_u = None;
    let mut root_v = None;
    while root_u.is_none() || root_v.is_none() {
        if s > s_max {
            return Err(EllipticError::RootFindFailure { residual: f64::INFINITY });
        }
        let s_next = s + ds;
        let y_next = match ode.integrate(|r, z| sys.rhs(r, z), s, y, s_next) {
            Ok(y) => y,
            // Past one root the sign-changed profile may blow up before the
            // other component vanishes; its root is then effectively at ∞.
            Err(_) if root_u.is_some() || root_v.is_some() => {
                return Ok((root_u.unwrap_or(f64::INFINITY), root_v.unwrap_or(f64::INFINITY)));
            }
            Err(e) => return Err(e.into()),
        };
        for (slot, which) in [(&mut root_u, 0usize), (&mut root_v, 1usize)] {
            if slot.is_some() {
                continue;
            }
            let fa = if which == 0 { bu(s, &y) } else { bv(s, &y) };
            let fb = if which == 0 { bu(s_next, &y_next) } else { bv(s_next, &y_next) };
            if fa > 0.0 && fb <= 0.0 {
                let (mut lo, mut hi) = (s, s_next);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let ym = ode.integrate(|r, z| sys.rhs(r, z), s, y, mid)?;
                    let fm = if which == 0 { bu(mid, &ym) } else { bv(mid, &ym) };
                    if fm > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                *slot = Some(0.5 * (lo + hi));
            }
        }
        s = s_next;
        y = y_next;
    }
    Ok((root_u.unwrap(), root_v.unwrap()))
}

/// Positive radial solution of `-ΔU = φ_p(V)`, `-ΔV = φ_q(U)` on the ball of
/// radius `radius` in `R^N`.
///
/// The unit-center problem is integrated outward to find where the boundary
/// functionals vanish, the ratio `V(0)/U(0)` is fixed so both vanish at the
/// same radius, and the scaling invariance
/// `U_μ(r) = μ^{2(p+1)/(pq-1)} U(μr)` maps the result to radius `R`. A 2D
/// Newton iteration on the boundary residual at `R` then polishes `(a, b)`.
pub fn shooting_oracle(
    exponents: ExponentPair,
    dimension: usize,
    radius: f64,
    boundary: BoundarySpec,
    opts: &ShootingOptions,
) -> Result<ShootingSolution, EllipticError> {
    let sys = Radial {
        p: exponents.p,
        q: exponents.q,
        n: dimension as f64,
    };
    let ode = &opts.ode;
    let (p, q) = (exponents.p, exponents.q);

    let gap = |t: f64| -> Result<(f64, f64, f64), EllipticError> {
        let (su, sv) = first_roots(&sys, ode, boundary, radius, t)?;
        Ok((su - sv, su, sv))
    };
    let (t, s) = if p == q {
        let (_, su, _) = gap(1.0)?;
        (1.0, su)
    } else {
        // s_U - s_V decreases in t: a larger V(0) drives U down sooner.
        let (d1, _, _) = gap(1.0)?;
        let step = if d1 > 0.0 { 2f64.log10() } else { -(2f64.log10()) };
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        let mut found = false;
        for _ in 0..60 {
            hi += step;
            let (d, _, _) = gap(10f64.powf(hi))?;
            if (d > 0.0) != (d1 > 0.0) {
                found = true;
                break;
            }
            lo = hi;
        }
        if !found {
            return Err(EllipticError::RootFindFailure { residual: f64::INFINITY });
        }
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let (d, _, _) = gap(10f64.powf(mid))?;
            if d > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 10f64.powf(0.5 * (lo + hi));
        let (_, su, sv) = gap(t)?;
        (t, 0.5 * (su + sv))
    };
    let mu = s / radius;
    let alpha_u = 2.0 * (p + 1.0) / (p * q - 1.0);
    let alpha_v = 2.0 * (q + 1.0) / (p * q - 1.0);
    let mut a = mu.powf(alpha_u);
    let mut b = mu.powf(alpha_v) * t;

    let r0 = opts.start_fraction * radius;
    let eval = |a: f64, b: f64| -> Result<([f64; 2], [f64; 4]), EllipticError> {
        let y = shoot_to(&sys, ode, a, b, r0, radius)?;
        let f = [
            boundary_functional(boundary, 1.0, y[0], y[1], 1.0),
            boundary_functional(boundary, 1.0, y[2], y[3], 1.0),
        ];
        Ok((f, y))
    };
    let (mut f, mut y) = eval(a, b)?;
    let norm = |f: &[f64; 2]| f[0].abs().max(f[1].abs());
    for _ in 0..opts.max_polish {
        if norm(&f) <= 1e-14 * a.max(b) {
            break;
        }
        let (ha, hb) = (1e-7 * a, 1e-7 * b);
        let (fa, _) = eval(a + ha, b)?;
        let (fb, _) = eval(a, b + hb)?;
        let j = [
            [(fa[0] - f[0]) / ha, (fb[0] - f[0]) / hb],
            [(fa[1] - f[1]) / ha, (fb[1] - f[1]) / hb],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let da = -(j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let db = -(-j[1][0] * f[0] + j[0][0] * f[1]) / det;
        let (na, nb) = (a + da, b + db);
        let (nf, ny) = eval(na, nb)?;
        if norm(&nf) >= norm(&f) {
            break;
        }
        a = na;
        b = nb;
        f = nf;
        y = ny;
    }
    let boundary_residual = norm(&f);
    if !(a > 0.0 && b > 0.0) || boundary_residual > 1e-9 * a.max(b) {
        return Err(EllipticError::RootFindFailure {
            residual: boundary_residual,
        });
    }
    Ok(ShootingSolution {
        exponents,
        dimension,
        radius,
        boundary,
        center: (a, b),
        boundary_residual,
        boundary_values: y,
        opts: *opts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(p: f64, q: f64) -> ExponentPair {
        ExponentPair::new(p, q).unwrap()
    }

    #[test]
    fn symmetric_exponents_give_equal_components() {
        let s = shooting_oracle(pair(3.0, 3.0), 2, 1.0, BoundarySpec::Dirichlet, &Default::default())
            .unwrap();
        assert!((s.center.0 - s.center.1).abs() <= 1e-10 * s.center.0);
        assert!(s.boundary_residual < 1e-12);
        let [u, _, v, _] = s.boundary_values;
        assert!(u.abs() < 1e-12 && v.abs() < 1e-12);
    }

    #[test]
    fn solution_is_radially_decreasing() {
        // For p = q the system reduces to -ΔU = U^p; check the ODE
        // solution is radially decreasing and vanishes only at R.
        let s = shooting_oracle(pair(2.0, 2.0), 3, 1.0, BoundarySpec::Dirichlet, &Default::default())
            .unwrap();
        let radii: Vec<f64> = (1..=20).map(|k| k as f64 / 20.0).collect();
        let prof = s.profile(&radii).unwrap();
        for w in prof.windows(2) {
            assert!(w[1][0] < w[0][0]);
        }
        assert!(prof[18][0] > 0.0);
    }

    #[test]
    fn asymmetric_exponents_converge() {
        let s = shooting_oracle(pair(2.0, 4.0), 2, 1.0, BoundarySpec::Dirichlet, &Default::default())
            .unwrap();
        let [u, _, v, _] = s.boundary_values;
        assert!(u.abs() < 1e-10 && v.abs() < 1e-10);
        assert!(s.center.0 != s.center.1);
    }

    #[test]
    fn robin_boundary_condition_holds() {
        let s = shooting_oracle(
            pair(3.0, 3.0),
            2,
            1.0,
            BoundarySpec::Robin { beta: 1.0 },
            &Default::default(),
        )
        .unwrap();
        let [u, du, v, dv] = s.boundary_values;
        assert!((du + u).abs() < 1e-10 && (dv + v).abs() < 1e-10);
        assert!(u > 0.0 && v > 0.0);
    }

    #[test]
    fn radius_scaling_law() {
        // a(R) = a(1) R^{-2(p+1)/(pq-1)}.
        let e = pair(3.0, 3.0);
        let s1 = shooting_oracle(e, 2, 1.0, BoundarySpec::Dirichlet, &Default::default()).unwrap();
        let s2 = shooting_oracle(e, 2, 2.0, BoundarySpec::Dirichlet, &Default::default()).unwrap();
        let expected = s1.center.0 * 2f64.powf(-1.0);
        assert!((s2.center.0 / expected - 1.0).abs() < 1e-10);
    }
}
