use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

/// Dormand–Prince 5(4) with elementary (non-PI) step control.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 {
            rtol: 1e-12,
            atol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth minus fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const D: usize>(y: &[f64; D], terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..D {
            out[i] += c * k[i];
        }
    }
    out
}

impl Dopri5 {
    /// Integrates `y′ = f(t, y)` from `t0` to `t1 > t0`, landing exactly on `t1`.
    pub fn integrate<const D: usize>(
        &self,
        f: impl Fn(f64, &[f64; D]) -> [f64; D],
        t0: f64,
        y0: [f64; D],
        t1: f64,
    ) -> Result<[f64; D], OdeError> {
        let mut t = t0;
        let mut y = y0;
        if t1 <= t0 {
            return Ok(y);
        }
        let span = t1 - t0;
        let mut h = span * 1e-3;
        let mut k1 = f(t, &y);
        let mut steps = 0;
        while t < t1 {
            if steps >= self.max_steps {
                return Err(OdeError::TooManySteps { t });
            }
            let last = t + h >= t1;
            let h_eff = if last { t1 - t } else { h };
            if h_eff <= f64::EPSILON * t.abs().max(1.0) * 4.0 && !last {
                return Err(OdeError::StepUnderflow { t });
            }
            let k2 = f(t + C2 * h_eff, &axpy(&y, &[(h_eff * A21, &k1)]));
            let k3 = f(
                t + C3 * h_eff,
                &axpy(&y, &[(h_eff * A31, &k1), (h_eff * A32, &k2)]),
            );
            let k4 = f(
                t + C4 * h_eff,
                &axpy(&y, &[(h_eff * A41, &k1), (h_eff * A42, &k2), (h_eff * A43, &k3)]),
            );
            let k5 = f(
                t + C5 * h_eff,
                &axpy(
                    &y,
                    &[
                        (h_eff * A51, &k1),
                        (h_eff * A52, &k2),
                        (h_eff * A53, &k3),
                        (h_eff * A54, &k4),
                    ],
                ),
            );
            let k6 = f(
                t + h_eff,
                &axpy(
                    &y,
                    &[
                        (h_eff * A61, &k1),
                        (h_eff * A62, &k2),
                        (h_eff * A63, &k3),
                        (h_eff * A64, &k4),
                        (h_eff * A65, &k5),
                    ],
                ),
            );
            let y_new = axpy(
                &y,
                &[
                    (h_eff * B1, &k1),
                    (h_eff * B3, &k3),
                    (h_eff * B4, &k4),
                    (h_eff * B5, &k5),
                    (h_eff * B6, &k6),
                ],
            );
            let k7 = f(t + h_eff, &y_new);
            let mut err = 0.0f64;
            for i in 0..D {
                let e = h_eff
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                if y_new.iter().all(|v| v.is_finite()) {
                    h *= 0.1;
                    steps += 1;
                    continue;
                }
                return Err(OdeError::NonFinite { t });
            }
            steps += 1;
            if err <= 1.0 {
                t = if last { t1 } else { t + h_eff };
                y = y_new;
                k1 = k7;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 && last {
                break;
            }
            h = h_eff * factor;
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let ode = Dopri5::default();
        let y = ode
            .integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], 2.0 * std::f64::consts::PI)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10 && y[1].abs() < 1e-10, "{y:?}");
    }

    #[test]
    fn exponential_growth() {
        let ode = Dopri5::default();
        let y = ode.integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 3.0).unwrap();
        assert!((y[0] / 3f64.exp() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn lands_on_endpoint_after_split() {
        let ode = Dopri5::default();
        let direct = ode.integrate(|t, _y: &[f64; 1]| [t.cos()], 0.0, [0.0], 1.3).unwrap();
        let mid = ode.integrate(|t, _y: &[f64; 1]| [t.cos()], 0.0, [0.0], 0.4).unwrap();
        let split = ode.integrate(|t, _y: &[f64; 1]| [t.cos()], 0.4, mid, 1.3).unwrap();
        assert!((direct[0] - 1.3f64.sin()).abs() < 1e-12);
        assert!((split[0] - 1.3f64.sin()).abs() < 1e-12);
    }
}
