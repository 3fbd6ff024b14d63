use crate::discrete::{FieldPair, Model};
use crate::problem::gamma;

use super::{big_t, blowup_bound_constant, dphi_rhs, energy, phi};

/// Diagnostics of one accepted state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub t: f64,
    /// Step that produced this state (zero for the initial row).
    pub dt: f64,
    pub phi: f64,
    pub energy: f64,
    pub big_t: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    /// Centered difference of `phi` (one-sided at the ends).
    pub dphi_lhs: f64,
    /// Right side of the `dφ/dt` identity at this state.
    pub dphi_rhs: f64,
    /// `−2E(0) + C φ^γ`.
    pub bound_rhs: f64,
}

/// Time series of [`Row`]s with strictly increasing `t`.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryRecord {
    rows: Vec<Row>,
    constant: f64,
    gamma: f64,
    energy0: f64,
}

impl TrajectoryRecord {
    pub fn new(model: &Model) -> Self {
        let e = model.spec().exponents;
        TrajectoryRecord {
            rows: Vec::new(),
            constant: blowup_bound_constant(e, model.grid().volume()),
            gamma: gamma(e),
            energy0: f64::NAN,
        }
    }

    /// Appends the diagnostics of `state`; `t` must exceed the last row's.
    pub fn push(&mut self, model: &Model, t: f64, dt: f64, state: &FieldPair) {
        if let Some(last) = self.rows.last() {
            assert!(t > last.t, "trajectory times must increase");
        }
        let grid = model.grid();
        let e = model.spec().exponents;
        let ph = phi(grid, state);
        let en = energy(grid, model.op(), state, e);
        if self.rows.is_empty() {
            self.energy0 = en;
        }
        let n = self.rows.len();
        self.rows.push(Row {
            t,
            dt,
            phi: ph,
            energy: en,
            big_t: big_t(grid, state, e),
            sup_u: state.sup_u(),
            sup_v: state.sup_v(),
            dphi_lhs: f64::NAN,
            dphi_rhs: dphi_rhs(model, state),
            bound_rhs: -2.0 * self.energy0 + self.constant * ph.max(0.0).powf(self.gamma),
        });
        self.refresh_lhs(n.saturating_sub(1));
    }

    fn refresh_lhs(&mut self, from: usize) {
        let n = self.rows.len();
        for k in from..n {
            let (a, b) = match (k, n) {
                (_, 1) => {
                    self.rows[k].dphi_lhs = f64::NAN;
                    continue;
                }
                (0, _) => (0, 1),
                (k, n) if k + 1 == n => (k - 1, k),
                (k, _) => (k - 1, k + 1),
            };
            let (ra, rb) = (self.rows[a], self.rows[b]);
            self.rows[k].dphi_lhs = (rb.phi - ra.phi) / (rb.t - ra.t);
        }
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&Row> {
        self.rows.last()
    }

    /// The constant `C` used in `bound_rhs`.
    pub fn bound_constant(&self) -> f64 {
        self.constant
    }

    /// `|dphi_lhs − dphi_rhs|` at row `k`.
    pub fn dphi_identity_residual(&self, k: usize) -> f64 {
        let r = &self.rows[k];
        (r.dphi_lhs - r.dphi_rhs).abs()
    }

    /// [`dphi_identity_residual`](Self::dphi_identity_residual) linearly
    /// interpolated to time `t` inside the recorded range.
    pub fn dphi_identity_residual_at(&self, t: f64) -> Option<f64> {
        let k = self.rows.windows(2).position(|w| w[0].t <= t && t <= w[1].t)?;
        let (a, b) = (&self.rows[k], &self.rows[k + 1]);
        let s = (t - a.t) / (b.t - a.t);
        let lhs = a.dphi_lhs + s * (b.dphi_lhs - a.dphi_lhs);
        let rhs = a.dphi_rhs + s * (b.dphi_rhs - a.dphi_rhs);
        Some((lhs - rhs).abs())
    }

    /// Rows that sample `φ` at steps `k ≥ 1`, excluding the last row whose
    /// difference is one-sided.
    pub fn interior_rows(&self) -> &[Row] {
        if self.rows.len() < 3 {
            &[]
        } else {
            &self.rows[1..self.rows.len() - 1]
        }
    }
}

/// Largest `E_{k+1} − E_k` over consecutive rows, or `None` with fewer than
/// two rows.
pub fn energy_monotonicity_violation(record: &TrajectoryRecord) -> Option<f64> {
    record
        .rows()
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))))
}
