//! Product functional, energy and the lower bound along the two monotone
//! runs from 0.5·(U,V) and 1.5·(U,V), and the time-refinement behavior of
//! the `dφ/dt` identity residual.
//!
//!     cargo run --release --example energy_monitors -- [resolution]

use threshold_lab::analysis::energy_monotonicity_violation;
use threshold_lab::discrete::Model;
use threshold_lab::elliptic::{solve_seeded, NewtonOptions};
use threshold_lab::lab::{trajectory_checks, Direction};
use threshold_lab::parabolic::{evolve, IntegratorConfig};
use threshold_lab::problem::{DomainSpec, ExponentPair, ProblemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let res = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(512);
    let spec = ProblemSpec::homogeneous(ExponentPair::new(3.0, 3.0)?, DomainSpec::unit_disk());
    let model = Model::new(spec, res)?;
    let eq = solve_seeded(&model, &[], &NewtonOptions::default())?;
    let config = IntegratorConfig::default();

    for (alpha, dir) in [(0.5, Direction::Nonincreasing), (1.5, Direction::Nondecreasing)] {
        let tc = trajectory_checks(&model, &eq.pair.scaled(alpha), None, dir, &config)?;
        println!(
            "α = {alpha}: {} after {} steps; wrong-way step {:.1e}, energy increase {:.1e}, bound shortfall {:.2e}",
            tc.outcome.label(),
            tc.steps,
            tc.wrong_way,
            tc.energy_increase,
            tc.bound_shortfall_raw
        );
        let rows = tc.record.rows();
        let stride = (rows.len() / 8).max(1);
        println!("{:>12} {:>14} {:>14} {:>14} {:>14}", "t", "phi", "E", "dphi/dt", "bound");
        for r in rows.iter().step_by(stride) {
            println!("{:>12.5e} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}", r.t, r.phi, r.energy, r.dphi_lhs, r.bound_rhs);
        }
        println!("  C = {:.6}", tc.record.bound_constant());
    }

    println!("\ndφ/dt identity residual at t = 0.02 on the blow-up run:");
    let mut prev = f64::NAN;
    for factor in [1.0, 0.5, 0.25, 0.125] {
        let run = evolve(&model, &eq.pair.scaled(1.5), &config.refined(factor))?;
        let r = run.record.dphi_identity_residual_at(0.02).unwrap_or(f64::NAN);
        let v = energy_monotonicity_violation(&run.record).unwrap_or(f64::NAN);
        println!("  step factor {factor:<6} residual {r:.4e}  ratio {:.3}  max ΔE {v:.2e}", prev / r);
        prev = r;
    }
    Ok(())
}
