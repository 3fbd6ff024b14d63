//! Robin boundary data: equilibrium checks, threshold runs at β = 1, and
//! the sup norm of the equilibrium as β grows toward the Dirichlet limit.
//!
//!     cargo run --release --example robin -- [resolution]

use threshold_lab::discrete::Model;
use threshold_lab::elliptic::{solve_seeded, NewtonOptions};
use threshold_lab::lab::{robin_experiment, ThresholdOptions};
use threshold_lab::problem::{BoundarySpec, DomainSpec, ExponentPair, ProblemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let res = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(512);
    let base = ProblemSpec::homogeneous(ExponentPair::new(3.0, 3.0)?, DomainSpec::unit_disk());

    let model = Model::new(base.with_boundary(BoundarySpec::Robin { beta: 1.0 }), res)?;
    let rep = robin_experiment(&model, &ThresholdOptions::default())?;
    if let Some(reason) = &rep.skipped {
        println!("skipped: {reason}");
        return Ok(());
    }
    let eq = rep.equilibrium.as_ref().expect("equilibrium present when not skipped");
    println!("β = 1: sup {:.10}, residual {:.2e}", eq.sup_norm(), eq.residual_norm);
    println!(
        "  oracle boundary residual {:.2e}, discrete boundary rows {:.2e}, sup error vs oracle {:.2e}",
        rep.oracle_boundary_residual.unwrap_or(f64::NAN),
        rep.boundary_row_residual.unwrap_or(f64::NAN),
        rep.oracle_sup_error.unwrap_or(f64::NAN)
    );
    if let Some(th) = &rep.threshold {
        for r in &th.runs {
            println!("  α = {:.6}: {} at t = {:.5}", r.parameter, r.outcome.label(), r.outcome.t_end());
        }
        if let Some((lo, hi)) = th.bracket {
            println!("  bracket [{lo:.6}, {hi:.6}]");
        }
    }

    let dirichlet = solve_seeded(&Model::new(base, res)?, &[], &NewtonOptions::default())?;
    println!("\n{:>8} {:>14}", "β", "sup");
    for beta in [0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1000.0] {
        let m = Model::new(base.with_boundary(BoundarySpec::Robin { beta }), res)?;
        let eq = solve_seeded(&m, &[], &NewtonOptions::default())?;
        println!("{beta:>8} {:>14.8}", eq.sup_norm());
    }
    println!("{:>8} {:>14.8}", "∞", dirichlet.sup_norm());
    Ok(())
}
