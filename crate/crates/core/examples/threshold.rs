//! Runs from α·(U,V) on the disk: classification of a few α values and a
//! bisection for the threshold, with blow-up times.
//!
//!     cargo run --release --example threshold -- [resolution]

use threshold_lab::discrete::Model;
use threshold_lab::elliptic::{solve_seeded, NewtonOptions};
use threshold_lab::lab::{threshold_experiment, ThresholdOptions};
use threshold_lab::parabolic::Outcome;
use threshold_lab::problem::{DomainSpec, ExponentPair, ProblemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let res = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(512);
    let spec = ProblemSpec::homogeneous(ExponentPair::new(3.0, 3.0)?, DomainSpec::unit_disk());
    let model = Model::new(spec, res)?;
    let eq = solve_seeded(&model, &[], &NewtonOptions::default())?;
    println!("equilibrium: sup {:.10}, residual {:.2e}", eq.sup_norm(), eq.residual_norm);

    let opts = ThresholdOptions {
        alphas: vec![0.5, 0.9, 0.99, 1.0, 1.01, 1.1, 1.5, 2.0],
        ..Default::default()
    };
    let report = threshold_experiment(&model, &eq, &opts)?;
    println!("{:>10} {:>10} {:>14} {:>7}", "alpha", "outcome", "t", "steps");
    for r in &report.runs {
        let t = match r.outcome {
            Outcome::BlowUp { t_est, .. } => t_est,
            ref o => o.t_end(),
        };
        println!("{:>10.6} {:>10} {:>14.6e} {:>7}", r.parameter, r.outcome.label(), t, r.steps);
    }
    match report.bracket {
        Some((lo, hi)) => println!("threshold bracket [{lo:.6}, {hi:.6}], width {:.4}", hi - lo),
        None => println!("no bracket"),
    }
    Ok(())
}
