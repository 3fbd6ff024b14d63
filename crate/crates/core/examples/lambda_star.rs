//! Extremal forcing scale for f = g = 1 on the disk, with the dynamics on
//! both sides of the bracket and the minimal solution along the way.
//!
//!     cargo run --release --example lambda_star -- [resolution]

use threshold_lab::discrete::{FieldPair, Model};
use threshold_lab::elliptic::{solve_monotone, MonotoneOptions};
use threshold_lab::lab::lambda_star_experiment;
use threshold_lab::parabolic::IntegratorConfig;
use threshold_lab::problem::{DomainSpec, ExponentPair, ForcingSpec, ProblemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let res = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(256);
    let spec = ProblemSpec::homogeneous(ExponentPair::new(2.0, 2.0)?, DomainSpec::unit_disk())
        .with_forcing(ForcingSpec::uniform(1.0));
    let model = Model::new(spec, res)?;

    let rep = lambda_star_experiment(&model, (1e-2, 1e2), 0.01, &IntegratorConfig::default())?;
    let (lo, hi) = rep.search.bracket;
    println!("bracket [{lo:.6}, {hi:.6}], relative width {:.4}, {} evaluations", rep.search.relative_width(), rep.search.evaluations.len());
    for s in &rep.search.spot_checks {
        println!("  spot check λ = {:.6}: converges {} (consistent {})", s.lambda, s.converges, s.consistent);
    }
    println!(
        "λ = {:.6} from zero: {} at t = {:.3}, distance to minimal solution {:.2e}",
        rep.below.parameter,
        rep.below.outcome.label(),
        rep.below.outcome.t_end(),
        rep.distance_to_minimal.unwrap_or(f64::NAN)
    );
    println!("λ = {:.6} from zero: {} at t = {:.4}", rep.above.parameter, rep.above.outcome.label(), rep.above.outcome.t_end());

    println!("\nminimal solution sup norm along λ:");
    for frac in [0.1, 0.3, 0.5, 0.7, 0.9, 0.97] {
        let m = model.with_lambda(frac * lo);
        let (eq, stats) = solve_monotone(&m, &FieldPair::zeros(m.len()), &MonotoneOptions::default())?;
        println!("  λ = {:>9.5}  sup {:>10.6}  iterations {:>5}", frac * lo, eq.sup_norm(), stats.iterations);
    }
    Ok(())
}
