//! Two equilibria of the forced problem, the minimal one from monotone
//! iteration and a second one from deflated Newton, and the integral
//! identity between them.
//!
//!     cargo run --release --example identity -- [resolution]

use threshold_lab::analysis::{check_duality_identity, evaluate_identity, IdentityForm};
use threshold_lab::discrete::{FieldPair, Model};
use threshold_lab::elliptic::{lambda_star, solve_monotone, solve_seeded, MonotoneOptions, NewtonOptions};
use threshold_lab::problem::{DomainSpec, ExponentPair, ForcingSpec, ProblemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let res = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(256);
    let spec = ProblemSpec::homogeneous(ExponentPair::new(2.0, 2.0)?, DomainSpec::unit_disk())
        .with_forcing(ForcingSpec::uniform(1.0));
    let model = Model::new(spec, res)?;
    let search = lambda_star(&model, (1e-2, 1e2), 0.02, &MonotoneOptions::default())?;
    let m = model.with_lambda(0.5 * search.bracket.0);
    println!("λ = {:.6}", m.lambda());

    let (minimal, _) = solve_monotone(&m, &FieldPair::zeros(m.len()), &MonotoneOptions::default())?;
    let second = solve_seeded(&m, std::slice::from_ref(&minimal.pair), &NewtonOptions::default())?;
    println!("minimal: sup {:.8}, residual {:.2e}", minimal.sup_norm(), minimal.residual_norm);
    println!("second:  sup {:.8}, residual {:.2e}", second.sup_norm(), second.residual_norm);

    let c = check_duality_identity(&m, &minimal.pair, &second.pair, &IdentityForm::Plain, 1e-10)?;
    println!("identity: lhs {:.12e}, rhs {:.12e}, gap {:.2e} (scale {:.2e})", c.lhs, c.rhs, c.gap, c.scale);

    println!("\ngap against the residual of the minimal solution:");
    for tol in [1e-5, 1e-6, 1e-7, 1e-8] {
        let opts = MonotoneOptions {
            steady_tol: tol,
            ..Default::default()
        };
        let (loose, _) = solve_monotone(&m, &FieldPair::zeros(m.len()), &opts)?;
        let c = evaluate_identity(&m, &loose.pair, &second.pair, &IdentityForm::Plain);
        println!("  residual {:.3e}  gap {:.3e}", loose.residual_norm, c.gap);
    }

    let shifted = FieldPair::new(
        second.pair.u.iter().map(|x| x + 0.1).collect(),
        second.pair.v.iter().map(|x| x + 0.1).collect(),
    );
    let ctrl = evaluate_identity(&m, &second.pair, &shifted, &IdentityForm::Plain);
    println!("\nperturbed by +0.1: lhs {:.4e} < 0 < rhs {:.4e}", ctrl.lhs, ctrl.rhs);
    Ok(())
}
