//! Positive equilibrium of the disk problem by seeded Newton, checked
//! against the radial shooting solution at several resolutions.
//!
//!     cargo run --release --example steady_state -- [p] [q]

use threshold_lab::discrete::Model;
use threshold_lab::elliptic::{shooting_oracle, solve_seeded, NewtonOptions};
use threshold_lab::problem::{BoundarySpec, DomainSpec, ExponentPair, ProblemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let p = args.first().copied().unwrap_or(3.0);
    let q = args.get(1).copied().unwrap_or(p);
    let exponents = ExponentPair::new(p, q)?;
    let spec = ProblemSpec::homogeneous(exponents, DomainSpec::unit_disk());

    let oracle = shooting_oracle(exponents, 2, 1.0, BoundarySpec::Dirichlet, &Default::default())?;
    println!(
        "shooting: U(0) = {:.15}, V(0) = {:.15}, boundary residual {:.2e}",
        oracle.center.0, oracle.center.1, oracle.boundary_residual
    );

    println!("{:>6} {:>12} {:>20} {:>12}", "cells", "residual", "sup", "rel. error");
    let mut prev: Option<f64> = None;
    for res in [64, 128, 256, 512, 1024] {
        let model = Model::new(spec, res)?;
        let eq = solve_seeded(&model, &[], &NewtonOptions::default())?;
        let err = (eq.sup_norm() - oracle.sup_norm()).abs() / oracle.sup_norm();
        let ratio = prev.map(|e| format!("  x{:.2}", e / err)).unwrap_or_default();
        println!("{res:>6} {:>12.3e} {:>20.15} {:>12.3e}{ratio}", eq.residual_norm, eq.sup_norm(), err);
        prev = Some(err);
    }
    Ok(())
}
