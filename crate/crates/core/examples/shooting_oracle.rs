//! Radial shooting for the steady system: center values, boundary data and
//! a few profile samples, for Dirichlet and Robin conditions.
//!
//!     cargo run --release --example shooting_oracle -- [p] [q] [N]

use threshold_lab::elliptic::{shooting_oracle, ShootingOptions};
use threshold_lab::problem::{BoundarySpec, ExponentPair};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let p = args.first().copied().unwrap_or(3.0);
    let q = args.get(1).copied().unwrap_or(p);
    let n = args.get(2).copied().unwrap_or(2.0) as usize;
    let e = ExponentPair::new(p, q)?;

    for bc in [
        BoundarySpec::Dirichlet,
        BoundarySpec::Robin { beta: 0.5 },
        BoundarySpec::Robin { beta: 1.0 },
        BoundarySpec::Robin { beta: 10.0 },
        BoundarySpec::Robin { beta: 100.0 },
    ] {
        let sol = shooting_oracle(e, n, 1.0, bc, &ShootingOptions::default())?;
        let [u, du, v, dv] = sol.boundary_values;
        println!(
            "{bc:<12} U(0) = {:.12}  V(0) = {:.12}  U(1) = {u:.3e}  U'(1) = {du:.6}  V(1) = {v:.3e}  V'(1) = {dv:.6}  residual {:.1e}",
            sol.center.0, sol.center.1, sol.boundary_residual
        );
    }

    let sol = shooting_oracle(e, n, 1.0, BoundarySpec::Dirichlet, &ShootingOptions::default())?;
    let radii = [0.0, 0.25, 0.5, 0.75, 1.0];
    println!("\n{:>6} {:>16} {:>16}", "r", "U", "V");
    for (r, y) in radii.iter().zip(sol.profile(&radii)?) {
        println!("{r:>6.2} {:>16.12} {:>16.12}", y[0], y[2]);
    }
    Ok(())
}
