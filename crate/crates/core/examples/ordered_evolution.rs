//! Co-evolution of ordered initial data with a shared step sequence; the
//! scheme keeps the order at every step.
//!
//!     cargo run --release --example ordered_evolution -- [seed]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use threshold_lab::discrete::{FieldPair, Model};
use threshold_lab::elliptic::{solve_seeded, NewtonOptions};
use threshold_lab::parabolic::{evolve_ordered, IntegratorConfig};
use threshold_lab::problem::{DomainSpec, ExponentPair, ProblemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0u64);
    let spec = ProblemSpec::homogeneous(ExponentPair::new(3.0, 3.0)?, DomainSpec::unit_disk());
    let model = Model::new(spec, 256)?;
    let eq = solve_seeded(&model, &[], &NewtonOptions::default())?;
    let config = IntegratorConfig::default();

    let rep = evolve_ordered(&model, &eq.pair.scaled(0.3), &eq.pair.scaled(0.6), &config, 0.0)?;
    println!("0.3·(U,V) ≤ 0.6·(U,V): {} steps, violation {:?}, min gap {:.3e}", rep.steps, rep.violation, rep.min_gap);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..5 {
        let a: f64 = rng.gen_range(0.2..1.4);
        let noise: Vec<f64> = (0..model.len()).map(|_| rng.gen_range(0.0..0.05)).collect();
        let low = FieldPair::new(
            eq.pair.u.iter().zip(&noise).map(|(u, n)| a * u * (1.0 - n)).collect(),
            eq.pair.v.iter().map(|v| a * v).collect(),
        );
        let high = FieldPair::new(
            eq.pair.u.iter().map(|u| (a + 0.05) * u).collect(),
            eq.pair.v.iter().zip(&noise).map(|(v, n)| (a + 0.05) * v * (1.0 + n)).collect(),
        );
        let rep = evolve_ordered(&model, &low, &high, &config, 0.0)?;
        println!(
            "pair {k} (α ≈ {a:.3}): {:>5} steps to t = {:.4}, violation {:?}, outcomes {:?} / {:?}",
            rep.steps,
            rep.t_end,
            rep.violation.map(|v| v.step),
            rep.low_outcome.map(|o| o.label()),
            rep.high_outcome.map(|o| o.label())
        );
    }
    Ok(())
}
