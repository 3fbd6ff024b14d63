//! The property suite over a resolution ladder, then the same suite with a
//! slightly asymmetric operator, which the duality check must catch.
//!
//!     cargo run --release --example verify -- [seed]

use threshold_lab::lab::{verify_suite, VerifyOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0u64);
    let opts = VerifyOptions {
        seed,
        ..Default::default()
    };
    let report = verify_suite(&opts);
    for c in &report.checks {
        let res = c.resolution.map(|r| r.to_string()).unwrap_or_else(|| "-".into());
        println!("{:<5} {:<28} {:>5} {:>12.3e} (tol {:.1e})", if c.pass { "ok" } else { "FAIL" }, c.name, res, c.value, c.tol);
    }
    println!("suite passed: {}", report.passed());

    let broken = verify_suite(&VerifyOptions {
        broken_operator: true,
        ladder: vec![128],
        ..opts
    });
    let failed: Vec<&str> = broken.failures().map(|c| c.name.as_str()).collect();
    println!("with an asymmetric operator, failing checks: {failed:?}");
    Ok(())
}
