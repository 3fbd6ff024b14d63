//! Config text, result JSON, trajectory CSV and snapshots, written to a
//! temporary directory through the same entry point the binary uses.
//!
//!     cargo run --release --example cli_formats

use std::fs;

use threshold_lab::lab::cli::run;
use threshold_lab::lab::format::read_trajectory_csv;
use threshold_lab::lab::{ExperimentResult, Snapshot};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("threshold-lab-example-{}", std::process::id()));
    fs::create_dir_all(&dir)?;
    let config = dir.join("run.conf");
    fs::write(&config, "# blow-up run on a coarse disk\np = 3\nq = 3\nresolution = 128\nalpha = 1.5\n")?;

    let (mut out, mut err) = (Vec::new(), Vec::new());
    let args = ["threshold-lab", "evolve", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    let code = run(args, &mut out, &mut err);
    println!("exit code {code}");

    let result = ExperimentResult::from_json(&fs::read_to_string(dir.join("result.json"))?)?;
    println!("outcome {} at t = {:?}", result.outcome, result.t_blowup_est);
    println!("config recorded in the result:\n{}", result.provenance.config);

    let rows = read_trajectory_csv(fs::read(dir.join("trajectory.csv"))?.as_slice())?;
    println!("{} trajectory rows, last sup {:.3e}", rows.len(), rows.last().map_or(f64::NAN, |r| r.sup_u));
    let snap = Snapshot::read(fs::read(dir.join("final.snap"))?.as_slice())?;
    println!("snapshot: {} nodes, geometry {}, bc {}", snap.pair.len(), snap.geometry, snap.bc);
    fs::remove_dir_all(&dir)?;
    Ok(())
}
