//! Acceptance gate. Each test prints one `ACCEPT <name> PASS|FAIL` line to
//! stderr (bypassing the test harness capture) before asserting.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use threshold_lab::analysis::{check_duality_identity, evaluate_identity, power_mean_check, IdentityForm};
use threshold_lab::discrete::{build_grid, build_laplacian, dirichlet_energy, FieldPair, Model};
use threshold_lab::elliptic::{
    lambda_star, shooting_oracle, solve_monotone, solve_seeded, Equilibrium, MonotoneOptions, NewtonOptions,
    ShootingOptions, STEADY_TOL,
};
use threshold_lab::lab::{
    boundary_row_residual, cli, lambda_star_experiment, robin_experiment, threshold_experiment, trajectory_checks,
    Direction, ThresholdOptions, ENERGY_TOL, STEP_TOL,
};
use threshold_lab::parabolic::{evolve, evolve_ordered, IntegratorConfig, Outcome};
use threshold_lab::problem::{BoundarySpec, DomainSpec, ExponentPair, ForcingSpec, ProblemSpec};

fn report(name: &str, pass: bool, elapsed: Duration, detail: &str) {
    let line = format!(
        "ACCEPT {name:<22} {} ({:.2} s) {detail}\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn disk33(res: usize) -> Model {
    let spec = ProblemSpec::homogeneous(ExponentPair::new(3.0, 3.0).unwrap(), DomainSpec::unit_disk());
    Model::new(spec, res).unwrap()
}

fn forced_disk22(res: usize) -> Model {
    let spec = ProblemSpec::homogeneous(ExponentPair::new(2.0, 2.0).unwrap(), DomainSpec::unit_disk())
        .with_forcing(ForcingSpec::uniform(1.0));
    Model::new(spec, res).unwrap()
}

fn equilibrium(model: &Model) -> Equilibrium {
    solve_seeded(model, &[], &NewtonOptions::default()).unwrap()
}

#[test]
fn power_inequality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut violations, mut equality) = (0usize, 0.0f64);
    let n = 1_000_000;
    for _ in 0..n {
        let x = 10f64.powf(rng.gen_range(-6.0..=6.0));
        let y = 10f64.powf(rng.gen_range(-6.0..=6.0));
        let a: f64 = rng.gen_range(f64::EPSILON..1.0);
        let r = power_mean_check(x, y, a).unwrap();
        // Recomputed here so the library's own comparison is not the only judge.
        let lhs = x.powf(a) + y.powf(a);
        let rhs = 2f64.powf(1.0 - a) * (x + y).powf(a);
        if !r.holds || lhs > rhs * (1.0 + 1e-12) {
            violations += 1;
        }
        // x = y: both sides equal 2 x^a.
        let e = power_mean_check(x, x, a).unwrap();
        let exact = 2.0 * x.powf(a);
        equality = equality.max((e.lhs - e.rhs).abs() / exact).max((e.lhs - exact).abs() / exact);
    }
    let elapsed = start.elapsed();
    let pass = violations == 0 && equality <= 1e-14 && elapsed < Duration::from_secs(5);
    report(
        "power_inequality",
        pass,
        elapsed,
        &format!("{n} triples, violations {violations} (slack 1e-12), equality error {equality:.2e} (tol 1e-14), limit 5 s"),
    );
    assert!(pass);
}

#[test]
fn discrete_duality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut grids = 0;
    for (domain, res) in [
        (DomainSpec::unit_disk(), 512),
        (DomainSpec::ball(3, 1.0), 512),
        (DomainSpec::rectangle(1.0, 1.0), 128),
        (DomainSpec::rectangle(2.0, 1.0), 96),
    ] {
        for bc in [BoundarySpec::Dirichlet, BoundarySpec::Robin { beta: 1.0 }] {
            let grid = build_grid(&domain, bc, res).unwrap();
            let op = build_laplacian(&grid);
            grids += 1;
            for _ in 0..100 {
                let x: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let y: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let gap = dirichlet_energy(&grid, &op, &x, &y) - dirichlet_energy(&grid, &op, &y, &x);
                let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                worst = worst.max(gap.abs() / (nx * ny));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-12 && elapsed < Duration::from_secs(5);
    report(
        "discrete_duality",
        pass,
        elapsed,
        &format!("{grids} grids x 100 pairs, worst |<Ax,y>-<x,Ay>|/(|x||y|) {worst:.2e} (tol 1e-12), limit 5 s"),
    );
    assert!(pass);
}

#[test]
fn equilibrium_vs_oracle() {
    let start = Instant::now();
    let e = ExponentPair::new(3.0, 3.0).unwrap();
    let oracle = shooting_oracle(e, 2, 1.0, BoundarySpec::Dirichlet, &ShootingOptions::default()).unwrap();
    let mut errs = Vec::new();
    let mut residual = f64::NAN;
    for res in [128, 256, 512] {
        let eq = equilibrium(&disk33(res));
        residual = eq.residual_norm;
        errs.push((eq.sup_norm() - oracle.sup_norm()).abs() / oracle.sup_norm());
    }
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let elapsed = start.elapsed();
    let pass = residual <= 1e-10
        && errs[2] <= 1e-3
        && ratios.iter().all(|r| (r / 4.0 - 1.0).abs() <= 0.25)
        && elapsed < Duration::from_secs(30);
    report(
        "equilibrium_vs_oracle",
        pass,
        elapsed,
        &format!(
            "residual {residual:.2e} (tol 1e-10), sup error {:.2e} (tol 1e-3), refinement ratios {:.3} {:.3} (4 +- 25%), limit 30 s",
            errs[2], ratios[0], ratios[1]
        ),
    );
    assert!(pass);
}

#[test]
fn threshold_bracket() {
    let start = Instant::now();
    let model = disk33(512);
    let eq = equilibrium(&model);
    let th = threshold_experiment(&model, &eq, &ThresholdOptions::default()).unwrap();
    let run_of = |a: f64| th.runs.iter().find(|r| r.parameter == a).unwrap();
    let cfg = IntegratorConfig::default();

    let low = evolve(&model, &eq.pair.scaled(0.5), &cfg).unwrap();
    let rows = low.record.rows();
    let sup0 = rows[0].sup_u.max(rows[0].sup_v);
    let sup_end = low.final_state.sup_norm();
    let decay_ok = run_of(0.5).outcome.is_decay() && low.outcome.is_decay() && sup_end <= 1e-8 * sup0;

    let (blow_ok, t_blow, sup_stop) = match run_of(1.5).outcome {
        Outcome::BlowUp { t_est, sup_at_stop } => (t_est.is_finite() && sup_at_stop >= 1e6, t_est, sup_at_stop),
        _ => (false, f64::NAN, f64::NAN),
    };
    let (lo, hi) = th.bracket.unwrap_or((f64::NAN, f64::NAN));
    let bracket_ok = hi - lo <= 0.02 && lo >= 0.97 && hi <= 1.03;
    let elapsed = start.elapsed();
    let pass = decay_ok && blow_ok && bracket_ok && elapsed < Duration::from_secs(300);
    report(
        "threshold_bracket",
        pass,
        elapsed,
        &format!(
            "0.5: {} final/initial sup {:.1e} (tol 1e-8); 1.5: {} t {t_blow:.5} sup {sup_stop:.2e} (>= 1e6); \
             bracket [{lo:.6}, {hi:.6}] width {:.4} (<= 0.02 inside [0.97, 1.03]), limit 300 s",
            run_of(0.5).outcome.label(),
            sup_end / sup0,
            run_of(1.5).outcome.label(),
            hi - lo
        ),
    );
    assert!(pass);
}

#[test]
fn monotone_and_squeeze() {
    let start = Instant::now();
    let model = disk33(512);
    let eq = equilibrium(&model);
    let cfg = IntegratorConfig::default();
    let down = trajectory_checks(&model, &eq.pair.scaled(0.5), Some(&eq.pair), Direction::Nonincreasing, &cfg).unwrap();
    let up = trajectory_checks(&model, &eq.pair.scaled(1.5), None, Direction::Nondecreasing, &cfg).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut violations = 0;
    let mut pairs = 0;
    for _ in 0..10 {
        let a: f64 = rng.gen_range(0.2..1.4);
        let da: f64 = rng.gen_range(0.01..0.2);
        let noise: Vec<f64> = (0..model.len()).map(|_| rng.gen_range(0.0..0.05)).collect();
        let low = FieldPair::new(
            eq.pair.u.iter().zip(&noise).map(|(u, n)| a * u * (1.0 - n)).collect(),
            eq.pair.v.iter().map(|v| a * v).collect(),
        );
        let high = FieldPair::new(
            eq.pair.u.iter().map(|u| (a + da) * u).collect(),
            eq.pair.v.iter().zip(&noise).map(|(v, n)| (a + da) * v * (1.0 + n)).collect(),
        );
        assert!(low.le_with_tol(&high, 0.0));
        let rep = evolve_ordered(&model, &low, &high, &cfg, 0.0).unwrap();
        pairs += 1;
        if rep.violation.is_some() {
            violations += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = down.wrong_way <= STEP_TOL
        && down.squeeze_excess <= STEP_TOL
        && up.wrong_way <= STEP_TOL
        && up.squeeze_excess <= STEP_TOL
        && violations == 0;
    report(
        "monotone_and_squeeze",
        pass,
        elapsed,
        &format!(
            "0.5 run wrong-way {:.1e} squeeze {:.1e}; 1.5 run wrong-way {:.1e} (tol {STEP_TOL:e}); ordered pairs {pairs}, violations {violations}",
            down.wrong_way, down.squeeze_excess, up.wrong_way
        ),
    );
    assert!(pass);
}

#[test]
fn energy_machinery() {
    let start = Instant::now();
    let model = disk33(512);
    let eq = equilibrium(&model);
    let cfg = IntegratorConfig::default();
    let down = trajectory_checks(&model, &eq.pair.scaled(0.5), Some(&eq.pair), Direction::Nonincreasing, &cfg).unwrap();
    let up = trajectory_checks(&model, &eq.pair.scaled(1.5), None, Direction::Nondecreasing, &cfg).unwrap();
    let energy_ok = down.energy_increase <= ENERGY_TOL && up.energy_increase <= ENERGY_TOL;

    // Independent value of the constant for p = q = 3 on the unit disk: 1/π.
    let c_ok = (up.record.bound_constant() - std::f64::consts::FRAC_1_PI).abs() <= 1e-12;

    // Recomputed from the rows: Δφ/Δt against −2E(0) + Cφ^γ − tol_b.
    let rows = up.record.rows();
    let e0 = rows[0].energy;
    let c = std::f64::consts::FRAC_1_PI;
    let mut worst_bound = f64::NEG_INFINITY;
    for (k, row) in rows.iter().enumerate().skip(1) {
        let lhs = row.dphi_lhs;
        let bound = -2.0 * e0 + c * row.phi.powf(2.0) - up.record.dphi_identity_residual(k);
        worst_bound = worst_bound.max((bound - lhs) / bound.abs().max(1.0));
    }
    let bound_ok = worst_bound <= 0.0;

    let halving = |alpha: f64, t: f64| -> Vec<f64> {
        let r: Vec<f64> = [1.0, 0.5, 0.25]
            .iter()
            .map(|&f| {
                evolve(&model, &eq.pair.scaled(alpha), &cfg.refined(f))
                    .unwrap()
                    .record
                    .dphi_identity_residual_at(t)
                    .unwrap()
            })
            .collect();
        r.windows(2).map(|w| w[0] / w[1]).collect()
    };
    let up_ratios = halving(1.5, 0.02);
    let down_ratios = halving(0.5, 0.5);
    let ratio_ok = up_ratios.iter().chain(&down_ratios).all(|r| (r / 2.0 - 1.0).abs() <= 0.3);

    let elapsed = start.elapsed();
    let pass = energy_ok && c_ok && bound_ok && ratio_ok;
    report(
        "energy_machinery",
        pass,
        elapsed,
        &format!(
            "max dE/max(1,|E0|) {:.1e} / {:.1e} (tol {ENERGY_TOL:e}); C {:.6}; worst bound shortfall {worst_bound:.2e} (<= 0); \
             residual halving ratios 1.5@t=0.02 {:.3} {:.3}, 0.5@t=0.5 {:.3} {:.3} (2 +- 30%)",
            down.energy_increase,
            up.energy_increase,
            up.record.bound_constant(),
            up_ratios[0],
            up_ratios[1],
            down_ratios[0],
            down_ratios[1]
        ),
    );
    assert!(pass);
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[test]
fn equilibrium_identity() {
    let start = Instant::now();
    let model = forced_disk22(256);
    let search = lambda_star(&model, (1e-2, 1e2), 0.02, &MonotoneOptions::default()).unwrap();
    let m = model.with_lambda(0.5 * search.bracket.0);
    let zero = FieldPair::zeros(m.len());
    let (minimal, _) = solve_monotone(&m, &zero, &MonotoneOptions::default()).unwrap();
    let second = solve_seeded(&m, std::slice::from_ref(&minimal.pair), &NewtonOptions::default());

    let (detail, pass) = match second {
        Ok(second) if second.pair.minus(&minimal.pair).sup_norm() > 1e-3 * minimal.sup_norm() => {
            let c = check_duality_identity(&m, &minimal.pair, &second.pair, &IdentityForm::Plain, STEADY_TOL).unwrap();
            let scale = minimal.sup_norm().max(second.sup_norm()).max(c.scale);
            let gap_ok = c.gap <= 10.0 * STEADY_TOL * scale;

            let (mut res, mut gaps) = (Vec::new(), Vec::new());
            for tol in [1e-5, 1e-6, 1e-7, 1e-8] {
                let opts = MonotoneOptions {
                    steady_tol: tol,
                    ..Default::default()
                };
                let (loose, _) = solve_monotone(&m, &zero, &opts).unwrap();
                res.push(loose.residual_norm);
                gaps.push(evaluate_identity(&m, &loose.pair, &second.pair, &IdentityForm::Plain).gap);
            }
            let s = slope(&res, &gaps);
            let slope_ok = (s - 1.0).abs() <= 0.3;

            let shifted = FieldPair::new(
                second.pair.u.iter().map(|x| x + 0.1).collect(),
                second.pair.v.iter().map(|x| x + 0.1).collect(),
            );
            let ctrl = evaluate_identity(&m, &second.pair, &shifted, &IdentityForm::Plain);
            let ctrl_ok = ctrl.gap > 1e3 * 10.0 * STEADY_TOL * ctrl.scale.max(1.0);
            (
                format!(
                    "sups {:.4} / {:.4}; gap {:.2e} (tol {:.2e}); slope {s:.3} over residuals {:.1e}..{:.1e} (1 +- 0.3); \
                     perturbed gap {:.3e}",
                    minimal.sup_norm(),
                    second.sup_norm(),
                    c.gap,
                    10.0 * STEADY_TOL * scale,
                    res[0],
                    res[3],
                    ctrl.gap
                ),
                gap_ok && slope_ok && ctrl_ok,
            )
        }
        _ => {
            let c = evaluate_identity(&m, &minimal.pair, &minimal.pair, &IdentityForm::Plain);
            let shifted = minimal.pair.plus(&FieldPair::new(vec![0.1; m.len()], vec![0.1; m.len()]));
            let ctrl = evaluate_identity(&m, &minimal.pair, &shifted, &IdentityForm::Plain);
            (
                format!("no second solution; trivial gap {:.1e}, perturbed gap {:.3e}", c.gap, ctrl.gap),
                c.gap == 0.0 && ctrl.gap > 0.0,
            )
        }
    };
    report("equilibrium_identity", pass, start.elapsed(), &detail);
    assert!(pass);
}

#[test]
fn extremal_lambda() {
    let start = Instant::now();
    let model = forced_disk22(256);
    let rep = lambda_star_experiment(&model, (1e-2, 1e2), 0.02, &IntegratorConfig::default()).unwrap();
    let (lo, hi) = rep.search.bracket;
    let width = (hi - lo) / hi;
    let steady = matches!(rep.below.outcome, Outcome::SteadyConvergence { .. });
    let dist = rep.distance_to_minimal.unwrap_or(f64::INFINITY);
    let blow = rep.above.outcome.is_blow_up();
    let elapsed = start.elapsed();
    let pass = width <= 0.05 && steady && dist <= 1e-4 && blow && elapsed < Duration::from_secs(600);
    report(
        "extremal_lambda",
        pass,
        elapsed,
        &format!(
            "bracket [{lo:.5}, {hi:.5}] relative width {width:.4} (<= 0.05); 0.5*lo: {} distance {dist:.2e} (tol 1e-4); \
             2*hi: {} at t {:.4}, limit 600 s",
            rep.below.outcome.label(),
            rep.above.outcome.label(),
            rep.above.outcome.t_end()
        ),
    );
    assert!(pass);
}

#[test]
fn robin_threshold() {
    let start = Instant::now();
    let spec = ProblemSpec::homogeneous(ExponentPair::new(3.0, 3.0).unwrap(), DomainSpec::unit_disk())
        .with_boundary(BoundarySpec::Robin { beta: 1.0 });
    let model = Model::new(spec, 512).unwrap();
    let opts = ThresholdOptions {
        width: None,
        ..Default::default()
    };
    let rep = robin_experiment(&model, &opts).unwrap();
    let eq = rep.equilibrium.as_ref().expect("Robin equilibrium");
    let rows = boundary_row_residual(&model, &eq.pair);
    let oracle_bc = rep.oracle_boundary_residual.unwrap_or(f64::INFINITY);
    let th = rep.threshold.as_ref().unwrap();
    let at = |a: f64| &th.runs.iter().find(|r| r.parameter == a).unwrap().outcome;
    let elapsed = start.elapsed();
    let pass = eq.residual_norm <= 1e-10
        && rows <= 1e-8
        && oracle_bc <= 1e-8
        && at(0.5).is_decay()
        && at(1.5).is_blow_up();
    report(
        "robin_threshold",
        pass,
        elapsed,
        &format!(
            "residual {:.2e} (tol 1e-10); boundary rows {rows:.1e}, oracle U'+U {oracle_bc:.1e} (tol 1e-8); 0.5: {}, 1.5: {}",
            eq.residual_norm,
            at(0.5).label(),
            at(1.5).label()
        ),
    );
    assert!(pass);
}

type CliRun = (i32, Vec<u8>, Vec<(String, Vec<u8>)>);

fn run_cli(args: &[&str], out: &Path) -> CliRun {
    let mut full = vec!["threshold-lab"];
    full.extend_from_slice(args);
    let dir = out.to_str().unwrap();
    full.extend_from_slice(&["--out", dir, "--seed", "5"]);
    let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
    let code = cli::run(full, &mut stdout, &mut stderr);
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    (code, stdout, files)
}

#[test]
fn deterministic_outputs() {
    let start = Instant::now();
    let commands: [&[&str]; 7] = [
        &["verify"],
        &["steady", "--resolution", "256"],
        &["evolve", "--resolution", "256", "--alpha", "1.5"],
        &["threshold", "--resolution", "256"],
        &["lambda-star", "--p", "2", "--q", "2", "--resolution", "128"],
        &["robin", "--bc", "robin:1", "--resolution", "256"],
        &["steady", "--geometry", "rect", "--resolution", "32", "--format", "csv"],
    ];
    let mut mismatched = Vec::new();
    let mut files = 0;
    for args in commands {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let first = run_cli(args, a.path());
        let second = run_cli(args, b.path());
        files += first.2.len();
        if first != second || first.2.is_empty() {
            mismatched.push(args.join(" "));
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatched.is_empty();
    report(
        "deterministic_outputs",
        pass,
        elapsed,
        &format!("{} commands run twice, {files} files compared byte for byte, mismatches {mismatched:?}", commands.len()),
    );
    assert!(pass);
}
