use proptest::prelude::*;

use threshold_lab::analysis::{evaluate_identity, IdentityForm};
use threshold_lab::discrete::{build_grid, build_laplacian, dirichlet_energy, solve_shifted, FieldPair, Model};
use threshold_lab::elliptic::{solve_monotone, MonotoneOptions};
use threshold_lab::lab::{RunConfig, Snapshot};
use threshold_lab::parabolic::{adapt_dt, step, IntegratorConfig};
use threshold_lab::problem::{BoundarySpec, DomainSpec, ExponentPair, ForcingSpec, ProblemSpec};

fn domains() -> impl Strategy<Value = DomainSpec> {
    prop_oneof![
        Just(DomainSpec::unit_disk()),
        Just(DomainSpec::ball(3, 1.0)),
        (0.5f64..2.0, 0.5f64..2.0).prop_map(|(w, h)| DomainSpec::rectangle(w, h)),
    ]
}

fn boundaries() -> impl Strategy<Value = BoundarySpec> {
    prop_oneof![
        Just(BoundarySpec::Dirichlet),
        (0.01f64..100.0).prop_map(|beta| BoundarySpec::Robin { beta }),
    ]
}

fn exponents() -> impl Strategy<Value = ExponentPair> {
    (1.1f64..4.0, 1.1f64..4.0).prop_map(|(p, q)| ExponentPair::new(p, q).unwrap())
}

/// `n` values in `[0, scale)` from a seed, without a 1000-element strategy.
fn field(n: usize, seed: u64, scale: f64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| scale * rng.gen::<f64>()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weighted_symmetry(domain in domains(), bc in boundaries(), res in 8usize..40, seed in any::<u64>()) {
        let grid = build_grid(&domain, bc, res).unwrap();
        let op = build_laplacian(&grid);
        let x: Vec<f64> = field(grid.len(), seed, 2.0).iter().map(|v| v - 1.0).collect();
        let y: Vec<f64> = field(grid.len(), seed ^ 1, 2.0).iter().map(|v| v - 1.0).collect();
        let gap = dirichlet_energy(&grid, &op, &x, &y) - dirichlet_energy(&grid, &op, &y, &x);
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(gap.abs() <= 1e-12 * nx * ny);
        prop_assert!(op.is_m_matrix());
    }

    #[test]
    fn shifted_solve_preserves_sign(domain in domains(), bc in boundaries(), res in 8usize..40,
                                    sigma in prop_oneof![Just(0.0), 1e-3f64..1e4], seed in any::<u64>()) {
        let grid = build_grid(&domain, bc, res).unwrap();
        let op = build_laplacian(&grid);
        let rhs = field(grid.len(), seed, 10.0);
        let x = solve_shifted(&op, sigma, &rhs).unwrap();
        prop_assert!(x.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn step_keeps_order(e in exponents(), res in 8usize..64, dt in 1e-5f64..1e-2,
                        scale in 0.0f64..3.0, seed in any::<u64>()) {
        let spec = ProblemSpec::homogeneous(e, DomainSpec::unit_disk());
        let model = Model::new(spec, res).unwrap();
        let n = model.len();
        let low = FieldPair::new(field(n, seed, scale), field(n, seed ^ 2, scale));
        let bump = FieldPair::new(field(n, seed ^ 3, 0.5), field(n, seed ^ 4, 0.5));
        let high = low.plus(&bump);
        let a = step(&model, &low, dt).unwrap();
        let b = step(&model, &high, dt).unwrap();
        prop_assert!(a.min_value() >= 0.0);
        prop_assert!(a.le_with_tol(&b, 1e-12 * b.sup_norm().max(1.0)));
    }

    #[test]
    fn adapted_step_in_range(e in exponents(), s in 0.0f64..1e4, seed in any::<u64>()) {
        let cfg = IntegratorConfig::default();
        let state = FieldPair::new(field(16, seed, s), field(16, seed ^ 5, s));
        let dt = adapt_dt(&state, e, &cfg);
        prop_assert!(dt >= cfg.dt_min && dt <= cfg.dt_max);
        let bigger = state.scaled(2.0);
        prop_assert!(adapt_dt(&bigger, e, &cfg) <= dt);
    }

    #[test]
    fn identity_is_antisymmetric(e in exponents(), res in 8usize..64, seed in any::<u64>()) {
        let spec = ProblemSpec::homogeneous(e, DomainSpec::unit_disk());
        let model = Model::new(spec, res).unwrap();
        let n = model.len();
        let a = FieldPair::new(field(n, seed, 2.0), field(n, seed ^ 6, 2.0));
        let b = FieldPair::new(field(n, seed ^ 7, 2.0), field(n, seed ^ 8, 2.0));
        let ab = evaluate_identity(&model, &a, &b, &IdentityForm::Plain);
        let ba = evaluate_identity(&model, &b, &a, &IdentityForm::Plain);
        prop_assert!((ab.lhs + ba.lhs).abs() <= 1e-12 * ab.scale.max(1.0));
        prop_assert!((ab.rhs + ba.rhs).abs() <= 1e-12 * ab.scale.max(1.0));
        let aa = evaluate_identity(&model, &a, &a, &IdentityForm::Plain);
        prop_assert_eq!(aa.gap, 0.0);
    }

    #[test]
    fn config_text_round_trip(p in 1.01f64..9.0, q in 1.01f64..9.0, res in 4usize..4096,
                              beta in prop::option::of(0.01f64..50.0), lambda in 0.0f64..10.0,
                              alphas in prop::collection::vec(0.0f64..3.0, 0..4), seed in any::<u64>()) {
        let mut c = RunConfig { p, q, resolution: res, lambda, alpha: alphas, seed, ..RunConfig::default() };
        if let Some(beta) = beta {
            c.bc = BoundarySpec::Robin { beta };
        }
        let text = c.canonical_text();
        let back = RunConfig::from_text(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.canonical_text(), text);
    }

    #[test]
    fn snapshot_round_trip(e in exponents(), res in 4usize..64, bc in boundaries(), seed in any::<u64>()) {
        let spec = ProblemSpec::homogeneous(e, DomainSpec::unit_disk()).with_boundary(bc);
        let model = Model::new(spec, res).unwrap();
        let pair = FieldPair::new(field(model.len(), seed, 1e3), field(model.len(), seed ^ 9, 1e-3));
        let snap = Snapshot::of(&model, &pair);
        let mut buf = Vec::new();
        snap.write(&mut buf).unwrap();
        let back = Snapshot::read(buf.as_slice()).unwrap();
        prop_assert!(back.matches(&model));
        prop_assert_eq!(back, snap);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn monotone_iterates_bounded_by_larger_forcing(lam in 0.05f64..2.0, extra in 0.01f64..1.0) {
        let spec = ProblemSpec::homogeneous(ExponentPair::new(2.0, 2.0).unwrap(), DomainSpec::unit_disk())
            .with_forcing(ForcingSpec::uniform(lam));
        let small = Model::new(spec, 48).unwrap();
        let large = small.with_lambda(lam + extra);
        let zero = FieldPair::zeros(small.len());
        let (a, _) = solve_monotone(&small, &zero, &MonotoneOptions::default()).unwrap();
        let (b, _) = solve_monotone(&large, &zero, &MonotoneOptions::default()).unwrap();
        prop_assert!(a.pair.min_value() > 0.0);
        prop_assert!(a.pair.le_with_tol(&b.pair, 1e-9));
    }
}
