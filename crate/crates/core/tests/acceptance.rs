//! End-to-end acceptance suite. Each test covers one numbered claim about
//! the engine, checks it at the stated tolerance, and prints a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).

mod common;

use std::time::Instant;

use intervention::equilibrium::{
    find_intervention_equilibrium, supportable, supportable_set, supports, strongly_supports,
};
use intervention::mechanisms::{affine, compute_affine_rates, max_punishment, verify_prop4_conditions};
use intervention::models::{
    random_access_game, robustness_experiment, BenefitFunction, RandomAccessSpec,
};
use intervention::numerics::{partial_derivative, unit_low_discrepancy, FdSpec};
use intervention::{ActionProfile, Error, GridSpec, Player};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{build_game, conformant_finite_spec, profile_index, BruteForce, PROFILES};

/// Two-user random-access game with unit peak rates and the given benefit.
fn unit_access_game(benefit: BenefitFunction) -> intervention::InterventionGame {
    let spec = RandomAccessSpec::new(vec![1.0, 1.0], vec![benefit.clone(), benefit]).unwrap();
    random_access_game(&spec).unwrap()
}

/// Twenty deterministic strictly interior two-user targets.
fn twenty_targets() -> Vec<ActionProfile> {
    (0..20)
        .map(|k| {
            let t = f64::from(k) / 19.0;
            ActionProfile::from(vec![0.05 + 0.9 * t, 0.95 - 0.85 * t])
        })
        .collect()
}

/// Master seed for the generated finite games; criteria 4 and 5 must draw
/// identical games, so both go through this.
fn fifty_finite_specs() -> Vec<intervention::models::FiniteTabulatedSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_2026);
    (0..50).map(|_| conformant_finite_spec(&mut rng)).collect()
}

#[test]
fn acceptance_01_every_profile_is_supportable() {
    let start = Instant::now();
    let game = unit_access_game(BenefitFunction::Identity);
    for resolution in [11usize, 101] {
        let grid = GridSpec::new(resolution);
        let set = supportable_set(&game, &grid).unwrap();
        assert_eq!(
            set.len(),
            resolution * resolution,
            "every {resolution}x{resolution} grid profile must be supportable"
        );
    }
    for a in [[0.0, 0.0], [1.0, 1.0], [0.5, 0.5], [0.0, 1.0]] {
        assert!(supportable(&game, &ActionProfile::from(&a[..]), &GridSpec::new(101)).unwrap());
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10 s");
    println!("acceptance 1 (supportable set covers the whole action space): PASS");
}

#[test]
fn acceptance_02_affine_rates_match_reciprocal_targets() {
    let benefits = [
        BenefitFunction::Identity,
        BenefitFunction::power(3.0).unwrap(),
        BenefitFunction::power(0.5).unwrap(),
    ];
    for benefit in benefits {
        let game = unit_access_game(benefit.clone());
        for target in twenty_targets() {
            let rates = compute_affine_rates(&game, &target).unwrap();
            for (i, rate) in rates.iter().enumerate() {
                let expected = 1.0 / target.get(i);
                assert!(
                    (rate - expected).abs() <= 1e-6,
                    "benefit {benefit}, target {target}: rate {rate} vs {expected}",
                );
            }
        }
    }
    println!("acceptance 2 (affine rates equal reciprocal targets): PASS");
}

#[test]
fn acceptance_03_affine_design_verifies_and_supports() {
    let start = Instant::now();
    let game = unit_access_game(BenefitFunction::Identity);
    let grid = GridSpec::new(1001);
    for target in twenty_targets() {
        let rates = compute_affine_rates(&game, &target).unwrap();
        let report = verify_prop4_conditions(&game, &target, &rates).unwrap();
        assert!(report.passed, "second-order checks must pass at {target}:\n{report}");
        let mechanism = affine(target.clone(), rates, game.bounds()).unwrap();
        let support = supports(&game, &mechanism, &target, &grid).unwrap();
        assert!(support.supported, "target {target} must be supported:\n{support}");
        assert!(
            support.max_gain() <= 1e-9,
            "target {target}: deviation gain {}",
            support.max_gain()
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}, budget 30 s");
    println!("acceptance 3 (affine design passes checks and supports targets): PASS");
}

#[test]
fn acceptance_04_supportable_set_equals_brute_force_union() {
    let start = Instant::now();
    let grid = GridSpec::new(3);
    for (g, spec) in fifty_finite_specs().iter().enumerate() {
        let game = build_game(spec);
        let set = supportable_set(&game, &grid).unwrap();
        let mut library = [false; PROFILES];
        for a in &set {
            library[profile_index(a.as_slice())] = true;
        }
        let (brute, _) = BruteForce::new(spec).union_and_best();
        assert_eq!(
            library, brute,
            "game {g}: supportable set disagrees with the mechanism-enumeration union"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}, budget 5 min");
    println!("acceptance 4 (supportable set equals brute-force mechanism union): PASS");
}

#[test]
fn acceptance_05_equilibrium_value_equals_brute_force_optimum() {
    let grid = GridSpec::new(3);
    for (g, spec) in fifty_finite_specs().iter().enumerate() {
        let game = build_game(spec);
        let (_, brute_best) = BruteForce::new(spec).union_and_best();
        match find_intervention_equilibrium(&game, &grid) {
            Ok(result) => {
                let best = brute_best.unwrap_or_else(|| {
                    panic!("game {g}: library found an equilibrium, brute force found none")
                });
                assert!(
                    (result.manager_value - best).abs() <= 1e-12,
                    "game {g}: library value {} vs brute-force {best}",
                    result.manager_value
                );
            }
            Err(Error::NoSupportableProfile) => {
                assert!(
                    brute_best.is_none(),
                    "game {g}: brute force found value {brute_best:?}, library found none"
                );
            }
            Err(other) => panic!("game {g}: unexpected error {other}"),
        }
    }
    println!("acceptance 5 (equilibrium value equals brute-force optimum): PASS");
}

#[test]
fn acceptance_06_random_access_equilibrium_value() {
    let game = unit_access_game(BenefitFunction::Identity);
    let result = find_intervention_equilibrium(&game, &GridSpec::new(11)).unwrap();
    assert!(
        (result.manager_value - 1.0).abs() <= 1e-6,
        "manager value {}",
        result.manager_value
    );
    assert!(
        result.profile.get(0).abs() <= 1e-12 && (result.profile.get(1) - 1.0).abs() <= 1e-12,
        "expected the first corner maximizer in scan order, got {}",
        result.profile
    );
    assert!(result.verification.supported);
    println!("acceptance 6 (random-access equilibrium value 1.0 at the silent/full corner): PASS");
}

#[test]
fn acceptance_07_support_verdicts_are_ordinally_invariant() {
    // the three games apply strictly increasing transforms to the same base
    // payoffs, so best-response comparisons (and hence verdicts) must agree
    let games = [
        unit_access_game(BenefitFunction::Identity),
        unit_access_game(BenefitFunction::power(3.0).unwrap()),
        unit_access_game(BenefitFunction::saturating_exp(1.0).unwrap()),
    ];
    let grid = GridSpec::new(101);
    let targets: Vec<ActionProfile> = (0..10)
        .map(|k| {
            let t = f64::from(k);
            ActionProfile::from(vec![0.1 + 0.08 * t, 0.85 - 0.07 * t])
        })
        .collect();
    for target in targets {
        let rates: Vec<f64> = target.as_slice().iter().map(|t| 1.0 / t).collect();
        let punish = max_punishment(target.clone(), games[0].bounds()).unwrap();
        let ramp = affine(target.clone(), rates, games[0].bounds()).unwrap();
        for mechanism in [&punish, &ramp] {
            let verdicts: Vec<bool> = games
                .iter()
                .map(|g| supports(g, mechanism, &target, &grid).unwrap().supported)
                .collect();
            assert!(
                verdicts.windows(2).all(|w| w[0] == w[1]),
                "verdicts differ across monotone transforms at {target} under {}: {verdicts:?}",
                mechanism.label()
            );
        }
    }
    println!("acceptance 7 (support verdicts invariant under monotone payoff transforms): PASS");
}

#[test]
fn acceptance_08_pricing_breaks_where_jamming_holds() {
    let families = vec![
        vec![BenefitFunction::Identity, BenefitFunction::Identity],
        vec![
            BenefitFunction::power(3.0).unwrap(),
            BenefitFunction::power(3.0).unwrap(),
        ],
    ];
    let target = ActionProfile::from(vec![0.5, 0.5]);
    let report =
        robustness_experiment(&target, &[1.0, 1.0], &families, &GridSpec::new(1001)).unwrap();
    assert_eq!(report.rates, vec![2.0, 2.0]);
    assert_eq!(report.fixed_prices, vec![1.0, 1.0]);

    let identity = &report.rows[0];
    assert!(
        identity.fixed_prices.max_gain() <= 1e-9,
        "prices designed for the true benefits must support: gain {}",
        identity.fixed_prices.max_gain()
    );
    let cubic = &report.rows[1];
    let gain = cubic.fixed_prices.max_gain();
    assert!(
        gain >= 0.23,
        "mis-specified prices must leave a large deviation gain, got {gain}"
    );
    assert!(
        (gain - 0.234375).abs() <= 1e-9,
        "going silent nets exactly 0.234375, got {gain}"
    );
    for row in &report.rows {
        assert!(
            row.affine.max_gain() <= 1e-9,
            "the jamming ramp must hold under {}: gain {}",
            row.family,
            row.affine.max_gain()
        );
    }
    println!("acceptance 8 (mis-specified prices break, the jamming ramp holds): PASS");
}

#[test]
fn acceptance_09_maximum_punishment_is_not_strongly_supporting() {
    let game = unit_access_game(BenefitFunction::Identity);
    let target = ActionProfile::from(vec![0.5, 0.5]);
    let mechanism = max_punishment(target.clone(), game.bounds()).unwrap();
    let (unique, others) = strongly_supports(&game, &mechanism, &target, &GridSpec::new(21)).unwrap();
    assert!(!unique, "punishing every miss leaves other equilibria");
    assert!(
        others.iter().any(|b| {
            (b.get(0) - 0.5).abs() > 1e-9 && (b.get(1) - 0.5).abs() > 1e-9
        }),
        "expected a second equilibrium differing from the target in both coordinates, got {others:?}"
    );
    println!("acceptance 9 (maximum punishment admits other grid equilibria): PASS");
}

#[test]
fn acceptance_10_analytic_partials_match_finite_differences() {
    let spec = RandomAccessSpec::new(
        vec![1.5, 1.0],
        vec![BenefitFunction::power(3.0).unwrap(), BenefitFunction::Identity],
    )
    .unwrap();
    let game = random_access_game(&spec).unwrap();
    let bounds = [(0.0, 1.0); 3];
    let mut points = unit_low_discrepancy(3, 100);
    for (idx, point) in points.iter_mut().enumerate() {
        if idx % 4 == 0 {
            point[0] = 0.0; // exercise the right-sided scheme at the boundary
        }
    }
    for point in &points {
        for user in 0..2 {
            let f = |x: &[f64]| {
                game.utility(Player::User(user), &x[..1], &ActionProfile::from(&x[1..]))
                    .expect("in-space evaluation")
            };
            let oracle = game.oracle(Player::User(user));
            for dim in 0..3 {
                let fd = partial_derivative(f, point, dim, &bounds, FdSpec::default()).unwrap();
                let analytic = if dim == 0 {
                    oracle.manager_partial(&point[..1], &point[1..], 0).unwrap()
                } else {
                    oracle.user_partial(&point[..1], &point[1..], dim - 1).unwrap()
                };
                assert!(
                    (fd - analytic).abs() <= 1e-6,
                    "user {user}, dim {dim}, point {point:?}: fd {fd} vs analytic {analytic}"
                );
            }
        }
    }
    println!("acceptance 10 (analytic and finite-difference partials agree): PASS");
}
