//! Property suites shared by the `properties` and `acceptance` targets.
//!
//! Each suite runs a deterministic proptest runner for a given number of
//! cases and reports the first counterexample as an error string.

#![allow(dead_code)]

use hermfair::model::{
    herm_aware_utility, is_hermeneutically_fair, Allocation, AllocationMode, ConstraintSet,
    GapKind, Group, ModelParams, Population, UserRecord,
};
use hermfair::population::{
    beta_sample, read_population_csv, write_population_csv, ClickConfig, PopulationSpec,
    UptakeConfig,
};
use hermfair::scenario::{builtin_scenario, run_sweep_with_jobs, ScenarioId, UptakeVariant};
use hermfair::solver::{
    round_allocation, show_threshold, solve, threshold_rule, RoundingStrategy, SolveMode,
    SolveRequest,
};
use hermfair::stats::{chi2_independence, chi2_independence_uncorrected, wilson_interval, ContingencyTable};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CASES: u32 = 256;

pub type Suite = (&'static str, fn(u32) -> Result<(), String>);

pub const SUITES: &[Suite] = &[
    ("objective linearity", objective_linearity),
    ("gap antisymmetry", gap_antisymmetry),
    ("permutation invariance", permutation_invariance),
    ("scale invariance of the unconstrained decision set", scale_invariance),
    ("monotone dominance", monotone_dominance),
    ("uptake monotonicity of the show threshold", rho_monotonicity),
    ("feasibility anchor", feasibility_anchor),
    ("vertex sparsity and residual bound", vertex_sparsity),
    ("oracle dominance", oracle_dominance),
    ("unconstrained optimum equals enumeration", unconstrained_matches_enumeration),
    ("more constraints never help", more_constraints_never_help),
    ("rounding contract", rounding_contract),
    ("sampler range", sampler_range),
    ("population csv roundtrip", population_roundtrip),
    ("chi2 permutation invariance", chi2_permutation),
    ("chi2 and V under count scaling", chi2_scaling),
    ("wilson interval shape", wilson_shape),
    ("sweep determinism and parallelism independence", sweep_determinism),
];

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn err(e: hermfair::Error) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

/// Both groups present; probabilities kept off zero so every gap is defined.
pub fn arb_population(min: usize, max: usize) -> impl Strategy<Value = Population> {
    prop::collection::vec((any::<bool>(), 0.001..1.0f64, 0.001..1.0f64), min..=max).prop_map(|raw| {
        let users = raw
            .into_iter()
            .enumerate()
            .map(|(i, (b, p, rho))| {
                let group = match i {
                    0 => Group::A,
                    1 => Group::B,
                    _ if b => Group::A,
                    _ => Group::B,
                };
                UserRecord::new(group, p, rho).unwrap()
            })
            .collect();
        Population::new(users).unwrap()
    })
}

pub fn arb_params() -> impl Strategy<Value = ModelParams> {
    (
        0.05..1.0f64,
        0.0..0.3f64,
        0.0..0.3f64,
        (0.005..0.3f64, 0.005..0.3f64, 0.005..0.3f64, 0.005..0.3f64),
        0.01..0.5f64,
        0.0..1.0f64,
    )
        .prop_map(|(alpha, beta_a, beta_b, (theta_a, theta_b, omega_a, omega_b), xi, gamma)| ModelParams {
            alpha,
            beta_a,
            beta_b,
            theta_a,
            theta_b,
            omega_a,
            omega_b,
            xi,
            gamma,
        })
}

fn arb_constraints() -> impl Strategy<Value = ConstraintSet> {
    (any::<bool>(), any::<bool>(), any::<bool>())
        .prop_filter("at least one constraint", |(a, b, c)| *a || *b || *c)
        .prop_map(|(a, b, c)| {
            let mut set = ConstraintSet::none();
            set.set(GapKind::Parity, a);
            set.set(GapKind::Opportunity, b);
            set.set(GapKind::HermOpportunity, c);
            set
        })
}

/// Population with two fractional allocations of matching length.
fn arb_pop_allocs() -> impl Strategy<Value = (Population, Vec<f64>, Vec<f64>)> {
    arb_population(2, 40).prop_flat_map(|pop| {
        let n = pop.len();
        (
            Just(pop),
            prop::collection::vec(0.0..=1.0f64, n),
            prop::collection::vec(0.0..=1.0f64, n),
        )
    })
}

fn frac(d: Vec<f64>) -> Allocation {
    Allocation::new(d, AllocationMode::Fractional).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub fn objective_linearity(cases: u32) -> Result<(), String> {
    check(cases, (arb_pop_allocs(), arb_params(), 0.0..=1.0f64), |((pop, a, b), params, lambda)| {
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
        let ua = herm_aware_utility(&pop, &frac(a), &params).map_err(err)?;
        let ub = herm_aware_utility(&pop, &frac(b), &params).map_err(err)?;
        let um = herm_aware_utility(&pop, &frac(mix), &params).map_err(err)?;
        prop_assert!(close(um, lambda * ua + (1.0 - lambda) * ub, 1e-12), "{um} vs {ua} {ub}");
        Ok(())
    })
}

pub fn gap_antisymmetry(cases: u32) -> Result<(), String> {
    check(cases, arb_pop_allocs(), |(pop, a, _)| {
        let alloc = frac(a);
        let swapped = pop.with_swapped_groups();
        for kind in GapKind::ALL {
            let g = kind.gap(&pop, &alloc).map_err(err)?;
            let s = kind.gap(&swapped, &alloc).map_err(err)?;
            prop_assert!((g + s).abs() <= 1e-12, "{kind}: {g} vs {s}");
        }
        Ok(())
    })
}

pub fn permutation_invariance(cases: u32) -> Result<(), String> {
    let strategy = arb_pop_allocs().prop_flat_map(|(pop, a, _)| {
        let idx: Vec<usize> = (0..pop.len()).collect();
        (Just(pop), Just(a), Just(idx).prop_shuffle(), arb_params())
    });
    check(cases, strategy, |(pop, a, perm, params)| {
        let users: Vec<UserRecord> = perm.iter().map(|&i| pop.users()[i]).collect();
        let d: Vec<f64> = perm.iter().map(|&i| a[i]).collect();
        let pop2 = Population::new(users).map_err(err)?;
        let (a1, a2) = (frac(a), frac(d));
        let u1 = herm_aware_utility(&pop, &a1, &params).map_err(err)?;
        let u2 = herm_aware_utility(&pop2, &a2, &params).map_err(err)?;
        prop_assert!(close(u1, u2, 1e-12));
        for kind in GapKind::ALL {
            let g1 = kind.gap(&pop, &a1).map_err(err)?;
            let g2 = kind.gap(&pop2, &a2).map_err(err)?;
            prop_assert!((g1 - g2).abs() <= 1e-12);
        }
        Ok(())
    })
}

pub fn scale_invariance(cases: u32) -> Result<(), String> {
    check(cases, (arb_population(2, 40), arb_params(), 0.01..100.0f64), |(pop, params, c)| {
        let scaled = params.scaled(c);
        let d1 = threshold_rule(&pop, &params);
        let d2 = threshold_rule(&pop, &scaled);
        prop_assert_eq!(&d1, &d2);
        let u1 = herm_aware_utility(&pop, &d1, &params).map_err(err)?;
        let u2 = herm_aware_utility(&pop, &d2, &scaled).map_err(err)?;
        prop_assert!(close(u2, c * u1, 1e-12), "{u2} vs {}", c * u1);
        Ok(())
    })
}

pub fn monotone_dominance(cases: u32) -> Result<(), String> {
    check(cases, (arb_population(2, 60), arb_params()), |(pop, params)| {
        let d = threshold_rule(&pop, &params);
        let users = pop.users();
        for (i, x) in users.iter().enumerate() {
            for (j, y) in users.iter().enumerate() {
                if x.group == y.group && x.p >= y.p && x.rho >= y.rho {
                    prop_assert!(d.decisions()[i] >= d.decisions()[j]);
                }
            }
        }
        Ok(())
    })
}

pub fn rho_monotonicity(cases: u32) -> Result<(), String> {
    check(cases, (arb_params(), 0.0..=1.0f64, 0.0..=1.0f64, any::<bool>()), |(params, r1, r2, b)| {
        let group = if b { Group::A } else { Group::B };
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(show_threshold(group, hi, &params) <= show_threshold(group, lo, &params));
        Ok(())
    })
}

pub fn feasibility_anchor(cases: u32) -> Result<(), String> {
    check(cases, arb_population(2, 60), |pop| {
        for value in [0.0, 1.0] {
            let alloc = Allocation::constant(pop.len(), value).map_err(err)?;
            for kind in GapKind::ALL {
                prop_assert!(kind.gap(&pop, &alloc).map_err(err)?.abs() <= 1e-12);
            }
            prop_assert!(is_hermeneutically_fair(&pop, &alloc, 1e-12).map_err(err)?);
        }
        Ok(())
    })
}

pub fn vertex_sparsity(cases: u32) -> Result<(), String> {
    let tol = prop_oneof![Just(0.0), Just(1e-6), Just(0.01), Just(0.05)];
    check(cases, (arb_population(2, 80), arb_params(), arb_constraints(), tol), |(pop, params, c, tol)| {
        let c = c.with_tolerance(tol);
        let res = solve(&SolveRequest::new(&pop, params).with_constraints(c)).map_err(err)?;
        prop_assert!(res.allocation.fractional_count() <= c.active_count());
        prop_assert!(res.gaps.max_active(&c) <= tol + 1e-8);
        let free = solve(&SolveRequest::new(&pop, params)).map_err(err)?;
        prop_assert!(res.objective <= free.objective + 1e-9);
        Ok(())
    })
}

pub fn oracle_dominance(cases: u32) -> Result<(), String> {
    let tol = prop_oneof![Just(0.0), Just(0.02), Just(0.05), Just(0.1)];
    check(cases, (arb_population(2, 11), arb_params(), arb_constraints(), tol), |(pop, params, c, tol)| {
        let c = c.with_tolerance(tol);
        let lp = solve(&SolveRequest::new(&pop, params).with_constraints(c)).map_err(err)?;
        let oracle = solve(
            &SolveRequest::new(&pop, params)
                .with_constraints(c)
                .with_mode(SolveMode::BinaryExact),
        )
        .map_err(err)?;
        prop_assert!(lp.objective >= oracle.objective - 1e-9, "{} < {}", lp.objective, oracle.objective);
        Ok(())
    })
}

pub fn unconstrained_matches_enumeration(cases: u32) -> Result<(), String> {
    check(cases, (arb_population(2, 10), arb_params()), |(pop, params)| {
        let fast = solve(&SolveRequest::new(&pop, params)).map_err(err)?;
        let exact = solve(&SolveRequest::new(&pop, params).with_mode(SolveMode::BinaryExact)).map_err(err)?;
        prop_assert_eq!(fast.allocation, exact.allocation);
        Ok(())
    })
}

pub fn more_constraints_never_help(cases: u32) -> Result<(), String> {
    check(cases, (arb_population(2, 60), arb_params()), |(pop, params)| {
        let all = solve(&SolveRequest::new(&pop, params).with_constraints(ConstraintSet::all())).map_err(err)?;
        for kind in GapKind::ALL {
            let one = solve(&SolveRequest::new(&pop, params).with_constraints(ConstraintSet::only(kind)))
                .map_err(err)?;
            prop_assert!(all.objective <= one.objective + 1e-9);
        }
        Ok(())
    })
}

pub fn rounding_contract(cases: u32) -> Result<(), String> {
    let strategy = (prop::collection::vec(0.0..=1.0f64, 1..60), prop::collection::vec(any::<bool>(), 1..60), any::<u64>());
    check(cases, strategy, |(d, bits, seed)| {
        let a = frac(d.clone());
        let r1 = round_allocation(&a, RoundingStrategy::BernoulliSeeded(seed));
        let r2 = round_allocation(&a, RoundingStrategy::BernoulliSeeded(seed));
        prop_assert_eq!(&r1, &r2);
        prop_assert!(r1.is_integral());
        for (x, y) in d.iter().zip(r1.decisions()) {
            if *x == 0.0 || *x == 1.0 {
                prop_assert_eq!(x, y);
            }
        }
        let integral = frac(bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect());
        for s in [RoundingStrategy::Floor, RoundingStrategy::Ceil, RoundingStrategy::BernoulliSeeded(seed)] {
            let rounded = round_allocation(&integral, s);
            prop_assert_eq!(rounded.decisions(), integral.decisions());
        }
        Ok(())
    })
}

pub fn sampler_range(cases: u32) -> Result<(), String> {
    check(cases, (0.5..=20.0f64, 0.5..=20.0f64, any::<u64>()), |(a, b, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..2000 {
            let x = beta_sample(a, b, &mut rng).map_err(err)?;
            prop_assert!((0.0..=1.0).contains(&x), "{x}");
        }
        Ok(())
    })
}

pub fn population_roundtrip(cases: u32) -> Result<(), String> {
    check(cases, (1usize..30, 1usize..30, any::<u64>()), |(n_a, n_b, seed)| {
        let spec = PopulationSpec {
            n_a,
            n_b,
            uptake: UptakeConfig { beta_a: (4.0, 6.0), beta_b: (7.0, 3.0) },
            click: ClickConfig::default(),
            seed,
        };
        let pop = hermfair::population::sample_population(&spec).map_err(err)?;
        prop_assert_eq!((pop.n_a(), pop.n_b()), (n_a, n_b));
        let mut buf = Vec::new();
        write_population_csv(&mut buf, &pop).map_err(err)?;
        prop_assert_eq!(read_population_csv(buf.as_slice()).map_err(err)?, pop);
        Ok(())
    })
}

fn arb_table() -> impl Strategy<Value = Vec<Vec<u64>>> {
    (2usize..5, 2usize..5).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(1u64..200, c), r))
}

pub fn chi2_permutation(cases: u32) -> Result<(), String> {
    let strategy = arb_table().prop_flat_map(|t| {
        let rows: Vec<usize> = (0..t.len()).collect();
        let cols: Vec<usize> = (0..t[0].len()).collect();
        (Just(t), Just(rows).prop_shuffle(), Just(cols).prop_shuffle())
    });
    check(cases, strategy, |(t, rp, cp)| {
        let permuted: Vec<Vec<u64>> = rp.iter().map(|&i| cp.iter().map(|&j| t[i][j]).collect()).collect();
        let a = chi2_independence(&ContingencyTable::from_counts(t.clone()).map_err(err)?);
        let b = chi2_independence(&ContingencyTable::from_counts(permuted).map_err(err)?);
        let c = chi2_independence(&ContingencyTable::from_counts(t).map_err(err)?.transposed());
        prop_assert!(close(a.statistic, b.statistic, 1e-12) && close(a.statistic, c.statistic, 1e-12));
        prop_assert!(close(a.p_value, b.p_value, 1e-9));
        prop_assert!((0.0..=1.0).contains(&a.p_value) && (0.0..=1.0).contains(&a.cramers_v));
        Ok(())
    })
}

/// Exact scaling holds for the uncorrected statistic; the continuity
/// correction applied to 2×2 tables is not scale-equivariant.
pub fn chi2_scaling(cases: u32) -> Result<(), String> {
    check(cases, (arb_table(), 2u64..20), |(t, c)| {
        let scaled: Vec<Vec<u64>> = t.iter().map(|r| r.iter().map(|x| x * c).collect()).collect();
        let a = chi2_independence_uncorrected(&ContingencyTable::from_counts(t).map_err(err)?);
        let b = chi2_independence_uncorrected(&ContingencyTable::from_counts(scaled).map_err(err)?);
        prop_assert!(close(b.statistic, c as f64 * a.statistic, 1e-9));
        prop_assert!(close(a.cramers_v, b.cramers_v, 1e-9));
        Ok(())
    })
}

pub fn wilson_shape(cases: u32) -> Result<(), String> {
    check(cases, (1u64..500, 0.0..=1.0f64, 2u64..10, prop_oneof![Just(0.9), Just(0.95), Just(0.99)]), |(n, frac, c, conf)| {
        let k = (n as f64 * frac).round() as u64;
        let small = wilson_interval(k, n, conf).map_err(err)?;
        let large = wilson_interval(k * c, n * c, conf).map_err(err)?;
        for w in [&small, &large] {
            prop_assert!(0.0 <= w.lo && w.lo <= w.point && w.point <= w.hi && w.hi <= 1.0);
        }
        prop_assert!(large.hi - large.lo <= small.hi - small.lo + 1e-15);
        Ok(())
    })
}

pub fn sweep_determinism(cases: u32) -> Result<(), String> {
    let ids = prop_oneof![
        Just(ScenarioId::A),
        Just(ScenarioId::B),
        Just(ScenarioId::C),
        Just(ScenarioId::D),
        Just(ScenarioId::GammaSweep),
        Just(ScenarioId::BaselineGamma0)
    ];
    let uptakes = prop_oneof![
        Just(UptakeVariant::Main),
        Just(UptakeVariant::AAdvantaged),
        Just(UptakeVariant::NeutralHigh),
        Just(UptakeVariant::NeutralLow)
    ];
    check(cases, (ids, uptakes, any::<u64>(), 1usize..4), |(id, uptake, seed, jobs)| {
        let mut spec = builtin_scenario(id, uptake);
        spec.population.n_a = 8;
        spec.population.n_b = 6;
        spec.replications = 3;
        spec.grid = vec![spec.grid[0], spec.grid[spec.grid.len() - 1]];
        let serial = run_sweep_with_jobs(&spec, seed, 1).map_err(err)?;
        let parallel = run_sweep_with_jobs(&spec, seed, jobs + 1).map_err(err)?;
        prop_assert_eq!(&serial, &parallel);
        for r in &serial.records {
            prop_assert!(r.status.is_usable());
            if r.rule.is_constrained() {
                prop_assert!(r.utility_pct <= 100.0 + 1e-6);
            } else {
                prop_assert_eq!(r.utility_pct, 100.0);
            }
        }
        Ok(())
    })
}
