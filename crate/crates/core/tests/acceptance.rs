//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).

use rayon::prelude::*;

use msk_core::{
    brute_force_opt, build_partition_auto, build_partition_two_block, check_monotone_submodular,
    count_complexity, enum_greedy, families, fit_loglog_slope, gen_adversarial, greedy,
    greedy_lazy, greedy_plus_singleton, verify_adversarial, verify_dominance, Algorithm,
    ElementSet, Family, GreedyVariant, Instance, Partition, SetFunctionOracle, ValueOracle,
};
use rand::Rng;

fn pass(line: &str) {
    println!("[PASS] {line}");
}

fn one_minus_exp(x: f64) -> f64 {
    1.0 - (-x).exp()
}

/// Criterion 1: over ≥500 random coverage and ≥500 random modular instances
/// (n ≤ 14), the κ=2 enumeration greedy achieves at least (1 − 1/e)·OPT in
/// every single trial. The greedy-or-singleton heuristic is held to the
/// weaker (1 − e^{−1/2})·OPT bound on the same instances.
#[test]
fn criterion_1_enum2_ratio_bound() {
    let bound = one_minus_exp(1.0);
    let gps_bound = one_minus_exp(0.5);
    let kinds: [fn(usize) -> Family; 2] =
        [|n| Family::Coverage { n }, |n| Family::Modular { n }];
    for (k, make_family) in kinds.iter().enumerate() {
        let worst = (0u32..500)
            .into_par_iter()
            .map(|trial| {
                let mut rng = families::trial_rng(9000 + k as u64, trial);
                let n = rng.gen_range(6..=14);
                let inst = make_family(n).generate(100 + k as u64, trial).unwrap();
                let p = inst.problem();
                let (opt, _) = brute_force_opt(&p).unwrap();
                let enum2 = enum_greedy(&p, 2).unwrap().value;
                let gps = greedy_plus_singleton(&p, GreedyVariant::Plain)
                    .unwrap()
                    .value;
                assert!(
                    enum2 >= bound * opt - 1e-9,
                    "trial {trial} (family {k}): enum2 = {enum2}, opt = {opt}"
                );
                assert!(
                    gps >= gps_bound * opt - 1e-9,
                    "trial {trial} (family {k}): gps = {gps}, opt = {opt}"
                );
                if opt > 0.0 { enum2 / opt } else { 1.0 }
            })
            .reduce(|| 1.0f64, f64::min);
        assert!(worst >= bound - 1e-9);
    }
    pass(&format!(
        "criterion 1: enum2 >= (1 - 1/e) * OPT on 500 coverage + 500 modular instances \
         (bound {bound:.6})"
    ));
}

/// Criterion 2: the three-element counterexample at N = 8. Enumeration with
/// single-element seeds is stuck at 10 of 16 (ratio 0.625 < 1 − 1/e), and
/// pair seeds recover the optimum exactly.
#[test]
fn criterion_2_bad_example() {
    let n = 8.0;
    let inst = Instance::new(
        vec![n, n, 1.0],
        2.0 * n,
        SetFunctionOracle::modular(vec![n, n, 2.0]).unwrap(),
    )
    .unwrap();
    let p = inst.problem();
    let (opt, opt_set) = brute_force_opt(&p).unwrap();
    assert_eq!(opt, 16.0);
    assert_eq!(opt_set, ElementSet::of(&[0, 1]));
    let enum1 = enum_greedy(&p, 1).unwrap();
    let enum2 = enum_greedy(&p, 2).unwrap();
    assert!((enum1.value - 10.0).abs() <= 1e-12);
    let ratio1 = enum1.value / opt;
    let ratio2 = enum2.value / opt;
    assert!((ratio1 - 0.625).abs() <= 1e-12);
    assert!((ratio2 - 1.0).abs() <= 1e-12);
    assert!(ratio1 < one_minus_exp(1.0));
    pass(&format!(
        "criterion 2: N=8 counterexample: enum1 = 10, OPT = 16, ratio {ratio1} < {:.6}; \
         enum2 ratio {ratio2}",
        one_minus_exp(1.0)
    ));
}

/// Criterion 3: the worst-case reproduction. Strict mode (ε = 5e−6, n ≈
/// 7.6e4) must reproduce the full run: selection order, density schedule,
/// X/Y rejected, greedy-or-singleton value within 1e−6 of 1 − 2·ρ·w(X), and
/// ratio below 0.42945 against the directly evaluated optimum of 1.
/// Structure-only mode (ε = 1e−3, n ≈ 400) must reproduce the selection
/// order and the density formulas within 1e−9.
#[test]
fn criterion_3_adversarial_reproduction() {
    // strict: the inequality forcing X/Y rejection has a limit margin of
    // ≈ 4.6e−6, which finite-ε deficits eat at ≈ 0.51·ε; 5e−6 clears it
    let strict = gen_adversarial(5e-6, false).unwrap();
    let report = verify_adversarial(&strict).unwrap();
    assert!(
        report.trace_match,
        "strict divergence: {:?}",
        report.first_divergence
    );
    assert_eq!(report.xy_rejected, Some(true));
    let gps_bound = 1.0 - 2.0 * 0.62233 * 0.4584;
    assert!(
        (report.gps_value - gps_bound).abs() <= 1e-6,
        "gps = {}, bound = {gps_bound}",
        report.gps_value
    );
    assert!((report.opt_value - 1.0).abs() <= 1e-12);
    assert!(report.ratio < 0.42945);
    assert!(report.max_singleton < 0.42945);
    assert!(!report.gps_from_singleton);

    // structure-only at desk scale
    let small = gen_adversarial(1e-3, true).unwrap();
    assert!((300..500).contains(&small.instance.n()));
    let small_report = verify_adversarial(&small).unwrap();
    assert!(
        small_report.trace_match,
        "structure divergence: {:?}",
        small_report.first_divergence
    );
    assert!(small_report.density_max_err <= 1e-9);
    assert!(small_report.formula_max_err <= 1e-9);
    pass(&format!(
        "criterion 3: strict eps=5e-6 (n = {}): gps = {:.9} < 0.42945, opt = {}, ratio = {:.9}; \
         structure eps=1e-3 (n = {}): formula err {:.3e}",
        strict.instance.n(),
        report.gps_value,
        report.opt_value,
        report.ratio,
        small.instance.n(),
        small_report.formula_max_err
    ));
}

/// Criterion 4: dominance of the value function over the bounding function.
/// 200 random coverage instances (n ≤ 12), candidate set = brute-force
/// optimum, automatic partition, 1000 grid points plus all structural
/// breakpoints: the minimum slack never drops below −1e−9. The near-tight
/// worst-case instance is checked with the two-block partition as well.
#[test]
fn criterion_4_dominance() {
    let worst = (0u32..200)
        .into_par_iter()
        .map(|trial| {
            let mut rng = families::trial_rng(7100, trial);
            let n = rng.gen_range(4..=12);
            let inst = Family::Coverage { n }.generate(700, trial).unwrap();
            let p = inst.problem();
            let trace = greedy(&p).unwrap();
            let (_, opt_set) = brute_force_opt(&p).unwrap();
            if opt_set.is_empty() {
                return f64::INFINITY;
            }
            let partition = build_partition_auto(&p, &opt_set).unwrap();
            let report = verify_dominance(&p, &trace, &partition, 1000).unwrap();
            assert!(
                report.ok,
                "trial {trial}: min slack {} at u = {}",
                report.min_slack, report.argmin_u
            );
            report.min_slack
        })
        .reduce(|| f64::INFINITY, f64::min);

    // the engineered worst case is nearly tight: dominance must still hold
    let adv = gen_adversarial(1e-3, true).unwrap();
    let p = adv.instance.problem();
    let trace = greedy_lazy(&p).unwrap();
    let k2 = adv.params.k2 as u32;
    let xyz = ElementSet::of(&[k2, k2 + 1, k2 + 2]);
    let partition = build_partition_two_block(&p, &ElementSet::new(), &xyz).unwrap();
    let tight = verify_dominance(&p, &trace, &partition, 1000).unwrap();
    assert!(tight.ok, "worst-case slack {}", tight.min_slack);
    pass(&format!(
        "criterion 4: min slack {worst:.3e} over 200 random instances; \
         worst-case instance slack {:.3e} over [0, {:.4}]",
        tight.min_slack, tight.w_max
    ));
}

/// Criterion 5: structure of every constructed bounding function. Breakpoint
/// monotonicity and continuity are enforced by construction (building
/// returns an error otherwise); here random partitions are built to exercise
/// that path, and the single-block closed form f(X)(1 − e^{−u/w(X)}) is
/// checked at 100 points to 1e−12.
#[test]
fn criterion_5_bounding_structure() {
    // closed form, random single blocks
    for trial in 0..50 {
        let mut rng = families::trial_rng(5200, trial);
        let value = rng.gen_range(0.1..5.0);
        let weight = rng.gen_range(0.1..5.0);
        let inst = Instance::new(
            vec![weight],
            weight,
            SetFunctionOracle::modular(vec![value]).unwrap(),
        )
        .unwrap();
        let p = inst.problem();
        let h = msk_core::build_bounding(&p, &Partition::new(vec![ElementSet::of(&[0])]).unwrap())
            .unwrap();
        for i in 0..100 {
            let u = 3.0 * weight * i as f64 / 99.0;
            let expect = value * (1.0 - (-u / weight).exp());
            assert!(
                (h.eval(u) - expect).abs() <= 1e-12,
                "trial {trial}, u = {u}"
            );
        }
    }
    // multi-block: breakpoints monotone, h continuous and non-decreasing
    let mut built = 0usize;
    for trial in 0..100 {
        let mut rng = families::trial_rng(5300, trial);
        let n = rng.gen_range(4..=10);
        let inst = Family::Coverage { n }.generate(530, trial).unwrap();
        let p = inst.problem();
        let (_, opt_set) = brute_force_opt(&p).unwrap();
        if opt_set.is_empty() {
            continue;
        }
        let partition = build_partition_auto(&p, &opt_set).unwrap();
        let h = msk_core::build_bounding(&p, &partition).unwrap();
        built += 1;
        let d = h.breakpoints();
        for w in d.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        let horizon = 3.0 * p.set_weight(&opt_set);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..200 {
            let u = horizon * i as f64 / 199.0;
            let val = h.eval(u);
            assert!(val >= prev - 1e-9, "h must be non-decreasing");
            prev = val;
        }
    }
    assert!(built >= 90);
    pass(&format!(
        "criterion 5: closed form within 1e-12 at 100 points x 50 blocks; \
         {built} multi-block functions monotone and continuous by construction"
    ));
}

/// Criterion 6: oracle-call growth of the enumeration greedy. The fitted
/// log-log slope over n in {10, 15, 20, 25} must sit in [3.5, 4.3] for κ=2
/// and [4.5, 5.3] for κ=3 (and [1.7, 2.3] for the bare greedy at κ=0).
#[test]
fn criterion_6_call_growth() {
    let sizes = [10usize, 15, 20, 25];
    let make = |n: usize| Family::Coverage { n }.generate(600, n as u32);
    let mut slopes = Vec::new();
    for (kappa, lo, hi) in [(0usize, 1.7, 2.3), (2, 3.5, 4.3), (3, 4.5, 5.3)] {
        let rows = count_complexity(make, &sizes, kappa).unwrap();
        let slope = fit_loglog_slope(&rows);
        assert!(
            (lo..=hi).contains(&slope),
            "kappa = {kappa}: slope {slope} outside [{lo}, {hi}]; rows {rows:?}"
        );
        slopes.push((kappa, slope));
    }
    pass(&format!("criterion 6: call-count slopes {slopes:?}"));
}

/// Criterion 7: structural checkers accept both built-in families on 100
/// seeds (n ≤ 10), and plain and lazy greedy produce identical traces on 200
/// seeds.
#[test]
fn criterion_7_checkers_and_equivalence() {
    for trial in 0..100 {
        let mut rng = families::trial_rng(7000, trial);
        let n = rng.gen_range(2..=10);
        for family in [Family::Coverage { n }, Family::Modular { n }] {
            let inst = family.generate(70, trial).unwrap();
            let report = check_monotone_submodular(inst.oracle(), n).unwrap();
            assert!(
                report.monotone && report.submodular,
                "trial {trial} {family:?}: {report:?}"
            );
        }
    }
    for trial in 0..200 {
        let mut rng = families::trial_rng(7500, trial);
        let n = rng.gen_range(2..=50);
        let inst = Family::Coverage { n }.generate(75, trial).unwrap();
        let p = inst.problem();
        assert_eq!(greedy(&p).unwrap(), greedy_lazy(&p).unwrap(), "trial {trial}");
    }
    pass("criterion 7: checkers pass on 100 seeds per family; plain == lazy on 200 seeds");
}

/// Criterion 8: intentionally excluded scope: the 0.427 lower-bound constant
/// for the greedy-or-singleton heuristic and formal proof content. Their
/// empirical content is covered by criteria 1 and 4.
#[test]
fn criterion_8_exclusions() {
    pass(
        "criterion 8: excluded as specified: the 0.427 lower bound and proof-internal \
         machinery (covered empirically by criteria 1 and 4)",
    );
}

/// The CLI algorithm wrapper agrees with direct calls (shared by the sweep
/// harness and the command line).
#[test]
fn algorithm_wrapper_consistency() {
    let inst = Family::Coverage { n: 10 }.generate(4, 0).unwrap();
    let p = inst.problem();
    for name in ["greedy", "enum0", "enum1", "enum2", "enum3", "gps"] {
        let alg: Algorithm = name.parse().unwrap();
        let result = alg.run(&p).unwrap();
        assert!(p.fits(p.set_weight(&result.solution)), "{name} infeasible");
        let fresh = p.oracle.evaluate(&result.solution).unwrap();
        assert_eq!(result.value, fresh, "{name} value mismatch");
    }
}
