//! Acceptance suite: one test per headline guarantee of the toolkit, each
//! printing a `criterion NN ...: PASS` line with its measured evidence.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use itertools::Itertools;

use colcomm::gadgets::{
    check_regular, close_group, orbit, ver_gadget, ver_generators, ver_group, Regularity,
    RegularityCertificate,
};
use colcomm::instances::{
    classify, concat, find_collisions, gen_promise, split, BipartitePair, NumberList,
    PromiseClass,
};
use colcomm::protocols::{
    decision_from_search, gen_balanced_two_to_one, plant_and_shuffle, plant_with_permutation,
    run_deterministic_bicol, run_randomized_bicol, CollisionOracle, InstanceRecipe,
    OracleStrategy, PhpOracle,
};
use colcomm::rng;
use colcomm::unfold::{
    alice_map, bob_map, eval_composed, reduce_to_bicol, sample_composed_input, verify_claim,
    ClaimMode, ComposedInput, RegularGadget, DEFAULT_EXHAUSTIVE_CAP,
};

fn ver_pass_certificate() -> RegularityCertificate {
    match check_regular(&ver_gadget(), &ver_group()).expect("domains match") {
        Regularity::Pass(cert) => cert,
        Regularity::Fail(v) => panic!("Ver failed its regularity check: {v}"),
    }
}

fn pair_from_full(bits: u32, values: &[u64]) -> BipartitePair {
    split(&NumberList::new(bits, values.to_vec()).unwrap()).unwrap()
}

#[test]
fn criterion_01_ver_is_regular() {
    let start = Instant::now();
    let cert = ver_pass_certificate();
    let elapsed = start.elapsed();
    assert_eq!(cert.group_order, 8);
    assert_eq!(cert.preimage_sizes, [8, 8]);
    assert_eq!(cert.uniqueness_checks, 128);
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 01 (Ver regularity): PASS — |S|=8, preimages 8/8, 128 uniqueness checks in {elapsed:?}"
    );
}

#[test]
fn criterion_02_generator_closure_recovers_the_group() {
    let closed = close_group(4, &ver_generators()).unwrap();
    assert_eq!(closed.order(), 8);
    let closed_set: BTreeSet<_> = closed
        .elements()
        .iter()
        .map(|e| (e.row_perm().to_vec(), e.col_perm().to_vec()))
        .collect();
    let listed_set: BTreeSet<_> = ver_group()
        .elements()
        .iter()
        .map(|e| (e.row_perm().to_vec(), e.col_perm().to_vec()))
        .collect();
    assert_eq!(closed_set, listed_set);
    println!("criterion 02 (generator closure): PASS — closure of 2 generators = the 8-element group");
}

#[test]
fn criterion_03_table_and_orbit_match_the_frozen_figures() {
    let expected_table = [
        [0u8, 0, 1, 1],
        [0, 1, 1, 0],
        [1, 1, 0, 0],
        [1, 0, 0, 1],
    ];
    let gadget = ver_gadget();
    for (x, row) in expected_table.iter().enumerate() {
        for (y, &cell) in row.iter().enumerate() {
            assert_eq!(
                gadget.eval(x as u64, y as u64).unwrap(),
                cell,
                "cell ({x}, {y})"
            );
        }
    }
    let expected_orbit: BTreeSet<(u64, u64)> =
        [(1, 1), (2, 0), (3, 3), (0, 2), (0, 3), (1, 2), (2, 1), (3, 0)]
            .into_iter()
            .collect();
    assert_eq!(orbit(&ver_group(), 1, 1).unwrap(), expected_orbit);
    println!("criterion 03 (frozen figures): PASS — 16 table cells and the 8 orbit labels match");
}

#[test]
fn criterion_04_unfold_set_properties() {
    let rg = RegularGadget::ver();

    let start = Instant::now();
    let exhaustive = verify_claim(&rg, 1, ClaimMode::Exhaustive, 0, DEFAULT_EXHAUSTIVE_CAP).unwrap();
    let exhaustive_time = start.elapsed();
    assert_eq!(exhaustive.pairs_checked, 256);
    assert!(exhaustive.passed(), "violations: {:?}", exhaustive.violations);
    assert!(exhaustive_time.as_secs_f64() < 1.0, "took {exhaustive_time:?}");

    let start = Instant::now();
    let sampled = verify_claim(
        &rg,
        2,
        ClaimMode::Sampled { trials: 10_000 },
        0x5eed,
        DEFAULT_EXHAUSTIVE_CAP,
    )
    .unwrap();
    let sampled_time = start.elapsed();
    assert_eq!(sampled.pairs_checked, 10_000);
    assert!(sampled.passed(), "violations: {:?}", sampled.violations);
    assert!(sampled_time.as_secs_f64() < 30.0, "took {sampled_time:?}");

    println!(
        "criterion 04 (unfold set properties): PASS — 256 exhaustive pairs in {exhaustive_time:?}, 10^4 sampled pairs in {sampled_time:?}"
    );
}

#[test]
fn criterion_05_reduction_preserves_the_promise() {
    let rg = RegularGadget::ver();
    let start = Instant::now();

    // two blocks, exhaustively: every composed input satisfies the promise
    let mut checked = 0usize;
    for a1 in 0..4u64 {
        for a2 in 0..4u64 {
            for b1 in 0..4u64 {
                for b2 in 0..4u64 {
                    let c = ComposedInput::new(
                        2,
                        vec![vec![a1], vec![a2]],
                        vec![vec![b1], vec![b2]],
                    )
                    .unwrap();
                    let class = eval_composed(rg.gadget(), &c).unwrap();
                    assert_ne!(class, PromiseClass::Neither);
                    let reduced = reduce_to_bicol(&rg, &c).unwrap();
                    assert_eq!(reduced.len(), 16);
                    assert_eq!(classify(&concat(&reduced)), class);
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 256);

    // four blocks, 200 sampled promise inputs per class
    for class in [PromiseClass::OneToOne, PromiseClass::TwoToOne] {
        for trial in 0..200u64 {
            let target = gen_promise(4, class, rng::derive(41, trial)).unwrap();
            let c = sample_composed_input(rg.gadget(), &target, rng::derive(43, trial)).unwrap();
            assert_eq!(eval_composed(rg.gadget(), &c).unwrap(), class);
            let reduced = reduce_to_bicol(&rg, &c).unwrap();
            assert_eq!(reduced.len(), 256);
            assert_eq!(classify(&concat(&reduced)), class, "class {class} trial {trial}");
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 05 (promise preservation): PASS — 256 exhaustive + 2x200 sampled reductions in {elapsed:?}"
    );
}

#[test]
fn criterion_06_reduction_is_rectangular() {
    let rg = RegularGadget::ver();
    let base_target = gen_promise(4, PromiseClass::TwoToOne, 5).unwrap();
    let base = sample_composed_input(rg.gadget(), &base_target, 6).unwrap();
    let alice_half = alice_map(&rg, base.alice_blocks()).unwrap();
    let bob_half = bob_map(&rg, base.bob_blocks()).unwrap();

    for trial in 0..50u64 {
        let other_target = gen_promise(4, PromiseClass::OneToOne, rng::derive(7, trial)).unwrap();
        let other = sample_composed_input(rg.gadget(), &other_target, rng::derive(8, trial)).unwrap();

        // Bob's input mutated: Alice's half must be bit-identical
        let mutated = ComposedInput::new(
            2,
            base.alice_blocks().to_vec(),
            other.bob_blocks().to_vec(),
        )
        .unwrap();
        assert_eq!(reduce_to_bicol(&rg, &mutated).unwrap().x_entries(), &alice_half[..]);

        // Alice's input mutated: Bob's half must be bit-identical
        let mutated = ComposedInput::new(
            2,
            other.alice_blocks().to_vec(),
            base.bob_blocks().to_vec(),
        )
        .unwrap();
        assert_eq!(reduce_to_bicol(&rg, &mutated).unwrap().y_entries(), &bob_half[..]);
    }
    println!("criterion 06 (rectangularity): PASS — halves fixed under 50 mutations of the other side");
}

fn max_deterministic_cost(len: usize) -> u64 {
    let sqrt_n = (len as f64).sqrt() as u64;
    let log_n = (len as f64).log2() as u64;
    sqrt_n * log_n + 1
}

#[test]
fn criterion_07_deterministic_protocol() {
    // exhaustive at length 4: all 24 one-to-one and all 36 two-to-one lists
    let mut checked = 0usize;
    for perm in (0u64..4).permutations(4) {
        let p = pair_from_full(2, &perm);
        let out = run_deterministic_bicol(&p).unwrap();
        assert_eq!(out.decision(), Some(PromiseClass::OneToOne));
        assert!(out.transcript.cost() <= max_deterministic_cost(4));
        checked += 1;
    }
    for v in 0..4u64 {
        for w in 0..v {
            for arrangement in [v, v, w, w].into_iter().permutations(4).unique() {
                let p = pair_from_full(2, &arrangement);
                let out = run_deterministic_bicol(&p).unwrap();
                assert_eq!(out.decision(), Some(PromiseClass::TwoToOne));
                assert!(out.transcript.cost() <= max_deterministic_cost(4));
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 60);

    // sampled at lengths 16 and 256
    for len in [16usize, 256] {
        let bound = max_deterministic_cost(len);
        for class in [PromiseClass::OneToOne, PromiseClass::TwoToOne] {
            for trial in 0..500u64 {
                let z = gen_promise(len, class, rng::derive(len as u64, trial)).unwrap();
                let out = run_deterministic_bicol(&split(&z).unwrap()).unwrap();
                assert_eq!(out.decision(), Some(class), "len {len} trial {trial}");
                assert!(out.transcript.cost() <= bound, "cost {}", out.transcript.cost());
            }
        }
    }
    println!(
        "criterion 07 (deterministic protocol): PASS — 60 exhaustive + 2x1000 sampled runs, cost <= sqrt(N)*log2(N)+1 (129 at N=256)"
    );
}

/// Exact detection probability of the sampled birthday check: a uniform
/// `sample`-subset of `2 * pairs` positions holding `pairs` disjoint pairs
/// detects iff it contains both members of some pair. Enumerates every
/// subset by bitmask.
fn exact_detection_probability(pairs: usize, sample: usize) -> (u64, u64) {
    let positions = 2 * pairs;
    let mut total = 0u64;
    let mut detected = 0u64;
    for mask in 0u32..(1 << positions) {
        if mask.count_ones() as usize != sample {
            continue;
        }
        total += 1;
        let hit = (0..pairs).any(|p| mask >> (2 * p) & 3 == 3);
        if hit {
            detected += 1;
        }
    }
    (detected, total)
}

#[test]
fn criterion_08_randomized_protocol_matches_the_birthday_oracle() {
    let start = Instant::now();

    // one-sidedness: no false 2-to-1 answer in 10^4 fresh 1-to-1 runs
    for trial in 0..10_000u64 {
        let z = gen_promise(256, PromiseClass::OneToOne, rng::derive(11, trial)).unwrap();
        let out = run_randomized_bicol(&split(&z).unwrap(), 2.0, rng::derive(13, trial)).unwrap();
        assert_eq!(out.decision(), Some(PromiseClass::OneToOne), "trial {trial}");
    }

    // exact oracle: 8 disjoint pairs in 16 positions, sample 8 of them
    let (detected, total) = exact_detection_probability(8, 8);
    assert_eq!((detected, total), (12_614, 12_870));
    let exact = detected as f64 / total as f64;

    // empirical detection rate over 10^5 balanced 2-to-1 instances
    let trials = 100_000u64;
    let mut hits = 0u64;
    for trial in 0..trials {
        let p = gen_balanced_two_to_one(4, rng::derive(17, trial)).unwrap();
        let out = run_randomized_bicol(&p, 2.0, rng::derive(19, trial)).unwrap();
        if out.decision() == Some(PromiseClass::TwoToOne) {
            hits += 1;
        }
    }
    let rate = hits as f64 / trials as f64;
    let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
    assert!(
        (rate - exact).abs() <= 3.0 * sigma,
        "rate {rate:.6} vs exact {exact:.6} (3 sigma = {:.6})",
        3.0 * sigma
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "criterion 08 (randomized protocol): PASS — 0 false positives in 10^4; rate {rate:.5} vs exact {exact:.5} (+-{:.5}) in {elapsed:?}",
        3.0 * sigma
    );
}

#[test]
fn criterion_09_planting_structure() {
    for trial in 0..1000u64 {
        let z = gen_promise(16, PromiseClass::OneToOne, rng::derive(23, trial)).unwrap();
        let planted = plant_and_shuffle(&split(&z).unwrap(), rng::derive(29, trial)).unwrap();
        let full = concat(planted.pair());
        assert_eq!(classify(&full), PromiseClass::TwoToOne);
        for pair in find_collisions(&full) {
            let (i, j) = pair.indices();
            assert!(
                planted.is_planted(i) || planted.is_planted(j),
                "planted-free collision on a 1-to-1 input, trial {trial}"
            );
        }
    }
    for trial in 0..1000u64 {
        let z = gen_promise(16, PromiseClass::TwoToOne, rng::derive(31, trial)).unwrap();
        let planted = plant_and_shuffle(&split(&z).unwrap(), rng::derive(37, trial)).unwrap();
        let full = concat(planted.pair());
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for &v in full.entries() {
            *counts.entry(v).or_insert(0) += 1;
        }
        let thrice = counts.values().filter(|&&c| c == 3).count();
        let once = counts.values().filter(|&&c| c == 1).count();
        assert_eq!((thrice, once), (8, 8), "trial {trial}");
    }
    println!(
        "criterion 09 (planting structure): PASS — 10^3 1-to-1 runs all-planted collisions; 10^3 2-to-1 runs with the 8-thrice/8-once profile"
    );
}

#[test]
fn criterion_10_decision_success_bound() {
    // Exact success probability at length 4, exhausting all 8! public
    // permutations for one fixed 2-to-1 instance. Deterministic strategies
    // go through the production oracle; the uniform strategy is averaged
    // over its choices exactly.
    let p = pair_from_full(2, &[0, 0, 1, 1]);
    let mut lex_hits = 0u64;
    let mut adv_hits = 0u64;
    let mut uniform_free_pairs = 0u64;
    let mut permutations = 0u64;
    let mut rng_sink = rng::seeded(0);
    let lex = PhpOracle::new(OracleStrategy::LexFirst, 0);
    let adv = PhpOracle::new(OracleStrategy::MinIndexAdversary, 0);
    for perm in (0..8usize).permutations(8) {
        permutations += 1;
        let planted = plant_with_permutation(&p, &perm).unwrap();
        let full = concat(planted.pair());
        let collisions = find_collisions(&full);
        assert_eq!(collisions.len(), 6);
        let free = |pair: &colcomm::instances::CollisionPair| {
            let (i, j) = pair.indices();
            !planted.is_planted(i) && !planted.is_planted(j)
        };
        let lex_pick = lex.find_collision(planted.pair(), &mut rng_sink).unwrap();
        if free(&lex_pick) {
            lex_hits += 1;
        }
        let adv_pick = adv.find_collision(planted.pair(), &mut rng_sink).unwrap();
        if free(&adv_pick) {
            adv_hits += 1;
        }
        uniform_free_pairs += collisions.iter().filter(|c| free(c)).count() as u64;
    }
    assert_eq!(permutations, 40_320);
    assert!(3 * lex_hits >= permutations, "lex: {lex_hits}/{permutations}");
    assert!(3 * adv_hits >= permutations, "adv: {adv_hits}/{permutations}");
    assert!(
        3 * uniform_free_pairs >= 6 * permutations,
        "uniform: {uniform_free_pairs}/{}",
        6 * permutations
    );

    // empirical single-round success at length 16, per strategy
    let trials = 10_000usize;
    let third = 1.0 / 3.0;
    let sigma1 = (third * (1.0 - third) / trials as f64).sqrt();
    let recipe = InstanceRecipe::new(4, PromiseClass::TwoToOne).unwrap();
    let mut single_round_rates = Vec::new();
    for strategy in OracleStrategy::ALL {
        let oracle = PhpOracle::new(strategy, 0);
        let stats =
            colcomm::protocols::estimate_success(&recipe, &oracle, 1, trials, 0xACCE57).unwrap();
        assert!(
            stats.correct_rate >= third - 3.0 * sigma1,
            "{}: rate {:.4} below 1/3 - 3 sigma",
            strategy.token(),
            stats.correct_rate
        );
        single_round_rates.push((strategy.token(), stats.correct_rate));
    }

    // amplification: 5 rounds push the failure rate to (2/3)^5
    let expected_failure = (2.0f64 / 3.0).powi(5);
    let sigma5 = (expected_failure * (1.0 - expected_failure) / trials as f64).sqrt();
    let oracle = PhpOracle::new(OracleStrategy::UniformRandom, 0);
    let stats = colcomm::protocols::estimate_success(&recipe, &oracle, 5, trials, 0xA11).unwrap();
    let failure = 1.0 - stats.correct_rate;
    assert!(
        failure <= expected_failure + 3.0 * sigma5,
        "failure {failure:.4} above (2/3)^5 + 3 sigma"
    );

    println!(
        "criterion 10 (decision-to-search success): PASS — exact 1/3 over 8! for lex/adv/uniform ({lex_hits}, {adv_hits}, {uniform_free_pairs}/6 of 40320); single-round rates {single_round_rates:?}; t=5 failure {failure:.4} <= {:.4}",
        expected_failure + 3.0 * sigma5
    );
}

#[test]
fn criterion_11_cost_identity() {
    let mut checked = 0usize;
    for rounds in [1usize, 2, 3, 5, 8] {
        for cost in [0u64, 1, 7, 64, 1000] {
            let oracle = PhpOracle::new(OracleStrategy::LexFirst, cost);
            for seed in 0..4u64 {
                let z = gen_promise(16, PromiseClass::TwoToOne, seed).unwrap();
                let out =
                    decision_from_search(&split(&z).unwrap(), &oracle, rounds, seed).unwrap();
                assert_eq!(out.transcript.cost(), rounds as u64 * (cost + 2));
                checked += 1;
            }
        }
    }
    println!(
        "criterion 11 (cost identity): PASS — cost == t*(d+2) across {checked} runs of 5 t-values x 5 d-values"
    );
}
