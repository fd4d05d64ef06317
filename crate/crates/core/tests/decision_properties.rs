use framing_core::bank::bank;
use framing_core::decision::{
    allais, allais_violates_eut, expected_utility, pt_value, AllaisChoice, Domain, GambleA,
    GambleB, Outcome, Prospect, Rational, ValueFnParams,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

proptest! {
    #[test]
    fn normalized_splits_are_accepted(parts in prop::collection::vec(1i128..1000, 1..6)) {
        let total: i128 = parts.iter().sum();
        let outcomes: Vec<Outcome> = parts
            .iter()
            .enumerate()
            .map(|(i, &w)| Outcome::new(i as i64 * 10, Rational::new(w, total)))
            .collect();
        prop_assert!(Prospect::new(Domain::Health, outcomes).is_ok());
    }

    #[test]
    fn unnormalized_splits_are_rejected(
        parts in prop::collection::vec(1i128..1000, 1..6),
        extra in 1i128..1000,
    ) {
        let total: i128 = parts.iter().sum();
        let mut outcomes: Vec<Outcome> = parts
            .iter()
            .map(|&w| Outcome::new(1, Rational::new(w, total + extra)))
            .collect();
        outcomes.push(Outcome::new(2, Rational::new(extra, (total + extra) * 2)));
        prop_assert!(Prospect::new(Domain::Health, outcomes).is_err());
    }
}

#[test]
fn identity_utility_matches_expected_value_on_bank_prospects() {
    for q in bank().questions().iter().chain([bank().table1_fixture()]) {
        for p in [q.deep.certain_prospect(), q.deep.risky_prospect()]
            .into_iter()
            .flatten()
        {
            let eu = expected_utility(&p, Some).unwrap();
            assert_eq!(eu, p.expected_value(), "question {}", q.id);
        }
    }
}

#[test]
fn value_function_is_increasing() {
    let params = ValueFnParams::default();
    let xs = grid(-100.0, 100.0, 1000);
    for w in xs.windows(2) {
        assert!(
            pt_value(w[0], &params) < pt_value(w[1], &params),
            "{} vs {}",
            w[0],
            w[1]
        );
    }
}

#[test]
fn losses_loom_larger() {
    let params = ValueFnParams::default();
    for x in grid(0.1, 100.0, 1000) {
        assert!(pt_value(-x, &params) < -pt_value(x, &params));
    }
}

#[test]
fn concave_in_gains_convex_in_losses() {
    let params = ValueFnParams::default();
    let h = 0.1;
    let second_diff =
        |x: f64| pt_value(x + h, &params) - 2.0 * pt_value(x, &params) + pt_value(x - h, &params);
    for x in grid(h, 100.0 - h, 999) {
        assert!(second_diff(x) <= 1e-9, "gain side at {x}");
    }
    for x in grid(-100.0 + h, -h, 999) {
        assert!(second_diff(x) >= -1e-9, "loss side at {x}");
    }
}

/// Brute-force oracle: does some utility assignment with u(0) = 0 and
/// increasing payoffs rationalize both choices strictly?
fn rationalizable(choice: AllaisChoice) -> bool {
    let mut found = false;
    for u100 in (1..=200).map(f64::from) {
        for u500 in (1..=400).map(f64::from) {
            if u500 <= u100 {
                continue;
            }
            let u = |x: f64| -> Option<f64> {
                Some(if x == 0.0 {
                    0.0
                } else if x == 100e6 {
                    u100
                } else {
                    u500
                })
            };
            let eu = |p: &Prospect| expected_utility(p, u).unwrap();
            let first = match choice.gamble_a {
                GambleA::A1 => eu(&allais::option_1a()) > eu(&allais::option_1b()),
                GambleA::B1 => eu(&allais::option_1b()) > eu(&allais::option_1a()),
            };
            let second = match choice.gamble_b {
                GambleB::A2 => eu(&allais::option_2a()) > eu(&allais::option_2b()),
                GambleB::B2 => eu(&allais::option_2b()) > eu(&allais::option_2a()),
            };
            found |= first && second;
        }
    }
    found
}

#[test]
fn allais_verdicts_match_brute_force_oracle() {
    for choice in AllaisChoice::ALL {
        assert_eq!(
            allais_violates_eut(choice),
            !rationalizable(choice),
            "{choice}"
        );
    }
}

#[test]
fn allais_mirror_symmetry() {
    let mirror = |c: AllaisChoice| {
        AllaisChoice::new(
            match c.gamble_a {
                GambleA::A1 => GambleA::B1,
                GambleA::B1 => GambleA::A1,
            },
            match c.gamble_b {
                GambleB::A2 => GambleB::B2,
                GambleB::B2 => GambleB::A2,
            },
        )
    };
    for c in AllaisChoice::ALL {
        assert_eq!(allais_violates_eut(c), allais_violates_eut(mirror(c)));
    }
}

fn random_prospect(rng: &mut ChaCha8Rng) -> Prospect {
    let n = rng.random_range(1..=4);
    let weights: Vec<i128> = (0..n).map(|_| rng.random_range(1..=20)).collect();
    let total: i128 = weights.iter().sum();
    Prospect::new(
        Domain::AbstractMoney,
        weights
            .iter()
            .map(|&w| Outcome::new(rng.random_range(-100..=100), Rational::new(w, total)))
            .collect(),
    )
    .unwrap()
}

#[test]
fn argmax_survives_positive_affine_transforms() {
    let mut rng = ChaCha8Rng::seed_from_u64(2021);
    let params = ValueFnParams::default();
    let mut trials = 0;
    while trials < 1000 {
        let a = random_prospect(&mut rng);
        let b = random_prospect(&mut rng);
        let scale = rng.random_range(0.01..100.0);
        let shift = rng.random_range(-1000.0..1000.0);
        let base = |x: f64| Some(pt_value(x, &params));
        let affine = |x: f64| Some(scale * pt_value(x, &params) + shift);
        let gap = expected_utility(&a, base).unwrap() - expected_utility(&b, base).unwrap();
        if gap.abs() < 1e-6 {
            continue;
        }
        let gap2 = expected_utility(&a, affine).unwrap() - expected_utility(&b, affine).unwrap();
        assert_eq!(gap > 0.0, gap2 > 0.0, "trial {trials}");
        trials += 1;
    }
}
