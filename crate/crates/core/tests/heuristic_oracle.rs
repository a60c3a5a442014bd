mod common;

use boop_core::engine::Player;
use boop_core::heuristic::{
    evaluate, pair_counts, raw_score, triple_counts, CompositionWeights, HeuristicWeights,
    MAX_PAIRS, MAX_TRIPLES,
};
use common::{adjacent_pairs, max_lines, random_state, windows, RefGame};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn line_bounds_are_exact_for_eight_pieces() {
    assert_eq!(windows().len(), 80);
    assert_eq!(max_lines(8), (MAX_PAIRS, MAX_TRIPLES));
    // fewer pieces never exceed the bound
    assert!(max_lines(7).0 <= MAX_PAIRS && max_lines(7).1 <= MAX_TRIPLES);
}

#[test]
fn normalizer_matches_independent_bound() {
    let w = HeuristicWeights::default();
    assert_eq!(w.normalizer(), RefGame::max_bound(&w));
}

#[test]
fn evaluation_matches_reference_exactly() {
    let w = HeuristicWeights::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3000 {
        let s = random_state(&mut rng, 80);
        let r = RefGame::from_state(&s);
        for p in Player::BOTH {
            assert_eq!(raw_score(&s, p, &w), r.raw(p, &w));
            assert_eq!(evaluate(&s, p, &w).unwrap().value(), r.score(p, &w));
        }
    }
}

#[test]
fn line_counts_split_by_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let s = random_state(&mut rng, 80);
        for p in Player::BOTH {
            let own = s.board().pieces(p);
            let pairs = pair_counts(s.board(), p);
            let triples = triple_counts(s.board(), p);
            let expect_pairs = adjacent_pairs()
                .iter()
                .filter(|w| w.iter().all(|&i| own & (1 << i) != 0))
                .count() as u32;
            let expect_triples = windows()
                .iter()
                .filter(|w| w.iter().all(|&i| own & (1 << i) != 0))
                .count() as u32;
            assert_eq!(pairs.total(), expect_pairs);
            assert_eq!(triples.total(), expect_triples);
            assert!(pairs.total() <= MAX_PAIRS && triples.total() <= MAX_TRIPLES);
        }
    }
}

fn weight() -> impl Strategy<Value = f64> {
    (-64i32..=64).prop_map(|n| n as f64 / 4.0)
}

fn weights() -> impl Strategy<Value = HeuristicWeights> {
    (
        (weight(), weight(), weight(), weight()),
        (weight(), weight(), weight()),
        (weight(), weight(), weight()),
    )
        .prop_filter_map(
            "degenerate",
            |((count, center, border, large_owned), a2, a3)| {
                let w = HeuristicWeights {
                    count,
                    center,
                    border,
                    large_owned,
                    align2: CompositionWeights {
                        small: a2.0,
                        mixed: a2.1,
                        large: a2.2,
                    },
                    align3: CompositionWeights {
                        small: a3.0,
                        mixed: a3.1,
                        large: a3.2,
                    },
                };
                w.validate().ok().map(|_| w)
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn antisymmetric_and_bounded(seed in any::<u64>(), w in weights()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(&mut rng, 80);
        let raw = raw_score(&s, Player::One, &w);
        prop_assert_eq!(raw, -raw_score(&s, Player::Two, &w));
        prop_assert!(raw.abs() <= w.normalizer());
        let a = evaluate(&s, Player::One, &w).unwrap().value();
        let b = evaluate(&s, Player::Two, &w).unwrap().value();
        prop_assert_eq!(a + b, 0.0);
        prop_assert!((-1.0..=1.0).contains(&a));
    }

    #[test]
    fn deterministic(seed in any::<u64>()) {
        let w = HeuristicWeights::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(&mut rng, 80);
        prop_assert_eq!(evaluate(&s, Player::One, &w), evaluate(&s, Player::One, &w));
    }
}
