mod common;

use common::oracle::{brute_similarity, brute_similarity_with};
use common::small_lexicons;
use ebmt_core::synth;
use ebmt_core::{similarity, similarity_score, MetricWeights, SentencePattern};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn enc(s: &str) -> SentencePattern {
    SentencePattern::encode(s, &synth::lexicons()).unwrap()
}

fn shaped() -> impl Strategy<Value = String> {
    any::<u64>().prop_map(|seed| synth::random_shaped(&mut ChaCha8Rng::seed_from_u64(seed), 4, 3))
}

fn weights() -> impl Strategy<Value = [f64; 5]> {
    (0.05f64..0.95, 0.0f64..=1.0, 0.0f64..=1.5, 0.0f64..=1.0, 0.0f64..=1.5).prop_map(|(a, b, c, d, e)| [a, b, c, d, e])
}

#[test]
fn oracle_agrees_on_hand_examples() {
    let lex = small_lexicons();
    let e = |s: &str| SentencePattern::encode(s, &lex).unwrap();
    for (a, b) in [
        ("the export refund for cereals", "the export refund for cereals"),
        ("the export refund for cereals", "a export refund for rice"),
        ("the export", "and"),
        ("export refund", "refund export levy"),
        ("the the of", "of the"),
        ("for cereals of it", "levy to the it"),
    ] {
        let dp = similarity_score(&e(a), &e(b), &MetricWeights::default());
        let bf = brute_similarity(&e(a), &e(b));
        assert!((dp - bf).abs() < 1e-9, "{a:?} vs {b:?}: dp {dp} brute {bf}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dp_matches_enumeration_under_any_weights(a in shaped(), b in shaped(), w in weights()) {
        let (pa, pb) = (enc(&a), enc(&b));
        let mw = MetricWeights { w_f: w[0], g_ratio: w[1], p_ratio: w[2], t_ratio: w[3], pt_ratio: w[4] };
        let dp = similarity_score(&pa, &pb, &mw);
        let bf = brute_similarity_with(&pa, &pb, w);
        prop_assert!((dp - bf).abs() < 1e-9, "dp {} brute {}", dp, bf);
    }

    #[test]
    fn backtracked_path_reproduces_score(a in shaped(), b in shaped()) {
        let r = similarity(&enc(&a), &enc(&b), &MetricWeights::default());
        prop_assert!((r.path_score() - r.score).abs() < 1e-9);
        prop_assert!(r.a_span.end <= enc(&a).len() && r.b_span.end <= enc(&b).len());
    }

    #[test]
    fn identity_symmetry_bounds(a in shaped(), b in shaped()) {
        let w = MetricWeights::default();
        let (pa, pb) = (enc(&a), enc(&b));
        prop_assert!((similarity_score(&pa, &pa, &w) - 1.0).abs() < 1e-9);
        let ab = similarity_score(&pa, &pb, &w);
        let ba = similarity_score(&pb, &pa, &w);
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
    }
}

/// A sentence that contains another one as a fw-closed prefix matches it
/// locally: the span is that prefix, whatever follows.
#[test]
fn local_part_matching() {
    let w = MetricWeights::default();
    let unit = enc("the export refund for cereals shall be fixed thereof");
    for tail in ["member states shall notify it", "the levy of sugar to them", "annex 4 therein"] {
        let long = enc(&format!("{} {tail}", unit.text()));
        let r = similarity(&unit, &long, &w);
        assert_eq!(r.b_span, 0..unit.len(), "{tail}");
        let part = long.slice(r.b_span.clone()).unwrap();
        assert!((similarity_score(&unit, &part, &w) - 1.0).abs() < 1e-9);
    }
}
