mod common;

use proptest::prelude::*;
use rand::Rng;
use ssdc::lpm::{is_prefix, shared_prefix_size, LongestPrefixMatch};
use ssdc::{train, DynamicMatcher, PackedWord, StaticMatcher, TrainerConfig, Variant};

fn oracle_shared(a: &[u8], b: &[u8]) -> usize {
    let (mut x, mut y) = ([0u8; 8], [0u8; 8]);
    x[..a.len()].copy_from_slice(a);
    y[..b.len()].copy_from_slice(b);
    x.iter().zip(&y).take_while(|(p, q)| p == q).count()
}

fn short_bytes() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(prop_oneof![Just(0u8), Just(1u8), any::<u8>()], 0..=8)
}

proptest! {
    #[test]
    fn pack_unpack(bytes in short_bytes()) {
        let w = PackedWord::pack(&bytes).unwrap();
        prop_assert_eq!(w.unpack(), bytes.clone());
        prop_assert_eq!(w.len as usize, bytes.len());
        prop_assert_eq!(PackedWord::pack_prefix(&bytes), w);
    }

    #[test]
    fn packed_comparison_matches_bytes(a in short_bytes(), b in short_bytes()) {
        let (pa, pb) = (PackedWord::pack(&a).unwrap(), PackedWord::pack(&b).unwrap());
        prop_assert_eq!(shared_prefix_size(pa, pb), oracle_shared(&a, &b));
        prop_assert_eq!(is_prefix(pa, pb), a.starts_with(&b));
        prop_assert_eq!(shared_prefix_size(pa, pa), 8);
    }

    #[test]
    fn dynamic_matches_brute_force(
        seed in any::<u64>(),
        count in 0usize..600,
        alphabet in 0usize..4,
        bounded in any::<bool>(),
    ) {
        let mut rng = common::rng(seed);
        let alphabet = common::ALPHABETS[alphabet];
        let variant = if bounded { Variant::Bounded16 } else { Variant::Unbounded };
        let (matcher, entries) = common::random_matcher(&mut rng, variant, count, alphabet);
        for _ in 0..50 {
            let probe = common::random_probe(&mut rng, &entries, alphabet);
            prop_assert_eq!(matcher.longest_match(&probe), common::brute_force_lpm(&entries, &probe));
        }
        if bounded {
            let fixed = StaticMatcher::finalize(&matcher, seed).unwrap();
            for _ in 0..50 {
                let probe = common::random_probe(&mut rng, &entries, alphabet);
                prop_assert_eq!(fixed.longest_match(&probe), matcher.longest_match(&probe));
            }
        }
    }
}

#[test]
fn static_equals_dynamic_on_trained_dictionaries() {
    let mut rng = common::rng(5);
    for seed in 0..4u64 {
        let corpus = ssdc::synth::title_corpus(150_000, seed);
        let model = train(&corpus, &TrainerConfig { seed, ..TrainerConfig::new(Variant::Bounded16) }).unwrap();
        let fixed = StaticMatcher::finalize(&model.matcher, seed).unwrap();
        assert_eq!(fixed.num_buckets(), model.matcher.num_buckets());
        for _ in 0..20_000 {
            let i = rng.random_range(0..corpus.total_bytes());
            let end = (i + rng.random_range(1..=24)).min(corpus.total_bytes());
            let probe = &corpus.data()[i..end];
            assert_eq!(fixed.longest_match(probe), model.matcher.longest_match(probe));
        }
    }
}

#[test]
fn rebuilt_matcher_answers_like_the_training_one() {
    let corpus = ssdc::synth::title_corpus(150_000, 3);
    for variant in [Variant::Bounded16, Variant::Unbounded] {
        let model = train(&corpus, &TrainerConfig::new(variant)).unwrap();
        let rebuilt = DynamicMatcher::from_dictionary(&model.dictionary).unwrap();
        assert_eq!(rebuilt.len(), model.matcher.len());
        for s in corpus.iter().take(2000).filter(|s| !s.is_empty()) {
            assert_eq!(rebuilt.longest_match(s), model.matcher.longest_match(s));
        }
    }
}

#[test]
fn bucket_size_cap_holds_under_pressure() {
    // Many entries sharing one 8-byte prefix.
    let mut m = DynamicMatcher::new(Variant::Bounded16);
    let mut accepted = 0;
    for i in 0..1000u32 {
        let entry = format!("prefix__{:08}", i);
        if m.insert(entry.as_bytes(), ssdc::TokenId::new(256 + i)).is_ok() {
            accepted += 1;
        }
    }
    assert_eq!(accepted, ssdc::lpm::BOUNDED_MAX_BUCKET_SIZE);
    assert!(m.bucket_sizes().all(|s| s <= ssdc::lpm::BOUNDED_MAX_BUCKET_SIZE));
}
