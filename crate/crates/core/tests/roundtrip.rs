mod common;

use proptest::prelude::*;
use ssdc::{train, CompressedColumn, Corpus, DecodeBuffer, Parser, TrainerConfig, Variant};

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Unbounded), Just(Variant::Bounded16)]
}

fn strings() -> impl Strategy<Value = Vec<Vec<u8>>> {
    let byte = prop_oneof![Just(0u8), Just(b'a'), Just(b'b'), any::<u8>()];
    prop::collection::vec(prop::collection::vec(byte, 0..200), 0..40)
}

proptest! {
    #[test]
    fn every_string_round_trips(
        strings in strings(),
        variant in variant(),
        bits in prop_oneof![Just(9u8), Just(12), Just(16)],
        seed in any::<u64>(),
    ) {
        let corpus = Corpus::from_strings("p", &strings);
        let config = TrainerConfig { bits_per_token: bits, seed, threshold: Some(2), ..TrainerConfig::new(variant) };
        let model = train(&corpus, &config).unwrap();
        let dict = model.dictionary;
        let parser = Parser::new(model.matcher, seed).unwrap();
        let column = parser.compress_corpus(&dict, &corpus);

        prop_assert_eq!(column.len(), strings.len());
        prop_assert_eq!(column.decompress_all(&dict).unwrap(), corpus.data());
        let mut buf = DecodeBuffer::new();
        for (i, s) in strings.iter().enumerate() {
            prop_assert_eq!(column.decompress_into(&dict, i, &mut buf).unwrap(), s.as_slice());
        }
        let back = CompressedColumn::from_bytes(&column.to_bytes().unwrap(), &dict).unwrap();
        prop_assert_eq!(back, column);
    }

    #[test]
    fn trained_dictionary_is_well_formed(strings in strings(), variant in variant(), seed in any::<u64>()) {
        let corpus = Corpus::from_strings("p", &strings);
        let config = TrainerConfig { bits_per_token: 10, seed, threshold: Some(2), ..TrainerConfig::new(variant) };
        let dict = train(&corpus, &config).unwrap().dictionary;
        prop_assert!(dict.len() <= 1 << 10);
        prop_assert!(dict.longest_entry() <= variant.max_entry_len());
        prop_assert_eq!(dict.duplicate_entries(), 0);
        prop_assert_eq!(ssdc::Dictionary::from_bytes(&dict.to_bytes()).unwrap(), dict);
    }
}

#[test]
fn parallel_parse_matches_sequential() {
    let mut rng = common::rng(11);
    for (k, alphabet) in common::ALPHABETS.iter().enumerate() {
        let corpus = common::random_corpus(&mut rng, 20_000, 120, alphabet);
        let variant = if k % 2 == 0 { Variant::Bounded16 } else { Variant::Unbounded };
        let model = train(&corpus, &TrainerConfig::new(variant)).unwrap();
        let parser = Parser::new(model.matcher, 1).unwrap();
        let seq = parser.compress_corpus(&model.dictionary, &corpus);
        let par = parser.compress_corpus_parallel(&model.dictionary, &corpus);
        assert_eq!(seq, par);
        assert_eq!(par.decompress_all(&model.dictionary).unwrap(), corpus.data());
    }
}

#[test]
fn corpus_file_round_trip_through_codec() {
    let corpus = ssdc::synth::title_corpus(300_000, 21);
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("titles.txt");
    corpus.write_lines(std::fs::File::create(&text).unwrap()).unwrap();
    let loaded = Corpus::load_lines(&text, None).unwrap();
    assert_eq!(loaded.data(), corpus.data());
    assert_eq!(loaded.boundaries(), corpus.boundaries());

    let model = train(&loaded, &TrainerConfig::default()).unwrap();
    let dict_path = dir.path().join("titles.dict");
    let col_path = dir.path().join("titles.col");
    model.dictionary.save(&dict_path).unwrap();
    let parser = Parser::new(model.matcher, 0).unwrap();
    parser.compress_corpus(&model.dictionary, &loaded).save(&col_path).unwrap();

    let dict = ssdc::Dictionary::load(&dict_path).unwrap();
    let column = CompressedColumn::load(&col_path, &dict).unwrap();
    let mut out = Vec::new();
    for i in 0..column.len() {
        out.extend_from_slice(&column.decompress_string(&dict, i).unwrap());
        out.push(b'\n');
    }
    assert_eq!(out, std::fs::read(&text).unwrap());
}
