mod common;

use coda_augment::dataset::{read_csv, split_indices, to_csv_bytes};
use coda_augment::{
    augment_table, load_csv, split, write_csv, AugmentRequest, ClassId, CsvOptions, Dataset, Error, LibrarySize,
    Strategy,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn count_table(n: usize, p: usize, seed: u64) -> Dataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut r: Vec<f64> = (0..p).map(|_| rng.random_range(0..50u32) as f64).collect();
            r[0] += 1.0;
            r
        })
        .collect();
    let labels: Vec<&str> = (0..n).map(|i| if i % 3 == 0 { "case" } else { "control" }).collect();
    Dataset::from_labelled_rows(&rows, &labels, LibrarySize::default()).unwrap()
}

#[test]
fn augmented_tables_survive_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("aug.csv");
    for strategy in Strategy::ALL {
        let out = augment_table(&count_table(9, 6, 1), &AugmentRequest::new(strategy, 77)).unwrap();
        write_csv(&out, &path).unwrap();
        let back: Dataset<f64> = load_csv(&path, &CsvOptions::default()).unwrap();
        assert_eq!(back.feature_names, out.feature_names);
        assert_eq!(back.class_names, out.class_names);
        assert_eq!(back.len(), out.len());
        for (a, b) in back.samples.iter().zip(&out.samples) {
            assert_eq!(a.x, b.x);
            assert_eq!((a.y, a.weight, a.provenance), (b.y, b.weight, b.provenance));
        }
        assert_eq!(to_csv_bytes(&back, b',').unwrap(), std::fs::read(&path).unwrap());
    }
}

#[test]
fn count_rows_keep_their_depth() {
    let text = "id,a,b,c,label\ns1,3,0,7,x\ns2,1,1,2,y\n";
    let opts = CsvOptions { id_column: Some("id".into()), ..CsvOptions::default() };
    let ds: Dataset<f64> = read_csv(text.as_bytes(), &opts).unwrap();
    assert_eq!(ds.feature_names, ["a", "b", "c"]);
    assert_eq!(ds.samples[0].library_size, Some(LibrarySize::new(10).unwrap()));
    assert_eq!(ds.samples[1].library_size, Some(LibrarySize::new(4).unwrap()));
    assert_eq!(ds.samples[0].x.parts(), &[0.3, 0.0, 0.7]);
}

#[test]
fn malformed_input_is_reported() {
    let opts = CsvOptions::default();
    let err = |t: &str| read_csv::<f64, _>(t.as_bytes(), &opts).unwrap_err();
    assert!(matches!(err("a,b\n1,2\n"), Error::MissingLabelColumn(_)));
    assert!(matches!(err("a,b,label\n1,x,0\n"), Error::NonNumericFeature { .. }));
    assert!(matches!(err("a,b,label\n1,2\n"), Error::RaggedRow { .. }));
    assert!(matches!(err("a,b,label\n0,0,1\n"), Error::AllZeroRow { row: 0 }));
    assert!(matches!(err("a,b,label\n-1,2,1\n"), Error::NegativeEntry { .. }));
    assert!(matches!(err("a,label\n1,0\n"), Error::DimensionTooSmall(1)));
    let missing = load_csv::<f64>(std::path::Path::new("/nonexistent/file.csv"), &opts).unwrap_err();
    assert_eq!(missing.name(), "IoError");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stratified_splits_partition_every_class(n in 10usize..200, seed in any::<u64>(), r in 0usize..20) {
        let ds = count_table(n, 3, seed);
        let spec = coda_augment::SplitSpec { seed, ..Default::default() };
        let (train, test) = split_indices(&ds, &spec, r).unwrap();
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        for c in 0..2 {
            let count = ds.samples.iter().filter(|s| s.y == ClassId(c)).count();
            let in_test = test.iter().filter(|&&i| ds.samples[i].y == ClassId(c)).count();
            let expected = ((count as f64 * 0.2).round() as usize).clamp(1, count - 1);
            prop_assert_eq!(in_test, expected);
        }
        prop_assert_eq!(split_indices(&ds, &spec, r).unwrap(), (train, test));
    }
}

#[test]
fn twenty_replicates_differ() {
    let ds = count_table(50, 4, 3);
    let splits = split(&ds, &coda_augment::SplitSpec::default()).unwrap();
    assert_eq!(splits.len(), 20);
    assert!(splits.windows(2).any(|w| w[0].1 != w[1].1));
    assert!(splits.iter().all(|(tr, te)| tr.len() + te.len() == 50));
}
