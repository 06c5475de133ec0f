use coda_augment::eval::bench::{baseline_auc, synth_benchmark, Arm, BenchConfig, DEFAULT_SEPARATION};
use coda_augment::Strategy;

#[test]
fn no_separation_gives_chance_auc() {
    let cfg = BenchConfig { separation: 0.0, ..BenchConfig::default() };
    let report = synth_benchmark(&cfg).unwrap();
    for strategy in Strategy::GEOMETRIC {
        for arm in [Arm::Baseline, Arm::Augmented] {
            let row = report.row(strategy, arm, cfg.n_train).unwrap();
            assert!((row.mean_auc - 0.5).abs() <= 0.05, "{strategy} {arm:?}: {}", row.mean_auc);
        }
    }
}

#[test]
fn pinned_separation_gives_the_target_baseline() {
    let auc = baseline_auc(&BenchConfig::default(), DEFAULT_SEPARATION).unwrap();
    assert!((auc - 0.75).abs() <= 0.01, "{auc}");
}

#[test]
fn reports_are_reproducible_across_thread_counts() {
    let cfg = BenchConfig { n_train: 30, n_test: 200, p: 20, replicates: 4, seed: 3, scatter_sizes: vec![12], ..Default::default() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| synth_benchmark(&cfg).unwrap().to_tsv())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_ne!(one, synth_benchmark(&BenchConfig { seed: 4, ..cfg.clone() }).unwrap().to_tsv());
}

#[test]
fn shipped_default_config_matches_the_code_defaults() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/bench_default.json");
    let parsed: BenchConfig = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(parsed, BenchConfig::default());
}
