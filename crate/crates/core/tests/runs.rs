use std::io::Write as _;

use fewshot_eval::adapters::NccModel;
use fewshot_eval::ingest::write_feature_file;
use fewshot_eval::output::{matrix_from_json, matrix_json};
use fewshot_eval::variance_lab::{gen_gaussian_pool, SynthConfig};
use fewshot_eval::{
    compare_runs, ingest_feature_file, run_protocol, Adapter, Error, ExecMode, LabeledPool, OracleConfig,
    ProtocolConfig, RunManifest, SamplingMode, Symbol, TaskSpec,
};
use proptest::prelude::*;

fn fixture_840(dir: &std::path::Path) -> std::path::PathBuf {
    let path = dir.join("features.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "label,f0,f1,f2").unwrap();
    for i in 0..840 {
        let c = i % 7;
        writeln!(
            f,
            "class{c},{},{},{}",
            c as f64 + (i as f64 * 0.37).sin(),
            (i % 11) as f64 / 10.0,
            -1.5
        )
        .unwrap();
    }
    path
}

#[test]
fn ingest_fixture_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pool = ingest_feature_file(&fixture_840(dir.path())).unwrap();
    assert_eq!(pool.total_samples(), 840);
    assert_eq!(pool.class_sizes(), vec![120; 7]);
    let copy = dir.path().join("copy.csv");
    write_feature_file(&pool, &copy).unwrap();
    assert_eq!(ingest_feature_file(&copy).unwrap(), pool);
}

#[test]
fn ragged_file_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "label,f0,f1\na,1\n").unwrap();
    match ingest_feature_file(&path) {
        Err(Error::Parse { line: 2, .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn closed_run_on_feature_file() {
    let dir = tempfile::tempdir().unwrap();
    let pool = ingest_feature_file(&fixture_840(dir.path())).unwrap();
    let cfg = ProtocolConfig::new(
        SamplingMode::WithReplacement,
        TaskSpec::new(5, 5, 15).with_task_count(600),
        Adapter::ncc(),
        3,
    );
    let run = run_protocol(&pool, &cfg, ExecMode::Parallel).unwrap();
    assert_eq!(run.manifest.accuracies.len(), 600);
    assert!(run.manifest.replays_identically(&pool).unwrap());
    run.manifest.validate_against(&pool).unwrap();
    let path = dir.path().join("run.json");
    run.manifest.write(&path).unwrap();
    assert_eq!(RunManifest::read(&path).unwrap(), run.manifest);
}

#[test]
fn depletion_run_has_expected_task_count_and_is_deterministic() {
    let pool = gen_gaussian_pool(&SynthConfig::two_gaussians(1000, 2)).unwrap();
    let cfg = ProtocolConfig::new(SamplingMode::Depletion, TaskSpec::new(2, 5, 15), Adapter::ncc(), 77);
    let a = run_protocol(&pool, &cfg, ExecMode::Sequential).unwrap();
    let b = run_protocol(&pool, &cfg, ExecMode::Parallel).unwrap();
    assert_eq!(a.manifest.tasks.len(), 25);
    assert_eq!(a.manifest.to_json(), b.manifest.to_json());
}

#[test]
fn oracle_pair_matrix_round_trips() {
    let pool = gen_gaussian_pool(&SynthConfig::two_gaussians(1000, 2)).unwrap();
    let run = |base: f64, stream: u64, id: &str| {
        let mut cfg = ProtocolConfig::new(
            SamplingMode::WithReplacement,
            TaskSpec::new(2, 5, 15).with_task_count(300),
            Adapter::Oracle(OracleConfig::with_correlation(base, 0.1, 0.9, stream)),
            5,
        );
        cfg.method_id = Some(id.into());
        run_protocol(&pool, &cfg, ExecMode::Sequential).unwrap().manifest
    };
    let m = compare_runs(&[run(0.70, 1, "a"), run(0.72, 2, "b"), run(0.80, 3, "c")], 0.95).unwrap();
    assert!(m.is_antisymmetric());
    assert_eq!(m.cell(0, 2).unwrap().paired, Some(Symbol::Minus));
    let text = matrix_json(&m).unwrap();
    assert_eq!(matrix_from_json(&text).unwrap(), m);
}

fn gaussian_support(seed: u64, ways: usize, shots: usize, dim: usize) -> Vec<Vec<Vec<f64>>> {
    let cfg = SynthConfig {
        class_specs: (0..ways)
            .map(|c| fewshot_eval::variance_lab::GaussianClassSpec::new(c as f64, 1.0))
            .collect(),
        total_samples: ways * shots * dim,
        seed,
    };
    let pool: LabeledPool = gen_gaussian_pool(&cfg).unwrap();
    pool.classes()
        .iter()
        .map(|c| {
            let v: Vec<f64> = c.samples().map(|x| x[0]).collect();
            v.chunks(dim).map(<[f64]>::to_vec).collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ncc_is_translation_invariant(seed in any::<u64>(), shift in -50.0f64..50.0, ways in 2usize..5) {
        let support = gaussian_support(seed, ways, 3, 2);
        let shifted: Vec<Vec<Vec<f64>>> = support
            .iter()
            .map(|c| c.iter().map(|x| x.iter().map(|v| v + shift).collect()).collect())
            .collect();
        let ra: Vec<Vec<&[f64]>> = support.iter().map(|c| c.iter().map(Vec::as_slice).collect()).collect();
        let rb: Vec<Vec<&[f64]>> = shifted.iter().map(|c| c.iter().map(Vec::as_slice).collect()).collect();
        let (ma, mb) = (NccModel::fit(&ra, false).unwrap(), NccModel::fit(&rb, false).unwrap());
        for k in 0..20 {
            let x = [k as f64 * 0.37 - 2.0, 1.0 - k as f64 * 0.11];
            let y = [x[0] + shift, x[1] + shift];
            prop_assert_eq!(ma.predict(&x).unwrap(), mb.predict(&y).unwrap());
        }
    }
}
