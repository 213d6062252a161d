use lda::parallel;
use lda::study::{run, synthetic_dataset, Experiment, StudyOptions};
use lda_core::annual_loss::{simulate_annual_losses, SimulationConfig};
use lda_core::likelihood::{fit_truncated, FitConfig, TruncatedSample};
use lda_core::selection::ad_test;
use lda_core::{Severity, SeverityFamily};

#[test]
fn parallel_simulation_matches_serial() {
    let sev = Severity::from_params(SeverityFamily::Burr, &[1.5, 2.0, 3.0], 0.0).unwrap();
    let cfg = SimulationConfig { draws: 20_000, seed: 5, stream: 9, reject_nonpositive: false };
    let a = simulate_annual_losses(40.0, &sev, &cfg).unwrap();
    let b = parallel::simulate_annual_losses(40.0, &sev, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn parallel_ad_test_matches_serial() {
    let data = synthetic_dataset(&[2], 5, 1).unwrap();
    let sample = TruncatedSample::new(data.losses("ORC2"), data.threshold("ORC2").unwrap()).unwrap();
    let cfg = FitConfig { seed: 3, ..FitConfig::default() };
    let fit = fit_truncated(SeverityFamily::Lognormal, &sample, &cfg).unwrap();
    let a = ad_test(&fit, &sample, 0.95, 199, &cfg).unwrap();
    let b = parallel::ad_test(&fit, &sample, 0.95, 199, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn study_rerun_is_byte_identical() {
    let opts = StudyOptions { seed: 17, sims: Some(3), draws: Some(4096), orcs: Some(vec![3]), ..Default::default() };
    let dirs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for d in &dirs {
        run(Experiment::QsRanking, &opts).unwrap().write(d.path()).unwrap();
    }
    for name in ["ranks.csv", "rank_summary.csv", "summary.json"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn single_thread_pool_gives_same_tables() {
    let opts = StudyOptions { seed: 2, sims: Some(4), years: Some(14), ..Default::default() };
    let multi = run(Experiment::Censoring, &opts).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let single = pool.install(|| run(Experiment::Censoring, &opts)).unwrap();
    for ((n, a), (_, b)) in multi.tables.iter().zip(&single.tables) {
        assert_eq!(a.to_csv(), b.to_csv(), "{n}");
    }
}
