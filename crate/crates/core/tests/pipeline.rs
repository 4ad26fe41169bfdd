use combgame::complexity::{compute_complexity, lower_bound};
use combgame::experiments::{
    emit_csv, read_csv, run_batch, run_batch_results, run_rng, summarize, Scenario, ScenarioKind, ScenarioSpec,
};
use combgame::game::{run_combgame, GameConfig, Tracking};
use combgame::learners::LearnerKind;
use combgame::thresholds::ThresholdMode;

fn scenarios() -> Vec<Scenario> {
    vec![
        Scenario::uniform_matroid(5, 2, 0.035).unwrap(),
        Scenario::uniform_matroid(10, 3, 0.1).unwrap(),
        Scenario::grid_network(4, 0.075, 3).unwrap(),
        Scenario::line_network(2, 3, 0.2, 3).unwrap(),
        Scenario::almost_all_sets(7, 0.25).unwrap(),
    ]
}

#[test]
fn every_learner_solves_every_family() {
    for s in scenarios() {
        for learner in LearnerKind::ALL {
            let config = GameConfig {
                learner,
                ..GameConfig::default()
            };
            let results = run_batch_results(&s, &config, 3, 11, 2).unwrap();
            for r in &results {
                assert!(!r.budget_exceeded, "{} {learner}", s.name);
                assert!(r.final_statistic > r.final_threshold);
                assert!(r.stopping_time > r.init_rounds);
            }
            assert!(results.iter().filter(|r| r.correct).count() >= 2, "{} {learner}", s.name);
        }
    }
}

#[test]
fn each_tracking_rule_and_threshold_stops() {
    let s = Scenario::uniform_matroid(5, 3, 0.1).unwrap();
    for tracking in Tracking::ALL {
        for threshold in [ThresholdMode::Stylized, ThresholdMode::TheoreticalGaussian, ThresholdMode::TheoreticalSubgaussian] {
            let config = GameConfig {
                tracking,
                threshold,
                ..GameConfig::default()
            };
            let b = run_batch(&s, &config, 2, 0, 1).unwrap();
            assert_eq!(b.stats.budget_exceeded, 0, "{tracking} {threshold:?}");
        }
    }
}

#[test]
fn theoretical_thresholds_stop_later() {
    let s = Scenario::uniform_matroid(5, 3, 0.1).unwrap();
    let tau = |threshold| {
        let config = GameConfig {
            threshold,
            ..GameConfig::default()
        };
        run_batch(&s, &config, 10, 4, 1).unwrap().stats.mean_tau
    };
    assert!(tau(ThresholdMode::TheoreticalGaussian) > tau(ThresholdMode::Stylized));
}

#[test]
fn per_answer_learners_run() {
    let s = Scenario::uniform_matroid(5, 3, 0.1).unwrap();
    let config = GameConfig {
        per_answer_learners: true,
        tracking: Tracking::CTrack,
        ..GameConfig::default()
    };
    let b = run_batch(&s, &config, 4, 2, 2).unwrap();
    assert_eq!(b.stats.budget_exceeded, 0);
    assert_eq!(b.stats.tracking_violations, 0);
}

#[test]
fn mean_stopping_time_respects_lower_bound() {
    let s = Scenario::uniform_matroid(5, 3, 0.1).unwrap();
    let c = compute_complexity(&s.instance, &s.actions, &s.answers, 1e-6, 20_000).unwrap();
    let lb = lower_bound(0.1, c.dual).unwrap();
    let b = run_batch(&s, &GameConfig::default(), 20, 8, 2).unwrap();
    assert!(b.stats.mean_tau >= lb.value, "{} < {}", b.stats.mean_tau, lb.value);
}

#[test]
fn single_run_matches_first_batch_run() {
    let s = Scenario::grid_network(4, 0.075, 1).unwrap();
    let config = GameConfig::default();
    let batch = run_batch_results(&s, &config, 3, 21, 3).unwrap();
    let alone = run_combgame(&config, &s.instance, &s.actions, &s.answers, &mut run_rng(21, 0)).unwrap();
    assert_eq!(alone.stopping_time, batch[0].stopping_time);
    assert_eq!(alone.recommended, batch[0].recommended);
    assert_eq!(summarize(&batch), run_batch(&s, &config, 3, 21, 1).unwrap().stats);
}

#[test]
fn spec_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let mut spec = ScenarioSpec::new(ScenarioKind::LineNetwork);
    spec.n_n = Some(2);
    spec.n_l = Some(2);
    let s = spec.build().unwrap();
    let summaries: Vec<_> = [LearnerKind::Ofw, LearnerKind::AdaHedge]
        .into_iter()
        .map(|learner| {
            let config = GameConfig {
                learner,
                ..GameConfig::default()
            };
            run_batch(&s, &config, 3, 1, 2).unwrap()
        })
        .collect();
    emit_csv(&summaries, &path).unwrap();
    let rows = read_csv(&path).unwrap();
    assert_eq!(rows.len(), 2);
    for (row, sum) in rows.iter().zip(&summaries) {
        assert_eq!(row.scenario, s.name);
        assert_eq!(row.mean_tau, sum.stats.mean_tau);
        assert_eq!(row.error_count, sum.stats.error_count);
    }
}
