use gnl_core::data::generate_blobs;
use gnl_core::learners::Perceptron;
use gnl_core::report::{
    aggregate_across_seeds, aggregate_csv, cost_performance_table, mean_and_stderr, parse_trajectory_csv,
    trajectory_csv, AggregateCurve, AGGREGATE_HEADER, TRAJECTORY_HEADER,
};
use gnl_core::{run_episode, run_episode_with, Strategy, Timing, TrackConfig, Trajectory};
use proptest::prelude::*;

fn runs(seeds: &[u64], timing: Timing) -> Vec<Trajectory> {
    let pool = generate_blobs::<f64>(50, 3, 3, 2.0, 0).unwrap();
    seeds
        .iter()
        .map(|&s| {
            let mut p = Perceptron::<f64>::new(3, 3, 1.0, true);
            run_episode_with(
                &pool,
                &mut p,
                Strategy::Margin,
                &TrackConfig::scratch_online(),
                s,
                timing,
            )
            .unwrap()
        })
        .collect()
}

#[test]
fn trajectory_csv_round_trips() {
    for t in runs(&[0, 1], Timing::Wall) {
        let text = trajectory_csv(&t.records);
        assert!(text.starts_with(TRAJECTORY_HEADER));
        assert_eq!(text.lines().count(), t.len() + 1);
        let back = parse_trajectory_csv(text.as_bytes()).unwrap();
        assert_eq!(back, t.records);
    }
}

#[test]
fn aggregate_matches_two_pass_statistics() {
    let trajs = runs(&[3, 4, 5, 6], Timing::Off);
    let curve = aggregate_across_seeds(&trajs, 50).unwrap();
    for step in 0..50 {
        let xs: Vec<f64> = trajs.iter().map(|t| t.records[step].cumulative_error as f64).collect();
        let m = xs.iter().sum::<f64>() / 4.0;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 3.0;
        assert!((curve.mean[step] - m).abs() < 1e-12);
        assert!((curve.stderr[step] - (var / 4.0).sqrt()).abs() < 1e-12);
    }
    let text = aggregate_csv(&curve);
    assert!(text.starts_with(AGGREGATE_HEADER));
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn aggregation_rejects_mixed_configurations_and_bad_cutoffs() {
    let mut trajs = runs(&[0], Timing::Off);
    let pool = generate_blobs::<f64>(50, 3, 3, 2.0, 0).unwrap();
    let mut p = Perceptron::<f64>::new(3, 3, 1.0, true);
    trajs.push(run_episode(&pool, &mut p, Strategy::Entropy, &TrackConfig::scratch_online(), 1).unwrap());
    assert!(aggregate_across_seeds(&trajs, 10).is_err());
    assert!(aggregate_across_seeds(&trajs[..1], 51).is_err());
    assert!(aggregate_across_seeds(&trajs[..1], 0).is_err());
    assert!(aggregate_across_seeds(&[], 1).is_err());
}

#[test]
fn cost_table_requires_timing_and_sorts_within_track() {
    let curve = |learner: &str, err: f64| AggregateCurve {
        learner: learner.into(),
        strategy: "random".into(),
        track: "SO".into(),
        seeds: vec![0],
        mean: vec![err; 3],
        stderr: vec![0.0; 3],
    };
    let table = cost_performance_table(&[(curve("b", 2.0), Some(1.0)), (curve("a", 5.0), Some(0.5))], 3).unwrap();
    assert_eq!(
        table.iter().map(|p| p.learner.as_str()).collect::<Vec<_>>(),
        vec!["b", "a"]
    );
    assert!(cost_performance_table(&[(curve("a", 1.0), None)], 3).is_err());
    assert!(cost_performance_table(&[(curve("a", 1.0), Some(1.0)), (curve("a", 2.0), Some(1.0))], 3).is_err());
}

proptest! {
    #[test]
    fn mean_and_stderr_ignore_order(mut values in prop::collection::vec(0usize..100_000, 1..30), rot in 0usize..30) {
        let a = mean_and_stderr(&values);
        let len = values.len();
        values.rotate_left(rot % len);
        values.reverse();
        let b = mean_and_stderr(&values);
        prop_assert_eq!(a.0.to_bits(), b.0.to_bits());
        prop_assert_eq!(a.1.to_bits(), b.1.to_bits());
    }
}
