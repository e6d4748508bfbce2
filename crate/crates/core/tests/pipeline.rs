use al_lab::data::{split, synthetic_blobs, Dataset, FeatureKind, SplitSpec, Standardizer};
use al_lab::harness::{aulc, average_ranks, mean_ranks, run_experiment, run_experiment_detailed};
use al_lab::strategies::{StrategyConfig, StrategyKind};
use proptest::prelude::*;

fn labelled(n: usize, classes: usize) -> Dataset {
    let rows = (0..n).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
    let labels = (0..n).map(|i| i % classes).collect();
    Dataset::new("toy", rows, labels, FeatureKind::Numeric).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn splits_partition_the_rows(n in 5usize..80, classes in 2usize..4, seed in any::<u64>(), rep in 0u32..50) {
        prop_assume!(n >= 2 * classes);
        let d = labelled(n, classes);
        let s = split(&d, &SplitSpec::new(seed, rep)).unwrap();
        prop_assert_eq!(s.train_indices.len(), (0.6 * n as f64).floor() as usize);
        let mut all: Vec<usize> = s.train_indices.iter().chain(&s.test_indices).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        let mut seen = vec![false; classes];
        s.train.labels().iter().for_each(|&y| seen[y] = true);
        prop_assert!(seen.into_iter().all(|b| b));
    }

    #[test]
    fn dominated_curves_have_larger_area(base in prop::collection::vec(0.0f64..0.9, 1..40), bump in 0.01f64..0.1, at in any::<prop::sample::Index>()) {
        let mut worse = base.clone();
        worse[at.index(base.len())] += bump;
        prop_assert!(aulc(&worse).unwrap() > aulc(&base).unwrap());
    }

    #[test]
    fn ranks_average_to_the_middle(table in prop::collection::vec(prop::collection::vec(prop::sample::select(vec![0.1, 0.2, 0.3, 0.4]), 5), 1..20)) {
        let ranks = mean_ranks(&table).unwrap();
        let mean = ranks.iter().sum::<f64>() / ranks.len() as f64;
        prop_assert!((mean - 3.0).abs() < 1e-12);
        for row in &table {
            prop_assert!((average_ranks(row).iter().sum::<f64>() - 15.0).abs() < 1e-12);
        }
    }
}

#[test]
fn standardization_statistics_come_from_training_rows() {
    let d = synthetic_blobs(200, 3, 4).unwrap();
    let s = split(&d, &SplitSpec::new(3, 0)).unwrap();
    let stats = Standardizer::fit(s.train.features());
    let train = stats.apply(s.train.features());
    let test = stats.apply(s.test.features());
    for j in 0..2 {
        let m: f64 = train.iter().map(|r| r[j]).sum::<f64>() / train.len() as f64;
        assert!(m.abs() < 1e-12);
        let t: f64 = test.iter().map(|r| r[j]).sum::<f64>() / test.len() as f64;
        assert!(t.abs() > 1e-6);
    }
    // applying the fitted statistics to standardized data would shift it again,
    // while refitting on it is the identity
    let again = Standardizer::fit(&train).apply(&train);
    for (a, b) in again.iter().flatten().zip(train.iter().flatten()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn every_strategy_produces_valid_curves() {
    let d = synthetic_blobs(90, 3, 8).unwrap();
    for kind in StrategyKind::ALL {
        let t = run_experiment_detailed(&d, &StrategyConfig::new(kind), &SplitSpec::new(1, 3), 25).unwrap();
        assert_eq!(t.record.errors.len(), 25);
        assert!(t.record.errors.iter().all(|e| (0.0..=1.0).contains(e)));
        let mut picked = t.selected.clone();
        picked.sort_unstable();
        picked.dedup();
        assert_eq!(picked.len(), 25, "{kind} picked a point twice");
        assert_eq!(t.record.strategy, kind.as_str());
    }
}

#[test]
fn strategy_streams_do_not_depend_on_each_other() {
    let d = synthetic_blobs(60, 2, 2).unwrap();
    let spec = SplitSpec::new(11, 4);
    let alone = run_experiment(&d, &StrategyConfig::new(StrategyKind::Rand), &spec, 12).unwrap();
    let _ = run_experiment(&d, &StrategyConfig::new(StrategyKind::Qbc), &spec, 12).unwrap();
    let after = run_experiment(&d, &StrategyConfig::new(StrategyKind::Rand), &spec, 12).unwrap();
    assert_eq!(alone, after);
}
