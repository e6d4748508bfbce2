use al_lab::data::{synthetic_blobs, Dataset, FeatureKind};
use al_lab::kernel::mean_bandwidth;
use al_lab::strategies::{StrategyConfig, StrategyKind};
use al_lab_cli::landscape::{landscape, LabeledMode, LandscapeConfig};

fn config(kind: StrategyKind, mode: LabeledMode, n_labels: usize, resolution: usize) -> LandscapeConfig {
    LandscapeConfig {
        strategy: StrategyConfig::new(kind),
        mode,
        n_labels,
        resolution,
        seed: 5,
        out: "unused".into(),
    }
}

/// Points placed symmetrically about the vertical axis.
fn mirrored() -> Dataset {
    let half = [[0.5, 0.2], [1.5, -0.7], [2.0, 1.1], [0.9, 2.3], [3.1, 0.4]];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, p) in half.iter().enumerate() {
        rows.push(vec![p[0], p[1]]);
        rows.push(vec![-p[0], p[1]]);
        labels.extend([i % 2, (i + 1) % 2]);
    }
    Dataset::new("mirror", rows, labels, FeatureKind::Numeric).unwrap()
}

#[test]
fn unlabeled_xpal_field_is_mirror_symmetric() {
    let r = 9;
    let grid = landscape(&mirrored(), &config(StrategyKind::Xpal, LabeledMode::Random, 0, r))
        .unwrap()
        .grid;
    for row in 0..r {
        for col in 0..r {
            let a = grid[row * r + col].score;
            let b = grid[row * r + (r - 1 - col)].score;
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
    assert!(grid.iter().any(|p| p.score > 0.0));
}

#[test]
fn unlabeled_us_field_is_flat() {
    let d = synthetic_blobs(40, 2, 1).unwrap();
    let grid = landscape(&d, &config(StrategyKind::Us, LabeledMode::Random, 0, 6)).unwrap().grid;
    assert!(grid.iter().all(|p| p.score == 0.5));
}

#[test]
fn us_peak_lies_on_the_decision_boundary() {
    let d = synthetic_blobs(60, 2, 3).unwrap();
    let r = 41;
    let result = landscape(&d, &config(StrategyKind::Us, LabeledMode::Random, 8, r)).unwrap();
    // independent classifier over the same standardized space
    let n = d.len() as f64;
    let mean: Vec<f64> = (0..2).map(|j| d.features().iter().map(|x| x[j]).sum::<f64>() / n).collect();
    let std: Vec<f64> = (0..2)
        .map(|j| (d.features().iter().map(|x| (x[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    let gamma = mean_bandwidth(d.len(), 2).unwrap();
    let predict = |x: f64, y: f64| {
        let mut k = [0.0; 2];
        for p in &result.labeled {
            let dx = (x - p.x) / std[0];
            let dy = (y - p.y) / std[1];
            k[p.class] += (-gamma * (dx * dx + dy * dy)).exp();
        }
        usize::from(k[1] > k[0])
    };
    let classes: Vec<usize> = result.grid.iter().map(|p| predict(p.x, p.y)).collect();
    let best = (0..result.grid.len())
        .max_by(|&a, &b| result.grid[a].score.total_cmp(&result.grid[b].score))
        .unwrap();
    let (row, col) = (best / r, best % r);
    let mut near_change = false;
    for dr in -1i64..=1 {
        for dc in -1i64..=1 {
            let (rr, cc) = (row as i64 + dr, col as i64 + dc);
            if (0..r as i64).contains(&rr) && (0..r as i64).contains(&cc) {
                near_change |= classes[rr as usize * r + cc as usize] != classes[best];
            }
        }
    }
    assert!(near_change, "peak at {:?} is not next to a class change", result.grid[best]);
}

#[test]
fn grid_scoring_leaves_the_labels_alone() {
    let d = synthetic_blobs(50, 3, 2).unwrap();
    for kind in [StrategyKind::Xpal, StrategyKind::Pal, StrategyKind::Eer, StrategyKind::Qbc] {
        let a = landscape(&d, &config(kind, LabeledMode::StrategyChosen, 6, 5)).unwrap();
        let b = landscape(&d, &config(kind, LabeledMode::StrategyChosen, 6, 5)).unwrap();
        assert_eq!(a.labeled.len(), 6);
        assert_eq!(a.labeled, b.labeled);
        assert_eq!(a.grid, b.grid);
        assert!(a.grid.iter().all(|p| p.score.is_finite()));
    }
    let greedy = landscape(&d, &config(StrategyKind::GreedyAll, LabeledMode::Random, 2, 5));
    assert_eq!(greedy.unwrap_err().exit_code(), 2);
}
