use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

use super::LearningCurveRecord;

/// Area under the learning curve: the mean per-acquisition error.
pub fn aulc(errors: &[f64]) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::input("cannot take the AULC of an empty curve"));
    }
    Ok(errors.iter().sum::<f64>() / errors.len() as f64)
}

/// Ascending ranks starting at 1; tied values share their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let rank = (i + 1 + j) as f64 / 2.0;
        order[i..j].iter().for_each(|&k| ranks[k] = rank);
        i = j;
    }
    ranks
}

/// Mean rank of each strategy. `table[r][s]` is the AULC of strategy `s` in
/// repetition `r`; rank 1 is the lowest AULC.
pub fn mean_ranks(table: &[Vec<f64>]) -> Result<Vec<f64>> {
    let Some(first) = table.first() else {
        return Err(Error::input("rank table has no repetitions"));
    };
    let s = first.len();
    if s == 0 {
        return Err(Error::input("rank table has no strategies"));
    }
    let mut sums = vec![0.0; s];
    for (r, row) in table.iter().enumerate() {
        if row.len() != s {
            return Err(Error::input(format!(
                "repetition {r} has {} strategies, expected {s}",
                row.len()
            )));
        }
        for (acc, rank) in sums.iter_mut().zip(average_ranks(row)) {
            *acc += rank;
        }
    }
    Ok(sums.into_iter().map(|v| v / table.len() as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WilcoxonMethod {
    /// Exact for up to 20 nonzero differences, normal approximation above.
    Auto,
    Exact,
    Normal,
}

pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `min(W+, W-)`.
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// Number of nonzero differences.
    pub n: usize,
    /// `W+ - W-`; positive when `a` tends to exceed `b`.
    pub rank_balance: f64,
    /// All differences were zero.
    pub degenerate: bool,
    pub exact: bool,
}

pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    wilcoxon_with(a, b, WilcoxonMethod::Auto)
}

/// Paired two-sided signed-rank test of `a - b`. Zero differences are
/// dropped; tied magnitudes share average ranks.
pub fn wilcoxon_with(a: &[f64], b: &[f64], method: WilcoxonMethod) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.len() < 5 {
        return Err(Error::input(format!("signed-rank test needs at least 5 pairs, got {}", a.len())));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::input("signed-rank test got a non-finite difference"));
    }
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            p_value: 1.0,
            n: 0,
            rank_balance: 0.0,
            degenerate: true,
            exact: true,
        });
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&magnitudes);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let statistic = w_plus.min(w_minus);
    let exact = match method {
        WilcoxonMethod::Auto => n <= EXACT_LIMIT,
        WilcoxonMethod::Exact => true,
        WilcoxonMethod::Normal => false,
    };
    let p_value = if exact {
        exact_p(&ranks, statistic)
    } else {
        normal_p(&ranks, statistic)
    };
    Ok(WilcoxonResult {
        statistic,
        p_value,
        n,
        rank_balance: w_plus - w_minus,
        degenerate: false,
        exact,
    })
}

/// `2 P(W+ <= w)` under the null with every sign equally likely, by counting
/// sign patterns over doubled ranks (average ranks are half-integers).
fn exact_p(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; max + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] > 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let limit = (2.0 * w).round() as usize;
    let below: f64 = counts[..=limit.min(max)].iter().sum();
    let all = 2f64.powi(ranks.len() as i32);
    (2.0 * below / all).min(1.0)
}

fn normal_p(ranks: &[f64], w: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    for group in sorted.chunk_by(|x, y| x == y) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w - mean + 0.5) / var.sqrt()).min(0.0);
    let normal = Normal::standard();
    (2.0 * normal.cdf(z)).min(1.0)
}

/// Which side of a paired comparison did better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Reference,
    Competitor,
}

/// `***`/`**`/`*` at p below .001/.01/.05 when the reference is better, daggers
/// when the competitor is; empty otherwise.
pub fn significance_stars(p: f64, direction: Direction) -> &'static str {
    let level = if p < 0.001 {
        3
    } else if p < 0.01 {
        2
    } else if p < 0.05 {
        1
    } else {
        0
    };
    match (direction, level) {
        (_, 0) => "",
        (Direction::Reference, 1) => "*",
        (Direction::Reference, 2) => "**",
        (Direction::Reference, _) => "***",
        (Direction::Competitor, 1) => "†",
        (Direction::Competitor, 2) => "††",
        (Direction::Competitor, _) => "†††",
    }
}

pub const SIGNIFICANCE_LEVELS: [f64; 3] = [0.001, 0.01, 0.05];

/// One line of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub strategy: String,
    pub mean_aulc: f64,
    pub std_aulc: f64,
    pub mean_rank: f64,
    /// Empty for the reference strategy itself.
    pub p_vs_reference: Option<f64>,
    pub annotation: String,
}

/// Wins, ties and losses of the reference against one competitor at one level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinTieLoss {
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub reference: String,
    /// dataset -> strategy -> mean rank.
    pub per_dataset: BTreeMap<String, BTreeMap<String, f64>>,
    /// strategy -> mean of the per-dataset mean ranks.
    pub overall: BTreeMap<String, f64>,
    /// competitor -> counts at each of [`SIGNIFICANCE_LEVELS`].
    pub win_tie_loss: BTreeMap<String, [WinTieLoss; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub ranks: RankSummary,
}

/// Mean/std AULC, mean ranks and signed-rank comparisons against
/// `reference`, per dataset. Strategies are paired by repetition; every
/// strategy must cover the same repetitions of a dataset.
pub fn summarize(records: &[LearningCurveRecord], reference: &str) -> Result<Summary> {
    // dataset -> strategy -> repetition -> aulc
    let mut table: BTreeMap<&str, BTreeMap<&str, BTreeMap<u32, f64>>> = BTreeMap::new();
    for r in records {
        let prev = table
            .entry(&r.dataset)
            .or_default()
            .entry(&r.strategy)
            .or_default()
            .insert(r.repetition, aulc(&r.errors)?);
        if prev.is_some() {
            return Err(Error::input(format!(
                "duplicate record for {}/{} repetition {}",
                r.dataset, r.strategy, r.repetition
            )));
        }
    }
    let mut rows = Vec::new();
    let mut per_dataset: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    let mut win_tie_loss: BTreeMap<String, [WinTieLoss; 3]> = BTreeMap::new();
    for (dataset, by_strategy) in &table {
        let strategies: Vec<&str> = by_strategy.keys().copied().collect();
        let reps: Vec<u32> = by_strategy[strategies[0]].keys().copied().collect();
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(strategies.len());
        for s in &strategies {
            let runs = &by_strategy[s];
            if runs.keys().ne(reps.iter()) {
                return Err(Error::input(format!(
                    "strategy {s} on {dataset} does not cover the same repetitions as {}",
                    strategies[0]
                )));
            }
            columns.push(runs.values().copied().collect());
        }
        let rank_table: Vec<Vec<f64>> = (0..reps.len()).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
        let ranks = mean_ranks(&rank_table)?;
        per_dataset.insert(
            dataset.to_string(),
            strategies.iter().map(|s| s.to_string()).zip(ranks.iter().copied()).collect(),
        );
        let reference_column = strategies.iter().position(|s| *s == reference).map(|i| &columns[i]);
        for (i, s) in strategies.iter().enumerate() {
            let col = &columns[i];
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64;
            let (p, annotation) = match reference_column {
                Some(refc) if *s != reference && col.len() >= 5 => {
                    let w = wilcoxon_signed_rank(col, refc)?;
                    let direction = if w.rank_balance >= 0.0 {
                        Direction::Reference
                    } else {
                        Direction::Competitor
                    };
                    let counts = win_tie_loss.entry(s.to_string()).or_default();
                    for (level, c) in SIGNIFICANCE_LEVELS.iter().zip(counts.iter_mut()) {
                        match (w.p_value < *level, direction) {
                            (false, _) => c.ties += 1,
                            (true, Direction::Reference) => c.wins += 1,
                            (true, Direction::Competitor) => c.losses += 1,
                        }
                    }
                    (Some(w.p_value), significance_stars(w.p_value, direction).to_string())
                }
                _ => (None, String::new()),
            };
            rows.push(SummaryRow {
                dataset: dataset.to_string(),
                strategy: s.to_string(),
                mean_aulc: mean,
                std_aulc: var.sqrt(),
                mean_rank: ranks[i],
                p_vs_reference: p,
                annotation,
            });
        }
    }
    let mut overall: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for ranks in per_dataset.values() {
        for (s, r) in ranks {
            let e = overall.entry(s.clone()).or_default();
            e.0 += r;
            e.1 += 1;
        }
    }
    Ok(Summary {
        rows,
        ranks: RankSummary {
            reference: reference.to_string(),
            per_dataset,
            overall: overall.into_iter().map(|(s, (sum, k))| (s, sum / k as f64)).collect(),
            win_tie_loss,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn aulc_examples() {
        assert_eq!(aulc(&[0.5; 7]).unwrap(), 0.5);
        assert_eq!(aulc(&[1.0, 0.0]).unwrap(), 0.5);
        assert!(aulc(&[]).is_err());
        assert!(aulc(&[0.3, 0.4]).unwrap() > aulc(&[0.3, 0.3]).unwrap());
    }

    #[test]
    fn rank_examples() {
        let table = vec![vec![0.1, 0.2]; 3];
        assert_eq!(mean_ranks(&table).unwrap(), vec![1.0, 2.0]);
        assert_eq!(mean_ranks(&[vec![0.3; 4], vec![0.1; 4]]).unwrap(), vec![2.5; 4]);
        // hand ranking: rows rank to (1,2,3), (3,1,2), (1.5,1.5,3), (2,3,1)
        let table = vec![
            vec![0.1, 0.2, 0.3],
            vec![0.5, 0.1, 0.2],
            vec![0.2, 0.2, 0.4],
            vec![0.3, 0.4, 0.0],
        ];
        assert_eq!(mean_ranks(&table).unwrap(), vec![7.5 / 4.0, 7.5 / 4.0, 9.0 / 4.0]);
        assert!(mean_ranks(&[vec![0.1, 0.2], vec![0.1]]).is_err());
    }

    fn enumerate_p(diffs: &[f64]) -> f64 {
        // brute force over all sign assignments of the observed magnitudes
        let mags: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
        let ranks = average_ranks(&mags);
        let total: f64 = ranks.iter().sum();
        let obs_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
        let obs = obs_plus.min(total - obs_plus);
        let n = diffs.len();
        let mut hits = 0u64;
        for mask in 0u64..(1 << n) {
            let plus: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if plus.min(total - plus) <= obs + 1e-9 {
                hits += 1;
            }
        }
        hits as f64 / (1u64 << n) as f64
    }

    #[test]
    fn wilcoxon_examples() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let w = wilcoxon_signed_rank(&a, &a).unwrap();
        assert_eq!(w.p_value, 1.0);
        assert!(w.degenerate);
        let b = [0.5, 1.2, 2.0, 2.6, 3.3];
        let w = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(w.statistic, 0.0);
        assert!((w.p_value - 2.0 / 32.0).abs() < 1e-15);
        assert!(wilcoxon_signed_rank(&a[..4], &b[..4]).is_err());
        assert!(wilcoxon_signed_rank(&a, &b[..4]).is_err());
    }

    #[test]
    fn exact_branch_matches_sign_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for n in [5, 6, 9, 12] {
            for _ in 0..20 {
                // coarse values force tied magnitudes
                let a: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(-4i32..5))).collect();
                let b = vec![0.0; n];
                if a.iter().all(|v| *v == 0.0) {
                    continue;
                }
                let nz: Vec<f64> = a.iter().copied().filter(|v| *v != 0.0).collect();
                let w = wilcoxon_with(&a, &b, WilcoxonMethod::Exact).unwrap();
                assert!((w.p_value - enumerate_p(&nz)).abs() < 1e-12, "{a:?}");
            }
        }
    }

    #[test]
    fn exact_and_normal_agree_at_twenty() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
            let b: Vec<f64> = (0..20).map(|_| rng.random::<f64>() + 0.1).collect();
            let e = wilcoxon_with(&a, &b, WilcoxonMethod::Exact).unwrap();
            let z = wilcoxon_with(&a, &b, WilcoxonMethod::Normal).unwrap();
            assert!((e.p_value - z.p_value).abs() < 0.01, "{} vs {}", e.p_value, z.p_value);
        }
    }

    #[test]
    fn stars() {
        assert_eq!(significance_stars(0.0005, Direction::Reference), "***");
        assert_eq!(significance_stars(0.005, Direction::Reference), "**");
        assert_eq!(significance_stars(0.2, Direction::Reference), "");
        assert_eq!(significance_stars(0.03, Direction::Competitor), "†");
    }

    fn record(strategy: &str, repetition: u32, err: f64) -> LearningCurveRecord {
        LearningCurveRecord {
            dataset: "toy".into(),
            strategy: strategy.into(),
            repetition,
            seed: 0,
            errors: vec![err, err],
        }
    }

    #[test]
    fn summary_of_a_clear_winner() {
        let mut records = Vec::new();
        for r in 0..8 {
            records.push(record("xpal", r, 0.1 + 0.01 * r as f64));
            records.push(record("rand", r, 0.3 + 0.02 * r as f64));
        }
        let s = summarize(&records, "xpal").unwrap();
        let xpal = s.rows.iter().find(|r| r.strategy == "xpal").unwrap();
        let rand = s.rows.iter().find(|r| r.strategy == "rand").unwrap();
        assert_eq!(xpal.mean_rank, 1.0);
        assert_eq!(xpal.p_vs_reference, None);
        assert_eq!(rand.mean_rank, 2.0);
        assert!((rand.p_vs_reference.unwrap() - 2.0 / 256.0).abs() < 1e-15);
        assert_eq!(rand.annotation, "**");
        let wtl = s.ranks.win_tie_loss["rand"];
        assert_eq!(wtl[0], WinTieLoss { wins: 0, ties: 1, losses: 0 });
        assert_eq!(wtl[1].wins, 1);
        let mean: f64 = s.ranks.per_dataset["toy"].values().sum::<f64>() / 2.0;
        assert_eq!(mean, 1.5);
        records.pop();
        assert!(summarize(&records, "xpal").is_err());
    }
}
