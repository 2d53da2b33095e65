//! Summary statistics and rank analysis over experiment cells.

use serde::{Deserialize, Serialize};

use crate::runner::CellResult;
use crate::{Error, Result};

/// Arithmetic mean; NaN entries propagate, an empty slice is NaN.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard deviation with the population convention (divide by n).
pub fn population_std(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let m = mean(xs);
    (xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Median with NaN entries sorted past every number, so a cell whose
/// failures stay in the minority keeps a finite median.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| nan_last(*a, *b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Total order on costs: NaN compares greater than everything and equal to
/// itself.
fn nan_last(a: f64, b: f64) -> std::cmp::Ordering {
    match (a.is_nan(), b.is_nan()) {
        (true, true) => std::cmp::Ordering::Equal,
        (true, false) => std::cmp::Ordering::Greater,
        (false, true) => std::cmp::Ordering::Less,
        (false, false) => a.partial_cmp(&b).expect("both finite or infinite"),
    }
}

/// Scientific notation with two significant figures and a signed two-digit
/// exponent, e.g. `2.0E-03`.
pub fn sci2(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.0E+00".into();
    }
    let mut exp = x.abs().log10().floor() as i32;
    let mut mant = x / 10f64.powi(exp);
    // Rounding the mantissa to one decimal can carry it to 10.0.
    if (mant * 10.0).round().abs() >= 100.0 {
        mant /= 10.0;
        exp += 1;
    }
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{:.1}E{}{:02}", mant, sign, exp.abs())
}

/// `mean ± std` cell text in [`sci2`] notation.
pub fn mean_std_label(errors: &[f64]) -> String {
    format!("{} ± {}", sci2(mean(errors)), sci2(population_std(errors)))
}

/// Per-problem optimizer ranks by median error, plus the aggregate mean rank
/// per optimizer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankTable {
    /// Column identities, in first-appearance order of the cells.
    pub optimizers: Vec<String>,
    pub rows: Vec<RankRow>,
    /// Mean rank per optimizer across all rows; lower is better.
    pub mean_rank: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankRow {
    pub problem: String,
    /// Median error per optimizer, aligned with `optimizers`.
    pub medians: Vec<f64>,
    /// Rank per optimizer; ties share the average of their positions, NaN
    /// medians rank behind every number.
    pub ranks: Vec<f64>,
}

/// Ranks every problem row of the cell matrix. Requires at least two
/// optimizers; a cell missing from the matrix ranks as NaN.
pub fn rank_table(cells: &[CellResult]) -> Result<RankTable> {
    let mut optimizers: Vec<String> = Vec::new();
    let mut problems: Vec<String> = Vec::new();
    for c in cells {
        if !optimizers.contains(&c.optimizer) {
            optimizers.push(c.optimizer.clone());
        }
        if !problems.contains(&c.problem) {
            problems.push(c.problem.clone());
        }
    }
    if optimizers.len() < 2 {
        return Err(Error::Config(
            "rank analysis needs at least two optimizers".into(),
        ));
    }

    let rows: Vec<RankRow> = problems
        .iter()
        .map(|p| {
            let medians: Vec<f64> = optimizers
                .iter()
                .map(|o| {
                    cells
                        .iter()
                        .find(|c| &c.problem == p && &c.optimizer == o)
                        .map(|c| median(&c.errors))
                        .unwrap_or(f64::NAN)
                })
                .collect();
            RankRow {
                problem: p.clone(),
                ranks: ranks_of(&medians),
                medians,
            }
        })
        .collect();

    let mean_rank: Vec<f64> = (0..optimizers.len())
        .map(|j| mean(&rows.iter().map(|r| r.ranks[j]).collect::<Vec<_>>()))
        .collect();

    Ok(RankTable {
        optimizers,
        rows,
        mean_rank,
    })
}

/// Competition ranks (1-based) with average-tie sharing and NaN last. Two
/// NaN entries tie with each other.
fn ranks_of(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| nan_last(values[a], values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len()
            && nan_last(values[order[j + 1]], values[order[i]]) == std::cmp::Ordering::Equal
        {
            j += 1;
        }
        // Positions i..=j (0-based) share the average of ranks i+1..=j+1.
        let shared = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = shared;
        }
        i = j + 1;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(problem: &str, optimizer: &str, errors: Vec<f64>) -> CellResult {
        CellResult {
            problem: problem.into(),
            dim: 3,
            nfe: 100,
            optimizer: optimizer.into(),
            failures: vec![None; errors.len()],
            nfe_used: vec![100; errors.len()],
            wall_ms: vec![0.0; errors.len()],
            errors,
        }
    }

    // Hand statistics: mean of {1e-3, 3e-3} is 2e-3; the spread of each
    // point from the mean is 1e-3, so the by-n deviation is exactly 1e-3.
    #[test]
    fn mean_std_label_matches_hand_example() {
        let errors = [1e-3, 3e-3];
        assert!((mean(&errors) - 2e-3).abs() < 1e-18);
        assert!((population_std(&errors) - 1e-3).abs() < 1e-18);
        assert_eq!(mean_std_label(&errors), "2.0E-03 ± 1.0E-03");
    }

    #[test]
    fn sci2_handles_signs_zero_and_mantissa_carry() {
        assert_eq!(sci2(2.03e-11), "2.0E-11");
        assert_eq!(sci2(-0.46), "-4.6E-01");
        assert_eq!(sci2(0.0), "0.0E+00");
        assert_eq!(sci2(9.99e-2), "1.0E-01");
        assert_eq!(sci2(-9.99e-2), "-1.0E-01");
        assert_eq!(sci2(123.0), "1.2E+02");
        assert_eq!(sci2(f64::NAN), "NaN");
        assert_eq!(sci2(f64::INFINITY), "inf");
    }

    #[test]
    fn median_is_nan_resistant_while_failures_stay_minor() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[1.0, f64::NAN, 2.0]), 2.0);
        assert!(median(&[1.0, f64::NAN, f64::NAN]).is_nan());
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn ranks_split_ties_and_park_nan_last() {
        assert_eq!(ranks_of(&[1e-9, 1e-2]), vec![1.0, 2.0]);
        assert_eq!(ranks_of(&[5.0, 5.0]), vec![1.5, 1.5]);
        assert_eq!(ranks_of(&[2.0, f64::NAN, 1.0]), vec![2.0, 3.0, 1.0]);
        assert_eq!(ranks_of(&[f64::NAN, 1.0, f64::NAN]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn rank_table_aggregates_mean_ranks() {
        let cells = vec![
            cell("P1", "a", vec![1.0]),
            cell("P1", "b", vec![2.0]),
            cell("P1", "c", vec![3.0]),
            cell("P1", "d", vec![4.0]),
            cell("P2", "a", vec![4.0]),
            cell("P2", "b", vec![3.0]),
            cell("P2", "c", vec![2.0]),
            cell("P2", "d", vec![1.0]),
        ];
        let t = rank_table(&cells).unwrap();
        assert_eq!(t.optimizers, vec!["a", "b", "c", "d"]);
        assert_eq!(t.rows[0].ranks, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(t.rows[1].ranks, vec![4.0, 3.0, 2.0, 1.0]);
        assert_eq!(t.mean_rank, vec![2.5, 2.5, 2.5, 2.5]);
        // Rank arithmetic identity: mean ranks add up to 1 + 2 + .. + n.
        assert!((t.mean_rank.iter().sum::<f64>() - 10.0).abs() < 1e-12);

        let too_few = vec![cell("P1", "a", vec![1.0])];
        assert!(rank_table(&too_few).is_err());
    }
}
