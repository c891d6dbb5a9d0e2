//! Quality indicators and statistics for approximation fronts. All fronts
//! are minimization fronts given as rows of objective values.

mod hv;
mod stats;

pub use hv::hypervolume;
pub use stats::{kendall_tau, mae, median, rank_sum_test, wilcoxon_rank_sum, Comparison, RankSum};

use crate::error::{Error, Result};

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Inverted generational distance: mean distance from each `pf` point to its
/// nearest `front` point.
pub fn igd(front: &[Vec<f64>], pf: &[Vec<f64>]) -> Result<f64> {
    if front.is_empty() {
        return Err(Error::Parameter("igd of an empty front".into()));
    }
    if pf.is_empty() {
        return Err(Error::Parameter("igd against an empty Pareto front".into()));
    }
    let m = pf[0].len();
    if let Some(p) = front.iter().chain(pf).find(|p| p.len() != m) {
        return Err(Error::Dimension {
            expected: m,
            got: p.len(),
        });
    }
    let total: f64 = pf
        .iter()
        .map(|t| {
            front
                .iter()
                .map(|p| distance(p, t))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / pf.len() as f64)
}
