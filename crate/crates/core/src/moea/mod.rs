//! Baseline optimizers and the usual evolutionary multi-objective machinery.

mod archive;
mod nsga2;
mod random;

pub use archive::Archive;
pub use nsga2::{nsga2_run, Nsga2Config};
pub use random::random_search_run;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `a` is no worse everywhere and strictly better somewhere (minimization).
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        strictly |= x < y;
    }
    strictly
}

/// Indices of the rows not dominated by any other row, in ascending order.
/// Duplicated rows are all kept.
pub fn nondominated_indices(f: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| f[a].partial_cmp(&f[b]).unwrap_or(std::cmp::Ordering::Equal));
    // a dominator sorts before what it dominates, and domination is transitive,
    // so comparing against the kept rows is enough
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if !kept.iter().any(|&k| dominates(&f[k], &f[i])) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

/// Front index per row; 0 is the nondominated set.
pub fn fast_nondominated_sort(f: &[Vec<f64>]) -> Vec<usize> {
    let n = f.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&f[i], &f[j]) {
                dominated_by[i].push(j);
                count[j] += 1;
            } else if dominates(&f[j], &f[i]) {
                dominated_by[j].push(i);
                count[i] += 1;
            }
        }
    }
    let mut rank = vec![0; n];
    let mut front: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    let mut level = 0;
    while !front.is_empty() {
        let mut next = Vec::new();
        for &i in &front {
            rank[i] = level;
            for &j in &dominated_by[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        front = next;
        level += 1;
    }
    rank
}

/// Crowding distance within each front; boundary rows get infinity.
pub fn crowding_distance(f: &[Vec<f64>], rank: &[usize]) -> Vec<f64> {
    let mut distance = vec![0.0; f.len()];
    let fronts = rank.iter().copied().max().map_or(0, |r| r + 1);
    let m = f.first().map_or(0, Vec::len);
    for level in 0..fronts {
        let members: Vec<usize> = (0..f.len()).filter(|&i| rank[i] == level).collect();
        if members.len() <= 2 {
            for &i in &members {
                distance[i] = f64::INFINITY;
            }
            continue;
        }
        for k in 0..m {
            let mut sorted = members.clone();
            sorted.sort_by(|&a, &b| {
                f[a][k]
                    .partial_cmp(&f[b][k])
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            let first = sorted[0];
            let last = sorted[sorted.len() - 1];
            distance[first] = f64::INFINITY;
            distance[last] = f64::INFINITY;
            let span = f[last][k] - f[first][k];
            if span <= 0.0 {
                continue;
            }
            for w in sorted.windows(3) {
                distance[w[1]] += (f[w[2]][k] - f[w[0]][k]) / span;
            }
        }
    }
    distance
}

fn lattice(m: usize, h: usize) -> Vec<Vec<f64>> {
    fn fill(m: usize, left: usize, h: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if prefix.len() == m - 1 {
            prefix.push(left);
            out.push(prefix.iter().map(|&v| v as f64 / h as f64).collect());
            prefix.pop();
            return;
        }
        for v in 0..=left {
            prefix.push(v);
            fill(m, left - v, h, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    fill(m, h, h, &mut Vec::with_capacity(m), &mut out);
    out
}

/// Simplex-lattice reference directions with `h1` divisions, plus an inner
/// lattice with `h2` divisions shrunk halfway toward the centroid when
/// `h2 > 0`.
pub fn das_dennis(m: usize, h1: usize, h2: usize) -> Result<Vec<Vec<f64>>> {
    if m < 2 || h1 == 0 {
        return Err(Error::Parameter(format!(
            "reference directions need M >= 2 and H1 >= 1, got M={m}, H1={h1}"
        )));
    }
    let mut dirs = lattice(m, h1);
    if h2 > 0 {
        let c = 1.0 / m as f64;
        dirs.extend(
            lattice(m, h2)
                .into_iter()
                .map(|p| p.into_iter().map(|v| (v + c) / 2.0).collect()),
        );
    }
    Ok(dirs)
}

/// Lattice divisions and population size per number of objectives.
pub fn population_size(m: usize) -> Result<(usize, usize, usize)> {
    Ok(match m {
        2 => (99, 0, 100),
        3 => (13, 0, 105),
        4 => (7, 0, 120),
        5 => (5, 0, 126),
        6 => (4, 1, 132),
        8 => (3, 2, 156),
        _ => {
            return Err(Error::Parameter(format!(
                "no population size is defined for {m} objectives"
            )))
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algo: String,
    pub instance: String,
    pub pop_size: usize,
    pub max_evals: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
}

/// Outcome of one optimizer run: the final nondominated archive and the
/// hypervolume of the archive after each generation or batch, as
/// `(evaluations, hv)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: RunConfig,
    pub seed: u64,
    pub evals: usize,
    #[serde(rename = "X")]
    pub x: Vec<Vec<u32>>,
    #[serde(rename = "F")]
    pub f: Vec<Vec<f64>>,
    pub hv_trace: Vec<(usize, f64)>,
}

impl RunResult {
    pub fn final_hv(&self) -> f64 {
        self.hv_trace.last().map_or(0.0, |t| t.1)
    }
}
