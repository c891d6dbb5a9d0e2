use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::evaluate_batch;
use crate::problem::{BenchmarkInstance, Genotype};
use crate::spaces::{self, SearchSpace};

use super::{crowding_distance, fast_nondominated_sort, Archive, RunConfig, RunResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Nsga2Config {
    pub pop_size: usize,
    pub max_evals: usize,
    pub crossover_rate: f64,
    /// Per-position reset probability; `1/D` when unset.
    pub mutation_rate: Option<f64>,
    /// Record the archive hypervolume after every generation rather than
    /// only at the end.
    pub trace: bool,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Nsga2Config {
            pop_size: 100,
            max_evals: 10_000,
            crossover_rate: 0.9,
            mutation_rate: None,
            trace: true,
        }
    }
}

impl Nsga2Config {
    pub fn new(pop_size: usize, max_evals: usize) -> Self {
        Nsga2Config {
            pop_size,
            max_evals,
            ..Self::default()
        }
    }
}

/// Independent streams for variation and for evaluation noise, so that the
/// search trajectory does not depend on how many draws evaluation makes.
pub(crate) fn streams(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let search = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = ChaCha8Rng::seed_from_u64(seed);
    noise.set_stream(1);
    (search, noise)
}

fn tournament<R: Rng>(rng: &mut R, rank: &[usize], crowd: &[f64]) -> usize {
    let a = rng.random_range(0..rank.len());
    let b = rng.random_range(0..rank.len());
    if rank[b] < rank[a] || (rank[b] == rank[a] && crowd[b] > crowd[a]) {
        b
    } else {
        a
    }
}

fn vary<R: Rng>(
    space: &dyn SearchSpace,
    rng: &mut R,
    p1: &[u32],
    p2: &[u32],
    cx: f64,
    pm: f64,
) -> Result<[Genotype; 2]> {
    let cards = &space.descriptor().cardinalities;
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if rng.random::<f64>() < cx {
        for i in 0..c1.len() {
            if rng.random::<bool>() {
                std::mem::swap(&mut c1[i], &mut c2[i]);
            }
        }
    }
    let mut finish = |mut c: Vec<u32>| -> Result<Genotype> {
        for (v, &card) in c.iter_mut().zip(cards) {
            if rng.random::<f64>() < pm {
                *v = rng.random_range(0..card);
            }
        }
        let repaired = space.repair(Genotype::new(c));
        if space.structurally_valid(&repaired) {
            Ok(repaired)
        } else {
            Ok(spaces::sample(space, rng, 1)?.remove(0))
        }
    };
    let c1 = finish(c1)?;
    let c2 = finish(c2)?;
    Ok([c1, c2])
}

/// Ranks rows by (front, -crowding) and keeps the first `n`.
fn survivors(f: &[Vec<f64>], n: usize) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let rank = fast_nondominated_sort(f);
    let crowd = crowding_distance(f, &rank);
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| {
        rank[a].cmp(&rank[b]).then_with(|| {
            crowd[b]
                .partial_cmp(&crowd[a])
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    order.truncate(n);
    let r = order.iter().map(|&i| rank[i]).collect();
    let c = order.iter().map(|&i| crowd[i]).collect();
    (order, r, c)
}

/// NSGA-II on integer genotypes: binary tournament on (front, crowding),
/// uniform crossover, random-reset mutation, validity repair with
/// resampling as the fallback.
pub fn nsga2_run(
    instance: &BenchmarkInstance,
    config: &Nsga2Config,
    seed: u64,
) -> Result<RunResult> {
    let space = instance.space();
    let n = config.pop_size;
    if n < 2 || config.max_evals < n {
        return Err(Error::Parameter(format!(
            "need pop_size >= 2 and max_evals >= pop_size, got {n} and {}",
            config.max_evals
        )));
    }
    if !(0.0..=1.0).contains(&config.crossover_rate) {
        return Err(Error::Parameter("crossover rate must lie in [0, 1]".into()));
    }
    let pm = config
        .mutation_rate
        .unwrap_or(1.0 / space.descriptor().dim() as f64);
    let reference = instance.reference_point();
    let (mut rng, mut noise) = streams(seed);

    let mut pop = spaces::sample(space, &mut rng, n)?;
    let mut fit = evaluate_batch(instance, &pop, &mut noise)?;
    let mut evals = n;
    let mut archive = Archive::new();
    archive.extend(&pop, &fit);
    let mut trace = Vec::new();
    if config.trace {
        trace.push((evals, archive.hypervolume(reference)?));
    }
    let (_, mut rank, mut crowd) = survivors(&fit, n);

    while evals < config.max_evals {
        let want = n.min(config.max_evals - evals);
        let mut offspring = Vec::with_capacity(want + 1);
        while offspring.len() < want {
            let a = tournament(&mut rng, &rank, &crowd);
            let b = tournament(&mut rng, &rank, &crowd);
            offspring.extend(vary(
                space,
                &mut rng,
                &pop[a],
                &pop[b],
                config.crossover_rate,
                pm,
            )?);
        }
        offspring.truncate(want);
        let off_fit = evaluate_batch(instance, &offspring, &mut noise)?;
        evals += want;
        archive.extend(&offspring, &off_fit);

        pop.extend(offspring);
        fit.extend(off_fit);
        let (keep, r, c) = survivors(&fit, n);
        pop = keep.iter().map(|&i| pop[i].clone()).collect();
        fit = keep.iter().map(|&i| fit[i].clone()).collect();
        rank = r;
        crowd = c;
        if config.trace {
            trace.push((evals, archive.hypervolume(reference)?));
        }
    }
    if !config.trace {
        trace.push((evals, archive.hypervolume(reference)?));
    }
    let (x, f) = archive.into_sorted();
    Ok(RunResult {
        config: RunConfig {
            algo: "nsga2".into(),
            instance: instance.label().into(),
            pop_size: n,
            max_evals: config.max_evals,
            crossover_rate: config.crossover_rate,
            mutation_rate: pm,
        },
        seed,
        evals,
        x,
        f,
        hv_trace: trace,
    })
}
