use crate::error::{Error, Result};
use crate::eval::evaluate_batch;
use crate::problem::BenchmarkInstance;
use crate::spaces;

use super::nsga2::streams;
use super::{Archive, RunConfig, RunResult};

const BATCH: usize = 100;

/// Uniform valid sampling in batches of 100; the archive is the
/// nondominated set of everything evaluated.
pub fn random_search_run(
    instance: &BenchmarkInstance,
    max_evals: usize,
    seed: u64,
) -> Result<RunResult> {
    if max_evals == 0 {
        return Err(Error::Parameter(
            "random search needs at least one evaluation".into(),
        ));
    }
    let space = instance.space();
    let reference = instance.reference_point();
    let (mut rng, mut noise) = streams(seed);
    let mut archive = Archive::new();
    let mut evals = 0;
    let mut trace = Vec::new();
    while evals < max_evals {
        let n = BATCH.min(max_evals - evals);
        let xs = spaces::sample(space, &mut rng, n)?;
        let fs = evaluate_batch(instance, &xs, &mut noise)?;
        archive.extend(&xs, &fs);
        evals += n;
        trace.push((evals, archive.hypervolume(reference)?));
    }
    let (x, f) = archive.into_sorted();
    Ok(RunResult {
        config: RunConfig {
            algo: "random".into(),
            instance: instance.label().into(),
            pop_size: BATCH,
            max_evals,
            crossover_rate: 0.0,
            mutation_rate: 0.0,
        },
        seed,
        evals,
        x,
        f,
        hv_trace: trace,
    })
}
