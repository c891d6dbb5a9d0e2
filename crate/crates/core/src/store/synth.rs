//! Desk-scale stand-ins for trained NAS data.
//!
//! The generated landscapes carry the pathologies that make NAS problems hard
//! for evolutionary optimizers:
//!
//! * noisy error: every record stores several repetitions `mean + N(0, sigma)`,
//!   clipped to `[0, 1]`;
//! * multi-modality: the error surface is a set of planted Gaussian basins over
//!   Hamming distance, each planted optimum a strict local minimum;
//! * correlated complexity metrics: `params` and `flops` have sample Pearson
//!   correlation exactly `rho`, which degenerates the Pareto front as `rho -> 1`;
//! * bad scaling: each metric carries its own scale factor.
//!
//! Everything is a pure function of `(space, profile, seed)`.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::Genotype;
use crate::spaces::{self, SearchSpace};

use super::{is_tabular_space, ENSEMBLE_FILE, LUT_FILE, TABULAR_FILE};
use super::{
    FitnessRecord, Layer, LookupTable, MlpModel, SurrogateEnsemble, TabularDb, TabularHeader,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticProfile {
    /// Number of planted error basins (at least two).
    pub modes: usize,
    /// Standard deviation of the per-repetition error noise.
    pub sigma: f64,
    /// Pearson correlation between `params` and `flops`.
    pub rho: f64,
    pub repetitions: usize,
    /// Error of the best and worst architectures before noise.
    pub error_range: [f64; 2],
    pub basin_width: f64,
    /// Share of the error explained by model capacity rather than basins.
    pub capacity_weight: f64,
    /// Amplitude of the deterministic per-architecture jitter.
    pub ruggedness: f64,
    /// Fraction of architectures whose non-capacity metrics carry an extra
    /// cost unrelated to capacity.
    pub extra_cost_density: f64,
    /// Typical magnitude per metric key.
    pub scales: BTreeMap<String, f64>,
    /// Hardware devices and the metrics measured on each.
    pub devices: BTreeMap<String, Vec<String>>,
    /// Number of distinct architectures to store for spaces that cannot be
    /// enumerated.
    pub sample_size: Option<usize>,
    /// Surrogate ensemble size.
    pub pool_size: usize,
    /// Hidden widths of every surrogate MLP.
    pub hidden: Vec<usize>,
}

impl Default for SyntheticProfile {
    fn default() -> Self {
        let scales = [
            ("params", 1.0e6),
            ("flops", 1.5e8),
            ("gpu/latency", 5.0e-3),
            ("gpu/energy", 3.0e-2),
            ("eyeriss/latency", 8.0e-3),
            ("eyeriss/energy", 2.0e-3),
            ("eyeriss/arithmetic_intensity", 25.0),
            ("note10/latency", 5.0e-2),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        SyntheticProfile {
            modes: 2,
            sigma: 0.005,
            rho: 0.95,
            repetitions: 3,
            error_range: [0.05, 0.45],
            basin_width: 1.0,
            capacity_weight: 0.25,
            ruggedness: 0.02,
            extra_cost_density: 0.05,
            scales,
            devices: BTreeMap::new(),
            sample_size: None,
            pool_size: 10,
            hidden: vec![64, 32],
        }
    }
}

impl SyntheticProfile {
    /// Default profile carrying the hardware metrics the registered suites
    /// ask of `space`.
    pub fn for_space(space: &str) -> Self {
        let mut profile = SyntheticProfile::default();
        let devices: &[(&str, &[&str])] = match space {
            "nb201" => &[
                ("gpu", &["latency", "energy"]),
                ("eyeriss", &["latency", "energy", "arithmetic_intensity"]),
            ],
            "nats" => &[("gpu", &["latency"])],
            "mnv3" => &[("note10", &["latency"])],
            _ => &[],
        };
        profile.devices = devices
            .iter()
            .map(|(d, ms)| (d.to_string(), ms.iter().map(|m| m.to_string()).collect()))
            .collect();
        if space == "nb101" {
            profile.sample_size = Some(20_000);
        }
        profile
    }

    /// Applies the fields present in `overrides` on top of
    /// [`for_space`](Self::for_space).
    pub fn for_space_with(space: &str, overrides: serde_json::Value) -> Result<Self> {
        let mut base = serde_json::to_value(Self::for_space(space))?;
        if let (Some(base), serde_json::Value::Object(over)) = (base.as_object_mut(), overrides) {
            for (k, v) in over {
                base.insert(k, v);
            }
        }
        let profile: SyntheticProfile = serde_json::from_value(base)?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes < 2 {
            return Err(Error::Parameter("need at least two error modes".into()));
        }
        if self.sigma.is_nan() || self.sigma < 0.0 {
            return Err(Error::Parameter(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::Parameter(format!(
                "rho must lie in [-1, 1], got {}",
                self.rho
            )));
        }
        if self.repetitions == 0 {
            return Err(Error::Parameter("need at least one repetition".into()));
        }
        let [lo, hi] = self.error_range;
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::Parameter(format!("bad error range [{lo}, {hi}]")));
        }
        if !(0.0..=1.0).contains(&self.extra_cost_density) {
            return Err(Error::Parameter(
                "extra cost density must lie in [0, 1]".into(),
            ));
        }
        if self.basin_width.is_nan()
            || self.basin_width <= 0.0
            || !(0.0..1.0).contains(&self.capacity_weight)
        {
            return Err(Error::Parameter(
                "bad basin width or capacity weight".into(),
            ));
        }
        if self.pool_size == 0 {
            return Err(Error::Parameter("pool size must be positive".into()));
        }
        Ok(())
    }

    fn scale(&self, key: &str) -> f64 {
        self.scales.get(key).copied().unwrap_or(1.0)
    }

    fn metric_keys(&self) -> Vec<String> {
        let mut keys = vec!["params".to_string(), "flops".to_string()];
        for (device, metrics) in &self.devices {
            keys.extend(metrics.iter().map(|m| format!("{device}/{m}")));
        }
        keys
    }
}

/// Correlation of a hardware metric with model capacity.
fn hardware_coupling(metric: &str) -> f64 {
    match metric {
        "latency" => 0.85,
        "energy" => 0.9,
        "arithmetic_intensity" => -0.3,
        _ => 0.7,
    }
}

fn hamming(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Deterministic uniform in `[0, 1)` per (seed, genotype).
fn jitter(seed: u64, x: &[u32]) -> f64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &v in x {
        h ^= v as u64;
        h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h ^= h >> 31;
    }
    h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^= h >> 29;
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn table<R: Rng>(cards: &[u32], rng: &mut R) -> Vec<Vec<f64>> {
    cards
        .iter()
        .map(|&c| (0..c).map(|_| rng.random::<f64>()).collect())
        .collect()
}

fn table_mean(table: &[Vec<f64>], x: &[u32]) -> f64 {
    table
        .iter()
        .zip(x)
        .map(|(t, &v)| t[v as usize])
        .sum::<f64>()
        / x.len() as f64
}

/// The noise-free error surface and latent cost tables of one synthetic
/// dataset.
#[derive(Clone, Debug)]
pub struct Landscape {
    profile: SyntheticProfile,
    optima: Vec<Genotype>,
    depths: Vec<f64>,
    capacity: Vec<Vec<f64>>,
    capacity_range: (f64, f64),
    jitter_seed: u64,
}

impl Landscape {
    pub fn new(space: &dyn SearchSpace, profile: &SyntheticProfile, seed: u64) -> Result<Self> {
        profile.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cards = &space.descriptor().cardinalities;
        let capacity = table(cards, &mut rng);
        let d = cards.len() as f64;
        let lo: f64 = capacity
            .iter()
            .map(|t| t.iter().copied().fold(f64::INFINITY, f64::min))
            .sum::<f64>()
            / d;
        let hi: f64 = capacity
            .iter()
            .map(|t| t.iter().copied().fold(0.0, f64::max))
            .sum::<f64>()
            / d;

        let mut optima: Vec<Genotype> = spaces::sample(space, &mut rng, 1)?;
        while optima.len() < profile.modes {
            let candidates = spaces::sample(space, &mut rng, 64)?;
            let best = candidates
                .into_iter()
                .filter(|c| !optima.contains(c))
                .max_by_key(|c| optima.iter().map(|o| hamming(o, c)).min().unwrap_or(0))
                .ok_or(Error::Sampling { attempts: 64 })?;
            optima.push(best);
        }
        let mut depths = vec![1.0];
        depths.extend((1..profile.modes).map(|_| rng.random_range(0.8..0.95)));
        Ok(Landscape {
            profile: profile.clone(),
            optima,
            depths,
            capacity,
            capacity_range: (lo, hi),
            jitter_seed: rng.random(),
        })
    }

    pub fn optima(&self) -> &[Genotype] {
        &self.optima
    }

    /// Model capacity scaled to `[0, 1]`.
    pub fn capacity(&self, x: &[u32]) -> f64 {
        let (lo, hi) = self.capacity_range;
        (table_mean(&self.capacity, x) - lo) / (hi - lo)
    }

    fn basin(&self, x: &[u32]) -> f64 {
        let w2 = 2.0 * self.profile.basin_width.powi(2);
        self.optima
            .iter()
            .zip(&self.depths)
            .map(|(o, depth)| depth * (-(hamming(o, x).pow(2) as f64) / w2).exp())
            .fold(0.0, f64::max)
    }

    /// Noise-free error in the profile's error range.
    pub fn mean_error(&self, x: &[u32]) -> f64 {
        let p = &self.profile;
        let badness = p.capacity_weight * (1.0 - self.capacity(x))
            + (1.0 - p.capacity_weight) * (1.0 - self.basin(x))
            + p.ruggedness * (jitter(self.jitter_seed, x) - 0.5);
        let [lo, hi] = p.error_range;
        (lo + (hi - lo) * badness).clamp(0.0, 1.0)
    }
}

/// Standardizes `v` to zero mean and unit variance; constant input maps to 0.
fn standardize(v: &mut [f64]) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
    for a in v.iter_mut() {
        *a = if sd > 0.0 { (*a - mean) / sd } else { 0.0 };
    }
}

/// Removes the component of `v` along the standardized `basis`, then
/// standardizes.
fn orthogonalize(v: &mut [f64], basis: &[f64]) {
    standardize(v);
    let n = v.len() as f64;
    let proj = v.iter().zip(basis).map(|(a, b)| a * b).sum::<f64>() / n;
    for (a, b) in v.iter_mut().zip(basis) {
        *a -= proj * b;
    }
    standardize(v);
}

/// Affine map of a latent onto `scale * [0.2, 1.2]`.
fn to_positive(latent: &[f64], scale: f64) -> Vec<f64> {
    let lo = latent.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = latent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    latent
        .iter()
        .map(|v| scale * (0.2 + (v - lo) / span))
        .collect()
}

fn mix(a: &[f64], b: &[f64], coupling: f64) -> Vec<f64> {
    let other = (1.0 - coupling * coupling).max(0.0).sqrt();
    a.iter()
        .zip(b)
        .map(|(x, y)| coupling * x + other * y)
        .collect()
}

/// Builds a synthetic tabular database for `space`.
///
/// Enumerable spaces are stored exhaustively; others need
/// `profile.sample_size`.
pub fn gen_synthetic(
    space: &dyn SearchSpace,
    profile: &SyntheticProfile,
    seed: u64,
) -> Result<TabularDb> {
    let landscape = Landscape::new(space, profile, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0001);
    let cards = &space.descriptor().cardinalities;

    let (genotypes, exhaustive) = if space.enumerable() {
        (spaces::enumerate(space)?.collect::<Vec<_>>(), true)
    } else {
        let n = profile.sample_size.ok_or_else(|| {
            Error::Parameter(format!(
                "space `{}` cannot be enumerated; set sample_size",
                space.descriptor().name
            ))
        })?;
        let mut seen = HashSet::with_capacity(n);
        let mut out = Vec::with_capacity(n);
        let mut attempts = 0;
        while out.len() < n {
            attempts += 1;
            if attempts > 100 * n {
                return Err(Error::Sampling { attempts });
            }
            let x = spaces::sample(space, &mut rng, 1)?
                .pop()
                .expect("one sample");
            if seen.insert(x.clone()) {
                out.push(x);
            }
        }
        (out, false)
    };

    let mut capacity: Vec<f64> = genotypes.iter().map(|x| landscape.capacity(x)).collect();
    standardize(&mut capacity);
    let latent = |rng: &mut ChaCha8Rng| {
        let (hit, size): (u64, u64) = (rng.random(), rng.random());
        let mut v: Vec<f64> = genotypes
            .iter()
            .map(|x| {
                if jitter(hit, x) < profile.extra_cost_density {
                    0.5 + jitter(size, x)
                } else {
                    0.0
                }
            })
            .collect();
        if v.iter().all(|a| *a == v[0]) {
            let t = table(cards, rng);
            v = genotypes.iter().map(|x| table_mean(&t, x)).collect();
        }
        orthogonalize(&mut v, &capacity);
        v
    };

    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    columns.push((
        "params".into(),
        to_positive(&capacity, profile.scale("params")),
    ));
    let flops_noise = latent(&mut rng);
    columns.push((
        "flops".into(),
        to_positive(
            &mix(&capacity, &flops_noise, profile.rho),
            profile.scale("flops"),
        ),
    ));
    for (device, metrics) in &profile.devices {
        for metric in metrics {
            let key = format!("{device}/{metric}");
            let noise = latent(&mut rng);
            let values = mix(&capacity, &noise, hardware_coupling(metric));
            columns.push((key.clone(), to_positive(&values, profile.scale(&key))));
        }
    }

    let mut keys = vec!["fe".to_string()];
    keys.extend(columns.iter().map(|(k, _)| k.clone()));
    let mut db = TabularDb::new(TabularHeader::new(space, keys, exhaustive));
    let normal = Normal::new(0.0, profile.sigma).map_err(|e| Error::Parameter(e.to_string()))?;
    for (i, x) in genotypes.into_iter().enumerate() {
        let mean = landscape.mean_error(&x);
        let fe_reps = (0..profile.repetitions)
            .map(|_| {
                let noise = if profile.sigma > 0.0 {
                    normal.sample(&mut rng)
                } else {
                    0.0
                };
                (mean + noise).clamp(0.0, 1.0)
            })
            .collect();
        let mut record = FitnessRecord {
            x,
            fe_reps,
            complexity: BTreeMap::new(),
            hardware: BTreeMap::new(),
        };
        for (key, values) in &columns {
            match key.split_once('/') {
                Some((device, metric)) => {
                    record
                        .hardware
                        .entry(device.to_string())
                        .or_default()
                        .insert(metric.to_string(), values[i]);
                }
                None => {
                    record.complexity.insert(key.clone(), values[i]);
                }
            }
        }
        db.insert(record)?;
    }
    Ok(db)
}

/// Builds a synthetic surrogate ensemble and look-up table for a
/// surrogate-scale space.
///
/// Each pool member is a perturbed copy of one base network, the way
/// cross-validation folds yield similar but distinct fits. Error falls with
/// the capacity of the chosen layers so that error and cost conflict.
pub fn gen_synthetic_surrogate(
    space: &dyn SearchSpace,
    profile: &SyntheticProfile,
    seed: u64,
) -> Result<(SurrogateEnsemble, LookupTable)> {
    profile.validate()?;
    let universe = space.layer_key_universe();
    if universe.is_empty() {
        return Err(Error::Unsupported(format!(
            "space `{}` has no layer decomposition",
            space.descriptor().name
        )));
    }
    let desc = space.descriptor();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // average number of layer keys per architecture, to size per-key costs
    let probe = spaces::sample(space, &mut rng, 64)?;
    let mut avg_keys = 0.0;
    for x in &probe {
        avg_keys += space.layer_keys(&space.decode(x)?)?.len() as f64;
    }
    avg_keys /= probe.len() as f64;

    let metrics = profile.metric_keys();
    let mut lut = LookupTable::new(&desc.name, metrics.clone());
    for key in &universe {
        let size: f64 = rng.random();
        let values = metrics
            .iter()
            .map(|m| {
                let coupling = match m.split_once('/') {
                    Some((_, name)) => hardware_coupling(name),
                    None if m == "flops" => profile.rho,
                    None => 1.0,
                };
                let own: f64 = rng.random();
                let v = coupling * size + (1.0 - coupling.abs()) * own;
                profile.scale(m) * (0.2 + v.abs()) / avg_keys
            })
            .collect();
        lut.insert(key.clone(), values)?;
    }

    let capacity = table(&desc.cardinalities, &mut rng);
    let input_dim: usize = desc.cardinalities.iter().map(|&c| c as usize).sum();
    let d = desc.dim() as f64;
    let init = Normal::new(0.0, 1.0).expect("unit normal");
    let mut dims = vec![input_dim];
    dims.extend(profile.hidden.iter().copied());
    dims.push(1);

    let mut base: Vec<Layer> = Vec::new();
    for (l, pair) in dims.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let last = l + 2 == dims.len();
        let gain = if last { 0.02 } else { 1.0 } / (fan_in as f64).sqrt();
        let mut w: Vec<Vec<f64>> = (0..fan_out)
            .map(|_| (0..fan_in).map(|_| gain * init.sample(&mut rng)).collect())
            .collect();
        let mut b: Vec<f64> = (0..fan_out).map(|_| 0.1 * rng.random::<f64>()).collect();
        if l == 0 {
            // unit 0 carries capacity and is kept active by a large bias
            let mut offset = 0;
            for (t, &c) in capacity.iter().zip(&desc.cardinalities) {
                for v in 0..c as usize {
                    w[0][offset + v] = -t[v] / d;
                }
                offset += c as usize;
            }
            b[0] = 2.0;
        } else if !last {
            w[0].iter_mut().for_each(|v| *v = 0.0);
            w[0][0] = 1.0;
            b[0] = 0.0;
        } else {
            w[0][0] = 0.3;
            b[0] = profile.error_range[0] + 0.3 * (profile.error_range[1] - profile.error_range[0])
                - 0.3 * 1.5;
        }
        base.push(Layer { w, b });
    }

    let perturb = Normal::new(0.0, 0.05).expect("valid sigma");
    let models = (0..profile.pool_size)
        .map(|_| {
            let layers = base
                .iter()
                .map(|layer| Layer {
                    w: layer
                        .w
                        .iter()
                        .map(|row| {
                            row.iter()
                                .map(|v| v * (1.0 + perturb.sample(&mut rng)))
                                .collect()
                        })
                        .collect(),
                    b: layer
                        .b
                        .iter()
                        .map(|v| v * (1.0 + perturb.sample(&mut rng)))
                        .collect(),
                })
                .collect();
            MlpModel::new(layers)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((SurrogateEnsemble::new(desc, models)?, lut))
}

/// Generates data for `space` and writes it under `root/<space>/`. Returns
/// the files written.
pub fn write_synthetic(
    root: &Path,
    space: &str,
    profile: &SyntheticProfile,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    let dir = root.join(space);
    std::fs::create_dir_all(&dir)?;
    let s = spaces::by_name(space)?;
    if is_tabular_space(space) {
        let path = dir.join(TABULAR_FILE);
        gen_synthetic(s.as_ref(), profile, seed)?.save(&path)?;
        Ok(vec![path])
    } else {
        let (ensemble, lut) = gen_synthetic_surrogate(s.as_ref(), profile, seed)?;
        let (e, l) = (dir.join(ENSEMBLE_FILE), dir.join(LUT_FILE));
        ensemble.save(&e)?;
        lut.save(&l)?;
        Ok(vec![e, l])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    fn column(db: &TabularDb, key: &str) -> Vec<f64> {
        db.records()
            .iter()
            .map(|r| r.metric(key).unwrap())
            .collect()
    }

    #[test]
    fn zero_noise_gives_equal_repetitions() {
        let space = spaces::by_name("nats").unwrap();
        let profile = SyntheticProfile {
            sigma: 0.0,
            ..SyntheticProfile::for_space("nats")
        };
        let db = gen_synthetic(space.as_ref(), &profile, 1).unwrap();
        assert_eq!(db.len(), 32_768);
        assert!(db.is_exhaustive());
        for r in db.records() {
            assert_eq!(r.fe_reps.len(), 3);
            assert!(r.fe_reps.iter().all(|&v| v == r.fe_reps[0]));
        }
    }

    #[test]
    fn full_correlation_is_affine() {
        let space = spaces::by_name("nb201").unwrap();
        let profile = SyntheticProfile {
            rho: 1.0,
            ..SyntheticProfile::default()
        };
        let db = gen_synthetic(space.as_ref(), &profile, 2).unwrap();
        let r = pearson(&column(&db, "params"), &column(&db, "flops"));
        assert!((r - 1.0).abs() < 1e-9, "{r}");
    }

    #[test]
    fn correlation_matches_rho() {
        let space = spaces::by_name("nb201").unwrap();
        for rho in [-0.5, 0.0, 0.6, 0.95] {
            let profile = SyntheticProfile {
                rho,
                ..SyntheticProfile::default()
            };
            let db = gen_synthetic(space.as_ref(), &profile, 3).unwrap();
            let r = pearson(&column(&db, "params"), &column(&db, "flops"));
            assert!((r - rho).abs() < 1e-9, "rho {rho}: {r}");
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let space = spaces::by_name("nb201").unwrap();
        let profile = SyntheticProfile::for_space("nb201");
        let a = gen_synthetic(space.as_ref(), &profile, 9).unwrap();
        let b = gen_synthetic(space.as_ref(), &profile, 9).unwrap();
        let c = gen_synthetic(space.as_ref(), &profile, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn parameter_errors() {
        let space = spaces::by_name("nb201").unwrap();
        for bad in [
            SyntheticProfile {
                sigma: -0.1,
                ..SyntheticProfile::default()
            },
            SyntheticProfile {
                rho: 1.5,
                ..SyntheticProfile::default()
            },
            SyntheticProfile {
                modes: 1,
                ..SyntheticProfile::default()
            },
        ] {
            assert!(matches!(
                gen_synthetic(space.as_ref(), &bad, 0),
                Err(Error::Parameter(_))
            ));
        }
        let nb101 = spaces::by_name("nb101").unwrap();
        assert!(gen_synthetic(nb101.as_ref(), &SyntheticProfile::default(), 0).is_err());
    }

    #[test]
    fn sampled_subset_for_large_space() {
        let space = spaces::by_name("nb101").unwrap();
        let profile = SyntheticProfile {
            sample_size: Some(500),
            ..SyntheticProfile::for_space("nb101")
        };
        let db = gen_synthetic(space.as_ref(), &profile, 4).unwrap();
        assert_eq!(db.len(), 500);
        assert!(!db.is_exhaustive());
        assert!(db.records().iter().all(|r| space.is_valid(&r.x).unwrap()));
    }

    #[test]
    fn overrides_merge_onto_space_defaults() {
        let p = SyntheticProfile::for_space_with(
            "nb201",
            serde_json::json!({"sigma": 0.0, "rho": 0.5}),
        )
        .unwrap();
        assert_eq!(p.sigma, 0.0);
        assert_eq!(p.rho, 0.5);
        assert_eq!(p.devices.len(), 2);
        assert!(
            SyntheticProfile::for_space_with("nb201", serde_json::json!({"bogus": 1})).is_err()
        );
        assert!(
            SyntheticProfile::for_space_with("nb201", serde_json::json!({"rho": 2.0})).is_err()
        );
    }

    #[test]
    fn surrogate_data_is_consistent() {
        let space = spaces::by_name("mnv3").unwrap();
        let profile = SyntheticProfile::for_space("mnv3");
        let (ensemble, lut) = gen_synthetic_surrogate(space.as_ref(), &profile, 5).unwrap();
        assert_eq!(ensemble.pool_size(), 10);
        assert_eq!(lut.len(), space.layer_key_universe().len());
        assert_eq!(lut.metrics(), &["params", "flops", "note10/latency"]);
        let again = gen_synthetic_surrogate(space.as_ref(), &profile, 5).unwrap();
        assert_eq!(again.0, ensemble);
        assert_eq!(again.1, lut);
    }
}
