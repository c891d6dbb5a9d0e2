//! Fitness evaluation.
//!
//! The error objective is the only noisy one. On tabular data it is one of the
//! stored repetitions drawn uniformly; on surrogate data it is the prediction
//! of one pool member drawn uniformly, redrawn for every solution. Complexity
//! and hardware metrics are read from the record or summed from a look-up
//! table and never touch the rng.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::problem::{BenchmarkInstance, ObjectiveDescriptor, ObjectiveKind, Phenotype};
use crate::spaces::SearchSpace;
use crate::store::{
    featurize, FitnessRecord, Layer, LookupTable, MlpModel, SurrogateEnsemble, TabularDb,
};

#[derive(Clone, Debug)]
pub enum ErrorSource {
    Tabular(Arc<TabularDb>),
    Surrogate(Arc<SurrogateEnsemble>),
}

#[derive(Clone, Debug)]
pub enum MetricSource {
    Tabular(Arc<TabularDb>),
    Lookup(Arc<LookupTable>),
}

impl MetricSource {
    fn provides(&self, key: &str) -> bool {
        match self {
            MetricSource::Tabular(db) => db.has_metric(key),
            MetricSource::Lookup(lut) => lut.metric_index(key).is_some(),
        }
    }
}

/// Where each objective of an instance gets its values.
#[derive(Clone)]
pub struct EvaluatorBundle {
    space: Arc<dyn SearchSpace>,
    error: ErrorSource,
    complexity: MetricSource,
    hardware: BTreeMap<String, MetricSource>,
}

impl std::fmt::Debug for EvaluatorBundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvaluatorBundle")
            .field("space", &self.space.descriptor().name)
            .field("devices", &self.hardware.keys().collect::<Vec<_>>())
            .finish()
    }
}

enum Slot<'a> {
    Error,
    Record(String),
    Lookup(&'a LookupTable, usize),
}

impl EvaluatorBundle {
    pub fn new(
        space: Arc<dyn SearchSpace>,
        error: ErrorSource,
        complexity: MetricSource,
        hardware: BTreeMap<String, MetricSource>,
    ) -> Result<Self> {
        let name = space.descriptor().name.clone();
        let mut owners: Vec<&str> = Vec::new();
        match &error {
            ErrorSource::Tabular(db) => owners.push(db.space_name()),
            ErrorSource::Surrogate(e) => owners.push(&e.space),
        }
        for source in std::iter::once(&complexity).chain(hardware.values()) {
            match source {
                MetricSource::Tabular(db) => owners.push(db.space_name()),
                MetricSource::Lookup(lut) => owners.push(&lut.header().space),
            }
        }
        if let Some(other) = owners.iter().find(|o| **o != name) {
            return Err(Error::Schema(format!(
                "data for space `{other}` cannot evaluate space `{name}`"
            )));
        }
        Ok(EvaluatorBundle {
            space,
            error,
            complexity,
            hardware,
        })
    }

    /// Every objective comes from one tabular database.
    pub fn tabular(space: Arc<dyn SearchSpace>, db: Arc<TabularDb>) -> Result<Self> {
        let devices: BTreeMap<String, MetricSource> = db
            .header()
            .objectives
            .iter()
            .filter_map(|k| k.split_once('/'))
            .map(|(d, _)| (d.to_string(), MetricSource::Tabular(db.clone())))
            .collect();
        Self::new(
            space,
            ErrorSource::Tabular(db.clone()),
            MetricSource::Tabular(db),
            devices,
        )
    }

    /// Error from a surrogate ensemble, everything else from one look-up table.
    pub fn surrogate(
        space: Arc<dyn SearchSpace>,
        ensemble: Arc<SurrogateEnsemble>,
        lut: Arc<LookupTable>,
    ) -> Result<Self> {
        let devices: BTreeMap<String, MetricSource> = lut
            .metrics()
            .iter()
            .filter_map(|k| k.split_once('/'))
            .map(|(d, _)| (d.to_string(), MetricSource::Lookup(lut.clone())))
            .collect();
        Self::new(
            space,
            ErrorSource::Surrogate(ensemble),
            MetricSource::Lookup(lut),
            devices,
        )
    }

    pub fn space_name(&self) -> &str {
        &self.space.descriptor().name
    }

    pub fn error_source(&self) -> &ErrorSource {
        &self.error
    }

    pub fn complexity_source(&self) -> &MetricSource {
        &self.complexity
    }

    pub fn hardware_source(&self, device: &str) -> Option<&MetricSource> {
        self.hardware.get(device)
    }

    /// The tabular database behind the error objective, if any.
    pub fn tabular_db(&self) -> Option<&Arc<TabularDb>> {
        match &self.error {
            ErrorSource::Tabular(db) => Some(db),
            ErrorSource::Surrogate(_) => None,
        }
    }

    fn source_for(&self, objective: &ObjectiveDescriptor) -> Result<&MetricSource> {
        let source = match objective.kind {
            ObjectiveKind::Error => unreachable!("error has its own source"),
            ObjectiveKind::Complexity => &self.complexity,
            ObjectiveKind::Hardware => {
                let device = objective.hardware_id.as_deref().unwrap_or_default();
                self.hardware
                    .get(device)
                    .ok_or_else(|| Error::Schema(format!("no data for device `{device}`")))?
            }
        };
        let key = objective.key();
        if !source.provides(&key) {
            return Err(Error::Schema(format!("no data source provides `{key}`")));
        }
        Ok(source)
    }

    /// Checks that every objective maps to a source that stores it.
    pub fn check_objectives(&self, objectives: &[ObjectiveDescriptor]) -> Result<()> {
        self.plan(objectives).map(|_| ())
    }

    fn plan(&self, objectives: &[ObjectiveDescriptor]) -> Result<Vec<Slot<'_>>> {
        objectives
            .iter()
            .map(|o| {
                if o.kind == ObjectiveKind::Error {
                    return Ok(Slot::Error);
                }
                Ok(match self.source_for(o)? {
                    MetricSource::Tabular(_) => Slot::Record(o.key()),
                    MetricSource::Lookup(lut) => {
                        Slot::Lookup(lut, lut.metric_index(&o.key()).expect("checked"))
                    }
                })
            })
            .collect()
    }

    fn record<'d>(&self, db: &'d TabularDb, x: &[u32]) -> Result<&'d FitnessRecord> {
        db.get(x).ok_or_else(|| Error::UnknownSolution(x.to_vec()))
    }

    /// One noisy error measurement of `x`.
    pub fn evaluate_error<R: Rng + ?Sized>(&self, x: &[u32], rng: &mut R) -> Result<f64> {
        match &self.error {
            ErrorSource::Tabular(db) => {
                let record = db
                    .get(x)
                    .ok_or_else(|| Error::UnknownSolution(x.to_vec()))?;
                Ok(record.fe_reps[rng.random_range(0..record.fe_reps.len())])
            }
            ErrorSource::Surrogate(ensemble) => {
                let model = &ensemble.models[rng.random_range(0..ensemble.models.len())];
                mlp_forward(model, &featurize(self.space.descriptor(), x))
            }
        }
    }

    /// Objective vector for a valid `x` given the already drawn error value.
    fn complete(&self, slots: &[Slot<'_>], x: &[u32], error: f64) -> Result<Vec<f64>> {
        let mut record = None;
        let mut sums: Vec<(*const LookupTable, Vec<f64>)> = Vec::new();
        let mut keys: Option<Vec<String>> = None;
        let mut out = Vec::with_capacity(slots.len());
        for slot in slots {
            out.push(match slot {
                Slot::Error => error,
                Slot::Record(key) => {
                    let db = self.metric_db(key);
                    if record.is_none() {
                        record = Some(self.record(db, x)?);
                    }
                    record
                        .and_then(|r| r.metric(key))
                        .ok_or_else(|| Error::Schema(format!("record lacks `{key}`")))?
                }
                Slot::Lookup(lut, metric) => {
                    let ptr = *lut as *const LookupTable;
                    if let Some((_, s)) = sums.iter().find(|(p, _)| *p == ptr) {
                        s[*metric]
                    } else {
                        if keys.is_none() {
                            let phenotype = self.space.decode_unchecked(x);
                            keys = Some(self.space.layer_keys(&phenotype)?);
                        }
                        let s = lut_sum(lut, keys.as_deref().unwrap_or_default())?;
                        let v = s[*metric];
                        sums.push((ptr, s));
                        v
                    }
                }
            });
        }
        Ok(out)
    }

    fn metric_db(&self, key: &str) -> &TabularDb {
        let source = match key.split_once('/') {
            Some((device, _)) => &self.hardware[device],
            None => &self.complexity,
        };
        match source {
            MetricSource::Tabular(db) => db,
            MetricSource::Lookup(_) => unreachable!("planned as a record slot"),
        }
    }
}

fn affine(layer: &Layer, input: &[f64], out: &mut Vec<f64>, rectify: bool) {
    out.clear();
    for (row, &b) in layer.w.iter().zip(&layer.b) {
        let mut acc = b;
        for (w, v) in row.iter().zip(input) {
            acc += w * v;
        }
        out.push(if rectify { acc.max(0.0) } else { acc });
    }
}

/// Forward pass: affine layers with a rectifier between them and a linear
/// scalar output.
pub fn mlp_forward(model: &MlpModel, features: &[f64]) -> Result<f64> {
    if features.len() != model.input_dim() {
        return Err(Error::Dimension {
            expected: model.input_dim(),
            got: features.len(),
        });
    }
    let mut current = features.to_vec();
    let mut next = Vec::new();
    let last = model.layers.len() - 1;
    for (i, layer) in model.layers.iter().enumerate() {
        affine(layer, &current, &mut next, i != last);
        std::mem::swap(&mut current, &mut next);
    }
    Ok(current[0])
}

/// Forward pass for many rows, one layer at a time. Results are bit-identical
/// to [`mlp_forward`] row by row.
pub fn mlp_forward_batch(model: &MlpModel, features: &[Vec<f64>]) -> Result<Vec<f64>> {
    if let Some(row) = features.iter().find(|f| f.len() != model.input_dim()) {
        return Err(Error::Dimension {
            expected: model.input_dim(),
            got: row.len(),
        });
    }
    let mut current: Vec<Vec<f64>> = features.to_vec();
    let last = model.layers.len() - 1;
    for (i, layer) in model.layers.iter().enumerate() {
        current = current
            .iter()
            .map(|input| {
                let mut out = Vec::with_capacity(layer.b.len());
                affine(layer, input, &mut out, i != last);
                out
            })
            .collect();
    }
    Ok(current.into_iter().map(|r| r[0]).collect())
}

/// Per-metric sums over the given layer keys, in the table's metric order.
pub fn lut_sum<S: AsRef<str>>(lut: &LookupTable, keys: &[S]) -> Result<Vec<f64>> {
    let mut sums = vec![0.0; lut.metrics().len()];
    for key in keys {
        for (s, v) in sums.iter_mut().zip(lut.require(key.as_ref())?) {
            *s += v;
        }
    }
    Ok(sums)
}

/// Sums the look-up-table entries of every layer of `phenotype`.
pub fn lut_accumulate(
    lut: &LookupTable,
    space: &dyn SearchSpace,
    phenotype: &Phenotype,
) -> Result<BTreeMap<String, f64>> {
    let keys = space.layer_keys(phenotype)?;
    let sums = lut_sum(lut, &keys)?;
    Ok(lut.metrics().iter().cloned().zip(sums).collect())
}

fn require_valid(space: &dyn SearchSpace, x: &[u32]) -> Result<()> {
    if space.is_valid(x)? {
        Ok(())
    } else {
        Err(Error::InvalidSolution(x.to_vec()))
    }
}

/// Objective vector of `x` in the instance's objective order. Invalid
/// genotypes are rejected, not repaired.
pub fn evaluate_objectives<R: Rng + ?Sized>(
    instance: &BenchmarkInstance,
    x: &[u32],
    rng: &mut R,
) -> Result<Vec<f64>> {
    let bundle = instance.evaluators();
    require_valid(instance.space(), x)?;
    let slots = bundle.plan(instance.objectives())?;
    let error = bundle.evaluate_error(x, rng)?;
    bundle.complete(&slots, x, error)
}

/// Objective vector of a valid `x` with `error` in place of a noisy draw.
pub(crate) fn objectives_with_error(
    instance: &BenchmarkInstance,
    x: &[u32],
    error: f64,
) -> Result<Vec<f64>> {
    let bundle = instance.evaluators();
    let slots = bundle.plan(instance.objectives())?;
    bundle.complete(&slots, x, error)
}

/// Evaluates every row. The rng is consumed in row order exactly as repeated
/// [`evaluate_objectives`] calls would; surrogate forward passes are grouped
/// by the drawn pool member and run layer by layer.
pub fn evaluate_batch<X: AsRef<[u32]>, R: Rng + ?Sized>(
    instance: &BenchmarkInstance,
    xs: &[X],
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let bundle = instance.evaluators();
    let space = instance.space();
    let slots = bundle.plan(instance.objectives())?;
    let at = |row: usize| {
        move |e: Error| Error::Batch {
            row,
            source: Box::new(e),
        }
    };

    let errors: Vec<f64> = match &bundle.error {
        ErrorSource::Tabular(_) => {
            let mut errors = Vec::with_capacity(xs.len());
            for (row, x) in xs.iter().enumerate() {
                let x = x.as_ref();
                require_valid(space, x).map_err(at(row))?;
                errors.push(bundle.evaluate_error(x, rng).map_err(at(row))?);
            }
            errors
        }
        ErrorSource::Surrogate(ensemble) => {
            let pool = ensemble.models.len();
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); pool];
            for (row, x) in xs.iter().enumerate() {
                require_valid(space, x.as_ref()).map_err(at(row))?;
                groups[rng.random_range(0..pool)].push(row);
            }
            let mut errors = vec![0.0; xs.len()];
            for (model, rows) in ensemble.models.iter().zip(&groups) {
                if rows.is_empty() {
                    continue;
                }
                let features: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|&r| featurize(space.descriptor(), xs[r].as_ref()))
                    .collect();
                for (&r, v) in rows.iter().zip(mlp_forward_batch(model, &features)?) {
                    errors[r] = v;
                }
            }
            errors
        }
    };
    xs.iter()
        .zip(errors)
        .enumerate()
        .map(|(row, (x, e))| bundle.complete(&slots, x.as_ref(), e).map_err(at(row)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces;
    use crate::store::{gen_synthetic_surrogate, SyntheticProfile, TabularHeader};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Layer {
        Layer {
            w: (0..rows)
                .map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect(),
            b: (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect(),
        }
    }

    #[test]
    fn forward_trivial_models() {
        let zero = MlpModel::new(vec![Layer {
            w: vec![vec![0.0; 3]],
            b: vec![0.7],
        }])
        .unwrap();
        assert_eq!(mlp_forward(&zero, &[1.0, 2.0, 3.0]).unwrap(), 0.7);
        let identity = MlpModel::new(vec![Layer {
            w: vec![vec![1.0]],
            b: vec![0.0],
        }])
        .unwrap();
        assert_eq!(mlp_forward(&identity, &[0.3]).unwrap(), 0.3);
        assert!(matches!(
            mlp_forward(&identity, &[0.3, 0.1]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn forward_matches_straight_line_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let l1 = dense(4, 3, &mut rng);
            let l2 = dense(1, 4, &mut rng);
            let model = MlpModel::new(vec![l1.clone(), l2.clone()]).unwrap();
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mut y = l2.b[0];
            for j in 0..4 {
                let h = l1.b[j] + l1.w[j][0] * x[0] + l1.w[j][1] * x[1] + l1.w[j][2] * x[2];
                y += l2.w[0][j] * if h > 0.0 { h } else { 0.0 };
            }
            assert!((mlp_forward(&model, &x).unwrap() - y).abs() < 1e-9);
            let batch = mlp_forward_batch(&model, &[x.clone(), x.clone()]).unwrap();
            assert_eq!(
                batch[0].to_bits(),
                mlp_forward(&model, &x).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn lut_sums() {
        let mut lut = LookupTable::new("mnv3", vec!["params".into(), "flops".into()]);
        lut.insert("stem:r192", vec![1.0, 100.0]).unwrap();
        lut.insert("head:r192", vec![2.0, 250.0]).unwrap();
        let none: [&str; 0] = [];
        assert_eq!(lut_sum(&lut, &none).unwrap(), vec![0.0, 0.0]);
        assert_eq!(
            lut_sum(&lut, &["stem:r192", "head:r192"]).unwrap(),
            vec![3.0, 350.0]
        );
        assert!(matches!(
            lut_sum(&lut, &["s0b0:k3e3:r192"]),
            Err(Error::MissingKey(k)) if k == "s0b0:k3e3:r192"
        ));
    }

    #[test]
    fn lut_accumulate_matches_resummation() {
        let space = spaces::by_name("mnv3").unwrap();
        let (_, lut) =
            gen_synthetic_surrogate(space.as_ref(), &SyntheticProfile::for_space("mnv3"), 1)
                .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for x in spaces::sample(space.as_ref(), &mut rng, 50).unwrap() {
            let p = space.decode(&x).unwrap();
            let got = lut_accumulate(&lut, space.as_ref(), &p).unwrap();
            for (i, metric) in lut.metrics().iter().enumerate() {
                let mut expected = 0.0;
                for key in space.layer_keys(&p).unwrap() {
                    expected += lut.get(&key).unwrap()[i];
                }
                assert_eq!(got[metric], expected);
            }
        }
    }

    #[test]
    fn bundle_rejects_foreign_data() {
        let nb201 = spaces::by_name("nb201").unwrap();
        let nats = spaces::by_name("nats").unwrap();
        let db = Arc::new(TabularDb::new(TabularHeader::new(
            nats.as_ref(),
            vec!["fe".into(), "params".into()],
            false,
        )));
        assert!(EvaluatorBundle::tabular(nb201, db.clone()).is_err());
        let bundle = EvaluatorBundle::tabular(nats, db).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            bundle.evaluate_error(&[0, 0, 0, 0, 0], &mut rng),
            Err(Error::UnknownSolution(_))
        ));
    }
}
