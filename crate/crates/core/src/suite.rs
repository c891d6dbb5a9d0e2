//! The C-10/MOP and IN-1K/MOP test suites.
//!
//! Each suite has nine instances in ascending order of objectives. Data lives
//! under a root directory laid out as `<root>/<space>/tabular.ndj` for
//! tabular spaces and `<root>/<space>/{ensemble.mdl, lut.tbl}` for surrogate
//! spaces.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{mlp_forward, objectives_with_error, ErrorSource, EvaluatorBundle};
use crate::moea::nondominated_indices;
use crate::problem::{BenchmarkInstance, ObjectiveDescriptor};
use crate::spaces;
use crate::store::{
    featurize, is_tabular_space, load_ensemble, load_lut, load_tabular, Origin, ENSEMBLE_FILE,
    LUT_FILE, TABULAR_FILE,
};

pub const DATA_ENV: &str = "NAXBENCH_DATA";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Suite {
    #[serde(rename = "c10mop")]
    C10Mop,
    #[serde(rename = "in1kmop")]
    In1kMop,
}

impl Suite {
    pub const ALL: [Suite; 2] = [Suite::C10Mop, Suite::In1kMop];

    /// Short name used on the command line and on the wire.
    pub fn key(self) -> &'static str {
        match self {
            Suite::C10Mop => "c10mop",
            Suite::In1kMop => "in1kmop",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Suite::C10Mop => "C-10/MOP",
            Suite::In1kMop => "IN-1K/MOP",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.title())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let folded: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match folded.as_str() {
            "c10mop" => Ok(Suite::C10Mop),
            "in1kmop" => Ok(Suite::In1kMop),
            _ => Err(Error::Unsupported(format!("unknown suite `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Properties {
    pub multi_modal: bool,
    pub many_objective: bool,
    pub noisy: bool,
    pub badly_scaled: bool,
    /// Not assessed for the ImageNet suite.
    pub degenerate_pf: Option<bool>,
}

const fn props(
    mm: bool,
    many: bool,
    noisy: bool,
    bad: bool,
    degenerate: Option<bool>,
) -> Properties {
    Properties {
        multi_modal: mm,
        many_objective: many,
        noisy,
        badly_scaled: bad,
        degenerate_pf: degenerate,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuiteEntry {
    pub suite: Suite,
    pub index: usize,
    pub space: &'static str,
    pub dim: usize,
    /// Objective keys in order: `fe`, then complexity, then hardware.
    pub objectives: &'static [&'static str],
    pub reference_point: &'static [f64],
    pub properties: Properties,
}

impl SuiteEntry {
    pub fn n_obj(&self) -> usize {
        self.objectives.len()
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.suite.title(), self.index)
    }

    pub fn descriptors(&self) -> Vec<ObjectiveDescriptor> {
        self.objectives.iter().map(|k| descriptor_for(k)).collect()
    }
}

/// Objective descriptor for a metric key (`fe`, `params`, `gpu/latency`, ...).
pub fn descriptor_for(key: &str) -> ObjectiveDescriptor {
    match key.split_once('/') {
        None if key == "fe" => ObjectiveDescriptor::error(),
        None if key == "flops" => ObjectiveDescriptor::complexity("flops", "FLOPs"),
        None => ObjectiveDescriptor::complexity(key, "count"),
        Some((device, metric)) => {
            let unit = match metric {
                "latency" => "s",
                "energy" => "J",
                "arithmetic_intensity" => "FLOPs/byte",
                _ => "",
            };
            ObjectiveDescriptor::hardware(device, metric, unit)
        }
    }
}

const Y: bool = true;
const N: bool = false;

const FC: &[&str] = &["fe", "params"];
const FCC: &[&str] = &["fe", "params", "flops"];
const FF: &[&str] = &["fe", "flops"];

const fn c10(
    index: usize,
    space: &'static str,
    dim: usize,
    objectives: &'static [&'static str],
    reference_point: &'static [f64],
    properties: Properties,
) -> SuiteEntry {
    SuiteEntry {
        suite: Suite::C10Mop,
        index,
        space,
        dim,
        objectives,
        reference_point,
        properties,
    }
}

const fn in1k(
    index: usize,
    space: &'static str,
    dim: usize,
    objectives: &'static [&'static str],
    reference_point: &'static [f64],
    multi_modal: bool,
) -> SuiteEntry {
    SuiteEntry {
        suite: Suite::In1kMop,
        index,
        space,
        dim,
        objectives,
        reference_point,
        properties: props(multi_modal, index == 9, Y, Y, None),
    }
}

static C10MOP: [SuiteEntry; 9] = [
    c10(
        1,
        "nb101",
        26,
        FC,
        &[0.1534, 3.2427e7],
        props(Y, N, Y, N, Some(N)),
    ),
    c10(
        2,
        "nb101",
        26,
        FCC,
        &[0.1577, 3.2427e7, 9.5450e9],
        props(Y, N, Y, N, Some(Y)),
    ),
    c10(
        3,
        "nats",
        5,
        FCC,
        &[0.2021, 5.7995e5, 2.5706e8],
        props(N, N, N, N, Some(Y)),
    ),
    c10(
        4,
        "nats",
        5,
        &["fe", "params", "flops", "gpu/latency"],
        &[0.2021, 5.7995e5, 2.5706e8, 2.0064e-2],
        props(N, Y, N, N, Some(Y)),
    ),
    c10(
        5,
        "nb201",
        6,
        &["fe", "params", "flops", "gpu/latency", "gpu/energy"],
        &[0.9000, 1.0735e6, 1.5327e8, 6.8889e-3, 3.2651e-2],
        props(Y, Y, Y, N, Some(Y)),
    ),
    c10(
        6,
        "nb201",
        6,
        &[
            "fe",
            "params",
            "flops",
            "eyeriss/latency",
            "eyeriss/energy",
            "eyeriss/arithmetic_intensity",
        ],
        &[0.5098, 1.0735e6, 1.5327e8, 1.0527e-2, 2.0139e-3, 26.596],
        props(Y, Y, Y, N, Some(Y)),
    ),
    c10(
        7,
        "nb201",
        6,
        &[
            "fe",
            "params",
            "flops",
            "gpu/latency",
            "gpu/energy",
            "eyeriss/latency",
            "eyeriss/energy",
            "eyeriss/arithmetic_intensity",
        ],
        &[
            0.9000, 1.0735e6, 1.5327e8, 8.1821e-3, 3.4711e-2, 1.0527e-2, 2.0139e-3, 27.078,
        ],
        props(Y, Y, Y, N, Some(Y)),
    ),
    c10(
        8,
        "darts",
        32,
        FC,
        &[0.2750, 1.6724e6],
        props(Y, N, Y, Y, Some(N)),
    ),
    c10(
        9,
        "darts",
        32,
        FCC,
        &[0.2750, 1.6724e6, 2.7034e8],
        props(Y, N, Y, Y, Some(N)),
    ),
];

static IN1KMOP: [SuiteEntry; 9] = [
    in1k(1, "resnet50", 25, FC, &[0.3124, 4.4114e7], Y),
    in1k(2, "resnet50", 25, FF, &[0.3124, 1.4577e10], Y),
    in1k(3, "resnet50", 25, FCC, &[0.3124, 4.4114e7, 1.4577e10], Y),
    in1k(4, "transformer", 34, FC, &[0.1832, 7.4134e7], N),
    in1k(5, "transformer", 34, FF, &[0.1832, 1.5403e10], N),
    in1k(6, "transformer", 34, FCC, &[0.1832, 7.4134e7, 1.5403e10], N),
    in1k(7, "mnv3", 21, FC, &[0.2980, 1.0198e7], Y),
    in1k(8, "mnv3", 21, FCC, &[0.2980, 1.0198e7, 1.3768e9], Y),
    in1k(
        9,
        "mnv3",
        21,
        &["fe", "params", "flops", "note10/latency"],
        &[0.2980, 1.0198e7, 1.3768e9, 7.0386e-2],
        Y,
    ),
];

pub fn entries(suite: Suite) -> &'static [SuiteEntry] {
    match suite {
        Suite::C10Mop => &C10MOP,
        Suite::In1kMop => &IN1KMOP,
    }
}

pub fn all_entries() -> impl Iterator<Item = &'static SuiteEntry> {
    C10MOP.iter().chain(IN1KMOP.iter())
}

pub fn entry(suite: Suite, index: usize) -> Result<&'static SuiteEntry> {
    entries(suite).get(index.wrapping_sub(1)).ok_or_else(|| {
        Error::Index(format!(
            "{} has instances 1..=9, not {index}",
            suite.title()
        ))
    })
}

/// The published reference point of an instance.
pub fn reference_point(suite: Suite, index: usize) -> Result<Vec<f64>> {
    Ok(entry(suite, index)?.reference_point.to_vec())
}

/// `explicit`, else `$NAXBENCH_DATA`, else `./data`.
pub fn data_root(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(DATA_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"))
}

/// Loads the data for `space` under `root`.
pub fn load_bundle(root: &Path, space: &str) -> Result<(EvaluatorBundle, Origin)> {
    let s = spaces::by_name(space)?;
    let dir = root.join(space);
    if is_tabular_space(space) {
        let db = Arc::new(load_tabular(dir.join(TABULAR_FILE))?);
        let origin = db.header().origin;
        Ok((EvaluatorBundle::tabular(s, db)?, origin))
    } else {
        let ensemble = Arc::new(load_ensemble(dir.join(ENSEMBLE_FILE))?);
        let lut = Arc::new(load_lut(dir.join(LUT_FILE))?);
        let origin =
            if ensemble.origin == Origin::Converted && lut.header().origin == Origin::Converted {
                Origin::Converted
            } else {
                Origin::Synthetic
            };
        Ok((EvaluatorBundle::surrogate(s, ensemble, lut)?, origin))
    }
}

/// Builds a registered instance over the data under `data_root`.
///
/// Converted data uses the published reference point. Synthetic data gets a
/// reference point derived the same way from its own values: the nadir of
/// the true Pareto front for exhaustive databases, otherwise the worst
/// observed point.
pub fn instantiate(suite: Suite, index: usize, data_root: &Path) -> Result<BenchmarkInstance> {
    let e = entry(suite, index)?;
    let (bundle, origin) = load_bundle(data_root, e.space)?;
    instance_from_bundle(
        e.label(),
        Arc::new(bundle),
        e.objectives,
        match origin {
            Origin::Converted => Some(e.reference_point.to_vec()),
            Origin::Synthetic => None,
        },
    )
}

/// Builds an instance over arbitrary objective keys; without an explicit
/// reference point one is derived from the data.
pub fn instance_from_bundle(
    label: String,
    bundle: Arc<EvaluatorBundle>,
    objectives: &[&str],
    reference_point: Option<Vec<f64>>,
) -> Result<BenchmarkInstance> {
    let space = spaces::by_name(bundle.space_name())?;
    let descriptors: Vec<ObjectiveDescriptor> =
        objectives.iter().map(|k| descriptor_for(k)).collect();
    let pf_available = bundle.tabular_db().is_some_and(|db| db.is_exhaustive());
    let provisional = vec![0.0; descriptors.len()];
    let instance =
        BenchmarkInstance::new(label, space, descriptors, bundle, provisional, pf_available)?;
    let reference = match reference_point {
        Some(r) => r,
        None => derived_reference_point(&instance)?,
    };
    instance.with_reference_point(reference)
}

fn componentwise_max(points: impl IntoIterator<Item = Vec<f64>>) -> Option<Vec<f64>> {
    points.into_iter().reduce(|mut acc, p| {
        for (a, v) in acc.iter_mut().zip(p) {
            *a = a.max(v);
        }
        acc
    })
}

/// Reference point derived from the instance's own data.
pub fn derived_reference_point(instance: &BenchmarkInstance) -> Result<Vec<f64>> {
    let bundle = instance.evaluators();
    let worst = match bundle.error_source() {
        ErrorSource::Tabular(db) if db.is_exhaustive() => {
            componentwise_max(true_pareto_front(instance)?)
        }
        ErrorSource::Tabular(db) => componentwise_max(
            db.records()
                .iter()
                .map(|r| objectives_with_error(instance, &r.x, r.mean_error()))
                .collect::<Result<Vec<_>>>()?,
        ),
        ErrorSource::Surrogate(ensemble) => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x0e1f);
            let xs = spaces::sample(instance.space(), &mut rng, 1000)?;
            let mut rows = Vec::with_capacity(xs.len());
            for x in &xs {
                let features = featurize(instance.descriptor(), x);
                let mut worst = f64::NEG_INFINITY;
                for model in &ensemble.models {
                    worst = worst.max(mlp_forward(model, &features)?);
                }
                rows.push(objectives_with_error(instance, x, worst)?);
            }
            componentwise_max(rows)
        }
    };
    worst.ok_or_else(|| Error::Schema("no data to derive a reference point from".into()))
}

/// Nondominated set over every stored architecture, scoring error by the
/// mean of its repetitions.
pub fn true_pareto_front(instance: &BenchmarkInstance) -> Result<Vec<Vec<f64>>> {
    let db = match instance.evaluators().tabular_db() {
        Some(db) if db.is_exhaustive() => db,
        _ => return Err(Error::Unavailable),
    };
    let rows = db
        .records()
        .iter()
        .map(|r| objectives_with_error(instance, &r.x, r.mean_error()))
        .collect::<Result<Vec<_>>>()?;
    let keep = nondominated_indices(&rows);
    Ok(keep.into_iter().map(|i| rows[i].clone()).collect())
}
