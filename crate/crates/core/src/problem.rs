//! Decision vectors, objective descriptors and the callable benchmark instance.
//!
//! Every objective is minimized. Quantities that are conventionally maximized
//! (arithmetic intensity) are stored as measured and flagged with
//! [`Sense::NativelyMaximized`] so that callers can decide how to treat them.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::EvaluatorBundle;
use crate::spaces::SearchSpace;

/// Fixed-length vector of 0-based architectural choices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genotype(Vec<u32>);

impl Genotype {
    pub fn new(values: Vec<u32>) -> Self {
        Genotype(values)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }
}

impl Deref for Genotype {
    type Target = [u32];

    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl AsRef<[u32]> for Genotype {
    fn as_ref(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for Genotype {
    fn from(values: Vec<u32>) -> Self {
        Genotype(values)
    }
}

/// Canonical architecture string; grammars are per space (see `docs/grammars.md`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Phenotype(String);

impl Phenotype {
    pub fn new(text: impl Into<String>) -> Self {
        Phenotype(text.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Phenotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Error,
    Complexity,
    Hardware,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    /// Stored as measured even though larger values are usually preferred.
    NativelyMaximized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveDescriptor {
    pub kind: ObjectiveKind,
    pub name: String,
    pub hardware_id: Option<String>,
    pub unit: String,
    pub noisy: bool,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub sense: Sense,
}

impl ObjectiveDescriptor {
    /// Prediction error on the validation split.
    pub fn error() -> Self {
        ObjectiveDescriptor {
            kind: ObjectiveKind::Error,
            name: "error".into(),
            hardware_id: None,
            unit: "fraction".into(),
            noisy: true,
            lower: Some(0.0),
            upper: Some(1.0),
            sense: Sense::Minimize,
        }
    }

    pub fn complexity(name: &str, unit: &str) -> Self {
        ObjectiveDescriptor {
            kind: ObjectiveKind::Complexity,
            name: name.into(),
            hardware_id: None,
            unit: unit.into(),
            noisy: false,
            lower: Some(0.0),
            upper: None,
            sense: Sense::Minimize,
        }
    }

    pub fn hardware(device: &str, name: &str, unit: &str) -> Self {
        let sense = if name == "arithmetic_intensity" {
            Sense::NativelyMaximized
        } else {
            Sense::Minimize
        };
        ObjectiveDescriptor {
            kind: ObjectiveKind::Hardware,
            name: name.into(),
            hardware_id: Some(device.into()),
            unit: unit.into(),
            noisy: false,
            lower: Some(0.0),
            upper: None,
            sense,
        }
    }

    /// Metric key used by the stores: `fe`, `params`, `gpu/latency`, ...
    pub fn key(&self) -> String {
        match (self.kind, &self.hardware_id) {
            (ObjectiveKind::Error, _) => "fe".into(),
            (ObjectiveKind::Hardware, Some(device)) => format!("{device}/{}", self.name),
            _ => self.name.clone(),
        }
    }

    fn check(&self) -> Result<()> {
        match self.kind {
            ObjectiveKind::Error if !self.noisy => {
                Err(Error::Schema("error objective must be noisy".into()))
            }
            ObjectiveKind::Complexity if self.noisy => Err(Error::Schema(format!(
                "complexity objective `{}` must be deterministic",
                self.name
            ))),
            ObjectiveKind::Hardware if self.hardware_id.is_none() => Err(Error::Schema(format!(
                "hardware objective `{}` has no device",
                self.name
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DatasetTag {
    #[serde(rename = "C-10")]
    Cifar10,
    #[serde(rename = "IN-1K")]
    ImageNet1k,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Micro,
    Macro,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpaceDescriptor {
    pub name: String,
    pub cardinalities: Vec<u32>,
    pub dataset: DatasetTag,
    pub kind: SpaceKind,
}

impl SearchSpaceDescriptor {
    pub fn dim(&self) -> usize {
        self.cardinalities.len()
    }

    /// Checks length and per-position range.
    pub fn check(&self, x: &[u32]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        for (position, (&value, &cardinality)) in x.iter().zip(&self.cardinalities).enumerate() {
            if value >= cardinality {
                return Err(Error::OutOfRange {
                    position,
                    value,
                    cardinality,
                });
            }
        }
        Ok(())
    }

    /// Product of cardinalities as a float (these overflow `u64` for the
    /// larger spaces).
    pub fn raw_size(&self) -> f64 {
        self.cardinalities.iter().map(|&c| c as f64).product()
    }
}

/// Reduces each value modulo its position's cardinality.
pub fn clamp_genotype(space: &SearchSpaceDescriptor, x: &[i64]) -> Result<Genotype> {
    if x.len() != space.dim() {
        return Err(Error::Dimension {
            expected: space.dim(),
            got: x.len(),
        });
    }
    Ok(Genotype(
        x.iter()
            .zip(&space.cardinalities)
            .map(|(&v, &c)| v.rem_euclid(c as i64) as u32)
            .collect(),
    ))
}

/// A callable multi-objective test problem.
#[derive(Clone)]
pub struct BenchmarkInstance {
    label: String,
    space: Arc<dyn SearchSpace>,
    objectives: Vec<ObjectiveDescriptor>,
    evaluators: Arc<EvaluatorBundle>,
    reference_point: Vec<f64>,
    pf_available: bool,
    normalized: bool,
}

impl fmt::Debug for BenchmarkInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkInstance")
            .field("label", &self.label)
            .field("space", &self.space.descriptor().name)
            .field("objectives", &self.objectives)
            .field("reference_point", &self.reference_point)
            .field("pf_available", &self.pf_available)
            .field("normalized", &self.normalized)
            .finish()
    }
}

impl BenchmarkInstance {
    pub fn new(
        label: impl Into<String>,
        space: Arc<dyn SearchSpace>,
        objectives: Vec<ObjectiveDescriptor>,
        evaluators: Arc<EvaluatorBundle>,
        reference_point: Vec<f64>,
        pf_available: bool,
    ) -> Result<Self> {
        for o in &objectives {
            o.check()?;
        }
        let n_error = objectives
            .iter()
            .filter(|o| o.kind == ObjectiveKind::Error)
            .count();
        if n_error != 1 {
            return Err(Error::Schema(format!(
                "an instance needs exactly one error objective, found {n_error}"
            )));
        }
        if reference_point.len() != objectives.len() {
            return Err(Error::Dimension {
                expected: objectives.len(),
                got: reference_point.len(),
            });
        }
        if evaluators.space_name() != space.descriptor().name {
            return Err(Error::Schema(format!(
                "evaluators built for `{}` cannot serve space `{}`",
                evaluators.space_name(),
                space.descriptor().name
            )));
        }
        evaluators.check_objectives(&objectives)?;
        Ok(BenchmarkInstance {
            label: label.into(),
            space,
            objectives,
            evaluators,
            reference_point,
            pf_available,
            normalized: false,
        })
    }

    pub fn with_reference_point(mut self, reference_point: Vec<f64>) -> Result<Self> {
        if reference_point.len() != self.objectives.len() {
            return Err(Error::Dimension {
                expected: self.objectives.len(),
                got: reference_point.len(),
            });
        }
        self.reference_point = reference_point;
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn space(&self) -> &dyn SearchSpace {
        self.space.as_ref()
    }

    pub fn space_arc(&self) -> Arc<dyn SearchSpace> {
        Arc::clone(&self.space)
    }

    pub fn descriptor(&self) -> &SearchSpaceDescriptor {
        self.space.descriptor()
    }

    pub fn objectives(&self) -> &[ObjectiveDescriptor] {
        &self.objectives
    }

    pub fn evaluators(&self) -> &EvaluatorBundle {
        &self.evaluators
    }

    pub fn reference_point(&self) -> &[f64] {
        &self.reference_point
    }

    pub fn pf_available(&self) -> bool {
        self.pf_available
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }
}

/// Number of objectives `M` of an instance.
pub fn objective_dim(instance: &BenchmarkInstance) -> usize {
    instance.objectives.len()
}
