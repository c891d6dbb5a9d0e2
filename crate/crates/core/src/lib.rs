//! Multi-objective benchmark problems built from neural-architecture-search
//! data.
//!
//! A [`BenchmarkInstance`] maps integer genotypes to objective vectors
//! (prediction error first, then model complexity, then hardware costs). The
//! [`suite`] module registers the eighteen standard instances, [`metrics`]
//! and [`moea`] provide the indicators and baseline optimizers used to study
//! them, and [`rpc`] serves instances to optimizers written in other languages.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod eval;
pub mod metrics;
pub mod moea;
pub mod problem;
pub mod rpc;
pub mod spaces;
pub mod store;
pub mod suite;

pub use error::{Error, Result};
pub use eval::{evaluate_batch, evaluate_objectives, EvaluatorBundle};
pub use problem::{
    clamp_genotype, objective_dim, BenchmarkInstance, DatasetTag, Genotype, ObjectiveDescriptor,
    ObjectiveKind, Phenotype, SearchSpaceDescriptor, Sense, SpaceKind,
};
pub use spaces::SearchSpace;
pub use suite::{instantiate, Suite};
