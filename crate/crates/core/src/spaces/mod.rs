//! The seven architecture search spaces and their genotype/phenotype codecs.
//!
//! Every space exposes the same four operations: a validity predicate,
//! uniform sampling, `encode` (phenotype to genotype) and `decode` (genotype to
//! phenotype). Genotype positions, cardinalities and phenotype grammars are
//! listed in `docs/grammars.md`; the `Phenotype` strings produced by `decode`
//! double as lookup-table keys, so changing a grammar invalidates stored data.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::problem::{Genotype, Phenotype, SearchSpaceDescriptor};

mod darts;
mod mnv3;
mod nats;
mod nb101;
mod nb201;
mod resnet;
mod transformer;

pub use darts::Darts;
pub use mnv3::MobileNetV3;
pub use nats::Nats;
pub use nb101::NasBench101;
pub use nb201::NasBench201;
pub use resnet::ResNet50;
pub use transformer::Transformer;

/// Names of the registered spaces, in table order.
pub const SPACE_NAMES: [&str; 7] = [
    "nb101",
    "nb201",
    "nats",
    "darts",
    "resnet50",
    "transformer",
    "mnv3",
];

pub trait SearchSpace: Send + Sync {
    fn descriptor(&self) -> &SearchSpaceDescriptor;

    /// Structural validity of a genotype already known to be in range.
    fn structurally_valid(&self, x: &[u32]) -> bool;

    /// Canonical phenotype of an in-range genotype.
    fn decode_unchecked(&self, x: &[u32]) -> Phenotype;

    fn encode(&self, phenotype: &Phenotype) -> Result<Genotype>;

    /// Maps an in-range genotype onto a valid one. Valid genotypes are
    /// returned unchanged.
    fn repair(&self, x: Genotype) -> Genotype {
        x
    }

    /// Whether the valid set is small enough to list exhaustively.
    fn enumerable(&self) -> bool {
        false
    }

    /// Operation/layer keys whose look-up-table entries add up to the
    /// architecture's cost. Only surrogate-scale spaces decompose.
    fn layer_keys(&self, phenotype: &Phenotype) -> Result<Vec<String>> {
        let _ = phenotype;
        Err(Error::Unsupported(format!(
            "space `{}` has no layer decomposition",
            self.descriptor().name
        )))
    }

    /// Every key `layer_keys` can produce.
    fn layer_key_universe(&self) -> Vec<String> {
        Vec::new()
    }

    fn is_valid(&self, x: &[u32]) -> Result<bool> {
        self.descriptor().check(x)?;
        Ok(self.structurally_valid(x))
    }

    fn decode(&self, x: &[u32]) -> Result<Phenotype> {
        self.descriptor().check(x)?;
        Ok(self.decode_unchecked(x))
    }

    /// `decode(encode(p))`: the canonical spelling of a phenotype.
    fn canonicalize(&self, phenotype: &Phenotype) -> Result<Phenotype> {
        let x = self.encode(phenotype)?;
        Ok(self.decode_unchecked(&x))
    }
}

/// Looks up a registered space by name.
pub fn by_name(name: &str) -> Result<Arc<dyn SearchSpace>> {
    Ok(match name {
        "nb101" => Arc::new(NasBench101::new()),
        "nb201" => Arc::new(NasBench201::new()),
        "nats" => Arc::new(Nats::new()),
        "darts" => Arc::new(Darts::new()),
        "resnet50" => Arc::new(ResNet50::new()),
        "transformer" => Arc::new(Transformer::new()),
        "mnv3" => Arc::new(MobileNetV3::new()),
        other => {
            return Err(Error::Unsupported(format!(
                "unknown search space `{other}`"
            )))
        }
    })
}

pub fn all() -> Vec<Arc<dyn SearchSpace>> {
    SPACE_NAMES
        .iter()
        .map(|name| by_name(name).expect("registered"))
        .collect()
}

/// Draws `n` valid genotypes uniformly over in-range values, rejecting
/// invalid ones.
pub fn sample<R: Rng + ?Sized>(
    space: &dyn SearchSpace,
    rng: &mut R,
    n: usize,
) -> Result<Vec<Genotype>> {
    if n == 0 {
        return Err(Error::Parameter("sample size must be at least 1".into()));
    }
    let limit = 10_000 * n;
    let cards = &space.descriptor().cardinalities;
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        if attempts == limit {
            return Err(Error::Sampling { attempts });
        }
        attempts += 1;
        let x: Vec<u32> = cards.iter().map(|&c| rng.random_range(0..c)).collect();
        if space.structurally_valid(&x) {
            out.push(Genotype::new(x));
        }
    }
    Ok(out)
}

/// Lists every valid genotype once, in mixed-radix order.
pub fn enumerate(space: &dyn SearchSpace) -> Result<Enumerate<'_>> {
    if !space.enumerable() {
        return Err(Error::Unsupported(format!(
            "space `{}` is too large to enumerate",
            space.descriptor().name
        )));
    }
    Ok(Enumerate {
        space,
        next: Some(vec![0; space.descriptor().dim()]),
    })
}

pub struct Enumerate<'a> {
    space: &'a dyn SearchSpace,
    next: Option<Vec<u32>>,
}

impl Iterator for Enumerate<'_> {
    type Item = Genotype;

    fn next(&mut self) -> Option<Genotype> {
        let cards = &self.space.descriptor().cardinalities;
        loop {
            let current = self.next.take()?;
            let mut succ = current.clone();
            // little-endian increment: last position varies fastest
            let mut carry = true;
            for (v, &c) in succ.iter_mut().zip(cards).rev() {
                *v += 1;
                if *v < c {
                    carry = false;
                    break;
                }
                *v = 0;
            }
            if !carry {
                self.next = Some(succ);
            }
            if self.space.structurally_valid(&current) {
                return Some(Genotype::new(current));
            }
        }
    }
}

/// Splits `s` on `sep`, keeping the byte offset of every piece relative to
/// `base`.
pub(crate) fn split_at_offsets(s: &str, base: usize, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        if ch == sep {
            out.push((base + start, &s[start..i]));
            start = i + ch.len_utf8();
        }
    }
    out.push((base + start, &s[start..]));
    out
}

/// Index of `token` in `table`, or a parse error at `position`.
pub(crate) fn lookup(table: &[&str], token: &str, position: usize, what: &str) -> Result<u32> {
    table
        .iter()
        .position(|t| *t == token)
        .map(|i| i as u32)
        .ok_or_else(|| Error::parse(position, format!("unknown {what} `{token}`")))
}

/// Parses `token` as `prefix<value>` with `value` drawn from `table`.
pub(crate) fn prefixed(
    token: &str,
    prefix: &str,
    table: &[&str],
    position: usize,
    what: &str,
) -> Result<u32> {
    let rest = token
        .strip_prefix(prefix)
        .ok_or_else(|| Error::parse(position, format!("expected `{prefix}` before {what}")))?;
    lookup(table, rest, position + prefix.len(), what)
}
