use crate::error::{Error, Result};
use crate::problem::{DatasetTag, Genotype, Phenotype, SearchSpaceDescriptor, SpaceKind};

use super::{lookup, split_at_offsets, SearchSpace};

pub const CHANNELS: [&str; 8] = ["8", "16", "24", "32", "40", "48", "56", "64"];

/// Size (channel-count) search space: one channel choice per stage.
#[derive(Debug, Clone)]
pub struct Nats {
    descriptor: SearchSpaceDescriptor,
}

impl Nats {
    pub fn new() -> Self {
        Nats {
            descriptor: SearchSpaceDescriptor {
                name: "nats".into(),
                cardinalities: vec![8; 5],
                dataset: DatasetTag::Cifar10,
                kind: SpaceKind::Macro,
            },
        }
    }
}

impl Default for Nats {
    fn default() -> Self {
        Self::new()
    }
}

impl SearchSpace for Nats {
    fn descriptor(&self) -> &SearchSpaceDescriptor {
        &self.descriptor
    }

    fn structurally_valid(&self, _x: &[u32]) -> bool {
        true
    }

    fn enumerable(&self) -> bool {
        true
    }

    fn decode_unchecked(&self, x: &[u32]) -> Phenotype {
        let parts: Vec<&str> = x.iter().map(|&v| CHANNELS[v as usize]).collect();
        Phenotype::new(parts.join(":"))
    }

    fn encode(&self, phenotype: &Phenotype) -> Result<Genotype> {
        let text = phenotype.as_str();
        let parts = split_at_offsets(text, 0, ':');
        if parts.len() != 5 {
            return Err(Error::parse(
                text.len(),
                format!("expected 5 stages, found {}", parts.len()),
            ));
        }
        parts
            .into_iter()
            .map(|(pos, tok)| lookup(&CHANNELS, tok, pos, "channel count"))
            .collect::<Result<Vec<_>>>()
            .map(Genotype::new)
    }
}
