use crate::error::{Error, Result};
use crate::problem::{DatasetTag, Genotype, Phenotype, SearchSpaceDescriptor, SpaceKind};

use super::{split_at_offsets, SearchSpace};

/// Canonical operation tokens, index = genotype value.
pub const OPS: [&str; 5] = ["none", "skip", "1x1", "3x3", "avg"];

/// Long spellings accepted by `encode`.
const ALIASES: [&str; 5] = [
    "none",
    "skip_connect",
    "nor_conv_1x1",
    "nor_conv_3x3",
    "avg_pool_3x3",
];

/// Cell with four nodes and one operation on each of its six edges.
///
/// Genotype position `k` is the `k`-th edge in the order
/// `(1<-0), (2<-0), (2<-1), (3<-0), (3<-1), (3<-2)`.
#[derive(Debug, Clone)]
pub struct NasBench201 {
    descriptor: SearchSpaceDescriptor,
}

impl NasBench201 {
    pub fn new() -> Self {
        NasBench201 {
            descriptor: SearchSpaceDescriptor {
                name: "nb201".into(),
                cardinalities: vec![5; 6],
                dataset: DatasetTag::Cifar10,
                kind: SpaceKind::Micro,
            },
        }
    }
}

impl Default for NasBench201 {
    fn default() -> Self {
        Self::new()
    }
}

impl SearchSpace for NasBench201 {
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
        let mut out = String::new();
        let mut k = 0;
        for node in 1..4 {
            if node > 1 {
                out.push('+');
            }
            out.push('|');
            for input in 0..node {
                out.push_str(OPS[x[k] as usize]);
                out.push('~');
                out.push_str(&input.to_string());
                out.push('|');
                k += 1;
            }
        }
        Phenotype::new(out)
    }

    fn encode(&self, phenotype: &Phenotype) -> Result<Genotype> {
        let text = phenotype.as_str();
        let nodes = split_at_offsets(text, 0, '+');
        if nodes.len() != 3 {
            return Err(Error::parse(
                text.len(),
                format!("expected 3 node groups, found {}", nodes.len()),
            ));
        }
        let mut x = Vec::with_capacity(6);
        for (node_idx, (offset, group)) in nodes.into_iter().enumerate() {
            let inner = group
                .strip_prefix('|')
                .and_then(|g| g.strip_suffix('|'))
                .ok_or_else(|| Error::parse(offset, "node group must be wrapped in `|`"))?;
            let edges = split_at_offsets(inner, offset + 1, '|');
            if edges.len() != node_idx + 1 {
                return Err(Error::parse(
                    offset,
                    format!("node {} needs {} edges", node_idx + 1, node_idx + 1),
                ));
            }
            for (input, (pos, edge)) in edges.into_iter().enumerate() {
                let (op, src) = edge
                    .split_once('~')
                    .ok_or_else(|| Error::parse(pos, "expected `op~input`"))?;
                let value = OPS
                    .iter()
                    .position(|t| *t == op)
                    .or_else(|| ALIASES.iter().position(|t| *t == op))
                    .ok_or_else(|| Error::parse(pos, format!("unknown operation `{op}`")))?;
                if src != input.to_string() {
                    return Err(Error::parse(
                        pos + op.len() + 1,
                        format!("expected input {input}, found `{src}`"),
                    ));
                }
                x.push(value as u32);
            }
        }
        Ok(Genotype::new(x))
    }
}
