use crate::error::{Error, Result};
use crate::problem::{DatasetTag, Genotype, Phenotype, SearchSpaceDescriptor, SpaceKind};

use super::{split_at_offsets, SearchSpace};

pub const NODES: usize = 7;
pub const EDGE_BITS: usize = NODES * (NODES - 1) / 2;
pub const MAX_EDGES: usize = 9;

pub const OPS: [&str; 3] = ["conv3x3", "conv1x1", "maxpool3x3"];
const ALIASES: [&str; 3] = ["conv3x3-bn-relu", "conv1x1-bn-relu", "maxpool3x3"];

/// Position of edge `from -> to` (`from < to`) among the upper-triangular bits.
pub fn edge_index(from: usize, to: usize) -> usize {
    debug_assert!(from < to && to < NODES);
    from * (2 * NODES - from - 1) / 2 + (to - from - 1)
}

/// Cell DAG over seven nodes: 21 adjacency bits then one operation per
/// interior node.
#[derive(Debug, Clone)]
pub struct NasBench101 {
    descriptor: SearchSpaceDescriptor,
}

impl NasBench101 {
    pub fn new() -> Self {
        let mut cardinalities = vec![2; EDGE_BITS];
        cardinalities.extend([3; NODES - 2]);
        NasBench101 {
            descriptor: SearchSpaceDescriptor {
                name: "nb101".into(),
                cardinalities,
                dataset: DatasetTag::Cifar10,
                kind: SpaceKind::Micro,
            },
        }
    }
}

impl Default for NasBench101 {
    fn default() -> Self {
        Self::new()
    }
}

fn reaches_output(bits: &[u32]) -> bool {
    let mut seen = [false; NODES];
    seen[0] = true;
    // edges only go forward, so one pass in topological order suffices
    for from in 0..NODES {
        if !seen[from] {
            continue;
        }
        for to in from + 1..NODES {
            if bits[edge_index(from, to)] == 1 {
                seen[to] = true;
            }
        }
    }
    seen[NODES - 1]
}

fn edge_count(bits: &[u32]) -> usize {
    bits.iter().filter(|&&b| b == 1).count()
}

impl SearchSpace for NasBench101 {
    fn descriptor(&self) -> &SearchSpaceDescriptor {
        &self.descriptor
    }

    fn structurally_valid(&self, x: &[u32]) -> bool {
        let bits = &x[..EDGE_BITS];
        edge_count(bits) <= MAX_EDGES && reaches_output(bits)
    }

    fn repair(&self, x: Genotype) -> Genotype {
        if self.structurally_valid(&x) {
            return x;
        }
        let mut x = x.into_inner();
        let shortcut = edge_index(0, NODES - 1);
        let drop_highest = |x: &mut Vec<u32>, keep: Option<usize>| {
            if let Some(i) = (0..EDGE_BITS).rev().find(|&i| x[i] == 1 && Some(i) != keep) {
                x[i] = 0;
            }
        };
        while edge_count(&x[..EDGE_BITS]) > MAX_EDGES {
            drop_highest(&mut x, None);
        }
        if !reaches_output(&x[..EDGE_BITS]) {
            x[shortcut] = 1;
            if edge_count(&x[..EDGE_BITS]) > MAX_EDGES {
                drop_highest(&mut x, Some(shortcut));
            }
        }
        Genotype::new(x)
    }

    fn decode_unchecked(&self, x: &[u32]) -> Phenotype {
        let mut out: String = x[..EDGE_BITS]
            .iter()
            .map(|&b| if b == 1 { '1' } else { '0' })
            .collect();
        out.push(':');
        let ops: Vec<&str> = x[EDGE_BITS..].iter().map(|&v| OPS[v as usize]).collect();
        out.push_str(&ops.join(","));
        Phenotype::new(out)
    }

    fn encode(&self, phenotype: &Phenotype) -> Result<Genotype> {
        let text = phenotype.as_str();
        let (bits, ops) = text
            .split_once(':')
            .ok_or_else(|| Error::parse(0, "expected `<adjacency bits>:<ops>`"))?;
        if bits.len() != EDGE_BITS {
            return Err(Error::parse(
                0,
                format!("expected {EDGE_BITS} adjacency bits, found {}", bits.len()),
            ));
        }
        let mut x = Vec::with_capacity(EDGE_BITS + NODES - 2);
        for (i, ch) in bits.char_indices() {
            match ch {
                '0' => x.push(0),
                '1' => x.push(1),
                _ => return Err(Error::parse(i, format!("adjacency bit `{ch}`"))),
            }
        }
        let ops = split_at_offsets(ops, bits.len() + 1, ',');
        if ops.len() != NODES - 2 {
            return Err(Error::parse(
                bits.len() + 1,
                format!("expected {} operations, found {}", NODES - 2, ops.len()),
            ));
        }
        for (pos, op) in ops {
            let v = OPS
                .iter()
                .position(|t| *t == op)
                .or_else(|| ALIASES.iter().position(|t| *t == op))
                .ok_or_else(|| Error::parse(pos, format!("unknown operation `{op}`")))?;
            x.push(v as u32);
        }
        Ok(Genotype::new(x))
    }
}
