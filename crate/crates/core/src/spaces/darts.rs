use crate::error::{Error, Result};
use crate::problem::{DatasetTag, Genotype, Phenotype, SearchSpaceDescriptor, SpaceKind};

use super::{lookup, split_at_offsets, SearchSpace};

pub const OPS: [&str; 8] = [
    "none",
    "max_pool_3x3",
    "avg_pool_3x3",
    "skip_connect",
    "sep_conv_3x3",
    "sep_conv_5x5",
    "dil_conv_3x3",
    "dil_conv_5x5",
];

pub const CELLS: [&str; 2] = ["normal", "reduce"];
const NODES: usize = 4;
const CELL_LEN: usize = NODES * 4;

/// Normal and reduction cell, four intermediate nodes each, every node
/// picking two (input, operation) pairs. Node `i` may read from the two cell
/// inputs or any of the `i` earlier nodes.
///
/// The two pairs of a node are unordered, so `decode` sorts them and several
/// genotypes share a phenotype.
#[derive(Debug, Clone)]
pub struct Darts {
    descriptor: SearchSpaceDescriptor,
}

impl Darts {
    pub fn new() -> Self {
        let mut cardinalities = Vec::with_capacity(2 * CELL_LEN);
        for _ in CELLS {
            for node in 0..NODES {
                for _ in 0..2 {
                    cardinalities.push(node as u32 + 2);
                    cardinalities.push(OPS.len() as u32);
                }
            }
        }
        Darts {
            descriptor: SearchSpaceDescriptor {
                name: "darts".into(),
                cardinalities,
                dataset: DatasetTag::Cifar10,
                kind: SpaceKind::Micro,
            },
        }
    }
}

impl Default for Darts {
    fn default() -> Self {
        Self::new()
    }
}

/// Offset of the first (input, op) pair of `node` in `cell`.
fn node_offset(cell: usize, node: usize) -> usize {
    cell * CELL_LEN + node * 4
}

fn sorted_pairs(x: &[u32], cell: usize, node: usize) -> [(u32, u32); 2] {
    let o = node_offset(cell, node);
    let mut pairs = [(x[o], x[o + 1]), (x[o + 2], x[o + 3])];
    pairs.sort();
    pairs
}

impl SearchSpace for Darts {
    fn descriptor(&self) -> &SearchSpaceDescriptor {
        &self.descriptor
    }

    fn structurally_valid(&self, x: &[u32]) -> bool {
        (0..CELLS.len()).all(|cell| {
            (0..NODES).all(|node| {
                let o = node_offset(cell, node);
                x[o] != x[o + 2]
            })
        })
    }

    fn repair(&self, x: Genotype) -> Genotype {
        let mut x = x.into_inner();
        for cell in 0..CELLS.len() {
            for node in 0..NODES {
                let o = node_offset(cell, node);
                if x[o] == x[o + 2] {
                    x[o + 2] = (x[o] + 1) % (node as u32 + 2);
                }
            }
        }
        Genotype::new(x)
    }

    fn decode_unchecked(&self, x: &[u32]) -> Phenotype {
        let cells: Vec<String> = CELLS
            .iter()
            .enumerate()
            .map(|(cell, name)| {
                let nodes: Vec<String> = (0..NODES)
                    .map(|node| {
                        let [a, b] = sorted_pairs(x, cell, node);
                        format!(
                            "{}~{}+{}~{}",
                            OPS[a.1 as usize], a.0, OPS[b.1 as usize], b.0
                        )
                    })
                    .collect();
                format!("{name}={}", nodes.join("|"))
            })
            .collect();
        Phenotype::new(cells.join(";"))
    }

    fn encode(&self, phenotype: &Phenotype) -> Result<Genotype> {
        let text = phenotype.as_str();
        let cells = split_at_offsets(text, 0, ';');
        if cells.len() != CELLS.len() {
            return Err(Error::parse(text.len(), "expected `normal=...;reduce=...`"));
        }
        let mut x = Vec::with_capacity(2 * CELL_LEN);
        for (cell, (offset, body)) in cells.into_iter().enumerate() {
            let prefix = format!("{}=", CELLS[cell]);
            let body = body
                .strip_prefix(&prefix)
                .ok_or_else(|| Error::parse(offset, format!("expected `{prefix}`")))?;
            let nodes = split_at_offsets(body, offset + prefix.len(), '|');
            if nodes.len() != NODES {
                return Err(Error::parse(
                    offset,
                    format!("expected {NODES} nodes, found {}", nodes.len()),
                ));
            }
            for (node, (pos, spec)) in nodes.into_iter().enumerate() {
                let pairs = split_at_offsets(spec, pos, '+');
                if pairs.len() != 2 {
                    return Err(Error::parse(pos, "a node takes exactly two inputs"));
                }
                for (ppos, pair) in pairs {
                    let (op, input) = pair
                        .split_once('~')
                        .ok_or_else(|| Error::parse(ppos, "expected `op~input`"))?;
                    let op = lookup(&OPS, op, ppos, "operation")?;
                    let input_pos = ppos + pair.len() - input.len();
                    let input: u32 = input
                        .parse()
                        .map_err(|_| Error::parse(input_pos, format!("bad input `{input}`")))?;
                    if input as usize >= node + 2 {
                        return Err(Error::parse(
                            input_pos,
                            format!("node {node} cannot read from {input}"),
                        ));
                    }
                    x.push(input);
                    x.push(op);
                }
            }
        }
        Ok(Genotype::new(x))
    }

    fn layer_keys(&self, phenotype: &Phenotype) -> Result<Vec<String>> {
        let x = self.encode(phenotype)?;
        let mut keys = vec!["base".to_string()];
        for (cell, name) in CELLS.iter().enumerate() {
            for node in 0..NODES {
                for (_, op) in sorted_pairs(&x, cell, node) {
                    keys.push(format!("{name}:{}", OPS[op as usize]));
                }
            }
        }
        Ok(keys)
    }

    fn layer_key_universe(&self) -> Vec<String> {
        let mut keys = vec!["base".to_string()];
        for name in CELLS {
            for op in OPS {
                keys.push(format!("{name}:{op}"));
            }
        }
        keys
    }
}
