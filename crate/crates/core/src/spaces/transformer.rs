use crate::error::{Error, Result};
use crate::problem::{DatasetTag, Genotype, Phenotype, SearchSpaceDescriptor, SpaceKind};

use super::{lookup, prefixed, split_at_offsets, SearchSpace};

pub const DEPTHS: [&str; 3] = ["14", "15", "16"];
pub const EMBEDS: [&str; 3] = ["192", "216", "240"];
pub const MLP_RATIOS: [&str; 3] = ["3.5", "4.0", "4.5"];
pub const HEADS: [&str; 2] = ["3", "4"];

const MAX_LAYERS: usize = 16;
const MLP_AT: usize = 2;
const HEADS_AT: usize = MLP_AT + MAX_LAYERS;

/// Vision transformer: depth, embedding width, then an MLP ratio and a head
/// count for each of sixteen layer slots. Slots past the depth are ignored.
#[derive(Debug, Clone)]
pub struct Transformer {
    descriptor: SearchSpaceDescriptor,
}

impl Transformer {
    pub fn new() -> Self {
        let mut cardinalities = vec![DEPTHS.len() as u32, EMBEDS.len() as u32];
        cardinalities.extend([MLP_RATIOS.len() as u32; MAX_LAYERS]);
        cardinalities.extend([HEADS.len() as u32; MAX_LAYERS]);
        Transformer {
            descriptor: SearchSpaceDescriptor {
                name: "transformer".into(),
                cardinalities,
                dataset: DatasetTag::ImageNet1k,
                kind: SpaceKind::Macro,
            },
        }
    }
}

impl Default for Transformer {
    fn default() -> Self {
        Self::new()
    }
}

fn layers(x: &[u32]) -> usize {
    14 + x[0] as usize
}

impl SearchSpace for Transformer {
    fn descriptor(&self) -> &SearchSpaceDescriptor {
        &self.descriptor
    }

    fn structurally_valid(&self, _x: &[u32]) -> bool {
        true
    }

    fn decode_unchecked(&self, x: &[u32]) -> Phenotype {
        let n = layers(x);
        let mlp: Vec<&str> = (0..n).map(|l| MLP_RATIOS[x[MLP_AT + l] as usize]).collect();
        let heads: Vec<&str> = (0..n).map(|l| HEADS[x[HEADS_AT + l] as usize]).collect();
        Phenotype::new(format!(
            "d{}|e{}|m{}|h{}",
            DEPTHS[x[0] as usize],
            EMBEDS[x[1] as usize],
            mlp.join("-"),
            heads.join("-")
        ))
    }

    fn encode(&self, phenotype: &Phenotype) -> Result<Genotype> {
        let text = phenotype.as_str();
        let parts = split_at_offsets(text, 0, '|');
        if parts.len() != 4 {
            return Err(Error::parse(text.len(), "expected `d..|e..|m..|h..`"));
        }
        let mut x = vec![0u32; self.descriptor.dim()];
        x[0] = prefixed(parts[0].1, "d", &DEPTHS, parts[0].0, "depth")?;
        x[1] = prefixed(parts[1].1, "e", &EMBEDS, parts[1].0, "embedding width")?;
        let n = layers(&x);
        for (slot, prefix, table, what, at) in [
            (2, "m", &MLP_RATIOS[..], "mlp ratio", MLP_AT),
            (3, "h", &HEADS[..], "head count", HEADS_AT),
        ] {
            let (pos, group) = parts[slot];
            let list = group
                .strip_prefix(prefix)
                .ok_or_else(|| Error::parse(pos, format!("expected `{prefix}`")))?;
            let items = split_at_offsets(list, pos + 1, '-');
            if items.len() != n {
                return Err(Error::parse(
                    pos,
                    format!("expected {n} {what} entries, found {}", items.len()),
                ));
            }
            for (l, (ipos, tok)) in items.into_iter().enumerate() {
                x[at + l] = lookup(table, tok, ipos, what)?;
            }
        }
        Ok(Genotype::new(x))
    }

    fn layer_keys(&self, phenotype: &Phenotype) -> Result<Vec<String>> {
        let x = self.encode(phenotype)?;
        let e = EMBEDS[x[1] as usize];
        let mut keys = vec![format!("embed:e{e}")];
        for l in 0..layers(&x) {
            keys.push(format!(
                "layer:e{e}:m{}:h{}",
                MLP_RATIOS[x[MLP_AT + l] as usize],
                HEADS[x[HEADS_AT + l] as usize]
            ));
        }
        keys.push(format!("head:e{e}"));
        Ok(keys)
    }

    fn layer_key_universe(&self) -> Vec<String> {
        let mut keys = Vec::new();
        for e in EMBEDS {
            keys.push(format!("embed:e{e}"));
            for m in MLP_RATIOS {
                for h in HEADS {
                    keys.push(format!("layer:e{e}:m{m}:h{h}"));
                }
            }
            keys.push(format!("head:e{e}"));
        }
        keys
    }
}
