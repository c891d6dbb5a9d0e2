use crate::error::{Error, Result};
use crate::problem::{DatasetTag, Genotype, Phenotype, SearchSpaceDescriptor, SpaceKind};

use super::{lookup, prefixed, split_at_offsets, SearchSpace};

pub const RESOLUTIONS: [&str; 5] = ["192", "208", "224", "240", "256"];

/// Block choices; index 0 removes the block.
pub const BLOCKS: [&str; 10] = [
    "skip", "k3e3", "k3e4", "k3e6", "k5e3", "k5e4", "k5e6", "k7e3", "k7e4", "k7e6",
];

const STAGES: usize = 5;
const SLOTS: usize = 4;
const MIN_ACTIVE: usize = 2;

/// Mobile inverted-bottleneck network: input resolution followed by four
/// block slots in each of five stages. A stage keeps its active blocks at
/// the front; skips may only fill the tail and at least two blocks remain.
#[derive(Debug, Clone)]
pub struct MobileNetV3 {
    descriptor: SearchSpaceDescriptor,
}

impl MobileNetV3 {
    pub fn new() -> Self {
        let mut cardinalities = vec![RESOLUTIONS.len() as u32];
        cardinalities.extend([BLOCKS.len() as u32; STAGES * SLOTS]);
        MobileNetV3 {
            descriptor: SearchSpaceDescriptor {
                name: "mnv3".into(),
                cardinalities,
                dataset: DatasetTag::ImageNet1k,
                kind: SpaceKind::Macro,
            },
        }
    }
}

impl Default for MobileNetV3 {
    fn default() -> Self {
        Self::new()
    }
}

fn stage(x: &[u32], s: usize) -> &[u32] {
    &x[1 + s * SLOTS..1 + (s + 1) * SLOTS]
}

impl SearchSpace for MobileNetV3 {
    fn descriptor(&self) -> &SearchSpaceDescriptor {
        &self.descriptor
    }

    fn structurally_valid(&self, x: &[u32]) -> bool {
        (0..STAGES).all(|s| {
            let blocks = stage(x, s);
            let active = blocks.iter().take_while(|&&b| b != 0).count();
            active >= MIN_ACTIVE && blocks[active..].iter().all(|&b| b == 0)
        })
    }

    fn repair(&self, x: Genotype) -> Genotype {
        let mut x = x.into_inner();
        for s in 0..STAGES {
            let mut active: Vec<u32> = stage(&x, s).iter().copied().filter(|&b| b != 0).collect();
            while active.len() < MIN_ACTIVE {
                active.push(1);
            }
            active.resize(SLOTS, 0);
            x[1 + s * SLOTS..1 + (s + 1) * SLOTS].copy_from_slice(&active);
        }
        Genotype::new(x)
    }

    fn decode_unchecked(&self, x: &[u32]) -> Phenotype {
        let mut out = format!("r{}", RESOLUTIONS[x[0] as usize]);
        for s in 0..STAGES {
            let blocks: Vec<&str> = stage(x, s)
                .iter()
                .filter(|&&b| b != 0)
                .map(|&b| BLOCKS[b as usize])
                .collect();
            out.push('|');
            out.push_str(&blocks.join("-"));
        }
        Phenotype::new(out)
    }

    fn encode(&self, phenotype: &Phenotype) -> Result<Genotype> {
        let text = phenotype.as_str();
        let parts = split_at_offsets(text, 0, '|');
        if parts.len() != STAGES + 1 {
            return Err(Error::parse(
                text.len(),
                format!("expected resolution and {STAGES} stages"),
            ));
        }
        let mut x = vec![0u32; self.descriptor.dim()];
        x[0] = prefixed(parts[0].1, "r", &RESOLUTIONS, parts[0].0, "resolution")?;
        for (s, &(pos, group)) in parts[1..].iter().enumerate() {
            let blocks = split_at_offsets(group, pos, '-');
            if blocks.len() > SLOTS {
                return Err(Error::parse(pos, format!("stage {s} has too many blocks")));
            }
            for (b, (bpos, tok)) in blocks.into_iter().enumerate() {
                let v = lookup(&BLOCKS, tok, bpos, "block")?;
                if v == 0 {
                    return Err(Error::parse(bpos, "skips are implicit"));
                }
                x[1 + s * SLOTS + b] = v;
            }
        }
        Ok(Genotype::new(x))
    }

    fn layer_keys(&self, phenotype: &Phenotype) -> Result<Vec<String>> {
        let x = self.encode(phenotype)?;
        let r = RESOLUTIONS[x[0] as usize];
        let mut keys = vec![format!("stem:r{r}")];
        for s in 0..STAGES {
            for (b, &v) in stage(&x, s).iter().enumerate().filter(|(_, &v)| v != 0) {
                keys.push(format!("s{s}b{b}:{}:r{r}", BLOCKS[v as usize]));
            }
        }
        keys.push(format!("head:r{r}"));
        Ok(keys)
    }

    fn layer_key_universe(&self) -> Vec<String> {
        let mut keys: Vec<String> = RESOLUTIONS.iter().map(|r| format!("stem:r{r}")).collect();
        for s in 0..STAGES {
            for b in 0..SLOTS {
                for block in &BLOCKS[1..] {
                    for r in RESOLUTIONS {
                        keys.push(format!("s{s}b{b}:{block}:r{r}"));
                    }
                }
            }
        }
        keys.extend(RESOLUTIONS.iter().map(|r| format!("head:r{r}")));
        keys
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skip_placement_rules() {
        let s = MobileNetV3::new();
        let mut x = vec![1u32; 21];
        assert!(s.is_valid(&x).unwrap());
        x[4] = 0; // tail skip in stage 0
        assert!(s.is_valid(&x).unwrap());
        x[3] = 0; // two active left
        assert!(s.is_valid(&x).unwrap());
        x[2] = 0; // only one active
        assert!(!s.is_valid(&x).unwrap());
        let mut y = vec![1u32; 21];
        y[2] = 0; // skip in the middle
        assert!(!s.is_valid(&y).unwrap());
        let repaired = s.repair(Genotype::new(y));
        assert!(s.is_valid(&repaired).unwrap());
        assert_eq!(&repaired[1..5], &[1, 1, 1, 0]);
    }

    #[test]
    fn round_trip() {
        let s = MobileNetV3::new();
        let p =
            Phenotype::new("r224|k3e4-k5e6|k3e3-k3e3-k7e6|k7e6-k7e6-k7e6-k7e6|k5e3-k5e4|k3e6-k3e6");
        let x = s.encode(&p).unwrap();
        assert!(s.is_valid(&x).unwrap());
        assert_eq!(s.decode(&x).unwrap(), p);
        assert_eq!(s.layer_keys(&p).unwrap().len(), 1 + 13 + 1);
        assert!(s
            .encode(&Phenotype::new(
                "r224|k3e4-skip|k3e3-k3e3|k7e6-k7e6|k5e3-k5e4|k3e6-k3e6"
            ))
            .is_err());
    }
}
