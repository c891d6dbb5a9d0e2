use crate::error::{Error, Result};
use crate::problem::{DatasetTag, Genotype, Phenotype, SearchSpaceDescriptor, SpaceKind};

use super::{lookup, prefixed, split_at_offsets, SearchSpace};

pub const RESOLUTIONS: [&str; 5] = ["192", "208", "224", "240", "256"];
pub const DEPTHS: [usize; 3] = [2, 3, 4];
pub const WIDTHS: [&str; 3] = ["0.65", "0.8", "1.0"];
pub const EXPANDS: [&str; 4] = ["0.2", "0.25", "0.35", "0.5"];

const STAGES: usize = 4;
const MAX_DEPTH: usize = 4;
const DEPTH_AT: usize = 1;
const WIDTH_AT: usize = DEPTH_AT + STAGES;
const BLOCK_AT: usize = WIDTH_AT + STAGES;

/// Elastic bottleneck network: input resolution, then per stage a depth and
/// width multiplier, then an expand ratio for each of the four block slots
/// of every stage. Slots beyond a stage's depth are ignored.
#[derive(Debug, Clone)]
pub struct ResNet50 {
    descriptor: SearchSpaceDescriptor,
}

impl ResNet50 {
    pub fn new() -> Self {
        let mut cardinalities = vec![RESOLUTIONS.len() as u32];
        cardinalities.extend([DEPTHS.len() as u32; STAGES]);
        cardinalities.extend([WIDTHS.len() as u32; STAGES]);
        cardinalities.extend([EXPANDS.len() as u32; STAGES * MAX_DEPTH]);
        ResNet50 {
            descriptor: SearchSpaceDescriptor {
                name: "resnet50".into(),
                cardinalities,
                dataset: DatasetTag::ImageNet1k,
                kind: SpaceKind::Macro,
            },
        }
    }
}

impl Default for ResNet50 {
    fn default() -> Self {
        Self::new()
    }
}

fn depth(x: &[u32], stage: usize) -> usize {
    DEPTHS[x[DEPTH_AT + stage] as usize]
}

impl SearchSpace for ResNet50 {
    fn descriptor(&self) -> &SearchSpaceDescriptor {
        &self.descriptor
    }

    fn structurally_valid(&self, _x: &[u32]) -> bool {
        true
    }

    fn decode_unchecked(&self, x: &[u32]) -> Phenotype {
        let mut out = format!("r{}", RESOLUTIONS[x[0] as usize]);
        for stage in 0..STAGES {
            let expands: Vec<&str> = (0..depth(x, stage))
                .map(|b| EXPANDS[x[BLOCK_AT + stage * MAX_DEPTH + b] as usize])
                .collect();
            out.push_str(&format!(
                "|w{}:e{}",
                WIDTHS[x[WIDTH_AT + stage] as usize],
                expands.join("-")
            ));
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
        for (stage, &(pos, group)) in parts[1..].iter().enumerate() {
            let (width, expands) = group
                .split_once(':')
                .ok_or_else(|| Error::parse(pos, "expected `w<width>:e<ratios>`"))?;
            x[WIDTH_AT + stage] = prefixed(width, "w", &WIDTHS, pos, "width")?;
            let list_at = pos + width.len() + 1;
            let expands = expands
                .strip_prefix('e')
                .ok_or_else(|| Error::parse(list_at, "expected `e` before expand ratios"))?;
            let blocks = split_at_offsets(expands, list_at + 1, '-');
            let d = DEPTHS
                .iter()
                .position(|&d| d == blocks.len())
                .ok_or_else(|| {
                    Error::parse(list_at, format!("stage depth {} not allowed", blocks.len()))
                })?;
            x[DEPTH_AT + stage] = d as u32;
            for (b, (bpos, tok)) in blocks.into_iter().enumerate() {
                x[BLOCK_AT + stage * MAX_DEPTH + b] = lookup(&EXPANDS, tok, bpos, "expand ratio")?;
            }
        }
        Ok(Genotype::new(x))
    }

    fn layer_keys(&self, phenotype: &Phenotype) -> Result<Vec<String>> {
        let x = self.encode(phenotype)?;
        let res = RESOLUTIONS[x[0] as usize];
        let mut keys = vec![format!("stem:r{res}")];
        for stage in 0..STAGES {
            let w = WIDTHS[x[WIDTH_AT + stage] as usize];
            for b in 0..depth(&x, stage) {
                let e = EXPANDS[x[BLOCK_AT + stage * MAX_DEPTH + b] as usize];
                keys.push(format!("s{stage}b{b}:w{w}:e{e}:r{res}"));
            }
        }
        keys.push(format!(
            "head:w{}",
            WIDTHS[x[WIDTH_AT + STAGES - 1] as usize]
        ));
        Ok(keys)
    }

    fn layer_key_universe(&self) -> Vec<String> {
        let mut keys: Vec<String> = RESOLUTIONS.iter().map(|r| format!("stem:r{r}")).collect();
        for stage in 0..STAGES {
            for b in 0..MAX_DEPTH {
                for w in WIDTHS {
                    for e in EXPANDS {
                        for r in RESOLUTIONS {
                            keys.push(format!("s{stage}b{b}:w{w}:e{e}:r{r}"));
                        }
                    }
                }
            }
        }
        keys.extend(WIDTHS.iter().map(|w| format!("head:w{w}")));
        keys
    }
}
