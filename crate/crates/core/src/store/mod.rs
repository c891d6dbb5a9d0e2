//! Fitness data on disk: tabular databases, surrogate MLP ensembles, look-up
//! tables, and the synthetic generator that stands in for trained data.
//!
//! All three formats are UTF-8 JSON. Tabular databases and look-up tables are
//! newline-delimited (a header object followed by one object per entry);
//! ensembles are a single object. Field names are fixed in `docs/formats.md`.

use serde::{Deserialize, Serialize};

mod lut;
mod surrogate;
pub mod synth;
mod tabular;

pub use lut::{load_lut, LookupTable, LutHeader};
pub use surrogate::{
    featurize, load_ensemble, Layer, MlpModel, SurrogateEnsemble, FEATURIZER_ONE_HOT,
};
pub use synth::{gen_synthetic, gen_synthetic_surrogate, write_synthetic, SyntheticProfile};
pub use tabular::{load_tabular, FitnessRecord, TabularDb, TabularHeader};

pub const FORMAT_VERSION: u32 = 1;

pub const TABULAR_FILE: &str = "tabular.ndj";
pub const ENSEMBLE_FILE: &str = "ensemble.mdl";
pub const LUT_FILE: &str = "lut.tbl";

/// Spaces whose fitness comes from a tabular database; the rest use a
/// surrogate ensemble plus a look-up table.
pub fn is_tabular_space(name: &str) -> bool {
    matches!(name, "nb101" | "nb201" | "nats")
}

/// Where a data file came from. Reference points for synthetic data are
/// derived from the data itself rather than taken from the suite tables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    #[default]
    Synthetic,
    Converted,
}

fn check_version(format: &str, expected_format: &str, version: u32) -> crate::Result<()> {
    if format != expected_format {
        return Err(crate::Error::Schema(format!(
            "expected format `{expected_format}`, found `{format}`"
        )));
    }
    if version != FORMAT_VERSION {
        return Err(crate::Error::Schema(format!(
            "unsupported {format} version {version}"
        )));
    }
    Ok(())
}
