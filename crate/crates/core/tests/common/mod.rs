#![allow(dead_code)]

use std::path::Path;
use std::sync::OnceLock;

use naxbench::spaces::SPACE_NAMES;
use naxbench::store::{write_synthetic, SyntheticProfile};
use tempfile::TempDir;

pub const DATA_SEED: u64 = 2024;

/// Synthetic data for every space, generated once per test binary.
pub fn data_root() -> &'static Path {
    static ROOT: OnceLock<TempDir> = OnceLock::new();
    ROOT.get_or_init(|| {
        let dir = TempDir::new().expect("temp dir");
        for space in SPACE_NAMES {
            write_synthetic(
                dir.path(),
                space,
                &SyntheticProfile::for_space(space),
                DATA_SEED,
            )
            .expect("synthetic data");
        }
        dir
    })
    .path()
}
