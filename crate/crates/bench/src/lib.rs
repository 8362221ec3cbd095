//! Fixtures shared by the kernel benchmarks.

use std::path::PathBuf;

use corelevel_qpe::IntegralSet;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

pub fn fixture(name: &str) -> IntegralSet {
    IntegralSet::read(data_path(name)).expect("bundled FCIDUMP")
}
