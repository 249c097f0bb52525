//! Fixtures shared by the criterion benches.

use latticeband_core::{builtin, LatticeModel, PathSpec};

pub fn penta2d() -> LatticeModel {
    builtin("penta2d").expect("built-in model")
}

pub fn paper_path(samples_per_segment: usize) -> PathSpec {
    PathSpec::preset("paper-2d-path", samples_per_segment).expect("preset exists")
}
