//! Band structures of periodic mass-spring lattices whose cells interact
//! beyond their nearest neighbors.
//!
//! Springs are grouped by the cell offset they span; each group is reduced
//! with its own push-forward operator and the results are summed into a
//! Hermitian stiffness `K̂(mu)`. A finite cyclic supercell built straight
//! from the spring list serves as an independent check.

pub mod assembly;
pub mod dispersion;
pub mod eigen;
pub mod error;
pub mod model;
pub mod oracle;
pub mod output;

pub use assembly::{
    mass_matrix, naive_combined_assembly, offset_blocks, phase, reduced_stiffness, BlochAssembly,
    ComplexMatrix, OffsetBlock, RealMatrix, ReducedMatrices, Wavevector,
};
pub use dispersion::{
    band_extrema, band_gaps, band_structure, count_wavevectors, detect_nonmonotonic, sample_path,
    BandExtrema, BandRow, BandTable, Gap, GapReport, Monotonicity, PathSpec,
};
pub use eigen::{dispersion_at, eig_hermitian, modes_at, HermitianEigen, ModeSet};
pub use error::{AssemblyError, DispersionError, EigenError, ModelError, OracleError};
pub use model::{
    builtin, canonicalize, validate, Bond, Diagnostic, DiagnosticKind, LatticeModel, MassNode,
    Offset, RawModel, Spring, BUILTIN_NAMES,
};
pub use oracle::{build_supercell, oracle_check, OracleReport, SupercellSystem};
