//! Finite-dimensional operator algebra toolkit.
//!
//! Everything here is exact numerical linear algebra on matrix algebras:
//! Wedderburn block structure and sectors of `*`-algebras, GNS
//! representations and central decompositions of states, finite abelian group
//! duality through the multiplicative unitary, measurement couplings and
//! instruments, Tomita-Takesaki modular data in standard form, and the
//! sector-level classification of broken and unbroken symmetries.

pub mod algebra;
pub mod group;
pub mod linalg;
pub mod measurement;
pub mod modular;
pub mod representation;
pub mod states;
pub mod symmetry;

#[cfg(test)]
pub(crate) mod testutil;

pub use algebra::{generate_algebra, Block, FiniteDimAlgebra, Projection};
pub use group::{Character, FiniteAbelianGroup, MasaData, MultiplicativeUnitary};
pub use linalg::{CMatrix, CVector, DEFAULT_TOL};
pub use measurement::{InstrumentResult, MeasurementSetup};
pub use modular::{BiorthReport, GaloisReport, ModularData, TomitaReport, UniversalityReport};
pub use representation::{intertwiner_space, AlgebraSignature, RepresentationData};
pub use symmetry::{AugmentedAlgebra, Automorphism, BreakingReport, DhrReport, FiniteGroup, GroupAction, Verdict};
pub use states::{CentralDecomposition, ConditionalExpectation, GnsTriple, SectorDistribution, State};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("representations belong to different algebras ({0} vs {1})")]
    AlgebraMismatch(String, String),
    #[error("state is not faithful: {0}")]
    NotFaithful(String),
    #[error("subalgebra is not maximal abelian: relative commutant has dimension {found}, expected {expected}")]
    NotMaximal { expected: usize, found: usize },
    #[error("subalgebra is not commutative")]
    NotCommutative,
    #[error("not a subalgebra: {0}")]
    NotSubalgebra(String),
    #[error("group of order {found} cannot label {expected} spectral projections")]
    GroupOrderMismatch { expected: usize, found: usize },
    #[error("operator is not unitary: {0}")]
    NotUnitary(String),
    #[error("outcome has probability {probability:e}; post-measurement state undefined")]
    NoOutcome { probability: f64 },
    #[error("invalid group action: {0}")]
    InvalidAction(String),
    #[error("operation requires an abelian group")]
    NonAbelian,
    #[error("invalid subgroup: {0}")]
    InvalidSubgroup(String),
    #[error("representation is not in standard form: {0}")]
    NotStandard(String),
    #[error("operator lies outside the algebra (distance {0:e})")]
    OutsideAlgebra(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
