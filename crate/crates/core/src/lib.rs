//! Isotropic quantum walks with a two-dimensional coin on the lattices Z^d, d = 1, 2, 3.
//!
//! Exact point-group and lattice computations live in [`matrix_kernel`], [`point_groups`]
//! and [`cayley_lattice`]; walks, their unitarity conditions and simulation in
//! [`walk_engine`]; covariance under a point group in [`isotropy`]; the exclusion
//! pipeline in [`classifier`].

pub mod cayley_lattice;
pub mod classifier;
pub mod config;
pub mod isotropy;
pub mod matrix_kernel;
pub mod point_groups;
pub mod walk_engine;

mod error;

pub use cayley_lattice::{BrillouinZone, GeneratingSet};
pub use classifier::{
    CandidateGraph, Chirality, ClassifiedWalk, Classification, ExclusionCertificate,
    ExclusionMethod, PolyhedronTag,
};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use isotropy::{PermutationAction, RepClass, SpinRep};
pub use matrix_kernel::{Complex2Matrix, IntVector, RatMatrix, C64, DEFAULT_TOL, Q};
pub use point_groups::{GroupName, Orbit, PointGroup};
pub use walk_engine::{CoinMatrix, QuantumWalk, TorusState, UnitarityReport};
