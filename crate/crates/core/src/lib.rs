//! Near-field line-of-sight MIMO between two parallel linear apertures.
//!
//! The crate samples the scalar free-space Green function between element
//! positions, extracts communication modes by SVD and checks them against the
//! closed-form degrees-of-freedom estimates. The [`design`] module builds and
//! compares holographic lines, half-wavelength arrays, Rayleigh-spaced sparse
//! arrays and arrays of sub-arrays.

pub mod channel;
pub mod design;
pub mod error;
pub mod formulas;
pub mod geometry;
pub mod modes;

pub use channel::{channel_matrix, sample_continuous, ChannelMatrix, ChannelOptions, PhaseModel};
pub use design::{
    compare, optimal_spacing, synthesize, Architecture, ArchitectureKind, ArchitectureReport,
    ArchitectureType, DesignConstraint, DesignOptions,
};
pub use error::{Error, Result};
pub use formulas::{DofFormulaResult, FormulaId};
pub use geometry::{classify_region, fraunhofer_distance, Aperture, FieldRegion, LinkGeometry};
pub use modes::{decompose, effective_dof, DofEstimate, ModeDecomposition};
