//! Figures of merit for collinear Gaussian-beam SPDC photon-pair sources:
//! peak joint spectral density, photon bandwidth, pair and single-photon
//! collection probabilities, heralding ratios and spectral purity, plus the
//! focusing optimizations built on them.

pub mod collection;
pub mod error;
pub mod model;
pub mod numerics;
pub mod overlap;
pub mod pareto;
pub mod purity;
pub mod spectral;

pub use error::{Result, SpdcError};
pub use model::{AuxParams, DimensionlessConfig, PhysicalSource};
