//! Numerical laboratory for the third-order Benjamin-Ono equation on the torus.
//!
//! - [`actions`]: Birkhoff coordinates and action spectra.
//! - [`hierarchy`]: Hamiltonians and frequencies of the hierarchy.
//! - [`flow`]: exact flows in Birkhoff coordinates.
//! - [`grid`], [`potentials`], [`lax`]: physical-space potentials and the Lax
//!   operator as forward spectral oracle.
//! - [`spectral`]: pseudo-spectral integrator of the PDE.
//! - [`wave_lab`]: traveling waves, stability and ill-posedness experiments.

pub mod actions;
pub mod error;
pub mod flow;
pub mod grid;
pub mod hierarchy;
pub mod lax;
pub mod potentials;
pub mod spectral;
pub mod wave_lab;

pub use actions::{ActionSpectrum, GapSequence, WeightedNorm};
pub use error::{Error, Result};
pub use flow::{evolve, translate, traveling_wave_speed, FlowSpec};
pub use grid::TorusGrid;
pub use hierarchy::HierarchyTable;
pub use lax::LaxSummary;
pub use potentials::RationalSymbol;
pub use spectral::SpectralState;
pub use wave_lab::{ExperimentReport, TravelingWaveRecord};
