//! Adaptive physical-layer network coding for the two-way relay channel.
//!
//! Two end nodes A and B exchange one symbol each through a relay R in two
//! phases. In the multiple-access (MA) phase both transmit at once and the
//! relay jointly estimates the pair; in the broadcast (BC) phase the relay
//! sends a single network-coded symbol chosen by a Latin-square map that
//! depends on the fade state `z = h_B / h_A`.
//!
//! The crate is organised bottom-up:
//!
//! - [`constellation`]: signal sets, energy normalisation, minimum distance
//!   and difference sets.
//! - [`singular`]: singular fade states and the effective-constellation
//!   minimum distance at a fade state.
//! - [`netmap`]: Latin-square network-coding maps, removal checks, the
//!   published squares and symmetry derivations, and the per-state catalog.
//! - [`mapsolver`]: first-principles construction of a removing square with
//!   the fewest symbols.
//! - [`quantizer`]: partition of the fade-state plane.
//! - [`simulator`]: Monte Carlo end-to-end symbol error rate.

pub mod constellation;
mod error;
pub mod mapsolver;
pub mod netmap;
pub mod quantizer;
pub mod simulator;
pub mod singular;

pub use num_complex::Complex64;

pub use constellation::{Constellation, ConstellationDescriptor, ConstellationName, DifferenceSet};
pub use error::{Error, Result};
pub use netmap::{BcSignalSet, CatalogEntry, MapCatalog, MapOrigin, NetworkMap, Transform};
pub use quantizer::{BoundaryCurve, IndependentKind, RegionAssignment};
pub use simulator::{MapPolicy, SerPoint, SerSweepResult, SimConfig};
pub use singular::{FadeState, SingularFadeCatalog};

/// Complex amplitude of a signal point, fade coefficient or received sample.
pub type ComplexAmplitude = Complex64;

/// Separation below which two unit-energy complex values are the same value.
pub const DEDUP_TOL: f64 = 1e-9;

/// Distance below which a received-constellation distance counts as zero.
pub const ZERO_DISTANCE_TOL: f64 = 1e-9;
