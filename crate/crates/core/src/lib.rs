//! Spectral representation of Teukolsky dynamics on a non-extreme Kerr background.
//!
//! The crate is organised bottom-up:
//!
//! * [`kerr`]: geometry, horizons and the tortoise chart `u(r)`.
//! * [`angular`]: the spin-weighted spheroidal operator, its eigenpairs and projectors.
//! * [`radial`]: the radial potential, Jost solutions, Wronskians and Green's functions.
//! * [`regions`]: WKB / parabolic-cylinder / Airy classification of the radial potential.
//! * [`propagator`]: Hamiltonian coefficients, separated resolvent and the frequency-domain
//!   propagator.
//! * [`timedomain`]: an independent method-of-lines integrator used as an oracle.
//! * [`snapshot`]: the field file format shared by both evolution methods.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
pub mod angular;
pub mod error;
pub mod grid;
pub mod kerr;
pub mod numerics;
pub mod propagator;
pub mod radial;
pub mod regions;
pub mod snapshot;
pub mod timedomain;

pub use error::{Error, Result};

/// Library version, recorded in run manifests and cache keys.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use kerr::{HorizonConstants, KerrParams, TortoiseChart};
pub use num_complex::Complex64;
