//! Hamiltonian coefficients, the separated resolvent and the contour-integral propagator.

pub mod contour;
pub mod hamiltonian;
pub mod resolvent;
pub mod state;

pub use contour::{mode_tail_monitor, propagate, ContourSpec, NodeMonitor, Propagation, TailMonitor};
pub use hamiltonian::{hamiltonian_coeffs, spectral_constant_c, HamiltonianCoefficients, SpectralConstant};
pub use resolvent::{ResolventContext, SeparatedResolventKernel};
pub use state::{relative_l2, GaussianBump, WaveState};
