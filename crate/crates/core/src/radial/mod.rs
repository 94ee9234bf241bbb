//! The separated radial problem: potential, Jost solutions, Wronskian and Green's function.

pub mod green;
pub mod jost;
pub mod magnus;
pub mod potential;
pub mod scan;
pub mod small_omega;

pub use green::{greens_function, wronskian, GreenOptions, GreensKernel, WronskianReport};
pub use magnus::GridGeometry;
pub use jost::{jost_left, jost_right, Branch, JostOptions, JostSolution, RadialProblem, Side};
pub use potential::{potential, potential_asymptotics_check, ModeParams, PotentialSample, RadialGeometry};
