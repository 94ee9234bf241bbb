//! Fourth-order Magnus propagation of the radial equation across a fixed uniform grid.
//!
//! The potential coefficients at the two Gauss points of every substep depend only on the
//! geometry, so one [`GridGeometry`] serves all `(ω, λ)` on the same grid. Jost solutions are
//! seeded at the grid edges by the adaptive integrator and carried across the grid with
//! `exp(Ω)` steps, `Ω = h/2 (A₁ + A₂) + √3 h²/12 [A₂, A₁]`, `A = [[0, 1], [V, 0]]`.

use std::sync::Arc;

use num_complex::Complex64;

use super::green::{GreenOptions, GreensKernel};
use super::jost::{jost_left, jost_right, Branch, JostSolution, RadialProblem};
use super::potential::{ModeParams, PotentialCoefficients, RadialGeometry};
use crate::error::{Error, Result};

/// Geometry sampled for Magnus stepping on a uniform grid.
#[derive(Clone, Debug)]
pub struct GridGeometry {
    pub geom: Arc<RadialGeometry>,
    pub u: Vec<f64>,
    pub substeps: usize,
    nodes: Vec<[PotentialCoefficients; 2]>,
}

impl GridGeometry {
    pub fn new(geom: Arc<RadialGeometry>, u: &[f64], substeps: usize) -> Result<Self> {
        if u.len() < 2 || substeps == 0 {
            return Err(Error::GridMismatch("Magnus grid needs two points and one substep".into()));
        }
        let h = (u[1] - u[0]) / substeps as f64;
        let c = 3f64.sqrt() / 6.0;
        let mut nodes = Vec::with_capacity((u.len() - 1) * substeps);
        for w in u.windows(2) {
            for j in 0..substeps {
                let u0 = w[0] + j as f64 * h;
                let at = |t: f64| geom.coefficients(geom.x_of_u(u0 + t * h));
                nodes.push([at(0.5 - c), at(0.5 + c)]);
            }
        }
        Ok(GridGeometry { geom, u: u.to_vec(), substeps, nodes })
    }

    /// Substep count keeping `|ω| h ≤ phase` for the grid spacing `du`.
    pub fn substeps_for(du: f64, omega_max: f64, phase: f64) -> usize {
        ((omega_max * du / phase).ceil() as usize).max(1)
    }

    fn step_matrices(&self, mode: &ModeParams) -> Vec<[Complex64; 4]> {
        let h = (self.u[1] - self.u[0]) / self.substeps as f64;
        let c = 3f64.sqrt() / 12.0 * h * h;
        self.nodes
            .iter()
            .map(|[n1, n2]| {
                let v1 = n1.value(mode.omega, mode.lambda);
                let v2 = n2.value(mode.omega, mode.lambda);
                expm_traceless(c * (v1 - v2), Complex64::new(h, 0.0), 0.5 * h * (v1 + v2))
            })
            .collect()
    }

    /// Green's kernel with edge seeds from the adaptive integrator and Magnus stepping inside.
    pub fn kernel(&self, mode: &ModeParams, opts: &GreenOptions) -> Result<GreensKernel> {
        let p = RadialProblem::kerr(self.geom.clone(), *mode)?;
        let n = self.u.len();
        let left_seed = jost_left(&p, &self.u[..1], &opts.jost)?;
        let right_seed = jost_right(&p, &self.u[n - 1..], Branch::Minus, &opts.jost)?;
        let mats = self.step_matrices(mode);
        let m = self.substeps;

        let mut phi = vec![Complex64::new(0.0, 0.0); n];
        let mut dphi = phi.clone();
        let mut st = [left_seed.phi[0], left_seed.dphi[0]];
        phi[0] = st[0];
        dphi[0] = st[1];
        for i in 0..n - 1 {
            for e in &mats[i * m..(i + 1) * m] {
                st = [e[0] * st[0] + e[1] * st[1], e[2] * st[0] + e[3] * st[1]];
            }
            phi[i + 1] = st[0];
            dphi[i + 1] = st[1];
        }
        let left = JostSolution { u: self.u.clone(), phi, dphi, ..left_seed };

        let mut phi = vec![Complex64::new(0.0, 0.0); n];
        let mut dphi = phi.clone();
        let mut st = [right_seed.phi[0], right_seed.dphi[0]];
        phi[n - 1] = st[0];
        dphi[n - 1] = st[1];
        for i in (0..n - 1).rev() {
            for e in mats[i * m..(i + 1) * m].iter().rev() {
                // inverse of a unimodular 2×2 matrix
                st = [e[3] * st[0] - e[1] * st[1], -e[2] * st[0] + e[0] * st[1]];
            }
            phi[i] = st[0];
            dphi[i] = st[1];
        }
        let right = JostSolution { u: self.u.clone(), phi, dphi, ..right_seed };
        GreensKernel::from_solutions(mode.omega, left, right, opts)
    }
}

/// `exp([[d, b], [c, -d]])` as a row-major array.
fn expm_traceless(d: Complex64, b: Complex64, c: Complex64) -> [Complex64; 4] {
    let q2 = d * d + b * c;
    let (ch, shq) = if q2.norm() < 1e-6 {
        // series of cosh q and sinh q / q
        (1.0 + q2 / 2.0 + q2 * q2 / 24.0, 1.0 + q2 / 6.0 + q2 * q2 / 120.0)
    } else {
        let q = q2.sqrt();
        (q.cosh(), q.sinh() / q)
    };
    [ch + shq * d, shq * b, shq * c, ch - shq * d]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kerr::KerrParams;

    #[test]
    fn exponential_of_constant_potential() {
        let kappa = Complex64::new(0.3, -1.2);
        let h = 0.4;
        let e = expm_traceless(Complex64::new(0.0, 0.0), Complex64::new(h, 0.0), h * kappa * kappa);
        let (c, s) = ((kappa * h).cosh(), (kappa * h).sinh());
        assert!((e[0] - c).norm() < 1e-14);
        assert!((e[1] - s / kappa).norm() < 1e-14);
        assert!((e[2] - s * kappa).norm() < 1e-14);
        assert!((e[0] * e[3] - e[1] * e[2] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn agrees_with_adaptive_kernel() {
        let kerr = KerrParams::new(1.0, 0.6).unwrap();
        let geom = RadialGeometry::new(kerr, 2.0, 2.0).unwrap();
        let u: Vec<f64> = (0..201).map(|i| -10.0 + 0.1 * i as f64).collect();
        let grid = GridGeometry::new(geom.clone(), &u, 2).unwrap();
        let mode = ModeParams::new(kerr, 2.0, 2.0, Complex64::new(0.7, -0.01), Complex64::new(6.3, 0.2)).unwrap();
        let opts = GreenOptions::default();
        let fast = grid.kernel(&mode, &opts).unwrap();
        let slow = GreensKernel::new(&RadialProblem::kerr(geom, mode).unwrap(), &u, &opts).unwrap();
        let rel = (fast.wronskian.w - slow.wronskian.w).norm() / slow.wronskian.w.norm();
        assert!(rel < 1e-7, "{rel}");
        for (i, j) in [(0, 200), (50, 60), (120, 121), (199, 3)] {
            let (a, b) = (fast.at(i, j), slow.at(i, j));
            assert!((a - b).norm() < 1e-7 * b.norm(), "{i} {j} {a} {b}");
        }
    }
}
