//! The Hamiltonian `H = [[0, 1], [A, β]]` of one azimuthal mode on a `(u, θ)` grid.
//!
//! The `θ` direction is sampled at the Gauss–Jacobi nodes of the angular basis, where the
//! `ω`-independent angular operator is applied exactly through the basis. Derivatives in `u` use
//! centered finite differences with zero data beyond the grid.

use std::sync::Arc;

use ndarray::parallel::prelude::*;
use ndarray::{Array2, Axis, Zip};
use num_complex::Complex64;
use serde::Serialize;

use super::state::WaveState;
use crate::angular::{AngularBasis, AngularGrid};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::kerr::KerrParams;
use crate::numerics::fd;
use crate::radial::RadialGeometry;

/// `(ρ, β, δ)` at one point `(r, x = cos θ)`.
pub fn point_coefficients(kerr: &KerrParams, s: f64, k: f64, r: f64, delta_r: f64, x: f64) -> (f64, Complex64, Complex64) {
    let (m, a) = (kerr.mass, kerr.a);
    let sig = r * r + a * a;
    let sin2 = 1.0 - x * x;
    let rho = sig - a * a * sin2 * delta_r / sig;
    let xx = Complex64::new(a * k, (m - r) * s);
    let beta = 2.0 / rho * (-xx + Complex64::new(a * k + a * s * x, -2.0 * r * s) * (delta_r / sig));
    let delta = 1.0 + xx * xx / (rho * sig);
    (rho, beta, delta)
}

/// Coefficients of `H` sampled on a `(u, θ)` grid, rows indexed by `u`.
#[derive(Clone, Debug)]
pub struct HamiltonianCoefficients {
    pub geom: Arc<RadialGeometry>,
    pub grid: UniformGrid,
    pub basis: Arc<AngularBasis>,
    pub angular: Arc<AngularGrid>,
    pub fd_order: usize,
    pub r: Vec<f64>,
    /// `∂²_u √(r²+a²) / √(r²+a²)`.
    pub curv: Vec<f64>,
    /// `Δ / (r²+a²)²`.
    pub lapse: Vec<f64>,
    pub rho: Array2<f64>,
    pub beta: Array2<Complex64>,
    pub delta: Array2<Complex64>,
    /// `ρ / (r²+a²)`.
    pub weight: Array2<f64>,
    zero: Array2<Complex64>,
    lmat: Array2<f64>,
    d2: &'static [f64],
    d1: &'static [f64],
}

/// Builds the coefficients for spin `s`, azimuthal number `k`, an angular basis of `angular_size`
/// functions (sampled at as many nodes) and a finite-difference order in `u`.
pub fn hamiltonian_coeffs(
    geom: &Arc<RadialGeometry>,
    grid: UniformGrid,
    angular_size: usize,
    fd_order: usize,
) -> Result<HamiltonianCoefficients> {
    let basis = Arc::new(AngularBasis::new(geom.s, geom.k, angular_size)?);
    let angular = Arc::new(basis.grid(angular_size));
    HamiltonianCoefficients::new(geom, grid, basis, angular, fd_order)
}

impl HamiltonianCoefficients {
    pub fn new(
        geom: &Arc<RadialGeometry>,
        grid: UniformGrid,
        basis: Arc<AngularBasis>,
        angular: Arc<AngularGrid>,
        fd_order: usize,
    ) -> Result<Self> {
        if angular.len() != basis.size || angular.e.ncols() != basis.size {
            return Err(Error::GridMismatch("the angular grid must have one node per basis function".into()));
        }
        let d2 = fd::second_derivative(fd_order)?;
        let d1 = fd::first_derivative(fd_order)?;
        let kerr = geom.kerr;
        let (nu, nt) = (grid.len, angular.len());
        let mut r = Vec::with_capacity(nu);
        let mut curv = Vec::with_capacity(nu);
        let mut lapse = Vec::with_capacity(nu);
        let mut rho = Array2::zeros((nu, nt));
        let mut beta = Array2::zeros((nu, nt));
        let mut delta = Array2::zeros((nu, nt));
        let mut weight = Array2::zeros((nu, nt));
        let mut zero = Array2::zeros((nu, nt));
        let a2 = kerr.a * kerr.a;
        for i in 0..nu {
            let x = geom.x_of_u(grid.at(i));
            let ri = geom.r1 + x;
            let dr = x * (x + geom.r1 - geom.r0);
            let sig = ri * ri + a2;
            r.push(ri);
            curv.push(kerr.curvature_term_x(ri, dr));
            lapse.push(dr / (sig * sig));
            let xx = Complex64::new(kerr.a * geom.k, (kerr.mass - ri) * geom.s);
            for (j, &xj) in angular.x.iter().enumerate() {
                let (p, b, d) = point_coefficients(&kerr, geom.s, geom.k, ri, dr, xj);
                rho[(i, j)] = p;
                beta[(i, j)] = b;
                delta[(i, j)] = d;
                weight[(i, j)] = p / sig;
                zero[(i, j)] = -xx * xx / (p * sig);
            }
        }
        // nodal form E diag(μ) Eᵀ Q of the ω-independent angular operator
        let e = &angular.e;
        let lmat = Array2::from_shape_fn((nt, nt), |(i, j)| {
            (0..basis.size).map(|l| e[(i, l)] * basis.mu[l] * e[(j, l)]).sum::<f64>() * angular.q[j]
        });
        Ok(HamiltonianCoefficients {
            geom: geom.clone(),
            grid,
            basis,
            angular,
            fd_order,
            r,
            curv,
            lapse,
            rho,
            beta,
            delta,
            weight,
            zero,
            lmat,
            d2,
            d1,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.grid.len, self.angular.len())
    }

    /// Half-width of the `u` stencil.
    pub fn stencil_radius(&self) -> usize {
        self.d2.len() / 2
    }

    /// `∂²_u f` with zero data beyond the grid.
    pub fn d2u(&self, f: &Array2<Complex64>, out: &mut Array2<Complex64>) {
        self.strided(self.d2, 1.0 / (self.grid.step * self.grid.step), f, out);
    }

    pub fn d1u(&self, f: &Array2<Complex64>, out: &mut Array2<Complex64>) {
        self.strided(self.d1, 1.0 / self.grid.step, f, out);
    }

    fn strided(&self, w: &[f64], scale: f64, f: &Array2<Complex64>, out: &mut Array2<Complex64>) {
        let (nu, nt) = self.shape();
        let fs = f.as_slice().expect("standard layout");
        let os = out.as_slice_mut().expect("standard layout");
        for j in 0..nt {
            fd::apply_strided(w, scale, fs, nu, nt, j, os);
        }
    }

    /// The `ω`-independent angular operator applied along `θ`.
    pub fn angular_operator(&self, f: &Array2<Complex64>, out: &mut Array2<Complex64>) {
        out.axis_iter_mut(Axis(0)).into_par_iter().zip(f.axis_iter(Axis(0))).for_each(|(mut or, fr)| {
            for (i, o) in or.iter_mut().enumerate() {
                *o = fr.iter().zip(self.lmat.row(i)).map(|(a, b)| a * b).sum();
            }
        });
    }

    /// `A f`, without the support check. Rows of `u` are processed in parallel.
    pub fn apply_a_into(&self, f: &Array2<Complex64>, out: &mut Array2<Complex64>) {
        self.d2u(f, out);
        let nt = self.angular.len();
        out.axis_iter_mut(Axis(0)).into_par_iter().zip(f.axis_iter(Axis(0))).enumerate().for_each(
            |(i, (mut or, fr))| {
                let (c, l) = (self.curv[i], self.lapse[i]);
                for j in 0..nt {
                    let lf: Complex64 = fr.iter().zip(self.lmat.row(j)).map(|(a, b)| a * b).sum();
                    let w = self.weight[(i, j)];
                    let v = fr[j];
                    or[j] = (c * v - or[j]) / w + lf * (l / w) + self.zero[(i, j)] * v;
                }
            },
        );
    }

    pub fn apply_a(&self, f: &Array2<Complex64>) -> Array2<Complex64> {
        let mut out = Array2::zeros(f.raw_dim());
        self.apply_a_into(f, &mut out);
        out
    }

    /// `H ψ` without the support check.
    pub fn apply_unchecked(&self, psi: &WaveState) -> WaveState {
        let mut second = self.apply_a(&psi.phi);
        Zip::from(&mut second).and(&self.beta).and(&psi.phi_t).for_each(|o, &b, &p| *o += b * p);
        WaveState { phi: psi.phi_t.clone(), phi_t: second, ..psi.clone() }
    }

    /// Largest `|ψ|` within one stencil radius of either `u` edge, relative to the maximum.
    pub fn edge_fraction(&self, psi: &WaveState) -> f64 {
        let m = self.stencil_radius().max(1);
        let nu = self.grid.len;
        let mut edge: f64 = 0.0;
        let mut all: f64 = 0.0;
        for (field, _) in [(&psi.phi, 0), (&psi.phi_t, 1)] {
            for (i, row) in field.outer_iter().enumerate() {
                let mx = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
                all = all.max(mx);
                if i < m || i >= nu - m {
                    edge = edge.max(mx);
                }
            }
        }
        if all == 0.0 {
            0.0
        } else {
            edge / all
        }
    }

    pub fn check_shape(&self, psi: &WaveState) -> Result<()> {
        if psi.phi.dim() != self.shape() || psi.phi_t.dim() != self.shape() {
            return Err(Error::GridMismatch(format!("state {:?} on coefficients {:?}", psi.phi.dim(), self.shape())));
        }
        if psi.s != self.geom.s || psi.k != self.geom.k {
            return Err(Error::GridMismatch("state and coefficients belong to different (s, k)".into()));
        }
        Ok(())
    }

    /// `H ψ = (ψ₂, A ψ₁ + β ψ₂)`; refuses states reaching the `u` edges, where the stencil would
    /// see the artificial zero extension.
    pub fn apply(&self, psi: &WaveState) -> Result<WaveState> {
        self.check_shape(psi)?;
        let frac = self.edge_fraction(psi);
        if frac > 1e-10 {
            return Err(Error::SupportAtEdge(frac));
        }
        Ok(self.apply_unchecked(psi))
    }

    /// `(H + z)^p ψ`.
    pub fn apply_shifted_power(&self, psi: &WaveState, z: Complex64, p: usize) -> Result<WaveState> {
        let mut cur = psi.clone();
        for _ in 0..p {
            let mut next = self.apply(&cur)?;
            next.axpy(z, &cur);
            cur = next;
        }
        Ok(cur)
    }

    /// `∫ ρ/(r²+a²) ⟨ψ, diag(A + δ, 1) ψ⟩ du d(cos θ)` in its manifestly positive form
    /// `∫ |∂_u ψ₁|² + curv |ψ₁|² + Δ/(r²+a²)² ⟨ψ₁, L₀ ψ₁⟩ + ρ/(r²+a²)(|ψ₁|² + |ψ₂|²)`.
    pub fn energy_norm(&self, psi: &WaveState) -> Result<f64> {
        self.check_shape(psi)?;
        let (nu, nt) = self.shape();
        let mut du = Array2::zeros((nu, nt));
        self.d1u(&psi.phi, &mut du);
        let q = &self.angular.q;
        let e = &self.angular.e;
        let mut total = 0.0;
        for i in 0..nu {
            let row = psi.phi.row(i);
            let mut ang = 0.0;
            for l in 0..self.basis.size {
                let c: Complex64 = (0..nt).map(|j| row[j] * (q[j] * e[(j, l)])).sum();
                ang += self.basis.mu[l] * c.norm_sqr();
            }
            let mut local = self.lapse[i] * ang;
            for j in 0..nt {
                let w = self.weight[(i, j)];
                local += q[j]
                    * (du[(i, j)].norm_sqr()
                        + (self.curv[i] + w) * psi.phi[(i, j)].norm_sqr()
                        + w * psi.phi_t[(i, j)].norm_sqr());
            }
            total += local;
        }
        Ok(total * self.grid.step)
    }

    /// `sup (|δ| + |Im β|)` over the sampled points.
    pub fn spectral_constant(&self) -> f64 {
        Zip::from(&self.delta)
            .and(&self.beta)
            .fold(0.0, |acc: f64, d, b| acc.max(d.norm() + b.im.abs()))
    }
}

/// The constant `c = sup (|δ| + |Im β|)` with its refinement certificate.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralConstant {
    pub c: f64,
    pub coarse: f64,
    /// `|c_fine − c_coarse| / c_fine`.
    pub refinement_change: f64,
    pub u_at: f64,
    pub theta_at: f64,
}

/// `c` on a `(u, θ)` grid covering the horizon and far regions, certified by doubling both
/// resolutions. `θ` is sampled uniformly including the poles.
pub fn spectral_constant_c(geom: &RadialGeometry, n_u: usize, n_theta: usize) -> Result<SpectralConstant> {
    if n_u < 2 || n_theta < 2 {
        return Err(Error::InvalidParams("spectral constant needs at least a 2×2 grid".into()));
    }
    let (lo, hi) = (-80.0, 400.0);
    let sup = |nu: usize, nt: usize| {
        let mut best = (0.0, 0.0, 0.0);
        for i in 0..nu {
            let u = lo + (hi - lo) * i as f64 / (nu - 1) as f64;
            let x = geom.x_of_u(u);
            let r = geom.r1 + x;
            let dr = x * (x + geom.r1 - geom.r0);
            for j in 0..nt {
                let th = std::f64::consts::PI * j as f64 / (nt - 1) as f64;
                let (_, b, d) = point_coefficients(&geom.kerr, geom.s, geom.k, r, dr, th.cos());
                let v = d.norm() + b.im.abs();
                if v > best.0 {
                    best = (v, u, th);
                }
            }
        }
        best
    };
    let coarse = sup(n_u, n_theta);
    let fine = sup(2 * n_u - 1, 2 * n_theta - 1);
    Ok(SpectralConstant {
        c: fine.0,
        coarse: coarse.0,
        refinement_change: (fine.0 - coarse.0).abs() / fine.0,
        u_at: fine.1,
        theta_at: fine.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(a: f64, s: f64, k: f64) -> HamiltonianCoefficients {
        let geom = RadialGeometry::new(KerrParams::new(1.0, a).unwrap(), s, k).unwrap();
        hamiltonian_coeffs(&geom, UniformGrid::spanning(-20.0, 20.0, 0.1).unwrap(), 12, 8).unwrap()
    }

    #[test]
    fn poles_have_rho_equal_sigma() {
        let kerr = KerrParams::new(1.0, 0.6).unwrap();
        let r: f64 = 4.0;
        for x in [-1.0, 1.0] {
            let (rho, _, _) = point_coefficients(&kerr, 2.0, 2.0, r, kerr.delta(r), x);
            assert!((rho - (r * r + 0.36)).abs() < 1e-14);
        }
    }

    #[test]
    fn scalar_axisymmetric_coefficients_are_trivial() {
        let h = setup(0.6, 0.0, 0.0);
        assert!(h.beta.iter().all(|b| b.norm() == 0.0));
        assert!(h.delta.iter().all(|d| (d - 1.0).norm() == 0.0));
        assert_eq!(h.spectral_constant(), 1.0);
    }

    #[test]
    fn first_component_shift() {
        let h = setup(0.6, 2.0, 2.0);
        let (nu, nt) = h.shape();
        let mut psi = WaveState::zeros(2.0, 2.0, (nu, nt));
        for i in 0..nu {
            for j in 0..nt {
                psi.phi_t[(i, j)] = Complex64::new(1.0, 0.3 * j as f64) * (-(h.grid.at(i) / 2.0).powi(2)).exp();
            }
        }
        let hp = h.apply(&psi).unwrap();
        assert_eq!(hp.phi, psi.phi_t);
        for i in 0..nu {
            for j in 0..nt {
                assert!((hp.phi_t[(i, j)] - h.beta[(i, j)] * psi.phi_t[(i, j)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn support_at_edge_is_refused() {
        let h = setup(0.6, 0.0, 0.0);
        let mut psi = WaveState::zeros(0.0, 0.0, h.shape());
        psi.phi[(1, 0)] = Complex64::new(1.0, 0.0);
        assert!(matches!(h.apply(&psi), Err(Error::SupportAtEdge(_))));
    }
}
