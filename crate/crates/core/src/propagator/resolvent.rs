//! The resolvent `(H − ω)⁻¹` restricted to finitely many angular modes.
//!
//! With `G = ρ/(r²+a²) [F₂ + (ω − β) F₁]` the first component solves the separated equation
//! `(−∂²_u + V_ω[𝒜_ω]) Ψ₁ = G`, so that
//! `Ψ₁ = Σ_n Y_n ∫ s_{ω,n}(u, v) ⟨Ỹ_n, G(v)⟩ dv` and `Ψ₂ = F₁ + ω Ψ₁`.

use std::sync::Arc;

use ndarray::{Array1, Array2, Zip};
use num_complex::Complex64;

use super::hamiltonian::HamiltonianCoefficients;
use super::state::WaveState;
use crate::angular::{eigenpairs_with, AngularDecomposition, AngularParams, EigenOptions};
use crate::error::{Error, Result};
use crate::radial::{GreenOptions, GreensKernel, GridGeometry, ModeParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Frequency-independent data shared by all resolvent evaluations on one grid.
#[derive(Clone, Debug)]
pub struct ResolventContext {
    pub coeffs: Arc<HamiltonianCoefficients>,
    pub magnus: Arc<GridGeometry>,
    pub eigen: EigenOptions,
    pub green: GreenOptions,
    pub n_max: usize,
}

impl ResolventContext {
    /// `substeps` Magnus substeps per grid cell.
    pub fn new(coeffs: Arc<HamiltonianCoefficients>, n_max: usize, substeps: usize) -> Result<Self> {
        let u = coeffs.grid.points();
        let magnus = Arc::new(GridGeometry::new(coeffs.geom.clone(), &u, substeps)?);
        let size = coeffs.basis.size;
        let eigen = EigenOptions { basis_size: size, grid_points: size, ..EigenOptions::default() };
        Ok(ResolventContext { coeffs, magnus, eigen, green: GreenOptions::default(), n_max })
    }

    pub fn decomposition(&self, omega: Complex64) -> Result<AngularDecomposition> {
        let g = &self.coeffs.geom;
        let p = AngularParams::from_kerr(&g.kerr, g.s, g.k, omega)?;
        eigenpairs_with(&self.coeffs.basis, self.coeffs.angular.clone(), &p, self.n_max, &self.eigen)
    }

    /// Kernels of the modes `n = 0..=n_max` at `ω`.
    pub fn kernels(&self, omega: Complex64) -> Result<Vec<SeparatedResolventKernel>> {
        let dec = self.decomposition(omega)?;
        let g = &self.coeffs.geom;
        let q = &self.coeffs.angular.q;
        dec.pairs
            .iter()
            .map(|pair| {
                let mode = ModeParams::new(g.kerr, g.s, g.k, omega, pair.lambda)?;
                let kernel = self.magnus.kernel(&mode, &self.green)?;
                let yq = pair.samples.iter().zip(q).map(|(y, w)| y * *w).collect();
                Ok(SeparatedResolventKernel { omega, n: pair.n, lambda: pair.lambda, kernel, y: pair.samples.clone(), yq })
            })
            .collect()
    }

    /// `G = ρ/(r²+a²) [F₂ + (ω − β) F₁]` split as `G = S₀ + ω S₁`.
    pub fn source_parts(&self, f: &WaveState) -> Result<(Array2<Complex64>, Array2<Complex64>)> {
        self.coeffs.check_shape(f)?;
        let c = &self.coeffs;
        let mut s0 = Array2::zeros(f.phi.raw_dim());
        Zip::from(&mut s0)
            .and(&c.weight)
            .and(&f.phi_t)
            .and(&c.beta)
            .and(&f.phi)
            .for_each(|o, &w, &f2, &b, &f1| *o = w * (f2 - b * f1));
        let s1 = Zip::from(&c.weight).and(&f.phi).map_collect(|&w, &f1| w * f1);
        Ok((s0, s1))
    }

    /// First component of `R_ω F` restricted to `n ≤ n_max`; the second is `F₁ + ω Ψ₁`.
    pub fn apply_first(&self, omega: Complex64, f: &WaveState) -> Result<Array2<Complex64>> {
        let (s0, s1) = self.source_parts(f)?;
        let g = &s0 + &s1.mapv(|z| z * omega);
        let mut out = Array2::zeros(g.raw_dim());
        for k in self.kernels(omega)? {
            let x = k.apply(&g)?;
            k.accumulate(&x, Complex64::new(1.0, 0.0), &mut out);
        }
        Ok(out)
    }

    /// `R_ω F` restricted to `n ≤ n_max`.
    pub fn apply(&self, omega: Complex64, f: &WaveState) -> Result<WaveState> {
        let psi1 = self.apply_first(omega, f)?;
        let mut psi2 = f.phi.clone();
        Zip::from(&mut psi2).and(&psi1).for_each(|o, &p| *o += omega * p);
        Ok(WaveState { phi: psi1, phi_t: psi2, support: None, ..f.clone() })
    }
}

/// Green's kernel of one angular mode with the eigenfunction samples needed to project onto and
/// out of the mode.
#[derive(Clone, Debug)]
pub struct SeparatedResolventKernel {
    pub omega: Complex64,
    pub n: usize,
    pub lambda: Complex64,
    pub kernel: GreensKernel,
    /// `Y_n` at the angular nodes.
    pub y: Vec<Complex64>,
    /// `Y_n` times the angular quadrature weights: `⟨Ỹ_n, f⟩ = Σ_j yq_j f_j`.
    pub yq: Vec<Complex64>,
}

impl SeparatedResolventKernel {
    /// `⟨Ỹ_n, G(u, ·)⟩` for every `u`.
    pub fn project(&self, g: &Array2<Complex64>) -> Array1<Complex64> {
        g.outer_iter().map(|row| row.iter().zip(&self.yq).map(|(a, b)| a * b).sum()).collect()
    }

    /// `X_n(u) = ∫ s_{ω,n}(u, v) ⟨Ỹ_n, G(v)⟩ dv`.
    pub fn apply(&self, g: &Array2<Complex64>) -> Result<Vec<Complex64>> {
        let c = self.project(g);
        self.kernel.apply(c.as_slice().ok_or_else(|| Error::GridMismatch("non-contiguous source".into()))?)
    }

    /// `out += a · X_n ⊗ Y_n`.
    pub fn accumulate(&self, x: &[Complex64], a: Complex64, out: &mut Array2<Complex64>) {
        for (xi, mut row) in x.iter().zip(out.outer_iter_mut()) {
            let ax = a * xi;
            if ax == ZERO {
                continue;
            }
            for (o, y) in row.iter_mut().zip(&self.y) {
                *o += ax * y;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::UniformGrid;
    use crate::kerr::KerrParams;
    use crate::propagator::hamiltonian_coeffs;
    use crate::radial::RadialGeometry;

    #[test]
    fn separated_operator_matches_hamiltonian() {
        // ρ/(r²+a²)(A + ωβ − ω²)(g Y_n) = (−g'' + V g) Y_n
        let kerr = KerrParams::new(1.0, 0.6).unwrap();
        let geom = RadialGeometry::new(kerr, 2.0, 2.0).unwrap();
        let grid = UniformGrid::spanning(-15.0, 15.0, 0.05).unwrap();
        let coeffs = Arc::new(hamiltonian_coeffs(&geom, grid, 20, 8).unwrap());
        let ctx = ResolventContext::new(coeffs.clone(), 3, 2).unwrap();
        let omega = Complex64::new(0.8, -0.05);
        let dec = ctx.decomposition(omega).unwrap();
        let pair = &dec.pairs[2];
        let (nu, nt) = coeffs.shape();
        let g = |u: f64| (-(u - 1.0) * (u - 1.0) / 2.0).exp();
        let g2 = |u: f64| ((u - 1.0) * (u - 1.0) - 1.0) * g(u);
        let phi = Array2::from_shape_fn((nu, nt), |(i, j)| pair.samples[j] * g(grid.at(i)));
        let a = coeffs.apply_a(&phi);
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..nu {
            let u = grid.at(i);
            let v = geom.coefficients(geom.x_of_u(u)).value(omega, pair.lambda);
            for j in 0..nt {
                let lhs = coeffs.weight[(i, j)]
                    * (a[(i, j)] + (omega * coeffs.beta[(i, j)] - omega * omega) * phi[(i, j)]);
                let rhs = (-g2(u) + v * g(u)) * pair.samples[j];
                err = err.max((lhs - rhs).norm());
                scale = scale.max(rhs.norm());
            }
        }
        assert!(err < 1e-6 * scale, "{err} {scale}");
    }

    #[test]
    fn resolvent_inverts_shifted_hamiltonian_on_one_mode() {
        let kerr = KerrParams::new(1.0, 0.6).unwrap();
        let geom = RadialGeometry::new(kerr, 2.0, 2.0).unwrap();
        let grid = UniformGrid::spanning(-25.0, 25.0, 0.05).unwrap();
        let coeffs = Arc::new(hamiltonian_coeffs(&geom, grid, 20, 8).unwrap());
        let ctx = ResolventContext::new(coeffs.clone(), 3, 2).unwrap();
        let omega = Complex64::new(0.6, -0.4);
        let dec = ctx.decomposition(omega).unwrap();
        let y = &dec.pairs[1].samples;
        let (nu, nt) = coeffs.shape();
        let mut f = WaveState::zeros(2.0, 2.0, (nu, nt));
        for i in 0..nu {
            let g = (-(grid.at(i) - 2.0).powi(2)).exp();
            for j in 0..nt {
                f.phi_t[(i, j)] = g * y[j] / coeffs.weight[(i, j)];
            }
        }
        let psi = ctx.apply(omega, &f).unwrap();
        // the resolvent output decays exponentially for Im ω < 0; evaluate away from the edges
        let mut hp = coeffs.apply_unchecked(&psi);
        hp.axpy(-omega, &psi);
        let inner = grid.indices_in(-15.0, 15.0);
        let mut err: f64 = 0.0;
        for i in inner {
            for j in 0..nt {
                err = err.max((hp.phi[(i, j)] - f.phi[(i, j)]).norm());
                err = err.max((hp.phi_t[(i, j)] - f.phi_t[(i, j)]).norm());
            }
        }
        let scale = f.max_abs();
        assert!(err < 1e-6 * scale, "{err}");
    }
}
