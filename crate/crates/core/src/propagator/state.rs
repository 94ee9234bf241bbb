//! Two-component fields `Ψ = (Φ, i∂ₜΦ)` of one azimuthal mode on a `(u, θ)` grid.

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::AngularBasis;
use crate::error::{Error, Result};
use crate::grid::UniformGrid;

#[derive(Clone, Debug, PartialEq)]
pub struct WaveState {
    pub s: f64,
    pub k: f64,
    /// `Φ[(i, j)]` at `(u_i, θ_j)`.
    pub phi: Array2<Complex64>,
    /// `i ∂ₜ Φ`.
    pub phi_t: Array2<Complex64>,
    /// Declared `u`-window outside which the data vanish.
    pub support: Option<(f64, f64)>,
}

impl WaveState {
    pub fn zeros(s: f64, k: f64, shape: (usize, usize)) -> Self {
        WaveState { s, k, phi: Array2::zeros(shape), phi_t: Array2::zeros(shape), support: None }
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: Complex64, other: &WaveState) {
        Zip::from(&mut self.phi).and(&other.phi).for_each(|x, &y| *x += a * y);
        Zip::from(&mut self.phi_t).and(&other.phi_t).for_each(|x, &y| *x += a * y);
    }

    pub fn scaled(&self, a: Complex64) -> WaveState {
        WaveState { phi: self.phi.mapv(|z| z * a), phi_t: self.phi_t.mapv(|z| z * a), ..self.clone() }
    }

    pub fn max_abs(&self) -> f64 {
        self.phi.iter().chain(self.phi_t.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Angular profile of initial data as a combination of angular basis functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBump {
    pub center: f64,
    pub width: f64,
    pub amplitude: Complex64,
    /// Basis coefficients of the `θ` profile.
    pub angular: Vec<f64>,
    /// `i∂ₜΦ = velocity·Φ` at `t = 0`.
    #[serde(default)]
    pub velocity: Complex64,
    /// Data are set to zero where the Gaussian falls below this fraction of its peak.
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
}

fn default_cutoff() -> f64 {
    1e-16
}

impl GaussianBump {
    /// Half-width of the support window.
    pub fn radius(&self) -> f64 {
        self.width * (-2.0 * self.cutoff.ln()).sqrt()
    }

    pub fn sample(&self, basis: &AngularBasis, x_nodes: &[f64], grid: &UniformGrid) -> Result<WaveState> {
        if self.angular.is_empty() || self.angular.len() > basis.size {
            return Err(Error::InvalidParams(format!(
                "angular profile has {} coefficients for a basis of {}",
                self.angular.len(),
                basis.size
            )));
        }
        if !(self.width > 0.0) || !(self.cutoff > 0.0 && self.cutoff < 1.0) {
            return Err(Error::InvalidParams("bump width and cutoff must be positive".into()));
        }
        let profile: Vec<f64> = x_nodes
            .iter()
            .map(|&x| basis.eval(x).iter().zip(&self.angular).map(|(e, c)| e * c).sum())
            .collect();
        let rad = self.radius();
        let (lo, hi) = (self.center - rad, self.center + rad);
        if lo <= grid.start || hi >= grid.end() {
            return Err(Error::SupportAtEdge(self.cutoff));
        }
        let shape = (grid.len, x_nodes.len());
        let mut st = WaveState::zeros(basis.s, basis.k, shape);
        for i in grid.indices_in(lo, hi) {
            let z = (grid.at(i) - self.center) / self.width;
            let g = self.amplitude * (-0.5 * z * z).exp();
            for (j, p) in profile.iter().enumerate() {
                st.phi[(i, j)] = g * *p;
                st.phi_t[(i, j)] = self.velocity * g * *p;
            }
        }
        st.support = Some((lo, hi));
        Ok(st)
    }
}

/// `∫∫ |f|² du d(cos θ)` over the `u`-window, with uniform weights in `u` and the angular
/// quadrature weights in `θ`.
pub fn l2_norm_sq(f: &Array2<Complex64>, q: &[f64], grid: &UniformGrid, window: (f64, f64)) -> f64 {
    grid.indices_in(window.0, window.1)
        .map(|i| f.row(i).iter().zip(q).map(|(z, w)| z.norm_sqr() * w).sum::<f64>())
        .sum::<f64>()
        * grid.step
}

/// `‖a − b‖ / ‖b‖` in the windowed L² norm.
pub fn relative_l2(a: &Array2<Complex64>, b: &Array2<Complex64>, q: &[f64], grid: &UniformGrid, window: (f64, f64)) -> f64 {
    let diff = a - b;
    (l2_norm_sq(&diff, q, grid, window) / l2_norm_sq(b, q, grid, window)).sqrt()
}
