//! Wronskian and Green's function `s_ω(u, v) = φ́(min(u,v)) φ̀(max(u,v)) / w`.
//!
//! Convention: `w = φ́' φ̀ - φ́ φ̀'`. With this sign `(-∂²_u + V) s_ω(·, v) = δ_v`; for `V ≡ κ²` the
//! kernel is `e^{-κ|u-v|} / (2κ)`.

use num_complex::Complex64;
use serde::Serialize;

use super::jost::{jost_left, jost_right, Branch, JostOptions, JostSolution, RadialProblem};
use crate::error::{Error, Result};
use crate::numerics::quadrature::cumulative_uniform;

#[derive(Clone, Debug, Serialize)]
pub struct WronskianReport {
    /// Wronskian of the normalized Jost solutions.
    pub w: Complex64,
    /// Wronskian of the stored (unnormalized) samples.
    pub w_raw: Complex64,
    /// Relative standard deviation over the evaluation points.
    pub spread: f64,
    pub values: Vec<Complex64>,
}

/// Wronskian evaluated at every common grid point, with its relative spread.
pub fn wronskian(left: &JostSolution, right: &JostSolution) -> Result<WronskianReport> {
    if left.u != right.u {
        return Err(Error::GridMismatch("Jost solutions live on different grids".into()));
    }
    let values: Vec<Complex64> = (0..left.u.len())
        .map(|i| left.dphi[i] * right.phi[i] - left.phi[i] * right.dphi[i])
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<Complex64>() / n;
    let var = values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / n;
    let spread = var.sqrt() / mean.norm().max(f64::MIN_POSITIVE);
    let w = mean * (left.log_scale + right.log_scale).exp();
    Ok(WronskianReport { w, w_raw: mean, spread, values })
}

/// Green's kernel of one radial problem sampled on a uniform grid.
#[derive(Clone, Debug)]
pub struct GreensKernel {
    pub omega: Complex64,
    pub left: JostSolution,
    pub right: JostSolution,
    pub wronskian: WronskianReport,
}

#[derive(Clone, Copy, Debug)]
pub struct GreenOptions {
    pub jost: JostOptions,
    /// Maximal relative spread of the Wronskian over the grid.
    pub spread_tol: f64,
    /// `|w|` below this fraction of `max |φ́ φ̀|` is treated as a resonance.
    pub resonance_tol: f64,
}

impl Default for GreenOptions {
    fn default() -> Self {
        GreenOptions { jost: JostOptions::default(), spread_tol: 1e-8, resonance_tol: 1e-10 }
    }
}

impl GreensKernel {
    pub fn new(p: &RadialProblem, u_grid: &[f64], opts: &GreenOptions) -> Result<Self> {
        let left = jost_left(p, u_grid, &opts.jost)?;
        let right = jost_right(p, u_grid, Branch::Minus, &opts.jost)?;
        Self::from_solutions(p.omega(), left, right, opts)
    }

    pub fn from_solutions(omega: Complex64, left: JostSolution, right: JostSolution, opts: &GreenOptions) -> Result<Self> {
        let wr = wronskian(&left, &right)?;
        if wr.spread > opts.spread_tol {
            return Err(Error::WronskianSpread { spread: wr.spread, tol: opts.spread_tol });
        }
        let scale = left.phi.iter().zip(&right.phi).map(|(a, b)| (a * b).norm()).fold(0.0, f64::max);
        if wr.w_raw.norm() < opts.resonance_tol * scale {
            return Err(Error::NearResonance { omega, w_abs: wr.w.norm() });
        }
        Ok(GreensKernel { omega, left, right, wronskian: wr })
    }

    pub fn u(&self) -> &[f64] {
        &self.left.u
    }

    /// `s_ω(u_i, u_j)`, symmetric by construction.
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.left.phi[a] * self.right.phi[b] / self.wronskian.w_raw
    }

    /// `X(u_i) = ∫ s_ω(u_i, v) f(v) dv` for `f` sampled on the uniform grid and zero outside it.
    pub fn apply(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        let u = self.u();
        if f.len() != u.len() || u.len() < 2 {
            return Err(Error::GridMismatch("source does not match the kernel grid".into()));
        }
        let h = u[1] - u[0];
        Ok(apply_green(&self.left.phi, &self.right.phi, self.wronskian.w_raw, f, h))
    }
}

/// `X = (1/w) [φ̀ ∫_{-∞}^{u} φ́ f + φ́ ∫_{u}^{∞} φ̀ f]` by cumulative 8th-order quadrature.
pub fn apply_green(
    phi_l: &[Complex64],
    phi_r: &[Complex64],
    w: Complex64,
    f: &[Complex64],
    h: f64,
) -> Vec<Complex64> {
    let n = f.len();
    let gl: Vec<Complex64> = (0..n).map(|i| phi_l[i] * f[i]).collect();
    let gr: Vec<Complex64> = (0..n).rev().map(|i| phi_r[i] * f[i]).collect();
    let cl = cumulative_uniform(&gl, h, 4);
    let cr = cumulative_uniform(&gr, h, 4);
    (0..n).map(|i| (phi_r[i] * cl[i] + phi_l[i] * cr[n - 1 - i]) / w).collect()
}

/// `s_ω(u, v)` for a single pair of points.
pub fn greens_function(p: &RadialProblem, u: f64, v: f64, opts: &GreenOptions) -> Result<Complex64> {
    let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
    let grid: Vec<f64> = if hi > lo { vec![lo, 0.5 * (lo + hi), hi] } else { vec![lo] };
    let k = GreensKernel::new(p, &grid, opts)?;
    Ok(k.at(0, grid.len() - 1))
}

/// Largest error of `∫ s_ω(·, v) (-χ'' + V χ) = χ` relative to `max |χ|` on a uniform grid.
pub fn greens_residual(
    p: &RadialProblem,
    u_grid: &[f64],
    chi: impl Fn(f64) -> f64,
    chi_dd: impl Fn(f64) -> f64,
    opts: &GreenOptions,
) -> Result<f64> {
    let kernel = GreensKernel::new(p, u_grid, opts)?;
    let src: Vec<Complex64> = u_grid.iter().map(|&u| p.value(u) * chi(u) - chi_dd(u)).collect();
    let x = kernel.apply(&src)?;
    let scale = u_grid.iter().map(|&u| chi(u).abs()).fold(0.0, f64::max);
    Ok(u_grid.iter().zip(&x).map(|(&u, xi)| (xi - chi(u)).norm()).fold(0.0, f64::max) / scale)
}
