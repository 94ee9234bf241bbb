//! The limit `ω → 0` of the rescaled right Jost solution `ω^{s+σ} φ̀`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::gamma;

use super::jost::{jost_right, ode_opts, radial_series, unpack, Branch, JostOptions, RadialProblem};
use super::potential::{ModeParams, RadialGeometry};
use crate::error::{Error, Result};
use crate::numerics::ode::integrate;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `σ = (√(1 + 4λ + 4s² + 8akω) − 1)/2`.
pub fn sigma(lambda: f64, s: f64, a: f64, k: f64, omega: f64) -> f64 {
    0.5 * ((1.0 + 4.0 * lambda + 4.0 * s * s + 8.0 * a * k * omega).sqrt() - 1.0)
}

/// `lim u^σ φ̀₀` from the small-argument behavior of the Whittaker solution:
/// `(2i)^{-s-σ} Γ(2σ+1) / Γ(σ+1-s)`.
pub fn limit_coefficient(sigma: f64, s: f64) -> Complex64 {
    (2.0 * I).powf(-s - sigma) * gamma(2.0 * sigma + 1.0) / gamma(sigma + 1.0 - s)
}

/// The expression `(-4)^{-σ/4} Γ(2σ+2) / ((2i)^s Γ(σ+1-s))` in its printed form, for comparison.
pub fn printed_coefficient(sigma: f64, s: f64) -> Complex64 {
    Complex64::new(-4.0, 0.0).powf(-sigma / 4.0) * gamma(2.0 * sigma + 2.0)
        / ((2.0 * I).powf(s) * gamma(sigma + 1.0 - s))
}

/// Solution of the `ω = 0` radial equation with `u^σ φ → 1` at infinity, sampled at `u_eval`.
///
/// Seeded from the convergent Frobenius series `r^{-σ} Σ g_n r^{-n}` at `r = r_seed`.
pub fn zero_frequency_solution(
    geom: &Arc<RadialGeometry>,
    lambda: f64,
    u_eval: &[f64],
    rtol: f64,
) -> Result<Vec<Complex64>> {
    let (s, k) = (geom.s, geom.k);
    let sig = sigma(lambda, s, geom.kerr.a, k, 0.0);
    let terms = 80;
    let (w, h) = radial_series(geom, s, k, Complex64::new(0.0, 0.0), Complex64::new(lambda, 0.0), terms + 3);
    let rho = Complex64::new(-sig, 0.0);
    let mut g = vec![Complex64::new(0.0, 0.0); terms];
    g[0] = Complex64::new(1.0, 0.0);
    for n in 1..terms {
        let nf = n as f64;
        let mut rhs = Complex64::new(0.0, 0.0);
        for m in 1..=n {
            rhs -= h[m] * g[n - m] * (rho - nf + m as f64) * (rho - nf - 1.0);
        }
        for m in 3..=n + 2 {
            rhs += w[m] * g[n + 2 - m];
        }
        g[n] = rhs / ((rho - nf) * (rho - nf - 1.0) - w[2]);
    }
    let u_max = u_eval.iter().copied().fold(f64::MIN, f64::max);
    let r_seed = (geom.r1 + geom.x_of_u(u_max)).max(40.0 * geom.kerr.mass);
    let u_seed = geom.chart.u_of_r(r_seed)?;
    let z = 1.0 / r_seed;
    let (mut f, mut df, mut zn) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 1.0);
    for (n, gn) in g.iter().enumerate() {
        f += gn * zn;
        df += gn * zn * (rho - n as f64) * z;
        zn *= z;
    }
    let hs = geom.kerr.delta(r_seed) / geom.kerr.sigma(r_seed);
    let scale = Complex64::new(r_seed, 0.0).powc(rho);
    let (phi0, dphi0) = (f * scale, hs * df * scale);

    let mode = ModeParams::new(geom.kerr, s, k, Complex64::new(0.0, 0.0), Complex64::new(lambda, 0.0))?;
    let p = RadialProblem::kerr(geom.clone(), mode)?;
    let mut order: Vec<usize> = (0..u_eval.len()).collect();
    order.sort_by(|&i, &j| u_eval[j].total_cmp(&u_eval[i]));
    let targets: Vec<f64> = order.iter().map(|&i| u_eval[i]).collect();
    let st0 = [geom.x_of_u(u_seed).ln(), phi0.re, phi0.im, dphi0.re, dphi0.im];
    let states = integrate(p.ode_rhs(), u_seed, st0, &targets, &ode_opts(rtol))?;
    let (phi, _) = unpack(&states);
    let mut out = vec![Complex64::new(0.0, 0.0); u_eval.len()];
    for (slot, v) in order.into_iter().zip(phi) {
        out[slot] = v;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SmallOmegaReport {
    pub sigma: f64,
    pub u_eval: f64,
    pub omegas: Vec<f64>,
    /// `ω_j^{s+σ} φ̀(u_eval)`.
    pub values: Vec<Complex64>,
    /// `|v_{j+1} − v_j|`.
    pub differences: Vec<f64>,
    /// Ratios of successive differences.
    pub ratios: Vec<f64>,
    /// Every ratio at least 2.
    pub cauchy: bool,
    /// Last value divided by the unit-normalized `ω = 0` solution at `u_eval`.
    pub coefficient: Complex64,
    pub coefficient_formula: Complex64,
    pub coefficient_printed: Complex64,
    pub relative_error: f64,
}

/// Sequence `ω_j = ω₀ 2^{-j}`, `j = 0..count`, of rescaled right Jost solutions at `u_eval`.
pub fn small_omega_limit(
    geom: &Arc<RadialGeometry>,
    lambda: f64,
    u_eval: f64,
    omega0: f64,
    count: usize,
    opts: &JostOptions,
) -> Result<SmallOmegaReport> {
    let s = geom.s;
    let sig = sigma(lambda, s, geom.kerr.a, geom.k, 0.0);
    let mut omegas = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for j in 0..count {
        let om = omega0 * 0.5f64.powi(j as i32);
        let mode = ModeParams::new(geom.kerr, s, geom.k, Complex64::new(om, 0.0), Complex64::new(lambda, 0.0))?;
        let p = RadialProblem::kerr(geom.clone(), mode)?;
        let sol = jost_right(&p, &[u_eval], Branch::Minus, opts)?;
        let (phi, _) = sol.normalized(0);
        omegas.push(om);
        values.push(Complex64::new(om, 0.0).powf(s + sig) * phi);
    }
    let differences: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let ratios: Vec<f64> = differences.windows(2).map(|d| d[0] / d[1]).collect();
    if differences.len() >= 2 && differences[differences.len() - 1] >= differences[0] {
        return Err(Error::DivergentSequence(format!("differences {differences:?}")));
    }
    let cauchy = ratios.iter().all(|&q| q >= 2.0);
    let unit = zero_frequency_solution(geom, lambda, &[u_eval], opts.rtol)?[0];
    let coefficient = values[values.len() - 1] / unit;
    let coefficient_formula = limit_coefficient(sig, s);
    let relative_error = (coefficient - coefficient_formula).norm() / coefficient_formula.norm();
    Ok(SmallOmegaReport {
        sigma: sig,
        u_eval,
        omegas,
        values,
        differences,
        ratios,
        cauchy,
        coefficient,
        coefficient_formula,
        coefficient_printed: printed_coefficient(sig, s),
        relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kerr::KerrParams;

    #[test]
    fn sigma_exact_for_dipole() {
        assert_eq!(sigma(2.0, 0.0, 0.6, 0.0, 0.0), 1.0);
    }

    #[test]
    fn dipole_coefficient_is_minus_i() {
        // e^{-iωu}(1 - i/(ωu)) solves φ'' = (2/u² - ω²) φ
        assert!((limit_coefficient(1.0, 0.0) + I).norm() < 1e-14);
    }

    #[test]
    fn zero_frequency_solution_normalized() {
        let geom = RadialGeometry::new(KerrParams::new(1.0, 0.6).unwrap(), 0.0, 0.0).unwrap();
        let u = [400.0, 3000.0];
        let phi = zero_frequency_solution(&geom, 2.0, &u, 1e-12).unwrap();
        // u^σ φ → 1 with O(log u / u) corrections
        assert!((phi[1] * 3000.0 - 1.0).norm() < 5e-3);
        assert!((phi[1] * 3000.0 - 1.0).norm() < (phi[0] * 400.0 - 1.0).norm());
    }
}
