//! Jost solutions of `(-∂²_u + V) φ = 0` normalized at either end of the line.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::potential::{ModeParams, PotentialCoefficients, RadialGeometry};
use crate::error::{Error, Result};
use crate::numerics::ode::{integrate, OdeOptions};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A radial problem: the Kerr potential of one mode, or a constant potential used as a test hook.
#[derive(Clone, Debug)]
pub enum RadialProblem {
    Kerr { geom: Arc<RadialGeometry>, mode: ModeParams },
    /// `V ≡ v`; both Jost solutions are plane waves `e^{±√v u}`.
    Constant { v: Complex64 },
}

impl RadialProblem {
    pub fn kerr(geom: Arc<RadialGeometry>, mode: ModeParams) -> Result<Self> {
        if mode.s != geom.s || mode.k != geom.k || mode.kerr != geom.kerr {
            return Err(Error::InvalidParams("mode does not match radial geometry".into()));
        }
        Ok(RadialProblem::Kerr { geom, mode })
    }

    pub fn omega(&self) -> Complex64 {
        match self {
            RadialProblem::Kerr { mode, .. } => mode.omega,
            RadialProblem::Constant { v } => -I * v.sqrt(),
        }
    }

    /// Frequency of the left asymptotics `e^{iΩu}`.
    pub fn big_omega(&self) -> Complex64 {
        match self {
            RadialProblem::Kerr { mode, .. } => mode.horizon_constants().big_omega,
            RadialProblem::Constant { v } => -I * v.sqrt(),
        }
    }

    pub fn s(&self) -> f64 {
        match self {
            RadialProblem::Kerr { mode, .. } => mode.s,
            RadialProblem::Constant { .. } => 0.0,
        }
    }

    /// Potential at `u`.
    pub fn value(&self, u: f64) -> Complex64 {
        match self {
            RadialProblem::Kerr { geom, mode } => geom.coefficients(geom.x_of_u(u)).value(mode.omega, mode.lambda),
            RadialProblem::Constant { v } => *v,
        }
    }

    /// `(V, V', V'')` at `u`.
    pub fn jet(&self, u: f64) -> (Complex64, Complex64, Complex64) {
        match self {
            RadialProblem::Kerr { geom, mode } => {
                let j = geom.jet(geom.x_of_u(u), mode.omega, mode.lambda);
                (j.v, j.d1, j.d2)
            }
            RadialProblem::Constant { v } => (*v, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        }
    }

    pub(super) fn ode_rhs(&self) -> impl Fn(f64, &[f64; 5]) -> [f64; 5] + '_ {
        move |_u, st| {
            let phi = Complex64::new(st[1], st[2]);
            let (v, dy) = match self {
                RadialProblem::Kerr { geom, mode } => {
                    let x = st[0].exp();
                    (geom.coefficients(x).value(mode.omega, mode.lambda), geom.dy_du(x))
                }
                RadialProblem::Constant { v } => (*v, 0.0),
            };
            let dd = v * phi;
            [dy, st[3], st[4], dd.re, dd.im]
        }
    }

    fn y_at(&self, u: f64) -> f64 {
        match self {
            RadialProblem::Kerr { geom, .. } => geom.x_of_u(u).ln(),
            RadialProblem::Constant { .. } => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

/// Right Jost branch: `-` behaves like `u^s e^{-iωu}`, `+` like `u^{-s} e^{iωu}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    Minus,
    Plus,
}

#[derive(Clone, Copy, Debug)]
pub struct JostOptions {
    pub rtol: f64,
    /// Left start where `r - r1` equals this multiple of `M`.
    pub left_x_start: f64,
    /// Relative truncation error required of the asymptotic series seeding right solutions.
    pub series_tol: f64,
    /// Repeat the integration from a displaced start and record the change.
    pub certify: bool,
}

impl Default for JostOptions {
    fn default() -> Self {
        JostOptions { rtol: 1e-12, left_x_start: 1e-7, series_tol: 1e-15, certify: false }
    }
}

/// Samples of a Jost solution. The normalized solution is `exp(log_scale) · phi`.
#[derive(Clone, Debug, Serialize)]
pub struct JostSolution {
    pub side: Side,
    pub branch: Branch,
    pub u: Vec<f64>,
    pub phi: Vec<Complex64>,
    pub dphi: Vec<Complex64>,
    pub u_start: f64,
    pub log_scale: Complex64,
    /// Target asymptotics, e.g. `exp(-iΩu) φ → 1`.
    pub normalization: String,
    pub truncation_error: f64,
    /// Largest relative change of `φ` on the grid when the start point is displaced.
    pub certificate: Option<f64>,
}

impl JostSolution {
    pub fn normalized(&self, i: usize) -> (Complex64, Complex64) {
        let f = self.log_scale.exp();
        (self.phi[i] * f, self.dphi[i] * f)
    }
}

fn check_grid(u_grid: &[f64]) -> Result<()> {
    if u_grid.is_empty() || u_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::GridMismatch("u grid must be non-empty and strictly increasing".into()));
    }
    Ok(())
}

pub(super) fn ode_opts(rtol: f64) -> OdeOptions {
    OdeOptions { rtol, atol: 1e-300, h_init: 1e-2, joint_from: 1, ..Default::default() }
}

/// Left Jost solution `φ́` with `e^{-iΩu} φ́ → 1`, `(e^{-iΩu} φ́)' → 0` as `u → -∞`.
pub fn jost_left(p: &RadialProblem, u_grid: &[f64], opts: &JostOptions) -> Result<JostSolution> {
    check_grid(u_grid)?;
    if let RadialProblem::Kerr { mode, .. } = p {
        let hc = mode.horizon_constants();
        if !(mode.omega.im < hc.varpi + hc.gamma / 2.0) {
            return Err(Error::OutsideDomain {
                omega: mode.omega,
                reason: format!("left Jost solutions need Im ω < {}", hc.varpi + hc.gamma / 2.0),
            });
        }
    }
    let u_l = left_start(p, u_grid[0], opts.left_x_start);
    let mut sol = jost_left_from(p, u_grid, u_l, opts.rtol)?;
    if opts.certify {
        let gamma = match p {
            RadialProblem::Kerr { mode, .. } => mode.horizon_constants().gamma,
            RadialProblem::Constant { .. } => 1.0,
        };
        let alt = jost_left_from(p, u_grid, u_l - 5.0 / gamma, opts.rtol)?;
        sol.certificate = Some(relative_change(&sol, &alt));
    }
    Ok(sol)
}

fn left_start(p: &RadialProblem, grid_min: f64, x_start: f64) -> f64 {
    match p {
        RadialProblem::Kerr { geom, .. } => {
            let u_x = geom.chart.u_of_x_extended(x_start * geom.kerr.mass);
            u_x.min(grid_min - 1.0)
        }
        RadialProblem::Constant { .. } => grid_min,
    }
}

fn jost_left_from(p: &RadialProblem, u_grid: &[f64], u_l: f64, rtol: f64) -> Result<JostSolution> {
    let om = p.big_omega();
    let (c1, gamma, trunc) = match p {
        RadialProblem::Kerr { geom, mode } => {
            let hc = mode.horizon_constants();
            let x = geom.x_of_u(u_l);
            let coef = geom.coefficients(x);
            let horizon = geom.coefficients(0.0);
            let dv = value_plus_big_omega2(&coef, &horizon, mode.omega, mode.lambda);
            // V + Ω² ≈ v1 e^{γu}; the first correction makes the seed exact to O(e^{2γu})
            let c_e = dv / (hc.gamma * (hc.gamma + 2.0 * I * om));
            (c_e, hc.gamma, c_e.norm().powi(2))
        }
        RadialProblem::Constant { .. } => (Complex64::new(0.0, 0.0), 0.0, 0.0),
    };
    let chi = 1.0 + c1;
    let dchi = c1 * gamma;
    let phi0 = chi;
    let dphi0 = I * om * chi + dchi;
    let st0 = [p.y_at(u_l), phi0.re, phi0.im, dphi0.re, dphi0.im];
    let targets: Vec<f64> = u_grid.iter().copied().filter(|&u| u >= u_l).collect();
    if targets.len() != u_grid.len() {
        return Err(Error::GridMismatch("grid extends left of the Jost start".into()));
    }
    let states = integrate(p.ode_rhs(), u_l, st0, &targets, &ode_opts(rtol))?;
    let (phi, dphi) = unpack(&states);
    Ok(JostSolution {
        side: Side::Left,
        branch: Branch::Minus,
        u: u_grid.to_vec(),
        phi,
        dphi,
        u_start: u_l,
        log_scale: I * om * u_l,
        normalization: "exp(-iΩu) φ → 1 as u → -∞".into(),
        truncation_error: trunc + rtol,
        certificate: None,
    })
}

/// `V + Ω²` written without cancelling the leading `-Ω²`.
fn value_plus_big_omega2(
    c: &PotentialCoefficients,
    h: &PotentialCoefficients,
    omega: Complex64,
    lambda: Complex64,
) -> Complex64 {
    lambda * c.a1 + c.curv + 4.0 * omega * c.b1 - (c.x1 - h.x1) * (2.0 * omega + c.x1 + h.x1)
}

pub(super) fn unpack(states: &[[f64; 5]]) -> (Vec<Complex64>, Vec<Complex64>) {
    states.iter().map(|s| (Complex64::new(s[1], s[2]), Complex64::new(s[3], s[4]))).unzip()
}

fn relative_change(a: &JostSolution, b: &JostSolution) -> f64 {
    // compare normalized solutions; a common scale drops out of the ratio
    let fa = a.log_scale.exp();
    let fb = b.log_scale.exp();
    let scale = a.phi.iter().map(|z| (z * fa).norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    a.phi.iter().zip(&b.phi).map(|(x, y)| (x * fa - y * fb).norm()).fold(0.0, f64::max) / scale
}

/// Right Jost solution `φ̀_∓` normalized by `u^{∓s} e^{±iωu}`-asymptotics as `u → +∞`.
pub fn jost_right(p: &RadialProblem, u_grid: &[f64], branch: Branch, opts: &JostOptions) -> Result<JostSolution> {
    check_grid(u_grid)?;
    let om = p.omega();
    if om.norm() == 0.0 {
        return Err(Error::OutsideDomain { omega: om, reason: "ω = 0 needs the small-frequency limit".into() });
    }
    match branch {
        Branch::Minus if om.im > 0.0 => {
            return Err(Error::OutsideDomain { omega: om, reason: "branch - needs Im ω <= 0".into() })
        }
        Branch::Plus if om.im < 0.0 => {
            return Err(Error::OutsideDomain { omega: om, reason: "branch + needs Im ω >= 0".into() })
        }
        _ => {}
    }
    let sigma = if branch == Branch::Minus { -1.0 } else { 1.0 };
    let u_s = match p {
        RadialProblem::Kerr { geom, mode } => {
            let r_grid = geom.r1 + geom.x_of_u(*u_grid.last().unwrap());
            let series = AsymptoticSeries::new(geom, mode, sigma)?;
            geom.chart.u_of_r(series.start_radius(r_grid, opts.series_tol)?)?
        }
        RadialProblem::Constant { .. } => *u_grid.last().unwrap(),
    };
    let mut sol = jost_right_from(p, u_grid, branch, u_s, opts)?;
    if opts.certify {
        let alt = jost_right_from(p, u_grid, branch, 2.0 * u_s, opts)?;
        sol.certificate = Some(relative_change(&sol, &alt));
    }
    Ok(sol)
}

fn jost_right_from(
    p: &RadialProblem,
    u_grid: &[f64],
    branch: Branch,
    u_s: f64,
    opts: &JostOptions,
) -> Result<JostSolution> {
    let sigma = if branch == Branch::Minus { -1.0 } else { 1.0 };
    let om = p.omega();
    let (dlog, log_scale, trunc) = match p {
        RadialProblem::Kerr { geom, mode } => {
            let series = AsymptoticSeries::new(geom, mode, sigma)?;
            let r_s = geom.r1 + geom.x_of_u(u_s);
            let ev = series.eval(r_s);
            let h = geom.kerr.delta(r_s) / geom.kerr.sigma(r_s);
            let dlog = I * sigma * om + h * ev.d_f / ev.f;
            (dlog, I * sigma * om * u_s + ev.f.ln(), ev.truncation)
        }
        RadialProblem::Constant { .. } => (I * sigma * om, I * sigma * om * u_s, 0.0),
    };
    let st0 = [p.y_at(u_s), 1.0, 0.0, dlog.re, dlog.im];
    let targets: Vec<f64> = u_grid.iter().rev().copied().collect();
    let states = integrate(p.ode_rhs(), u_s, st0, &targets, &ode_opts(opts.rtol))?;
    let (mut phi, mut dphi) = unpack(&states);
    phi.reverse();
    dphi.reverse();
    Ok(JostSolution {
        side: Side::Right,
        branch,
        u: u_grid.to_vec(),
        phi,
        dphi,
        u_start: u_s,
        log_scale,
        normalization: if branch == Branch::Minus {
            "u^(-s) exp(iωu) φ → 1 as u → +∞".into()
        } else {
            "u^(s) exp(-iωu) φ → 1 as u → +∞".into()
        },
        truncation_error: trunc + opts.rtol,
        certificate: None,
    })
}

/// Asymptotic expansion `φ = e^{iσωu} r^ρ Σ_n g_n r^{-n}` of the right Jost solutions, `ρ = -σs`.
///
/// With `F = e^{-iσωu} φ` and `h = Δ/(r²+a²)` the radial equation becomes
/// `(h F_r)_r + 2iσω F_r - W F = 0`, `W = (V + ω²)/h`, whose coefficients are expanded in
/// `z = 1/r`. Matching powers of `r` gives the recurrence for `g_n`.
pub struct AsymptoticSeries {
    rho: Complex64,
    g: Vec<Complex64>,
}

/// Value of `F` and `dF/dr` with the smallest retained term as truncation estimate.
pub struct SeriesValue {
    pub f: Complex64,
    pub d_f: Complex64,
    pub truncation: f64,
}

const SERIES_TERMS: usize = 120;

impl AsymptoticSeries {
    pub fn new(geom: &RadialGeometry, mode: &ModeParams, sigma: f64) -> Result<Self> {
        let om = mode.omega;
        if om.norm() == 0.0 {
            return Err(Error::OutsideDomain { omega: om, reason: "asymptotic series needs ω ≠ 0".into() });
        }
        let (w, h) = radial_series(geom, mode.s, mode.k, om, mode.lambda, SERIES_TERMS + 2);
        let rho = w[1] / (2.0 * I * sigma * om);
        let mut g = vec![Complex64::new(0.0, 0.0); SERIES_TERMS];
        g[0] = Complex64::new(1.0, 0.0);
        for nn in 1..SERIES_TERMS {
            let nf = nn as f64;
            let mut rhs = Complex64::new(0.0, 0.0);
            for mm in 2..=nn + 1 {
                rhs -= w[mm] * g[nn + 1 - mm];
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for mm in 0..nn {
                acc += h[mm] * g[nn - 1 - mm] * (rho - nf + 1.0 + mm as f64);
            }
            rhs += (rho - nf) * acc;
            g[nn] = rhs / (2.0 * I * sigma * om * nf);
        }
        Ok(AsymptoticSeries { rho, g })
    }

    pub fn rho(&self) -> Complex64 {
        self.rho
    }

    /// Optimally truncated sum at radius `r`.
    pub fn eval(&self, r: f64) -> SeriesValue {
        let z = 1.0 / r;
        let mut f = Complex64::new(0.0, 0.0);
        let mut df = Complex64::new(0.0, 0.0);
        let mut zn = 1.0;
        let mut smallest = f64::INFINITY;
        for (n, gn) in self.g.iter().enumerate() {
            let term = gn * zn;
            let tn = term.norm();
            if tn > smallest && n > 2 {
                break;
            }
            smallest = tn;
            f += term;
            df += term * (self.rho - n as f64) * z;
            zn *= z;
        }
        let rp = Complex64::new(r, 0.0).powc(self.rho);
        SeriesValue { f: f * rp, d_f: df * rp, truncation: smallest / f.norm().max(f64::MIN_POSITIVE) }
    }

    /// Smallest radius of a geometric ladder beyond `r_min` where the truncation error is below `tol`.
    pub fn start_radius(&self, r_min: f64, tol: f64) -> Result<f64> {
        let mut r = r_min.max(10.0);
        for _ in 0..400 {
            if self.eval(r).truncation < tol {
                return Ok(r);
            }
            r *= 1.2;
        }
        Err(Error::StepFailure { at: r, reason: "asymptotic series does not reach the requested accuracy".into() })
    }
}

/// Series in `z = 1/r` of `W = (V + ω²)(r²+a²)/Δ` and `h = Δ/(r²+a²)`, truncated after `n` terms.
pub(super) fn radial_series(
    geom: &RadialGeometry,
    s: f64,
    k: f64,
    om: Complex64,
    lambda: Complex64,
    n: usize,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let (m, a) = (geom.kerr.mass, geom.kerr.a);
    let a2 = a * a;
    let c = |v: f64| Complex64::new(v, 0.0);
    let poly = |coefs: &[Complex64]| {
        let mut p = vec![Complex64::new(0.0, 0.0); n];
        p[..coefs.len()].copy_from_slice(coefs);
        p
    };
    // Δ/r² and Σ/r² as series in z
    let dz = poly(&[c(1.0), c(-2.0 * m), c(a2)]);
    let sz = poly(&[c(1.0), c(0.0), c(a2)]);
    let inv_sz = series_inv(&sz);
    let inv_sz2 = series_mul(&inv_sz, &inv_sz);
    // a1 = Δ/Σ² = z² dz/sz²
    let a1 = shift(&series_mul(&dz, &inv_sz2), 2);
    // curv = z³ dz (2M + a²z - 4a²Mz² + a⁴z³)/sz⁴
    let fz = poly(&[c(2.0 * m), c(a2), c(-4.0 * a2 * m), c(a2 * a2)]);
    let curv = shift(&series_mul(&series_mul(&dz, &fz), &series_mul(&inv_sz2, &inv_sz2)), 3);
    // b1 = z dz (-is + ak z)/sz²
    let b1 = shift(&series_mul(&series_mul(&dz, &poly(&[-I * s, c(a * k)])), &inv_sz2), 1);
    // x1 = z (-is + (ak + iMs) z)/sz
    let x1 = shift(&series_mul(&poly(&[-I * s, Complex64::new(a * k, m * s)]), &inv_sz), 1);
    let x1sq = series_mul(&x1, &x1);
    let vp: Vec<Complex64> = (0..n)
        .map(|i| lambda * a1[i] + curv[i] + 4.0 * om * b1[i] - 2.0 * om * x1[i] - x1sq[i])
        .collect();
    // W = (V + ω²) sz/dz,  h = dz/sz
    let w = series_mul(&series_mul(&vp, &sz), &series_inv(&dz));
    let h = series_mul(&dz, &inv_sz);
    (w, h)
}

fn series_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        if a[i] == Complex64::new(0.0, 0.0) {
            continue;
        }
        for j in 0..n - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

fn series_inv(a: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    out[0] = 1.0 / a[0];
    for i in 1..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..=i {
            acc += a[j] * out[i - j];
        }
        out[i] = -acc / a[0];
    }
    out
}

fn shift(a: &[Complex64], k: usize) -> Vec<Complex64> {
    let n = a.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    out[k..].copy_from_slice(&a[..n - k]);
    out
}
