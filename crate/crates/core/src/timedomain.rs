//! Method-of-lines integration of `i∂ₜΨ = HΨ` towards negative times.
//!
//! With `τ = −t` the system `∂_τ Ψ = iHΨ − σ(u)Ψ` is advanced by classical RK4, where `σ` is a
//! quadratic sponge in the outer layers of the `u` grid. The `θ` direction shares the angular
//! nodes of the Hamiltonian coefficients. A separate leapfrog integrator for the `1+1` Regge–Wheeler
//! problem of a single Schwarzschild multipole serves as an oracle for this scheme.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::propagator::state::l2_norm_sq;
use crate::propagator::{HamiltonianCoefficients, WaveState};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    pub dt: f64,
    /// Evolution runs from `t = 0` to `t = −duration`.
    pub duration: f64,
    /// Width of each sponge layer in `u`.
    pub sponge_width: f64,
    /// Peak damping rate at the grid edges.
    pub sponge_strength: f64,
    /// Times `t ≤ 0` at which full snapshots are kept.
    pub snapshot_times: Vec<f64>,
    /// Monitors are recorded every this many steps.
    pub monitor_every: usize,
    /// From `|t| = instability_window` on, abort when `‖Ψ(t)‖ > instability_factor · ‖Ψ(t/2)‖`.
    /// Polynomial growth of degree below `log₂ instability_factor` passes; exponential growth does not.
    pub instability_window: f64,
    pub instability_factor: f64,
    /// `dt ≤ c_stab · min(du, dθ_eff)`.
    pub c_stab: f64,
    /// `u`-window of the decay monitor.
    pub decay_window: Option<(f64, f64)>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 0.02,
            duration: 5.0,
            sponge_width: 10.0,
            sponge_strength: 1.0,
            snapshot_times: vec![],
            monitor_every: 10,
            instability_window: 20.0,
            instability_factor: 1e4,
            c_stab: 0.8,
            decay_window: None,
        }
    }
}

impl EvolutionConfig {
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// `1/√(max Δ/(r²+a²)² · max μ)`, the spacing whose wave speed matches the angular term.
    pub fn angular_spacing(coeffs: &HamiltonianCoefficients) -> f64 {
        let lapse = coeffs.lapse.iter().copied().fold(0.0, f64::max);
        let mu = coeffs.basis.mu.iter().copied().fold(0.0, f64::max);
        1.0 / (lapse * mu).sqrt().max(f64::MIN_POSITIVE)
    }

    pub fn validate(&self, coeffs: &HamiltonianCoefficients) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(format!("evolution: {m}")));
        if !(self.dt > 0.0) || !(self.duration >= 0.0) {
            return bad("dt must be positive and duration non-negative".into());
        }
        let limit = self.c_stab * coeffs.grid.step.min(Self::angular_spacing(coeffs));
        if self.dt > limit {
            return bad(format!("dt = {} exceeds the stability bound {limit}", self.dt));
        }
        if ((self.duration / self.dt).round() * self.dt - self.duration).abs() > 1e-9 * self.duration.max(1.0) {
            return bad("duration must be a multiple of dt".into());
        }
        for &t in &self.snapshot_times {
            let n = -t / self.dt;
            if t > 0.0 || -t > self.duration + 1e-12 || (n - n.round()).abs() > 1e-6 {
                return bad(format!("snapshot time {t} is not a step of the run"));
            }
        }
        if self.monitor_every == 0 || !(self.instability_factor > 1.0) || !(self.sponge_width >= 0.0) {
            return bad("monitor cadence, instability factor or sponge width invalid".into());
        }
        if 2.0 * self.sponge_width >= coeffs.grid.end() - coeffs.grid.start {
            return bad("sponges cover the whole grid".into());
        }
        Ok(())
    }

    /// Damping rate `σ(u)`, quadratic in the distance into each sponge.
    pub fn sponge(&self, grid: &UniformGrid) -> Vec<f64> {
        let (lo, hi) = (grid.start + self.sponge_width, grid.end() - self.sponge_width);
        (0..grid.len)
            .map(|i| {
                let u = grid.at(i);
                let d = if u < lo {
                    (lo - u) / self.sponge_width
                } else if u > hi {
                    (u - hi) / self.sponge_width
                } else {
                    0.0
                };
                self.sponge_strength * d * d
            })
            .collect()
    }

    /// The `u`-interval free of damping.
    pub fn sponge_free(&self, grid: &UniformGrid) -> (f64, f64) {
        (grid.start + self.sponge_width, grid.end() - self.sponge_width)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonitorSample {
    pub t: f64,
    /// `‖Φ‖ + ‖i∂ₜΦ‖` over the whole grid.
    pub l2: f64,
    /// Quadratic energy form, recorded as a drift diagnostic.
    pub energy: f64,
    /// `sup |Φ|` over the decay window.
    pub window_sup: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<WaveState>,
    pub monitors: Vec<MonitorSample>,
}

fn rhs(coeffs: &HamiltonianCoefficients, sponge: &[f64], psi: &WaveState) -> WaveState {
    let mut out = coeffs.apply_unchecked(psi);
    for (i, &s) in sponge.iter().enumerate() {
        for j in 0..out.phi.ncols() {
            out.phi[(i, j)] = I * out.phi[(i, j)] - s * psi.phi[(i, j)];
            out.phi_t[(i, j)] = I * out.phi_t[(i, j)] - s * psi.phi_t[(i, j)];
        }
    }
    out
}

fn full_l2(coeffs: &HamiltonianCoefficients, psi: &WaveState) -> f64 {
    let w = (coeffs.grid.start, coeffs.grid.end());
    let q = &coeffs.angular.q;
    l2_norm_sq(&psi.phi, q, &coeffs.grid, w).sqrt() + l2_norm_sq(&psi.phi_t, q, &coeffs.grid, w).sqrt()
}

/// `sup |Φ|` over the `u`-window, all angular nodes.
pub fn window_sup(grid: &UniformGrid, phi: &Array2<Complex64>, window: (f64, f64)) -> f64 {
    grid.indices_in(window.0, window.1)
        .flat_map(|i| phi.row(i).iter().map(|z| z.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

/// Evolves `ψ₀` from `t = 0` to `t = −duration`.
pub fn evolve(coeffs: &HamiltonianCoefficients, psi0: &WaveState, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.validate(coeffs)?;
    coeffs.check_shape(psi0)?;
    if coeffs.edge_fraction(psi0) > 1e-10 {
        return Err(Error::SupportAtEdge(coeffs.edge_fraction(psi0)));
    }
    let sponge = cfg.sponge(&coeffs.grid);
    let steps = cfg.steps();
    let dt = cfg.dt;
    let snap_steps: Vec<usize> = cfg.snapshot_times.iter().map(|t| (-t / dt).round() as usize).collect();
    let mut traj = Trajectory { times: vec![], states: vec![], monitors: vec![] };
    let mut psi = psi0.clone();
    let record = |n: usize, psi: &WaveState, traj: &mut Trajectory| -> Result<()> {
        let t = -(n as f64) * dt;
        if n.is_multiple_of(cfg.monitor_every) || n == steps {
            let l2 = full_l2(coeffs, psi);
            if !l2.is_finite() {
                return Err(Error::Instability { t, factor: f64::INFINITY });
            }
            if -t >= cfg.instability_window {
                let half = traj.monitors.partition_point(|m| m.t > 0.5 * t);
                let earlier = traj.monitors.get(half).map_or(0.0, |m| m.l2);
                if earlier > 0.0 && l2 > cfg.instability_factor * earlier {
                    return Err(Error::Instability { t, factor: l2 / earlier });
                }
            }
            let energy = coeffs.energy_norm(psi)?;
            let window_sup = cfg.decay_window.map(|w| window_sup(&coeffs.grid, &psi.phi, w));
            traj.monitors.push(MonitorSample { t, l2, energy, window_sup });
        }
        for (k, &m) in snap_steps.iter().enumerate() {
            if m == n {
                traj.times.push(cfg.snapshot_times[k]);
                traj.states.push(psi.clone());
            }
        }
        Ok(())
    };
    record(0, &psi, &mut traj)?;
    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    for n in 1..=steps {
        let k1 = rhs(coeffs, &sponge, &psi);
        let mut y = psi.clone();
        y.axpy(half, &k1);
        let k2 = rhs(coeffs, &sponge, &y);
        let mut y = psi.clone();
        y.axpy(half, &k2);
        let k3 = rhs(coeffs, &sponge, &y);
        let mut y = psi.clone();
        y.axpy(full, &k3);
        let k4 = rhs(coeffs, &sponge, &y);
        let sixth = Complex64::new(dt / 6.0, 0.0);
        psi.axpy(sixth, &k1);
        psi.axpy(sixth * 2.0, &k2);
        psi.axpy(sixth * 2.0, &k3);
        psi.axpy(sixth, &k4);
        record(n, &psi, &mut traj)?;
    }
    Ok(traj)
}

/// `sup_W |Φ(t)|` for every snapshot of a trajectory.
pub fn decay_metric(traj: &Trajectory, grid: &UniformGrid, window: (f64, f64)) -> Vec<(f64, f64)> {
    traj.times.iter().zip(&traj.states).map(|(&t, s)| (t, window_sup(grid, &s.phi, window))).collect()
}

/// Summary of a decay series `(t, m(t))` ordered by decreasing `t`.
#[derive(Clone, Debug, Serialize)]
pub struct DecaySummary {
    pub peak: f64,
    pub peak_t: f64,
    pub last: f64,
    pub last_t: f64,
    /// Maxima of `m` over consecutive blocks of `|t|` following the peak.
    pub block_maxima: Vec<f64>,
    /// Largest ratio of a block maximum to the preceding one; at most 1 for a non-increasing
    /// envelope.
    pub late_growth: f64,
}

/// Peak, final value and block envelope of a decay series. Blocks of length `block` should span
/// a few ringing periods so that oscillation nodes do not register as growth.
pub fn summarize_decay(series: &[(f64, f64)], block: f64) -> Option<DecaySummary> {
    let (peak_t, peak) = series.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1))?;
    let (last_t, last) = *series.last()?;
    let mut block_maxima: Vec<f64> = vec![];
    let mut edge = peak_t;
    for &(t, m) in series.iter().filter(|p| p.0 <= peak_t) {
        if block_maxima.is_empty() || t < edge - block {
            while t < edge - block {
                edge -= block;
            }
            block_maxima.push(m);
        } else {
            let b = block_maxima.last_mut()?;
            *b = b.max(m);
        }
    }
    let late_growth = block_maxima.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    Some(DecaySummary { peak, peak_t, last, last_t, block_maxima, late_growth })
}

/// `(t, sup_W |Φ|)` from the monitor samples of a run with a decay window.
pub fn monitor_decay_series(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.monitors.iter().filter_map(|m| m.window_sup.map(|w| (m.t, w))).collect()
}

/// Schwarzschild areal radius from `u = r + 2M ln(r/2M − 1) + C` with `u(3M) = 0`.
pub fn schwarzschild_radius(mass: f64, u: f64) -> f64 {
    let c = -3.0 * mass + 2.0 * mass * 2f64.ln();
    // y = ln(r/2M − 1): u = 2M(1 + e^y) + 2M y + C
    let mut y = ((u - c - 2.0 * mass) / (2.0 * mass)).min(0.0);
    if u - c > 4.0 * mass {
        y = ((u - c) / (2.0 * mass)).ln();
    }
    for _ in 0..100 {
        let f = 2.0 * mass * (1.0 + y.exp()) + 2.0 * mass * y + c - u;
        let step = f / (2.0 * mass * (y.exp() + 1.0));
        y -= step;
        if step.abs() < 1e-15 * (1.0 + y.abs()) {
            break;
        }
    }
    2.0 * mass * (1.0 + y.exp())
}

/// Leapfrog integration of `φ_tt = φ_uu − V_ℓ φ` with `V_ℓ = (1 − 2M/r)(ℓ(ℓ+1)/r² + 2M/r³)`,
/// second-order differences, zero boundary values. Returns `φ` at `t = duration`.
pub fn regge_wheeler_1d(
    mass: f64,
    ell: f64,
    grid: &UniformGrid,
    phi0: &[Complex64],
    dphi0: &[Complex64],
    dt: f64,
    duration: f64,
) -> Result<Vec<Complex64>> {
    let n = grid.len;
    if phi0.len() != n || dphi0.len() != n {
        return Err(Error::GridMismatch("initial data do not match the grid".into()));
    }
    if dt > 0.9 * grid.step {
        return Err(Error::InvalidParams("leapfrog step violates the CFL bound".into()));
    }
    let v: Vec<f64> = (0..n)
        .map(|i| {
            let r = schwarzschild_radius(mass, grid.at(i));
            (1.0 - 2.0 * mass / r) * (ell * (ell + 1.0) / (r * r) + 2.0 * mass / (r * r * r))
        })
        .collect();
    let h2 = grid.step * grid.step;
    let lap = |f: &[Complex64], i: usize| -> Complex64 {
        let l = if i > 0 { f[i - 1] } else { Complex64::new(0.0, 0.0) };
        let r = if i + 1 < n { f[i + 1] } else { Complex64::new(0.0, 0.0) };
        (l - 2.0 * f[i] + r) / h2 - v[i] * f[i]
    };
    let steps = (duration / dt).round() as usize;
    let mut prev = phi0.to_vec();
    let mut cur: Vec<Complex64> = (0..n).map(|i| phi0[i] + dt * dphi0[i] + 0.5 * dt * dt * lap(phi0, i)).collect();
    if steps == 0 {
        return Ok(prev);
    }
    for _ in 1..steps {
        let next: Vec<Complex64> = (0..n).map(|i| 2.0 * cur[i] - prev[i] + dt * dt * lap(&cur, i)).collect();
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kerr::{KerrParams, TortoiseChart};

    #[test]
    fn schwarzschild_radius_inverts_closed_form() {
        for r in [2.000001, 2.1, 3.0, 7.0, 150.0] {
            let u = r + 2.0 * (r / 2.0 - 1.0f64).ln() - 3.0 + 2.0 * 2f64.ln();
            assert!((schwarzschild_radius(1.0, u) - r).abs() < 1e-10 * r, "{r}");
        }
        let chart = TortoiseChart::new(KerrParams::new(1.0, 0.0).unwrap()).unwrap();
        for u in [-20.0, -3.0, 0.0, 12.0] {
            let r = chart.r_of_u(u).unwrap();
            assert!((schwarzschild_radius(1.0, u) - r).abs() < 1e-8, "{u}");
        }
    }

    #[test]
    fn decay_summary_flags_regrowth() {
        let s = [(0.0, 1.0), (-1.0, 0.4), (-2.0, 0.1), (-3.0, 0.3), (-4.0, 0.2), (-5.0, 0.6)];
        let d = summarize_decay(&s, 2.0).unwrap();
        assert_eq!(d.peak, 1.0);
        assert_eq!(d.block_maxima, vec![1.0, 0.3, 0.6]);
        assert!((d.late_growth - 2.0).abs() < 1e-12);
    }
}
