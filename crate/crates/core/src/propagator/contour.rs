//! The time propagator as a frequency integral along `ℝ − iε`:
//!
//! `Ψ(t) = −1/(2πi) Σ_{n ≤ n_max} ∫ e^{−iωt} (ω + iζc)^{−p} R_{ω,n} P_n (H + iζc)^p ψ₀ dω`, `t ≤ 0`,
//!
//! with `ζ = 3` by default. The part `F₁` of `R_ω F = (Ψ₁, F₁ + ωΨ₁)` integrates to zero
//! against `(ω + iζc)^{−p} e^{−iωt}` for `t ≤ 0` and `p ≥ 2` (close the contour upwards), so only
//! `Ψ₁` is integrated numerically.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::HamiltonianCoefficients;
use super::resolvent::ResolventContext;
use super::state::{l2_norm_sq, WaveState};
use crate::error::{Error, Result};
use crate::numerics::quadrature::panel_rule;
use crate::radial::GridGeometry;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContourSpec {
    /// Offset of the contour below the real axis.
    pub eps: f64,
    /// Counter-term exponent.
    pub p: usize,
    pub omega_max: f64,
    /// Widest base panel before adaptive halving; narrowed to `π/(2|t|)` for the largest `|t|`.
    pub panel_width: f64,
    pub order: usize,
    /// Width of the innermost panels at `Re ω = 0`; panels double outwards from there.
    pub grade_min: f64,
    pub n_max: usize,
    /// Counter-term shift in units of `c`.
    pub shift: f64,
    /// Overrides the spectral constant computed from the coefficients.
    pub c: Option<f64>,
    /// Largest admissible estimate of the truncated `ω`-tail relative to `‖ψ₀‖`.
    pub tail_budget: f64,
    /// Magnus substeps per grid cell keep `|ω| h` below this phase.
    pub magnus_phase: f64,
    /// Estimated quadrature error budget relative to `‖ψ₀‖`, shared out over `ω` in proportion
    /// to panel width.
    pub quad_tol: f64,
    /// Largest number of halvings of a base panel.
    pub max_depth: usize,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec {
            eps: 1e-3,
            p: 4,
            omega_max: 30.0,
            panel_width: 1.0,
            order: 8,
            grade_min: 2e-3,
            n_max: 8,
            shift: 3.0,
            c: None,
            tail_budget: 1e-3,
            magnus_phase: 0.5,
            quad_tol: 1e-4,
            max_depth: 8,
        }
    }
}

impl ContourSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(format!("contour: {m}")));
        if !(self.eps >= 0.0) {
            return bad("eps must be non-negative");
        }
        if self.p < 2 {
            return bad("the counter-term exponent must be at least 2");
        }
        if !(self.omega_max > 0.0 && self.panel_width > 0.0 && self.grade_min > 0.0) {
            return bad("omega_max, panel_width and grade_min must be positive");
        }
        if self.order < 2 || self.order > 64 {
            return bad("panel order must lie in 2..=64");
        }
        if !(self.shift > 1.0) {
            return bad("the counter-term shift must exceed c");
        }
        if !(self.magnus_phase > 0.0) {
            return bad("magnus_phase must be positive");
        }
        if !(self.quad_tol > 0.0) {
            return bad("quad_tol must be positive");
        }
        Ok(())
    }

    /// Panel edges on `[−ω_max, ω_max]`: doubling widths from `grade_min` at the origin up to the
    /// base width, then uniform.
    pub fn edges(&self, t_abs_max: f64) -> Vec<f64> {
        let mut w = self.panel_width;
        if t_abs_max > 0.0 {
            w = w.min(PI / (2.0 * t_abs_max));
        }
        let mut half = vec![0.0];
        let mut d = self.grade_min.min(w);
        let mut x = 0.0;
        while x + d < self.omega_max {
            x += d;
            half.push(x);
            d = (2.0 * d).min(w);
        }
        if self.omega_max - x < 0.25 * d && half.len() > 1 {
            half.pop();
        }
        half.push(self.omega_max);
        let mut edges: Vec<f64> = half.iter().rev().map(|v| -v).collect();
        edges.extend_from_slice(&half[1..]);
        edges
    }

    /// Real parts of the nodes and their weights.
    pub fn nodes(&self, t_abs_max: f64) -> (Vec<f64>, Vec<f64>) {
        panel_rule(&self.edges(t_abs_max), self.order)
    }
}

/// Integrand norms at one node.
#[derive(Clone, Debug, Serialize)]
pub struct NodeMonitor {
    pub omega: f64,
    /// `‖(ω + iζc)^{−p} Ψ₁(ω)‖ / 2π`.
    pub norm: f64,
    /// The same per angular mode.
    pub modes: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailMonitor {
    /// Estimated norm of the truncated `|ω| > ω_max` integral relative to `‖ψ₀‖`, assuming the
    /// `Ψ₁` integrand decays like `|ω|^{−p−1}` beyond `ω_max` (and `Ψ₂` like `|ω|^{−p}`).
    pub omega_tail: f64,
    /// Integrand norm at `±ω_max` relative to its peak.
    pub edge_ratio: f64,
    /// Fitted decay exponent of the integrand norm over the outer quarter of the nodes.
    pub decay_exponent: f64,
    /// `sup_ω` of the mode-`n` integrand norm.
    pub per_mode: Vec<f64>,
    /// Mode `n_max` relative to the largest.
    pub mode_tail: f64,
}

#[derive(Clone, Debug)]
pub struct Propagation {
    pub times: Vec<f64>,
    pub states: Vec<WaveState>,
    pub c: f64,
    pub shift: Complex64,
    /// Nodes of the accepted panels.
    pub node_count: usize,
    /// All resolvent evaluations, including those of refined panels.
    pub evaluations: usize,
    /// Panels split for accuracy.
    pub refinements: usize,
    /// Panels still above their share of `quad_tol` at `max_depth`.
    pub unresolved: usize,
    /// Sum of the per-panel error estimates relative to `‖ψ₀‖`.
    pub quadrature_error: f64,
    pub monitors: Vec<NodeMonitor>,
    pub tail: TailMonitor,
}

/// Partial sums over a range of nodes: one `Ψ₁` and one `Ψ₂` accumulator per time.
struct Partial {
    fields: Vec<(Array2<Complex64>, Array2<Complex64>)>,
    monitors: Vec<NodeMonitor>,
    evaluations: usize,
    refinements: usize,
    unresolved: usize,
    error: f64,
}

impl Partial {
    fn add(mut self, other: Partial) -> Partial {
        for ((a1, a2), (b1, b2)) in self.fields.iter_mut().zip(other.fields) {
            *a1 += &b1;
            *a2 += &b2;
        }
        self.monitors.extend(other.monitors);
        self.evaluations += other.evaluations;
        self.refinements += other.refinements;
        self.unresolved += other.unresolved;
        self.error += other.error;
        self
    }

    /// Largest distance over the times between `self` and `a + b`, both components together.
    fn distance(&self, a: &Partial, b: &Partial, q: &[f64], step: f64) -> f64 {
        self.fields
            .iter()
            .zip(a.fields.iter().zip(&b.fields))
            .map(|((w1, w2), ((a1, a2), (b1, b2)))| {
                let d1 = l2_full(&(w1 - a1 - b1), q, step);
                let d2 = l2_full(&(w2 - a2 - b2), q, step);
                d1.hypot(d2)
            })
            .fold(0.0, f64::max)
    }
}

struct Job<'a> {
    ctx: &'a ResolventContext,
    s0: Array2<Complex64>,
    s1: Array2<Complex64>,
    eps: f64,
    shift: Complex64,
    p: i32,
    times: &'a [f64],
    q: &'a [f64],
    step: f64,
    order: usize,
    /// Admissible error estimate per unit of `Re ω`.
    tol: f64,
    max_depth: usize,
}

impl Job<'_> {
    /// Contribution of one node `ω` with complex weight `dω`.
    fn node(&self, omega: Complex64, weight: Complex64) -> Result<Partial> {
        let g = &self.s0 + &self.s1.mapv(|z| z * omega);
        let counter = (omega + self.shift).powi(-self.p);
        let base = -counter * weight / (2.0 * PI * I);
        let shape = self.s0.raw_dim();
        let mut psi1 = Array2::zeros(shape);
        let mut modes = Vec::with_capacity(self.ctx.n_max + 1);
        for k in self.ctx.kernels(omega)? {
            let x = k.apply(&g)?;
            let xn: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.step;
            let yn: f64 = k.y.iter().zip(self.q).map(|(y, w)| y.norm_sqr() * w).sum();
            modes.push((xn * yn).sqrt() * counter.norm() / (2.0 * PI));
            k.accumulate(&x, Complex64::new(1.0, 0.0), &mut psi1);
        }
        let full = l2_full(&psi1, self.q, self.step);
        let fields = self
            .times
            .iter()
            .map(|&t| {
                let a = base * (-I * omega * t).exp();
                (psi1.mapv(|z| z * a), psi1.mapv(|z| z * (a * omega)))
            })
            .collect();
        Ok(Partial {
            fields,
            monitors: vec![NodeMonitor { omega: omega.re, norm: full * counter.norm() / (2.0 * PI), modes }],
            evaluations: 1,
            refinements: 0,
            unresolved: 0,
            error: 0.0,
        })
    }

    fn segment(&self, from: Complex64, to: Complex64) -> Result<Partial> {
        let (x, w) = panel_rule(&[0.0, 1.0], self.order);
        let d = to - from;
        let mut acc: Option<Partial> = None;
        for (xi, wi) in x.into_iter().zip(w) {
            let part = self.node(from + d * xi, d * wi)?;
            acc = Some(match acc {
                None => part,
                Some(a) => a.add(part),
            });
        }
        acc.ok_or_else(|| Error::InvalidParams("empty panel".into()))
    }

    /// One panel on `ℝ − iε`. A panel with a node at a near-degenerate angular eigenvalue is
    /// replaced by a rectangular detour half a panel width further down.
    fn panel(&self, a: f64, b: f64) -> Result<Partial> {
        let lo = Complex64::new(a, -self.eps);
        let hi = Complex64::new(b, -self.eps);
        match self.segment(lo, hi) {
            Err(Error::NearDegenerate { n, vtv }) => {
                log::debug!("exceptional point near mode {n} (|vᵀv| = {vtv:e}) on [{a}, {b}]; detouring");
                let depth = I * (0.5 * (b - a));
                let down = self.segment(lo, lo - depth)?;
                let across = self.segment(lo - depth, hi - depth)?;
                let up = self.segment(hi - depth, hi)?;
                Ok(down.add(across).add(up))
            }
            other => other,
        }
    }

    /// Compares `whole` on `[a, b]` with its two halves and keeps halving until they agree to
    /// the panel's share of the budget. The halves are returned, with the difference as the
    /// error estimate.
    fn refine(&self, a: f64, b: f64, whole: Partial, depth: usize) -> Result<Partial> {
        let m = 0.5 * (a + b);
        let (left, right) = rayon::join(|| self.panel(a, m), || self.panel(m, b));
        let (left, right) = (left?, right?);
        let err = whole.distance(&left, &right, self.q, self.step);
        let share = self.tol * (b - a);
        if err <= share || depth >= self.max_depth {
            let mut out = left.add(right);
            out.evaluations += whole.evaluations;
            out.error += err;
            if err > share {
                log::warn!("panel [{a}, {b}] unresolved at depth {depth}: error {err:.2e} > {share:.2e}");
                out.unresolved += 1;
            }
            return Ok(out);
        }
        let (x, y) = rayon::join(|| self.refine(a, m, left, depth + 1), || self.refine(m, b, right, depth + 1));
        let mut out = x?.add(y?);
        out.evaluations += whole.evaluations;
        out.refinements += 1;
        Ok(out)
    }

    /// Sum over panels by recursive halving, so the association order is fixed.
    fn sum(&self, panels: &[(f64, f64)]) -> Result<Partial> {
        match panels {
            [] => Err(Error::InvalidParams("empty panel range".into())),
            [(a, b)] => self.refine(*a, *b, self.panel(*a, *b)?, 0),
            _ => {
                let (left, right) = panels.split_at(panels.len() / 2);
                let (x, y) = rayon::join(|| self.sum(left), || self.sum(right));
                Ok(x?.add(y?))
            }
        }
    }
}

fn l2_full(f: &Array2<Complex64>, q: &[f64], step: f64) -> f64 {
    f.outer_iter()
        .map(|row| row.iter().zip(q).map(|(z, w)| z.norm_sqr() * w).sum::<f64>())
        .sum::<f64>()
        .sqrt()
        * step.sqrt()
}

/// Evaluates the propagator at the times `t_j ≤ 0`.
pub fn propagate(
    coeffs: &Arc<HamiltonianCoefficients>,
    psi0: &WaveState,
    times: &[f64],
    spec: &ContourSpec,
) -> Result<Propagation> {
    spec.validate()?;
    if times.is_empty() || times.iter().any(|&t| !(t <= 0.0)) {
        return Err(Error::InvalidParams("propagation times must be non-positive".into()));
    }
    let c = spec.c.unwrap_or_else(|| coeffs.spectral_constant());
    let shift = I * (spec.shift * c);
    let t_max = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let substeps = GridGeometry::substeps_for(coeffs.grid.step, spec.omega_max, spec.magnus_phase);
    let ctx = ResolventContext::new(coeffs.clone(), spec.n_max, substeps)?;
    let data = coeffs.apply_shifted_power(psi0, shift, spec.p)?;
    let (s0, s1) = ctx.source_parts(&data)?;
    let q = coeffs.angular.q.clone();
    let norm0 = l2_full(&psi0.phi, &q, coeffs.grid.step)
        .hypot(l2_full(&psi0.phi_t, &q, coeffs.grid.step))
        .max(f64::MIN_POSITIVE);
    let job = Job {
        ctx: &ctx,
        s0,
        s1,
        eps: spec.eps,
        shift,
        p: spec.p as i32,
        times,
        q: &q,
        step: coeffs.grid.step,
        order: spec.order,
        tol: spec.quad_tol * norm0 / (2.0 * spec.omega_max),
        max_depth: spec.max_depth,
    };
    let edges = spec.edges(t_max);
    let panels: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let total = job.sum(&panels)?;

    let states = total
        .fields
        .into_iter()
        .map(|(phi, phi_t)| WaveState { phi, phi_t, support: None, ..psi0.clone() })
        .collect();
    let tail = tail_monitor(&total.monitors, spec, norm0);
    if tail.omega_tail > spec.tail_budget {
        return Err(Error::TailBudget { name: "omega".into(), value: tail.omega_tail, budget: spec.tail_budget });
    }
    let quadrature_error = total.error / norm0;
    if quadrature_error > spec.quad_tol {
        return Err(Error::TailBudget { name: "quadrature".into(), value: quadrature_error, budget: spec.quad_tol });
    }
    Ok(Propagation {
        times: times.to_vec(),
        states,
        c,
        shift,
        node_count: total.monitors.len(),
        evaluations: total.evaluations,
        refinements: total.refinements,
        unresolved: total.unresolved,
        quadrature_error,
        monitors: total.monitors,
        tail,
    })
}

fn tail_monitor(monitors: &[NodeMonitor], spec: &ContourSpec, norm0: f64) -> TailMonitor {
    let peak = monitors.iter().map(|m| m.norm).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let (first, last) = (&monitors[0], &monitors[monitors.len() - 1]);
    let edge = first.norm.max(last.norm);
    // Ψ₁ decays like |ω|^{−p−1} beyond ω_max and Ψ₂ = ωΨ₁ one power slower
    let (p, w) = (spec.p as f64, spec.omega_max);
    let tail1 = (first.norm + last.norm) * w / p;
    let tail2 = (first.norm + last.norm) * w * w / (p - 1.0);
    let omega_tail = tail1.hypot(tail2) / norm0;
    // least-squares slope of log norm against log |ω| over the outer quarter of nodes
    let outer: Vec<(f64, f64)> = monitors
        .iter()
        .filter(|m| m.omega.abs() >= 0.75 * spec.omega_max && m.norm > 0.0)
        .map(|m| (m.omega.abs().ln(), m.norm.ln()))
        .collect();
    let decay_exponent = if outer.len() >= 2 {
        let n = outer.len() as f64;
        let mx = outer.iter().map(|p| p.0).sum::<f64>() / n;
        let my = outer.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = outer.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = outer.iter().map(|p| (p.0 - mx).powi(2)).sum();
        -sxy / sxx
    } else {
        f64::NAN
    };
    // clusters kept whole at the truncation add modes beyond n_max at some nodes
    let modes = monitors.iter().map(|m| m.modes.len()).max().unwrap_or(0);
    let per_mode: Vec<f64> = (0..modes)
        .map(|n| monitors.iter().filter_map(|m| m.modes.get(n).copied()).fold(0.0, f64::max))
        .collect();
    let biggest = per_mode.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    TailMonitor {
        omega_tail,
        edge_ratio: edge / peak,
        decay_exponent,
        mode_tail: per_mode.get(spec.n_max).copied().unwrap_or(0.0) / biggest,
        per_mode,
    }
}

impl TailMonitor {
    /// `ω_max` at which `omega_tail` is predicted to fall to `budget`. The estimate is dominated
    /// by `Ψ₂`, whose tail scales like `ω_max^{2−d}` for a fitted decay exponent `d`; `None`
    /// when the fit does not support extrapolation (`d ≤ 2`).
    pub fn predict_omega_max(&self, omega_max: f64, budget: f64) -> Option<f64> {
        let d = self.decay_exponent;
        if !(d > 2.0 && budget > 0.0) {
            return None;
        }
        Some(omega_max * (self.omega_tail / budget).max(1.0).powf(1.0 / (d - 2.0)))
    }
}

/// Per-mode integrand norms without assembling the fields: `sup_ω` of the mode-`n` integrand for
/// `n ≤ spec.n_max` over the contour nodes.
pub fn mode_tail_monitor(coeffs: &Arc<HamiltonianCoefficients>, psi0: &WaveState, spec: &ContourSpec) -> Result<TailMonitor> {
    let p = propagate(coeffs, psi0, &[0.0], &ContourSpec { tail_budget: f64::INFINITY, ..spec.clone() })?;
    Ok(p.tail)
}

/// L² norm over a `u`-window of the first component.
pub fn window_norm(coeffs: &HamiltonianCoefficients, f: &Array2<Complex64>, window: (f64, f64)) -> f64 {
    l2_norm_sq(f, &coeffs.angular.q, &coeffs.grid, window).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_max_prediction_follows_the_fitted_power_law() {
        let tail = TailMonitor { omega_tail: 8e-3, edge_ratio: 0.0, decay_exponent: 5.0, per_mode: vec![], mode_tail: 0.0 };
        assert!((tail.predict_omega_max(20.0, 1e-3).unwrap() - 40.0).abs() < 1e-9);
        assert_eq!(tail.predict_omega_max(20.0, 1e-1), Some(20.0));
        let flat = TailMonitor { decay_exponent: 1.5, ..tail };
        assert_eq!(flat.predict_omega_max(20.0, 1e-3), None);
    }

    #[test]
    fn edges_are_symmetric_and_graded() {
        let spec = ContourSpec { omega_max: 3.0, ..ContourSpec::default() };
        let e = spec.edges(0.0);
        assert_eq!(e.first(), Some(&-3.0));
        assert_eq!(e.last(), Some(&3.0));
        for (a, b) in e.iter().zip(e.iter().rev()) {
            assert_eq!(*a, -*b);
        }
        let mid = e.len() / 2;
        assert_eq!(e[mid], 0.0);
        assert!((e[mid + 1] - spec.grade_min).abs() < 1e-15);
        assert!(e.windows(2).all(|w| w[1] - w[0] <= spec.panel_width + 1e-12));
        let narrow = spec.edges(10.0);
        assert!(narrow.windows(2).all(|w| w[1] - w[0] <= PI / 20.0 + 1e-12));
    }
}
