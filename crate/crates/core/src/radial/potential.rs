//! The radial potential `V(u)` of the separated Sturm–Liouville problem `(-∂²_u + V) X = 0`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kerr::{check_spin, HorizonConstants, KerrParams, TortoiseChart};
use crate::numerics::jet::Jet;

/// `(s, k, ω, λ)` on a Kerr background.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeParams {
    pub kerr: KerrParams,
    pub s: f64,
    pub k: f64,
    pub omega: Complex64,
    pub lambda: Complex64,
}

impl ModeParams {
    pub fn new(kerr: KerrParams, s: f64, k: f64, omega: Complex64, lambda: Complex64) -> Result<Self> {
        kerr.validate()?;
        check_spin(s, k)?;
        Ok(ModeParams { kerr, s, k, omega, lambda })
    }

    pub fn with_omega(&self, omega: Complex64) -> Self {
        ModeParams { omega, ..*self }
    }

    pub fn horizon_constants(&self) -> HorizonConstants {
        self.kerr.horizon_constants(self.s, self.k, self.omega)
    }
}

/// `V`, `∂_u V` and `∂²_u V` at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PotentialSample {
    pub u: f64,
    pub r: f64,
    pub v: Complex64,
    pub dv: Complex64,
    pub ddv: Complex64,
}

/// Frequency-independent radial data for one `(M, a, s, k)`, shared by all modes.
#[derive(Clone, Debug)]
pub struct RadialGeometry {
    pub kerr: KerrParams,
    pub s: f64,
    pub k: f64,
    pub chart: Arc<TortoiseChart>,
    pub r0: f64,
    pub r1: f64,
}

/// Coefficients with `V = λ a1 + curv + 4ω b1 - (ω + x1)²` at one radius.
#[derive(Clone, Copy, Debug, Default)]
pub struct PotentialCoefficients {
    pub a1: f64,
    pub curv: f64,
    pub b1: Complex64,
    pub x1: Complex64,
}

impl PotentialCoefficients {
    #[inline]
    pub fn value(&self, omega: Complex64, lambda: Complex64) -> Complex64 {
        let w = omega + self.x1;
        lambda * self.a1 + self.curv + 4.0 * omega * self.b1 - w * w
    }

    /// `V + ω²`, free of the cancellation in the leading term.
    #[inline]
    pub fn value_plus_omega2(&self, omega: Complex64, lambda: Complex64) -> Complex64 {
        lambda * self.a1 + self.curv + 4.0 * omega * self.b1 - 2.0 * omega * self.x1 - self.x1 * self.x1
    }
}

impl RadialGeometry {
    pub fn new(kerr: KerrParams, s: f64, k: f64) -> Result<Arc<Self>> {
        let chart = Arc::new(TortoiseChart::new(kerr)?);
        Self::with_chart(chart, s, k)
    }

    pub fn with_chart(chart: Arc<TortoiseChart>, s: f64, k: f64) -> Result<Arc<Self>> {
        check_spin(s, k)?;
        let kerr = *chart.params();
        let (r0, r1) = kerr.horizons();
        Ok(Arc::new(RadialGeometry { kerr, s, k, chart, r0, r1 }))
    }

    /// `x = r - r1` at `u`, continuing analytically beyond the chart table.
    pub fn x_of_u(&self, u: f64) -> f64 {
        self.chart.x_of_u_extended(u)
    }

    /// `dy/du` for `y = ln(r - r1)`.
    #[inline]
    pub fn dy_du(&self, x: f64) -> f64 {
        let r = self.r1 + x;
        (x + self.r1 - self.r0) / (r * r + self.kerr.a * self.kerr.a)
    }

    #[inline]
    pub fn coefficients(&self, x: f64) -> PotentialCoefficients {
        let (m, a) = (self.kerr.mass, self.kerr.a);
        let r = self.r1 + x;
        let delta = x * (x + self.r1 - self.r0);
        let sig = r * r + a * a;
        let sig2 = sig * sig;
        PotentialCoefficients {
            a1: delta / sig2,
            curv: self.kerr.curvature_term_x(r, delta),
            b1: Complex64::new(a * self.k, -r * self.s) * (delta / sig2),
            x1: Complex64::new(a * self.k, -(r - m) * self.s) / sig,
        }
    }

    /// Potential with its first two `u`-derivatives at `x = r - r1`.
    pub fn jet(&self, x: f64, omega: Complex64, lambda: Complex64) -> Jet {
        let (m, a) = (self.kerr.mass, self.kerr.a);
        let r = Jet::variable(self.r1 + x);
        let i = Complex64::i();
        let delta = Jet::new(
            Complex64::new(x * (x + self.r1 - self.r0), 0.0),
            Complex64::new(2.0 * x + self.r1 - self.r0, 0.0),
            Complex64::new(2.0, 0.0),
        );
        let sig = r * r + a * a;
        let sig_inv = sig.recip();
        let sig2_inv = sig_inv * sig_inv;
        let a2 = a * a;
        let r2 = r * r;
        let f = r2 * r * (2.0 * m) + r2 * a2 + r * (-4.0 * a2 * m) + a2 * a2;
        let curv = delta * f * sig2_inv * sig2_inv;
        let xx = (r * (-i * self.s)) + Complex64::new(a * self.k, m * self.s);
        let ak_irs = r * (-i * self.s) + Complex64::new(a * self.k, 0.0);
        let wx = xx * sig_inv + omega;
        let v = delta * sig2_inv * lambda + curv + delta * ak_irs * sig2_inv * (4.0 * omega) - wx * wx;
        let h = delta * sig_inv;
        v.rechain(h)
    }

    pub fn sample(&self, m: &ModeParams, u: f64) -> PotentialSample {
        let x = self.x_of_u(u);
        let j = self.jet(x, m.omega, m.lambda);
        PotentialSample { u, r: self.r1 + x, v: j.v, dv: j.d1, ddv: j.d2 }
    }
}

/// `V`, `V'`, `V''` for a mode at `u`; beyond the chart table the analytic continuation of the
/// chart is used.
pub fn potential(geom: &RadialGeometry, m: &ModeParams, u: f64) -> Result<PotentialSample> {
    if m.s != geom.s || m.k != geom.k || m.kerr != geom.kerr {
        return Err(Error::InvalidParams("mode does not match radial geometry".into()));
    }
    Ok(geom.sample(m, u))
}

/// Fitted asymptotic behaviour of the potential at both ends.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsReport {
    /// Fitted rate of `|V + Ω²|` as `u → -∞`; the theory predicts `γ`.
    pub left_rate: f64,
    pub gamma: f64,
    /// `u (V + ω²)` at the largest sampled `u`; the theory predicts `-2isω`.
    pub right_coefficient: Complex64,
    pub right_expected: Complex64,
    /// Fitted `A`, `B` in `u² (V + ω² + 2isω/u) ≈ A + B ln u`.
    pub right_correction: (Complex64, Complex64),
}

pub fn potential_asymptotics_check(geom: &RadialGeometry, m: &ModeParams) -> AsymptoticsReport {
    let hc = m.horizon_constants();
    let om2 = hc.big_omega * hc.big_omega;
    let left: Vec<(f64, f64)> = (0..8)
        .map(|j| {
            let u = -60.0 + 2.0 * j as f64;
            let x = geom.x_of_u(u);
            let v = geom.coefficients(x).value(m.omega, m.lambda);
            (u, (v + om2).norm().ln())
        })
        .collect();
    let left_rate = linear_slope(&left);
    let right_at = |u: f64| {
        let x = geom.x_of_u(u);
        geom.coefficients(x).value_plus_omega2(m.omega, m.lambda)
    };
    let u_far = 1e7;
    let right_coefficient = right_at(u_far) * u_far;
    let right_expected = -2.0 * Complex64::i() * m.s * m.omega;
    let rem = |u: f64| (right_at(u) - right_expected / u) * u * u;
    let (ua, ub) = (1e5, 1e7);
    let b = (rem(ub) - rem(ua)) / (ub.ln() - ua.ln());
    let a = rem(ua) - b * ua.ln();
    AsymptoticsReport { left_rate, gamma: hc.gamma, right_coefficient, right_expected, right_correction: (a, b) }
}

fn linear_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
