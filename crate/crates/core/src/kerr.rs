//! Kerr geometry in Boyer–Lindquist form, the tortoise chart and horizon constants.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::gauss_legendre;

/// Mass and specific angular momentum of a non-extreme Kerr black hole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KerrParams {
    #[serde(rename = "M")]
    pub mass: f64,
    pub a: f64,
}

impl KerrParams {
    /// Validates `M > 0` and `0 <= a < M`. The Schwarzschild case `a = 0` is accepted as a
    /// validation limit and logged.
    pub fn new(mass: f64, a: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidParams(format!("mass must be positive, got {mass}")));
        }
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::InvalidParams(format!("spin must be non-negative, got {a}")));
        }
        if a >= mass {
            return Err(Error::Extreme { mass, a });
        }
        if a == 0.0 {
            log::debug!("a = 0: Schwarzschild validation limit");
        }
        Ok(KerrParams { mass, a })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.mass, self.a).map(|_| ())
    }

    /// True for the Schwarzschild limit, which lies outside the rotating-case theory.
    pub fn is_validation_limit(&self) -> bool {
        self.a == 0.0
    }

    /// Cauchy and event horizons `(r0, r1)`.
    pub fn horizons(&self) -> (f64, f64) {
        let d = (self.mass * self.mass - self.a * self.a).sqrt();
        let r1 = self.mass + d;
        // r0 r1 = a^2 avoids cancellation in M - d
        (self.a * self.a / r1, r1)
    }

    pub fn delta(&self, r: f64) -> f64 {
        r * r - 2.0 * self.mass * r + self.a * self.a
    }

    /// `Δ` from `x = r - r1`, accurate near the horizon.
    pub fn delta_from_horizon(&self, x: f64) -> f64 {
        let (r0, r1) = self.horizons();
        x * (x + r1 - r0)
    }

    pub fn sigma(&self, r: f64) -> f64 {
        r * r + self.a * self.a
    }

    /// `∂²_u √(r²+a²) / √(r²+a²) = Δ f(r) / (r²+a²)^4`.
    pub fn curvature_term(&self, r: f64) -> f64 {
        let r1 = self.horizons().1;
        self.curvature_term_x(r, self.delta_from_horizon(r - r1))
    }

    pub(crate) fn curvature_term_x(&self, r: f64, delta: f64) -> f64 {
        let (m, a2) = (self.mass, self.a * self.a);
        let f = a2 * a2 - 4.0 * a2 * m * r + a2 * r * r + 2.0 * m * r * r * r;
        delta * f / self.sigma(r).powi(4)
    }

    pub fn horizon_constants(&self, s: f64, k: f64, omega: Complex64) -> HorizonConstants {
        let (r0, r1) = self.horizons();
        let sig1 = self.sigma(r1);
        let gamma = (r1 - r0) / sig1;
        let varpi = (r1 - self.mass) * s / sig1;
        let big_omega = omega + Complex64::new(self.a * k, -(r1 - self.mass) * s) / sig1;
        HorizonConstants { gamma, varpi, big_omega }
    }
}

/// Rates and the shifted frequency governing the horizon asymptotics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizonConstants {
    pub gamma: f64,
    pub varpi: f64,
    pub big_omega: Complex64,
}

/// Checks that `s` and `k` are half-integers with `k - s` integral.
pub fn check_spin(s: f64, k: f64) -> Result<()> {
    let is_int = |x: f64| (x - x.round()).abs() < 1e-12;
    if !is_int(2.0 * s) || !is_int(2.0 * k) {
        return Err(Error::InvalidParams(format!("s = {s} and k = {k} must be half-integers")));
    }
    if !is_int(k - s) {
        return Err(Error::Parity(k - s));
    }
    Ok(())
}

const PANEL_ORDER: usize = 16;

/// Monotone map between `r` and the tortoise coordinate `u`, `du/dr = (r²+a²)/Δ`.
///
/// The integrand is tabulated in `y = ln(r - r1)`, where `du/dy = (r²+a²)/(r - r0)` is smooth and
/// bounded near the horizon. The additive constant is fixed by `u(r_ref) = u_ref`.
#[derive(Clone, Debug)]
pub struct TortoiseChart {
    params: KerrParams,
    r0: f64,
    r1: f64,
    pub r_ref: f64,
    pub u_ref: f64,
    pub tol: f64,
    pub r_min: f64,
    pub r_max: f64,
    y_knots: Vec<f64>,
    u_knots: Vec<f64>,
    gx: Vec<f64>,
    gw: Vec<f64>,
}

impl TortoiseChart {
    /// Chart on `[r1 + 1e-6 M, 1e5 M]` with `u(3M) = 0` and round-trip tolerance `1e-10`.
    pub fn new(params: KerrParams) -> Result<Self> {
        let r1 = params.horizons().1;
        Self::build(params, (r1 + 1e-6 * params.mass, 1e5 * params.mass), 1e-10)
    }

    pub fn build(params: KerrParams, r_range: (f64, f64), tol: f64) -> Result<Self> {
        params.validate()?;
        let (r0, r1) = params.horizons();
        let guard = r1 + 1e-6 * params.mass * (1.0 - 1e-12);
        if r_range.0 < guard {
            return Err(Error::HorizonProximity { r: r_range.0, guard });
        }
        if !(r_range.1 > r_range.0) {
            return Err(Error::InvalidParams(format!("empty chart range {r_range:?}")));
        }
        let (gx, gw) = gauss_legendre(PANEL_ORDER);
        let mut chart = TortoiseChart {
            params,
            r0,
            r1,
            r_ref: 3.0 * params.mass,
            u_ref: 0.0,
            tol,
            r_min: r_range.0,
            r_max: r_range.1,
            y_knots: Vec::new(),
            u_knots: Vec::new(),
            gx,
            gw,
        };
        let (y_lo, y_hi) = ((r_range.0 - r1).ln(), (r_range.1 - r1).ln());
        let mut y_knots = vec![y_lo];
        let mut u_knots = vec![0.0];
        let mut y = y_lo;
        let mut dy: f64 = 0.5;
        while y < y_hi {
            let step = dy.min(y_hi - y);
            let coarse = chart.panel_integral(y, y + step, 8);
            let fine = chart.panel_integral(y, y + step, PANEL_ORDER);
            if (fine - coarse).abs() > 1e-3 * tol * fine.abs().max(1.0) && step > 1e-3 {
                dy = step * 0.5;
                continue;
            }
            y += step;
            y_knots.push(y);
            u_knots.push(u_knots.last().unwrap() + fine);
            dy = (step * 1.5).min(0.5);
        }
        chart.y_knots = y_knots;
        chart.u_knots = u_knots;
        let shift = chart.u_ref - chart.u_of_y((chart.r_ref - r1).ln());
        for u in chart.u_knots.iter_mut() {
            *u += shift;
        }
        chart.verify_round_trip()?;
        Ok(chart)
    }

    pub fn params(&self) -> &KerrParams {
        &self.params
    }

    /// `du/dy` at `y = ln(r - r1)`.
    #[inline]
    fn dudy(&self, y: f64) -> f64 {
        let x = y.exp();
        let r = self.r1 + x;
        (r * r + self.params.a * self.params.a) / (self.r1 - self.r0 + x)
    }

    fn panel_integral(&self, y0: f64, y1: f64, order: usize) -> f64 {
        let (mid, half) = (0.5 * (y0 + y1), 0.5 * (y1 - y0));
        if order == PANEL_ORDER {
            self.gx.iter().zip(&self.gw).map(|(x, w)| w * self.dudy(mid + half * x)).sum::<f64>() * half
        } else {
            let (gx, gw) = gauss_legendre(order);
            gx.iter().zip(&gw).map(|(x, w)| w * self.dudy(mid + half * x)).sum::<f64>() * half
        }
    }

    /// `du/dy - 1/γ`, which vanishes like `e^y` at the horizon.
    fn dudy_minus_limit(&self, y: f64) -> f64 {
        let x = y.exp();
        let (r0, r1, a2) = (self.r0, self.r1, self.params.a * self.params.a);
        x * ((2.0 * r1 + x) * (r1 - r0) - (r1 * r1 + a2)) / ((r1 - r0) * (r1 - r0 + x))
    }

    fn inv_gamma(&self) -> f64 {
        self.params.sigma(self.r1) / (self.r1 - self.r0)
    }

    fn u_of_y(&self, y: f64) -> f64 {
        let n = self.y_knots.len();
        let (y_lo, y_hi) = (self.y_knots[0], self.y_knots[n - 1]);
        if y < y_lo {
            // analytic left tail: u = u_lo + (y - y_lo)/γ - ∫_y^{y_lo} (du/dy - 1/γ)
            let mut corr = 0.0;
            let mut b = y_lo;
            let stop = y.max(y_lo - 60.0);
            while b > stop {
                let a = (b - 1.0).max(stop);
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                corr += self.gx.iter().zip(&self.gw).map(|(x, w)| w * self.dudy_minus_limit(mid + half * x)).sum::<f64>()
                    * half;
                b = a;
            }
            return self.u_knots[0] + (y - y_lo) * self.inv_gamma() - corr;
        }
        if y > y_hi {
            let mut u = self.u_knots[n - 1];
            let mut a = y_hi;
            while a < y {
                let b = (a + 0.5).min(y);
                u += self.panel_integral(a, b, PANEL_ORDER);
                a = b;
            }
            return u;
        }
        let j = match self.y_knots.binary_search_by(|v| v.total_cmp(&y)) {
            Ok(j) => return self.u_knots[j],
            Err(j) => j - 1,
        };
        self.u_knots[j] + self.panel_integral(self.y_knots[j], y, PANEL_ORDER)
    }

    fn y_of_u(&self, u: f64) -> f64 {
        let n = self.u_knots.len();
        let mut y = if u <= self.u_knots[0] {
            self.y_knots[0] + (u - self.u_knots[0]) / self.inv_gamma()
        } else if u >= self.u_knots[n - 1] {
            let yh = self.y_knots[n - 1];
            // u grows like r = e^y at large r
            let rh = self.r1 + yh.exp();
            (rh + (u - self.u_knots[n - 1]) - self.r1).max(yh.exp()).ln()
        } else {
            let j = self.u_knots.partition_point(|&v| v <= u) - 1;
            let (u0, u1) = (self.u_knots[j], self.u_knots[j + 1]);
            let (y0, y1) = (self.y_knots[j], self.y_knots[j + 1]);
            let (s0, s1) = (1.0 / self.dudy(y0), 1.0 / self.dudy(y1));
            let h = u1 - u0;
            let t = (u - u0) / h;
            let (h00, h10, h01, h11) = (
                2.0 * t * t * t - 3.0 * t * t + 1.0,
                t * t * t - 2.0 * t * t + t,
                -2.0 * t * t * t + 3.0 * t * t,
                t * t * t - t * t,
            );
            h00 * y0 + h10 * h * s0 + h01 * y1 + h11 * h * s1
        };
        for _ in 0..60 {
            let f = self.u_of_y(y) - u;
            let dy = f / self.dudy(y);
            y -= dy.clamp(-2.0, 2.0);
            if dy.abs() < 1e-15 * (1.0 + y.abs()) {
                break;
            }
        }
        y
    }

    /// `u(r)`; refuses radii closer to the horizon than the chart guard.
    pub fn u_of_r(&self, r: f64) -> Result<f64> {
        if r < self.r_min * (1.0 - 1e-15) {
            return Err(Error::HorizonProximity { r, guard: self.r_min });
        }
        Ok(self.u_of_y((r - self.r1).ln()))
    }

    /// `r(u)` inside the tabulated working interval.
    pub fn r_of_u(&self, u: f64) -> Result<f64> {
        if u < self.u_left() || u > self.u_right() {
            return Err(Error::ChartRange(u));
        }
        Ok(self.r1 + self.y_of_u(u).exp())
    }

    /// `x = r - r1` for any `u`, continuing the chart analytically beyond its working interval.
    pub fn x_of_u_extended(&self, u: f64) -> f64 {
        self.y_of_u(u).exp()
    }

    /// `u` at `x = r - r1`, continuing the chart analytically beyond its working interval.
    pub fn u_of_x_extended(&self, x: f64) -> f64 {
        self.u_of_y(x.ln())
    }

    pub fn u_left(&self) -> f64 {
        self.u_knots[0]
    }

    pub fn u_right(&self) -> f64 {
        *self.u_knots.last().unwrap()
    }

    /// Largest round-trip error `|r(u(r)) - r|` over a logarithmic sample of the interval.
    pub fn round_trip_error(&self) -> f64 {
        let (lo, hi) = ((self.r_min - self.r1).ln(), (self.r_max - self.r1).ln());
        (0..=400)
            .map(|i| {
                let y = lo + (hi - lo) * i as f64 / 400.0;
                let r = self.r1 + y.exp();
                let back = self.r1 + self.y_of_u(self.u_of_y(y)).exp();
                (back - r).abs()
            })
            .fold(0.0, f64::max)
    }

    fn verify_round_trip(&self) -> Result<()> {
        let err = self.round_trip_error();
        if err > self.tol {
            return Err(Error::NonConvergence(format!("tortoise round trip error {err:e} > {:e}", self.tol)));
        }
        Ok(())
    }

    /// Tabulated knots `(y, u)` for serialization.
    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.y_knots, &self.u_knots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizons_are_roots() {
        let p = KerrParams::new(1.0, 0.6).unwrap();
        let (r0, r1) = p.horizons();
        assert!((r0 - 0.2).abs() < 1e-15 && (r1 - 1.8).abs() < 1e-15);
        assert!(p.delta(r0).abs() < 1e-15 && p.delta(r1).abs() < 1e-15);
        assert!(matches!(KerrParams::new(1.0, 1.0), Err(Error::Extreme { .. })));
        assert!(matches!(KerrParams::new(1.0, 1.2), Err(Error::Extreme { .. })));
    }

    #[test]
    fn chart_slope_and_constant() {
        let p = KerrParams::new(1.0, 0.0).unwrap();
        let c = TortoiseChart::new(p).unwrap();
        assert!(c.u_of_r(3.0).unwrap().abs() < 1e-13);
        let h = 1e-4;
        let slope = (c.u_of_r(4.0 + h).unwrap() - c.u_of_r(4.0 - h).unwrap()) / (2.0 * h);
        assert!((slope - 2.0).abs() < 1e-7);
    }

    #[test]
    fn extended_inverse_beyond_table() {
        let p = KerrParams::new(1.0, 0.6).unwrap();
        let c = TortoiseChart::new(p).unwrap();
        for &u in &[c.u_left() - 20.0, c.u_right() * 3.0] {
            let x = c.x_of_u_extended(u);
            let back = c.u_of_y(x.ln());
            assert!((back - u).abs() < 1e-9 * (1.0 + u.abs()), "u={u} back={back}");
        }
    }
}
