//! Classification of the radial potential at large `(ω, λ)` into WKB, parabolic-cylinder and Airy
//! cases, the associated regions, and numerical checks of the smallness statements made on them.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{ModeParams, RadialGeometry};

/// Tuning constants `𝒞₀ … 𝒞₇` and the WKB target `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConstants {
    pub c: [f64; 8],
    pub eps_target: f64,
}

impl Default for RegionConstants {
    fn default() -> Self {
        RegionConstants { c: [2.0, 4.0, 5.0, 6.0, 64.0, 8.0, 64.0, 100.0], eps_target: 0.1 }
    }
}

impl RegionConstants {
    /// All constants positive and `𝒞₁ < 𝒞₂ < 𝒞₃ < 𝒞₄`.
    pub fn validate(&self) -> Result<()> {
        if self.c.iter().any(|&x| !(x > 0.0)) || !(self.eps_target > 0.0) {
            return Err(Error::InvalidParams("region constants must be positive".into()));
        }
        if !(self.c[1] < self.c[2] && self.c[2] < self.c[3] && self.c[3] < self.c[4]) {
            return Err(Error::InvalidParams("region constants must satisfy C1 < C2 < C3 < C4".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Case {
    Wkb,
    ParabolicCylinder,
    Airy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RegionKind {
    Wkb,
    ParabolicCylinder,
    Airy,
    /// WKB region with `Re V > 0` between the Airy regions.
    WkbPositive,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Interval {
    pub kind: RegionKind,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionClassification {
    pub case: Case,
    pub u_max: f64,
    pub r_max: f64,
    pub re_v_max: f64,
    pub u0_left: f64,
    pub u0_right: f64,
    pub u_minus_left: f64,
    pub u_minus_right: f64,
    pub u_plus_left: Option<f64>,
    pub u_plus_right: Option<f64>,
    pub intervals: Vec<Interval>,
    /// Interval endpoints are non-decreasing along the line.
    pub ordered: bool,
}

fn re_v(geom: &RadialGeometry, m: &ModeParams, u: f64) -> f64 {
    geom.coefficients(geom.x_of_u(u)).value(m.omega, m.lambda).re
}

/// Location and value of the maximum of `Re V`, refined by golden-section search.
pub fn find_max(geom: &RadialGeometry, m: &ModeParams) -> Result<(f64, f64)> {
    let h = 0.05;
    let us: Vec<f64> = (0..=2400).map(|i| -40.0 + h * i as f64).collect();
    let vals: Vec<f64> = us.iter().map(|&u| re_v(geom, m, u)).collect();
    let peaks: Vec<usize> = (1..us.len() - 1).filter(|&i| vals[i] >= vals[i - 1] && vals[i] > vals[i + 1]).collect();
    if peaks.len() != 1 {
        return Err(Error::MultipleMaxima(peaks.len()));
    }
    let i = peaks[0];
    let (mut a, mut b) = (us[i - 1], us[i + 1]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (re_v(geom, m, c), re_v(geom, m, d));
    while b - a > 1e-10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = re_v(geom, m, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = re_v(geom, m, d);
        }
    }
    let u = 0.5 * (a + b);
    Ok((u, re_v(geom, m, u)))
}

/// Zero of `Re V` between `u_max` and a bracket found by doubling the distance in direction `dir`.
fn zero_of_re_v(geom: &RadialGeometry, m: &ModeParams, u_max: f64, dir: f64) -> Result<f64> {
    let mut d = 0.25;
    let mut far = u_max + dir * d;
    while re_v(geom, m, far) > 0.0 {
        d *= 2.0;
        if d > 1e6 {
            return Err(Error::OutOfRegime("Re V does not change sign".into()));
        }
        far = u_max + dir * d;
    }
    let (mut inside, mut outside) = (u_max, far);
    while (outside - inside).abs() > 1e-9 {
        let mid = 0.5 * (inside + outside);
        if re_v(geom, m, mid) > 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

/// Whether `(ω, λ)` satisfies `ω² ≥ 𝒞₆` and `λ ≥ 𝒞₇`.
pub fn in_range(omega: f64, lambda: f64, c: &RegionConstants) -> bool {
    omega * omega >= c.c[6] && lambda >= c.c[7]
}

/// Whether `λ ≥ 𝒞₅ |ω|^{3/2}`; below it the potential is nearly constant.
pub fn in_range1(omega: f64, lambda: f64, c: &RegionConstants) -> bool {
    lambda >= c.c[5] * omega.abs().powf(1.5)
}

pub fn classify_case(geom: &RadialGeometry, m: &ModeParams, c: &RegionConstants) -> Result<RegionClassification> {
    c.validate()?;
    let (om, lam) = (m.omega.re, m.lambda.re);
    if m.omega.im != 0.0 || m.lambda.im != 0.0 {
        return Err(Error::OutOfRegime("classification needs real ω and λ".into()));
    }
    if !in_range(om, lam, c) {
        return Err(Error::OutOfRegime(format!("ω = {om}, λ = {lam} outside ω² ≥ C6, λ ≥ C7")));
    }
    let (u_max, vmax) = find_max(geom, m)?;
    let r_max = geom.r1 + geom.x_of_u(u_max);
    let sl = lam.sqrt();
    let case = if vmax < -c.c[4] * sl {
        Case::Wkb
    } else if vmax < c.c[4] * sl {
        Case::ParabolicCylinder
    } else {
        Case::Airy
    };
    let (u0l, u0r) = if vmax > 0.0 {
        (zero_of_re_v(geom, m, u_max, -1.0)?, zero_of_re_v(geom, m, u_max, 1.0)?)
    } else {
        (u_max, u_max)
    };
    let w = om.abs();
    let (c1, c3) = (c.c[1], c.c[3]);
    let (uml, umr, upl, upr) = match case {
        Case::Wkb => (u0l, u0r, None, None),
        Case::ParabolicCylinder => {
            let d = c3 * c1.powf(-1.0 / 6.0) * w.powf(-0.5);
            (u0l - d, u0r + d, None, None)
        }
        Case::Airy => {
            let mx = w.powf(-2.0 / 3.0).max((c1 * vmax).powf(-1.0 / 6.0) * w.powf(-1.0 / 3.0));
            let dl = c3 * mx;
            let dr = c3 * lam.powf(1.0 / 6.0) * w.powf(-1.0 / 3.0) * mx;
            (u0l - dl, u0r + dr, Some(u0l + dl), Some(u0r - dr))
        }
    };
    let inf = f64::INFINITY;
    let mut intervals = vec![Interval { kind: RegionKind::Wkb, lo: -inf, hi: uml }];
    match (upl, upr) {
        (Some(pl), Some(pr)) => {
            intervals.push(Interval { kind: RegionKind::Airy, lo: uml, hi: pl });
            intervals.push(Interval { kind: RegionKind::WkbPositive, lo: pl, hi: pr });
            intervals.push(Interval { kind: RegionKind::Airy, lo: pr, hi: umr });
        }
        _ if case == Case::ParabolicCylinder => {
            intervals.push(Interval { kind: RegionKind::ParabolicCylinder, lo: uml, hi: umr });
        }
        _ => {}
    }
    intervals.push(Interval { kind: RegionKind::Wkb, lo: umr, hi: inf });
    let ordered = intervals.iter().all(|iv| iv.lo <= iv.hi) && intervals.windows(2).all(|p| p[0].hi == p[1].lo);
    Ok(RegionClassification {
        case,
        u_max,
        r_max,
        re_v_max: vmax,
        u0_left: u0l,
        u0_right: u0r,
        u_minus_left: uml,
        u_minus_right: umr,
        u_plus_left: upl,
        u_plus_right: upr,
        intervals,
        ordered,
    })
}

/// `(|V'|/|V|^{3/2}, |V''|/|V|²)` at `u`.
pub fn wkb_functionals(geom: &RadialGeometry, m: &ModeParams, u: f64) -> Result<(f64, f64)> {
    let j = geom.jet(geom.x_of_u(u), m.omega, m.lambda);
    functionals_of(j.v, j.d1, j.d2, u)
}

/// The two WKB functionals of a potential jet.
pub fn functionals_of(v: Complex64, dv: Complex64, ddv: Complex64, u: f64) -> Result<(f64, f64)> {
    let a = v.norm();
    if a < 1e-12 {
        return Err(Error::TurningPoint { u, v_abs: a });
    }
    Ok((dv.norm() / a.powf(1.5), ddv.norm() / (a * a)))
}

/// Sample points of `[lo, hi]` clustered geometrically at both ends. An infinite right end is cut
/// at distance `span`, an infinite left end at most 60 away, where `V` has reached its horizon limit.
fn samples(lo: f64, hi: f64, span: f64) -> Vec<f64> {
    let (a, b) = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (false, true) => (hi - span.min(60.0), hi),
        (true, false) => (lo, lo + span),
        (false, false) => (-60.0, span),
    };
    if !(b > a) {
        return vec![a];
    }
    let len = b - a;
    let mut out = Vec::new();
    let mut d = 1e-4 * len.min(1.0);
    while d < 0.5 * len {
        out.push(a + d);
        out.push(b - d);
        d *= 1.04;
    }
    out.push(0.5 * (a + b));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionRow {
    pub omega: f64,
    pub lambda: f64,
    /// `"range"` when the classification applies, `"near-constant"` below `λ = 𝒞₅|ω|^{3/2}`.
    pub regime: String,
    pub classification: Option<RegionClassification>,
    pub r_max_in_band: Option<bool>,
    /// Largest WKB functional over the designated WKB regions.
    pub wkb_max: f64,
    pub airy_left: Option<(f64, f64)>,
    pub airy_right: Option<(f64, f64)>,
    pub pc: Option<(f64, f64)>,
    /// Largest sign violation of `ω Im V` outside `u_max ± 𝒞₁^{-1/2}` (0 when the signs hold).
    pub sign_violation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionReport {
    pub constants: RegionConstants,
    pub eps: f64,
    pub rows: Vec<RegionRow>,
    pub pass: bool,
}

impl RegionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "omega,lambda,regime,case,u_max,r_max,re_v_max,u0_left,u0_right,u_minus_left,u_minus_right,\
             u_plus_left,u_plus_right,wkb_max,airy_left,airy_left_bound,airy_right,airy_right_bound,pc,pc_bound,\
             sign_violation,pass\n",
        );
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_default();
        for r in &self.rows {
            let cl = r.classification.as_ref();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6e},{},{},{},{},{},{},{:.6e},{}\n",
                r.omega,
                r.lambda,
                r.regime,
                cl.map(|c| format!("{:?}", c.case)).unwrap_or_default(),
                opt(cl.map(|c| c.u_max)),
                opt(cl.map(|c| c.r_max)),
                opt(cl.map(|c| c.re_v_max)),
                opt(cl.map(|c| c.u0_left)),
                opt(cl.map(|c| c.u0_right)),
                opt(cl.map(|c| c.u_minus_left)),
                opt(cl.map(|c| c.u_minus_right)),
                opt(cl.and_then(|c| c.u_plus_left)),
                opt(cl.and_then(|c| c.u_plus_right)),
                r.wkb_max,
                opt(r.airy_left.map(|x| x.0)),
                opt(r.airy_left.map(|x| x.1)),
                opt(r.airy_right.map(|x| x.0)),
                opt(r.airy_right.map(|x| x.1)),
                opt(r.pc.map(|x| x.0)),
                opt(r.pc.map(|x| x.1)),
                r.sign_violation,
                r.pass
            ));
        }
        out
    }
}

fn sup_abs_v(geom: &RadialGeometry, m: &ModeParams, lo: f64, hi: f64) -> f64 {
    samples(lo, hi, 0.0)
        .into_iter()
        .chain([lo, hi])
        .map(|u| geom.coefficients(geom.x_of_u(u)).value(m.omega, m.lambda).norm())
        .fold(0.0, f64::max)
}

fn max_functional(geom: &RadialGeometry, m: &ModeParams, lo: f64, hi: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for u in samples(lo, hi, 400.0) {
        let (f1, f2) = wkb_functionals(geom, m, u)?;
        worst = worst.max(f1).max(f2);
    }
    Ok(worst)
}

fn verify_one(geom: &RadialGeometry, omega: f64, lambda: f64, c: &RegionConstants, eps: f64) -> Result<RegionRow> {
    let m = ModeParams::new(geom.kerr, geom.s, geom.k, Complex64::new(omega, 0.0), Complex64::new(lambda, 0.0))?;
    if !in_range(omega, lambda, c) {
        return Err(Error::OutOfRegime(format!("sweep point ω = {omega}, λ = {lambda} outside ω² ≥ C6, λ ≥ C7")));
    }
    if !in_range1(omega, lambda, c) {
        let wkb_max = max_functional(geom, &m, f64::NEG_INFINITY, f64::INFINITY)?;
        return Ok(RegionRow {
            omega,
            lambda,
            regime: "near-constant".into(),
            classification: None,
            r_max_in_band: None,
            wkb_max,
            airy_left: None,
            airy_right: None,
            pc: None,
            sign_violation: 0.0,
            pass: wkb_max <= eps,
        });
    }
    let cl = classify_case(geom, &m, c)?;
    let mass = geom.kerr.mass;
    let in_band = cl.r_max >= 2.4 * mass - 1e-9 && cl.r_max <= 3.0 * mass + 1e-9;
    let mut wkb_max: f64 = 0.0;
    let (mut airy_left, mut airy_right, mut pc) = (None, None, None);
    let mut airy_seen = 0;
    for iv in &cl.intervals {
        match iv.kind {
            RegionKind::Wkb | RegionKind::WkbPositive => {
                wkb_max = wkb_max.max(max_functional(geom, &m, iv.lo, iv.hi)?);
            }
            RegionKind::Airy => {
                let val = sup_abs_v(geom, &m, iv.lo, iv.hi) * (iv.hi - iv.lo).powi(2);
                if airy_seen == 0 {
                    airy_left = Some((val, c.c[4]));
                } else {
                    airy_right = Some((val, c.c[3].powi(3)));
                }
                airy_seen += 1;
            }
            RegionKind::ParabolicCylinder => {
                let val = sup_abs_v(geom, &m, iv.lo, iv.hi) * (iv.hi - iv.lo).powi(2);
                pc = Some((val, c.c[4] * c.c[4]));
            }
        }
    }
    let sign_violation = if cl.case == Case::Wkb { 0.0 } else { sign_violation(geom, &m, cl.u_max, c) };
    let bounds_ok = [airy_left, airy_right, pc].iter().flatten().all(|(v, b)| v <= b);
    let pass = wkb_max <= eps && bounds_ok && sign_violation == 0.0 && in_band && cl.ordered;
    Ok(RegionRow {
        omega,
        lambda,
        regime: "range".into(),
        classification: Some(cl),
        r_max_in_band: Some(in_band),
        wkb_max,
        airy_left,
        airy_right,
        pc,
        sign_violation,
        pass,
    })
}

/// Largest `|ω Im V|` of the wrong sign left of `u_max - 𝒞₁^{-1/2}` or right of `u_max + 𝒞₁^{-1/2}`.
fn sign_violation(geom: &RadialGeometry, m: &ModeParams, u_max: f64, c: &RegionConstants) -> f64 {
    let d = c.c[1].powf(-0.5);
    let om = m.omega.re;
    let wiv = |u: f64| om * geom.coefficients(geom.x_of_u(u)).value(m.omega, m.lambda).im;
    let left = samples(f64::NEG_INFINITY, u_max - d, 60.0).into_iter().map(|u| (-wiv(u)).max(0.0));
    let right = samples(u_max + d, f64::INFINITY, 400.0).into_iter().map(|u| wiv(u).max(0.0));
    left.chain(right).fold(0.0, f64::max)
}

/// Checks every `(ω, λ)` of the sweep.
pub fn verify_propositions(
    geom: &Arc<RadialGeometry>,
    sweep: &[(f64, f64)],
    c: &RegionConstants,
    eps: f64,
) -> Result<RegionReport> {
    c.validate()?;
    let rows: Vec<Result<RegionRow>> = sweep.par_iter().map(|&(om, lam)| verify_one(geom, om, lam, c, eps)).collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.pass);
    Ok(RegionReport { constants: *c, eps, rows, pass })
}

/// The desk sweep `ω ∈ {±10, ±30}`, `λ ∈ {200, 2000}`.
pub fn default_sweep() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for om in [-30.0, -10.0, 10.0, 30.0] {
        for lam in [200.0, 2000.0] {
            out.push((om, lam));
        }
    }
    out
}
