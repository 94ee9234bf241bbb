//! Scan of the Wronskian `w(ω)` over the closed lower half plane for zeros.
//!
//! Zeros are located by the argument principle: the winding number of `w` around every grid cell,
//! with edges bisected until successive phase increments stay below `π/4`. Cells whose top edge
//! passes through `ω = 0` detour below the origin on a half circle.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::jost::{jost_left, jost_right, Branch, JostOptions, RadialProblem};
use super::potential::{ModeParams, RadialGeometry};
use crate::angular::{eigenpairs_with, AngularBasis, AngularParams, EigenOptions};
use crate::error::{Error, Result};

/// Normalized Wronskian with the conditioning `|w| / (|φ́'φ̀| + |φ́φ̀'|)` at the evaluation point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WronskianSample {
    pub omega: Complex64,
    pub w: Complex64,
    pub relative: f64,
}

/// Wronskian of the normalized Jost solutions at a single point `u_eval`.
pub fn wronskian_at(p: &RadialProblem, u_eval: f64, opts: &JostOptions) -> Result<WronskianSample> {
    let l = jost_left(p, &[u_eval], opts)?;
    let r = jost_right(p, &[u_eval], Branch::Minus, opts)?;
    let (a, da, b, db) = (l.phi[0], l.dphi[0], r.phi[0], r.dphi[0]);
    let raw = da * b - a * db;
    let relative = raw.norm() / ((da * b).norm() + (a * db).norm());
    Ok(WronskianSample { omega: p.omega(), w: raw * (l.log_scale + r.log_scale).exp(), relative })
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub n_re: usize,
    pub n_im: usize,
    pub n_max: usize,
    pub u_eval: f64,
    pub angular: EigenOptions,
    pub jost: JostOptions,
    /// Real-axis conditioning below this value is reported as a failure.
    pub threshold: f64,
    pub max_bisections: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            re_range: (-3.0, 3.0),
            im_range: (-1.0, 0.0),
            n_re: 30,
            n_im: 6,
            n_max: 3,
            u_eval: 0.0,
            angular: EigenOptions { basis_size: 40, grid_points: 40, ..Default::default() },
            jost: JostOptions { rtol: 1e-10, ..Default::default() },
            threshold: 1e-6,
            max_bisections: 12,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroCandidate {
    pub n: usize,
    pub cell: (usize, usize),
    pub center: Complex64,
    pub winding: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RealAxisMinimum {
    pub n: usize,
    pub omega: f64,
    pub w_abs: f64,
    pub relative: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// `samples[n][i_im][i_re]`.
    pub samples: Vec<Vec<Vec<WronskianSample>>>,
    pub candidates: Vec<ZeroCandidate>,
    pub real_axis: Vec<RealAxisMinimum>,
    pub evaluations: usize,
    pub pass: bool,
}

impl ScanReport {
    /// One CSV row per `(n, ω)` node: `n, Re ω, Im ω, |w|, arg w, relative`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,re_omega,im_omega,abs_w,arg_w,relative\n");
        for (n, rows) in self.samples.iter().enumerate() {
            for row in rows {
                for s in row {
                    out.push_str(&format!(
                        "{n},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                        s.omega.re,
                        s.omega.im,
                        s.w.norm(),
                        s.w.arg(),
                        s.relative
                    ));
                }
            }
        }
        out
    }
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Phase increment of `f` from `a` to `b`. A segment is accepted when both halves step by less
/// than `π/4` and add up to the direct increment, which guards against aliasing near zeros.
pub fn edge_phase(
    f: &(impl Fn(Complex64) -> Result<Complex64> + Sync),
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    depth: usize,
    evaluations: &mut usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    *evaluations += 1;
    let (d1, d2, d) = ((fm / fa).arg(), (fb / fm).arg(), (fb / fa).arg());
    if d1.abs() < PI / 4.0 && d2.abs() < PI / 4.0 && (d1 + d2 - d).abs() < 1e-6 {
        return Ok(d);
    }
    if depth == 0 {
        return Err(Error::NonConvergence(format!("phase of w unresolved between {a} and {b}")));
    }
    Ok(edge_phase(f, a, m, fa, fm, depth - 1, evaluations)? + edge_phase(f, m, b, fm, fb, depth - 1, evaluations)?)
}

/// Phase increment along a polyline.
fn path_phase(
    f: &(impl Fn(Complex64) -> Result<Complex64> + Sync),
    pts: &[Complex64],
    ends: (Complex64, Complex64),
    depth: usize,
    evaluations: &mut usize,
) -> Result<f64> {
    let mut vals = Vec::with_capacity(pts.len());
    vals.push(ends.0);
    for &p in &pts[1..pts.len() - 1] {
        vals.push(f(p)?);
        *evaluations += 1;
    }
    vals.push(ends.1);
    let mut total = 0.0;
    for i in 0..pts.len() - 1 {
        total += edge_phase(f, pts[i], pts[i + 1], vals[i], vals[i + 1], depth, evaluations)?;
    }
    Ok(total)
}

/// `((i, j), winding)` of one grid cell.
pub type CellWinding = ((usize, usize), i64);

/// Winding numbers of `f` around every cell of the grid `re × im`, given its values at the nodes
/// (`nodes[j][i]` at `re[i] + i im[j]`). The top edge of a cell through `ω = 0` detours below the
/// origin on a half circle.
pub fn cell_windings(
    f: &(impl Fn(Complex64) -> Result<Complex64> + Sync),
    re: &[f64],
    im: &[f64],
    nodes: &[Vec<Complex64>],
    max_bisections: usize,
) -> Result<(Vec<CellWinding>, usize)> {
    let (nr, ni) = (re.len(), im.len());
    let c = |i: usize, j: usize| Complex64::new(re[i], im[j]);
    // horizontal edges (j, i) → (j, i+1), then vertical edges (j, i) → (j+1, i)
    let edges: Vec<(bool, usize, usize)> = (0..ni)
        .flat_map(|j| (0..nr - 1).map(move |i| (true, j, i)))
        .chain((0..ni - 1).flat_map(|j| (0..nr).map(move |i| (false, j, i))))
        .collect();
    let phases: Vec<Result<(f64, usize)>> = edges
        .par_iter()
        .map(|&(horiz, j, i)| {
            let mut evals = 0;
            let (a, b, fa, fb) = if horiz {
                (c(i, j), c(i + 1, j), nodes[j][i], nodes[j][i + 1])
            } else {
                (c(i, j), c(i, j + 1), nodes[j][i], nodes[j + 1][i])
            };
            let ph = if horiz && im[j] == 0.0 && re[i] < 0.0 && re[i + 1] > 0.0 {
                let r = 0.5 * re[i].abs().min(re[i + 1]);
                let mut pts = vec![a, Complex64::new(-r, 0.0)];
                pts.extend((1..8).map(|q| Complex64::from_polar(r, -PI + PI * q as f64 / 8.0)));
                pts.push(Complex64::new(r, 0.0));
                pts.push(b);
                path_phase(f, &pts, (fa, fb), max_bisections, &mut evals)?
            } else {
                edge_phase(f, a, b, fa, fb, max_bisections, &mut evals)?
            };
            Ok((ph, evals))
        })
        .collect();
    let mut ph = Vec::with_capacity(phases.len());
    let mut evals = 0;
    for r in phases {
        let (p, e) = r?;
        ph.push(p);
        evals += e;
    }
    let h = |j: usize, i: usize| ph[j * (nr - 1) + i];
    let v = |j: usize, i: usize| ph[ni * (nr - 1) + j * nr + i];
    let mut out = Vec::with_capacity((ni - 1) * (nr - 1));
    for j in 0..ni - 1 {
        for i in 0..nr - 1 {
            let total = h(j, i) + v(j, i + 1) - h(j + 1, i) - v(j, i);
            out.push(((j, i), (total / (2.0 * PI)).round() as i64));
        }
    }
    Ok((out, evals))
}

/// Mode-stability scan of `w(ω)` for the angular modes `n ≤ n_max`.
pub fn wronskian_scan(geom: &Arc<RadialGeometry>, cfg: &ScanConfig) -> Result<ScanReport> {
    if cfg.n_re < 2 || cfg.n_im < 2 {
        return Err(Error::InvalidParams("scan grid needs at least two nodes per axis".into()));
    }
    let re = axis(cfg.re_range.0, cfg.re_range.1, cfg.n_re);
    let im = axis(cfg.im_range.0, cfg.im_range.1, cfg.n_im);
    if re.contains(&0.0) && im.contains(&0.0) {
        return Err(Error::InvalidParams("scan grid contains ω = 0; use an even number of real nodes".into()));
    }
    let basis = AngularBasis::new(geom.s, geom.k, cfg.angular.basis_size)?;
    let grid = Arc::new(basis.grid(cfg.angular.grid_points));
    let (s, k, kerr) = (geom.s, geom.k, geom.kerr);

    // λ_n(ω) for all n at once; the Wronskian for mode n
    let lambdas = |om: Complex64| -> Result<Vec<Complex64>> {
        let ap = AngularParams::from_kerr(&kerr, s, k, om)?;
        Ok(eigenpairs_with(&basis, grid.clone(), &ap, cfg.n_max, &cfg.angular)?.lambdas())
    };
    let w_of = |om: Complex64, n: usize| -> Result<WronskianSample> {
        let lam = lambdas(om)?[n];
        let mode = ModeParams::new(kerr, s, k, om, lam)?;
        wronskian_at(&RadialProblem::kerr(geom.clone(), mode)?, cfg.u_eval, &cfg.jost)
    };

    let nodes: Vec<Complex64> = im.iter().flat_map(|&y| re.iter().map(move |&x| Complex64::new(x, y))).collect();
    let node_samples: Vec<Result<Vec<WronskianSample>>> = nodes
        .par_iter()
        .map(|&om| {
            let lam = lambdas(om)?;
            lam.iter()
                .map(|&l| {
                    let mode = ModeParams::new(kerr, s, k, om, l)?;
                    wronskian_at(&RadialProblem::kerr(geom.clone(), mode)?, cfg.u_eval, &cfg.jost)
                })
                .collect()
        })
        .collect();
    let mut per_node = Vec::with_capacity(nodes.len());
    for r in node_samples {
        per_node.push(r?);
    }
    let mut evaluations = nodes.len() * (cfg.n_max + 1);
    let mut samples = vec![vec![Vec::with_capacity(re.len()); im.len()]; cfg.n_max + 1];
    for (idx, row) in per_node.iter().enumerate() {
        for (n, smp) in row.iter().enumerate() {
            samples[n][idx / re.len()].push(*smp);
        }
    }

    let mut candidates = Vec::new();
    let mut real_axis = Vec::new();
    for n in 0..=cfg.n_max {
        let f = |om: Complex64| w_of(om, n).map(|x| x.w);
        let nodes: Vec<Vec<Complex64>> = samples[n].iter().map(|row| row.iter().map(|x| x.w).collect()).collect();
        let (windings, evals) = cell_windings(&f, &re, &im, &nodes, cfg.max_bisections)?;
        evaluations += evals;
        for ((j, i), wnd) in windings {
            if wnd != 0 {
                let center = Complex64::new(0.5 * (re[i] + re[i + 1]), 0.5 * (im[j] + im[j + 1]));
                candidates.push(ZeroCandidate { n, cell: (j, i), center, winding: wnd });
            }
        }
        if let Some(top) = im.iter().position(|&y| y == 0.0) {
            let best = samples[n][top]
                .iter()
                .min_by(|a, b| a.relative.total_cmp(&b.relative))
                .expect("non-empty grid row");
            real_axis.push(RealAxisMinimum { n, omega: best.omega.re, w_abs: best.w.norm(), relative: best.relative });
        }
    }
    let pass = candidates.is_empty() && real_axis.iter().all(|m| m.relative > cfg.threshold);
    Ok(ScanReport { re, im, samples, candidates, real_axis, evaluations, pass })
}
