use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::{json, Value};
use teukolsky::angular::{eigenpairs, verify_eigenvalue_bounds, AngularParams, EigenOptions};
use teukolsky::grid::UniformGrid;
use teukolsky::propagator::{hamiltonian_coeffs, propagate, relative_l2, HamiltonianCoefficients, WaveState};
use teukolsky::radial::scan::{wronskian_scan, ScanConfig as CoreScan};
use teukolsky::radial::{jost_left, jost_right, wronskian, Branch, GreenOptions, GreensKernel, JostOptions};
use teukolsky::radial::{ModeParams, RadialGeometry, RadialProblem};
use teukolsky::regions::{default_sweep, verify_propositions};
use teukolsky::snapshot::Snapshot;
use teukolsky::timedomain::{evolve, window_sup, EvolutionConfig};
use teukolsky::{Complex64, KerrParams};

use crate::config::*;
use crate::error::CliError;
use crate::output::OutputDir;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Spectral,
    Timedomain,
    Both,
}

fn geometry(bh: &BlackHole, mode: &Mode) -> Result<Arc<RadialGeometry>, CliError> {
    let kerr = KerrParams::new(bh.mass, bh.a)?;
    if kerr.is_validation_limit() {
        log::warn!("a = 0: Schwarzschild validation limit");
    }
    Ok(RadialGeometry::new(kerr, mode.s, mode.k)?)
}

fn write_snapshot(out: &mut OutputDir, stem: &str, snap: &Snapshot, formats: &Formats) -> Result<(), CliError> {
    if formats.binary {
        let mut buf = vec![];
        snap.write_binary(&mut buf)?;
        out.write(&format!("{stem}.bin"), &buf)?;
    }
    if formats.csv {
        let mut buf = vec![];
        snap.write_csv(&mut buf)?;
        out.write(&format!("{stem}.csv"), &buf)?;
    }
    Ok(())
}

fn time_domain_config(cfg: &EvolveConfig) -> EvolutionConfig {
    let td = &cfg.timedomain;
    EvolutionConfig {
        dt: td.dt,
        duration: cfg.times.iter().fold(0.0f64, |m, t| m.max(-t)),
        sponge_width: td.sponge_width,
        sponge_strength: td.sponge_strength,
        snapshot_times: cfg.times.clone(),
        monitor_every: td.monitor_every,
        instability_window: td.instability_window,
        instability_factor: td.instability_factor,
        c_stab: td.c_stab,
        decay_window: None,
    }
}

pub fn cmd_evolve(cfg: &EvolveConfig, method: Method, out: &mut OutputDir) -> Result<Value, CliError> {
    if cfg.times.is_empty() || cfg.times.iter().any(|t| !(*t <= 0.0)) {
        return Err(CliError::Config("at `times`: need at least one time, all ≤ 0".into()));
    }
    let geom = geometry(&cfg.black_hole, &cfg.mode)?;
    let g = &cfg.grid;
    let grid = UniformGrid::spanning(g.u_min, g.u_max, g.du)?;
    let coeffs = Arc::new(hamiltonian_coeffs(&geom, grid, g.angular_size, g.fd_order)?);
    let psi0 = cfg.initial.sample(&coeffs.basis, &coeffs.angular.x, &grid)?;
    let mut td_cfg = time_domain_config(cfg);
    let window = cfg.window.unwrap_or_else(|| td_cfg.sponge_free(&grid));
    td_cfg.decay_window = Some(window);
    let theta = coeffs.angular.theta.clone();
    let mut summary = json!({ "times": cfg.times, "window": window });

    let spectral = if method != Method::Timedomain {
        let p = propagate(&coeffs, &psi0, &cfg.times, &cfg.contour)?;
        let mut mon = String::from("omega,norm\n");
        for m in &p.monitors {
            writeln!(mon, "{:.17e},{:.17e}", m.omega, m.norm).ok();
        }
        out.write("spectral_nodes.csv", mon.as_bytes())?;
        out.write_json("spectral_tail.json", &p.tail)?;
        summary["spectral"] = json!({ "c": p.c, "nodes": p.node_count, "tail": p.tail });
        for (i, (t, st)) in p.times.iter().zip(&p.states).enumerate() {
            write_snapshot(out, &format!("spectral_{i:03}"), &Snapshot::new(*t, grid, theta.clone(), st.clone())?, &cfg.output)?;
        }
        out.write("spectral_decay.csv", decay_csv(&grid, &p.times, &p.states, window).as_bytes())?;
        Some(p.states)
    } else {
        None
    };

    let timedomain = if method != Method::Spectral {
        let tr = evolve(&coeffs, &psi0, &td_cfg)?;
        let states: Vec<WaveState> = cfg
            .times
            .iter()
            .map(|t| {
                let i = tr.times.iter().position(|s| (s - t).abs() < 1e-9).expect("every requested time is a snapshot");
                tr.states[i].clone()
            })
            .collect();
        let mut mon = String::from("t,l2,energy,window_sup\n");
        for m in &tr.monitors {
            writeln!(mon, "{:.17e},{:.17e},{:.17e},{:.17e}", m.t, m.l2, m.energy, m.window_sup.unwrap_or(f64::NAN)).ok();
        }
        out.write("timedomain_monitors.csv", mon.as_bytes())?;
        for (i, (t, st)) in cfg.times.iter().zip(&states).enumerate() {
            write_snapshot(out, &format!("timedomain_{i:03}"), &Snapshot::new(*t, grid, theta.clone(), st.clone())?, &cfg.output)?;
        }
        out.write("timedomain_decay.csv", decay_csv(&grid, &cfg.times, &states, window).as_bytes())?;
        summary["timedomain"] = json!({ "dt": td_cfg.dt, "steps": td_cfg.steps(), "sponge_free": td_cfg.sponge_free(&grid) });
        Some(states)
    } else {
        None
    };

    if let (Some(a), Some(b)) = (&spectral, &timedomain) {
        let (csv, worst) = discrepancy(&coeffs, &cfg.times, a, b, window);
        out.write("discrepancy.csv", csv.as_bytes())?;
        summary["max_discrepancy"] = json!(worst);
    }
    Ok(summary)
}

fn decay_csv(grid: &UniformGrid, times: &[f64], states: &[WaveState], window: (f64, f64)) -> String {
    let mut s = String::from("t,window_sup\n");
    for (t, st) in times.iter().zip(states) {
        writeln!(s, "{:.17e},{:.17e}", t, window_sup(grid, &st.phi, window)).ok();
    }
    s
}

/// Relative L² discrepancy of the spectral against the time-domain field on the window.
fn discrepancy(
    coeffs: &HamiltonianCoefficients,
    times: &[f64],
    spectral: &[WaveState],
    timedomain: &[WaveState],
    window: (f64, f64),
) -> (String, f64) {
    let mut s = String::from("t,window_lo,window_hi,relative_l2,max_abs_diff\n");
    let mut worst: f64 = 0.0;
    for ((t, a), b) in times.iter().zip(spectral).zip(timedomain) {
        let rel = relative_l2(&a.phi, &b.phi, &coeffs.angular.q, &coeffs.grid, window);
        let diff = coeffs
            .grid
            .indices_in(window.0, window.1)
            .flat_map(|i| (0..a.phi.ncols()).map(move |j| (i, j)))
            .map(|ij| (a.phi[ij] - b.phi[ij]).norm())
            .fold(0.0, f64::max);
        worst = worst.max(rel);
        writeln!(s, "{t:.17e},{:.17e},{:.17e},{rel:.17e},{diff:.17e}", window.0, window.1).ok();
    }
    (s, worst)
}

pub fn cmd_scan(cfg: &ScanConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let geom = geometry(&cfg.black_hole, &cfg.mode)?;
    let d = CoreScan::default();
    let core = CoreScan {
        re_range: cfg.re_range,
        im_range: cfg.im_range,
        n_re: cfg.n_re,
        n_im: cfg.n_im,
        n_max: cfg.n_max,
        u_eval: cfg.u_eval,
        angular: EigenOptions { basis_size: cfg.angular_size, grid_points: cfg.angular_size, ..d.angular },
        jost: JostOptions { rtol: cfg.rtol, ..d.jost },
        threshold: cfg.threshold,
        max_bisections: cfg.max_bisections,
    };
    let report = wronskian_scan(&geom, &core)?;
    out.write("scan.csv", report.to_csv().as_bytes())?;
    let summary = json!({
        "pass": report.pass,
        "candidates": report.candidates,
        "real_axis": report.real_axis,
        "evaluations": report.evaluations,
    });
    out.write_json("scan.json", &summary)?;
    Ok(summary)
}

pub fn cmd_regions(cfg: &RegionsConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let geom = geometry(&cfg.black_hole, &cfg.mode)?;
    let sweep = cfg.sweep.clone().unwrap_or_else(default_sweep);
    let constants = cfg.constants.unwrap_or_default();
    let report = verify_propositions(&geom, &sweep, &constants, cfg.eps)?;
    out.write("regions.csv", report.to_csv().as_bytes())?;
    out.write_json("regions.json", &report)?;
    Ok(json!({ "pass": report.pass, "rows": report.rows.len(), "constants": report.constants, "eps": report.eps }))
}

pub fn cmd_angular(cfg: &AngularConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let opts = EigenOptions {
        basis_size: cfg.basis_size,
        grid_points: cfg.basis_size,
        certify: cfg.certify,
        ..EigenOptions::default()
    };
    let mut csv = String::from("omega_a_re,omega_a_im,n,lambda_re,lambda_im,residual\n");
    let mut certificates = vec![];
    for &om in &cfg.omega_a {
        let p = AngularParams::new(cfg.mode.s, cfg.mode.k, om)?;
        let dec = eigenpairs(&p, cfg.n_max, &opts)?;
        for pair in dec.pairs.iter().take(cfg.n_max + 1) {
            writeln!(csv, "{:.17e},{:.17e},{},{:.17e},{:.17e},{:.3e}", om.re, om.im, pair.n, pair.lambda.re, pair.lambda.im, pair.residual)
                .ok();
        }
        certificates.push(dec.certificate);
    }
    out.write("eigenvalues.csv", csv.as_bytes())?;
    let b = &cfg.bounds;
    if b.points < 2 || !(b.omega_max > b.omega_min && b.omega_min > 0.0) {
        return Err(CliError::Config("at `bounds`: need 0 < omega_min < omega_max and points ≥ 2".into()));
    }
    let omegas: Vec<f64> = (0..b.points)
        .map(|i| b.omega_min + (b.omega_max - b.omega_min) * i as f64 / (b.points - 1) as f64)
        .flat_map(|w| [w, -w])
        .collect();
    let bound_opts = EigenOptions { basis_size: cfg.basis_size.max(2 * (b.n_max + 1)), ..opts };
    let bounds = verify_eigenvalue_bounds(cfg.mode.s, cfg.mode.k, &omegas, b.n_max, &bound_opts)?;
    out.write_json("bounds.json", &bounds)?;
    Ok(json!({ "bound_constant": bounds.c, "bounds_pass": bounds.pass, "certificates": certificates }))
}

fn radial_problem(bh: &BlackHole, mode: &Mode, r: &RadialMode) -> Result<(RadialProblem, Complex64), CliError> {
    let geom = geometry(bh, mode)?;
    let lambda = match (r.lambda, r.n) {
        (Some(l), None) => l,
        (None, Some(n)) => {
            let p = AngularParams::from_kerr(&geom.kerr, mode.s, mode.k, r.omega)?;
            let opts = EigenOptions { basis_size: 64, grid_points: 64, ..EigenOptions::default() };
            eigenpairs(&p, n, &opts)?.pairs[n].lambda
        }
        _ => return Err(CliError::Config("at `radial`: give exactly one of `lambda` and `n`".into())),
    };
    let mode = ModeParams::new(geom.kerr, mode.s, mode.k, r.omega, lambda)?;
    Ok((RadialProblem::kerr(geom, mode)?, lambda))
}

pub fn cmd_jost(cfg: &JostConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let (p, lambda) = radial_problem(&cfg.black_hole, &cfg.mode, &cfg.radial)?;
    if cfg.points < 2 || !(cfg.u_max > cfg.u_min) {
        return Err(CliError::Config("at `points`: need u_min < u_max and at least two points".into()));
    }
    let u: Vec<f64> = (0..cfg.points)
        .map(|i| cfg.u_min + (cfg.u_max - cfg.u_min) * i as f64 / (cfg.points - 1) as f64)
        .collect();
    let opts = JostOptions { rtol: cfg.rtol, ..JostOptions::default() };
    let branch = match cfg.branch {
        BranchName::Minus => Branch::Minus,
        BranchName::Plus => Branch::Plus,
    };
    let left = jost_left(&p, &u, &opts)?;
    let right = jost_right(&p, &u, branch, &opts)?;
    let mut csv = String::from("u,left_re,left_im,left_du_re,left_du_im,right_re,right_im,right_du_re,right_du_im\n");
    for (i, x) in u.iter().enumerate() {
        let (a, da) = left.normalized(i);
        let (b, db) = right.normalized(i);
        writeln!(
            csv,
            "{x:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            a.re, a.im, da.re, da.im, b.re, b.im, db.re, db.im
        )
        .ok();
    }
    out.write("jost.csv", csv.as_bytes())?;
    let w = wronskian(&left, &right)?;
    let meta = |s: &teukolsky::radial::JostSolution| {
        json!({
            "u_start": s.u_start,
            "log_scale": s.log_scale,
            "normalization": s.normalization,
            "truncation_error": s.truncation_error,
        })
    };
    let summary = json!({
        "omega": p.omega(),
        "lambda": lambda,
        "left": meta(&left),
        "right": meta(&right),
        "wronskian": w.w,
        "wronskian_spread": w.spread,
    });
    out.write_json("jost.json", &summary)?;
    Ok(summary)
}

pub fn cmd_green(cfg: &GreenConfig, out: &mut OutputDir) -> Result<Value, CliError> {
    let (p, lambda) = radial_problem(&cfg.black_hole, &cfg.mode, &cfg.radial)?;
    let grid = UniformGrid::spanning(cfg.u_min, cfg.u_max, cfg.du)?;
    let u = grid.points();
    let kernel = GreensKernel::new(&p, &u, &GreenOptions::default())?;
    let mut csv = String::from("v,u,re,im\n");
    for &v in &cfg.sources {
        if !(v >= grid.start && v <= grid.end()) {
            return Err(CliError::Config(format!("at `sources`: {v} is outside the grid")));
        }
        let j = ((v - grid.start) / grid.step).round() as usize;
        for (i, x) in u.iter().enumerate() {
            let s: Complex64 = kernel.at(i, j);
            writeln!(csv, "{:.17e},{x:.17e},{:.17e},{:.17e}", grid.at(j), s.re, s.im).ok();
        }
    }
    out.write("green.csv", csv.as_bytes())?;
    let summary = json!({ "omega": kernel.omega, "lambda": lambda, "wronskian": kernel.wronskian.w, "wronskian_spread": kernel.wronskian.spread });
    out.write_json("green.json", &summary)?;
    Ok(summary)
}
