//! Run configurations. Every file carries `"schema": 1`; unknown keys are rejected.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use teukolsky::propagator::{ContourSpec, GaussianBump};
use teukolsky::regions::RegionConstants;
use teukolsky::Complex64;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Reads and validates a JSON config, reporting the path of the offending key on failure.
pub fn load<T: DeserializeOwned + Versioned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse<T: DeserializeOwned + Versioned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: T = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("at `{path}`: {}", e.into_inner()))
    })?;
    if cfg.schema() != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "at `schema`: unsupported schema version {} (expected {SCHEMA_VERSION})",
            cfg.schema()
        )));
    }
    Ok(cfg)
}

pub trait Versioned {
    fn schema(&self) -> u32;
}

macro_rules! versioned {
    ($($t:ty),*) => {
        $(impl Versioned for $t {
            fn schema(&self) -> u32 {
                self.schema
            }
        })*
    };
}

versioned!(EvolveConfig, ScanConfig, RegionsConfig, AngularConfig, JostConfig, GreenConfig);

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlackHole {
    #[serde(default = "one")]
    pub mass: f64,
    pub a: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub s: f64,
    pub k: f64,
}

fn angular_size() -> usize {
    24
}

fn fd_order() -> usize {
    8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldGrid {
    pub u_min: f64,
    pub u_max: f64,
    pub du: f64,
    /// Angular basis size, equal to the number of `θ` nodes.
    #[serde(default = "angular_size")]
    pub angular_size: usize,
    #[serde(default = "fd_order")]
    pub fd_order: usize,
}

/// Time-domain settings; snapshot times and duration follow from `times`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeDomain {
    pub dt: f64,
    pub sponge_width: f64,
    pub sponge_strength: f64,
    pub monitor_every: usize,
    pub instability_window: f64,
    pub instability_factor: f64,
    pub c_stab: f64,
}

impl Default for TimeDomain {
    fn default() -> Self {
        let d = teukolsky::timedomain::EvolutionConfig::default();
        TimeDomain {
            dt: d.dt,
            sponge_width: d.sponge_width,
            sponge_strength: d.sponge_strength,
            monitor_every: d.monitor_every,
            instability_window: d.instability_window,
            instability_factor: d.instability_factor,
            c_stab: d.c_stab,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Formats {
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub binary: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats { csv: true, binary: true }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub schema: u32,
    pub black_hole: BlackHole,
    pub mode: Mode,
    pub grid: FieldGrid,
    pub initial: GaussianBump,
    /// Output times, all `≤ 0`.
    pub times: Vec<f64>,
    #[serde(default)]
    pub contour: ContourSpec,
    #[serde(default)]
    pub timedomain: TimeDomain,
    /// `u`-window for discrepancies and the decay metric; defaults to the sponge-free zone.
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    #[serde(default)]
    pub output: Formats,
}

fn scan_re() -> (f64, f64) {
    (-3.0, 3.0)
}
fn scan_im() -> (f64, f64) {
    (-1.0, 0.0)
}
fn scan_nre() -> usize {
    30
}
fn scan_nim() -> usize {
    6
}
fn scan_nmax() -> usize {
    3
}
fn scan_basis() -> usize {
    40
}
fn scan_rtol() -> f64 {
    1e-10
}
fn scan_threshold() -> f64 {
    1e-6
}
fn scan_bisections() -> usize {
    12
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub schema: u32,
    pub black_hole: BlackHole,
    pub mode: Mode,
    #[serde(default = "scan_re")]
    pub re_range: (f64, f64),
    #[serde(default = "scan_im")]
    pub im_range: (f64, f64),
    #[serde(default = "scan_nre")]
    pub n_re: usize,
    #[serde(default = "scan_nim")]
    pub n_im: usize,
    #[serde(default = "scan_nmax")]
    pub n_max: usize,
    #[serde(default)]
    pub u_eval: f64,
    #[serde(default = "scan_basis")]
    pub angular_size: usize,
    #[serde(default = "scan_rtol")]
    pub rtol: f64,
    #[serde(default = "scan_threshold")]
    pub threshold: f64,
    #[serde(default = "scan_bisections")]
    pub max_bisections: usize,
}

fn region_eps() -> f64 {
    0.1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsConfig {
    pub schema: u32,
    pub black_hole: BlackHole,
    pub mode: Mode,
    /// `(ω, λ)` pairs; defaults to the built-in desk sweep.
    #[serde(default)]
    pub sweep: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub constants: Option<RegionConstants>,
    #[serde(default = "region_eps")]
    pub eps: f64,
}

fn bound_lo() -> f64 {
    1.0
}
fn bound_hi() -> f64 {
    50.0
}
fn bound_points() -> usize {
    50
}
fn bound_nmax() -> usize {
    20
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSweep {
    #[serde(default = "bound_lo")]
    pub omega_min: f64,
    #[serde(default = "bound_hi")]
    pub omega_max: f64,
    #[serde(default = "bound_points")]
    pub points: usize,
    #[serde(default = "bound_nmax")]
    pub n_max: usize,
}

impl Default for BoundSweep {
    fn default() -> Self {
        BoundSweep { omega_min: bound_lo(), omega_max: bound_hi(), points: bound_points(), n_max: bound_nmax() }
    }
}

fn angular_basis() -> usize {
    128
}
fn angular_nmax() -> usize {
    10
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngularConfig {
    pub schema: u32,
    pub mode: Mode,
    /// Values of `Ω_a = −aω` as `[re, im]`.
    pub omega_a: Vec<Complex64>,
    #[serde(default = "angular_nmax")]
    pub n_max: usize,
    #[serde(default = "angular_basis")]
    pub basis_size: usize,
    #[serde(default)]
    pub certify: bool,
    /// Real `±Ω` sweep for the fitted eigenvalue-bound constant.
    #[serde(default)]
    pub bounds: BoundSweep,
}

/// A radial mode given either by `lambda` or by the angular index `n` at the same `ω`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialMode {
    pub omega: Complex64,
    #[serde(default)]
    pub lambda: Option<Complex64>,
    #[serde(default)]
    pub n: Option<usize>,
}

fn jost_points() -> usize {
    201
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JostConfig {
    pub schema: u32,
    pub black_hole: BlackHole,
    pub mode: Mode,
    pub radial: RadialMode,
    pub u_min: f64,
    pub u_max: f64,
    #[serde(default = "jost_points")]
    pub points: usize,
    /// `"minus"` or `"plus"` right branch.
    #[serde(default)]
    pub branch: BranchName,
    #[serde(default = "scan_rtol")]
    pub rtol: f64,
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchName {
    #[default]
    Minus,
    Plus,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenConfig {
    pub schema: u32,
    pub black_hole: BlackHole,
    pub mode: Mode,
    pub radial: RadialMode,
    pub u_min: f64,
    pub u_max: f64,
    pub du: f64,
    /// Source points `v` whose kernel columns `s(·, v)` are written.
    pub sources: Vec<f64>,
}
