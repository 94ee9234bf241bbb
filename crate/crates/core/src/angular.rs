//! The angular operator `𝒜_ω = -∂_x (1-x²) ∂_x + (Ω_a (1-x²) + k - s x)² / (1-x²)`, `x = cos θ`,
//! `Ω_a = -aω`, discretized in a weighted Jacobi basis that is regular at both poles.
//!
//! With `α = |k - s|`, `β = |k + s|` the basis functions are
//! `e_j(x) = (1-x)^{α/2} (1+x)^{β/2} p_j(x)` with `p_j` orthonormal Jacobi polynomials.
//! The `Ω_a`-independent part of the operator is diagonal in this basis with eigenvalues
//! `ℓ(ℓ+1) - s²`, `ℓ = j + (α+β)/2`, and multiplication by `x` is the Jacobi matrix.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kerr::{check_spin, KerrParams};
use crate::numerics::eigen;
use crate::numerics::jacobi::JacobiRecurrence;
use crate::numerics::quadrature::gauss_jacobi;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Relative eigenvalue separation below which neighbours count as one cluster.
const CLUSTER_TOL: f64 = 1e-6;
/// Smallest admissible `|vᵀv|` for a unit eigenvector; smaller values signal an exceptional point.
const SELF_ORTHOGONAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AngularParams {
    pub s: f64,
    pub k: f64,
    /// `Ω_a = -aω`.
    pub omega_a: Complex64,
}

impl AngularParams {
    pub fn new(s: f64, k: f64, omega_a: Complex64) -> Result<Self> {
        check_spin(s, k)?;
        Ok(AngularParams { s, k, omega_a })
    }

    pub fn from_kerr(kerr: &KerrParams, s: f64, k: f64, omega: Complex64) -> Result<Self> {
        Self::new(s, k, -kerr.a * omega)
    }
}

/// Weighted Jacobi basis of a given size for one `(s, k)` pair.
#[derive(Clone, Debug)]
pub struct AngularBasis {
    pub s: f64,
    pub k: f64,
    pub alpha: f64,
    pub beta: f64,
    pub size: usize,
    /// Diagonal of the `Ω_a = 0` operator.
    pub mu: Vec<f64>,
    /// Multiplication by `x`, truncated to `size`.
    pub xmat: DMatrix<f64>,
    /// Multiplication by `x²`, computed before truncation.
    pub x2mat: DMatrix<f64>,
    rec: JacobiRecurrence,
}

impl AngularBasis {
    pub fn new(s: f64, k: f64, size: usize) -> Result<Self> {
        check_spin(s, k)?;
        if size < 2 {
            return Err(Error::InvalidParams("angular basis needs at least two functions".into()));
        }
        let alpha = (k - s).abs();
        let beta = (k + s).abs();
        let rec = JacobiRecurrence::new(alpha, beta);
        let mu = (0..size)
            .map(|j| {
                let l = j as f64 + 0.5 * (alpha + beta);
                l * (l + 1.0) - s * s
            })
            .collect();
        let big = size + 1;
        let mut xb = DMatrix::<f64>::zeros(big, big);
        for j in 0..big {
            xb[(j, j)] = rec.diag(j);
            if j + 1 < big {
                let b = rec.offdiag(j + 1);
                xb[(j, j + 1)] = b;
                xb[(j + 1, j)] = b;
            }
        }
        let x2b = &xb * &xb;
        let xmat = xb.view((0, 0), (size, size)).into_owned();
        let x2mat = x2b.view((0, 0), (size, size)).into_owned();
        Ok(AngularBasis { s, k, alpha, beta, size, mu, xmat, x2mat, rec })
    }

    /// Galerkin matrix of `𝒜_ω` (complex symmetric).
    pub fn operator(&self, omega_a: Complex64) -> DMatrix<Complex64> {
        let n = self.size;
        let o2 = omega_a * omega_a;
        DMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            let diag = if i == j { self.mu[i] } else { 0.0 };
            Complex64::new(diag, 0.0)
                + o2 * (id - self.x2mat[(i, j)])
                + 2.0 * omega_a * (self.k * id - self.s * self.xmat[(i, j)])
        })
    }

    fn real_operator(&self, omega_a: f64) -> DMatrix<f64> {
        let n = self.size;
        let o2 = omega_a * omega_a;
        DMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            let diag = if i == j { self.mu[i] } else { 0.0 };
            diag + o2 * (id - self.x2mat[(i, j)]) + 2.0 * omega_a * (self.k * id - self.s * self.xmat[(i, j)])
        })
    }

    /// `(1-x)^{α/2} (1+x)^{β/2}`.
    pub fn envelope(&self, x: f64) -> f64 {
        (1.0 - x).powf(0.5 * self.alpha) * (1.0 + x).powf(0.5 * self.beta)
    }

    /// `e_0(x) .. e_{size-1}(x)`.
    pub fn eval(&self, x: f64) -> Vec<f64> {
        let env = self.envelope(x);
        self.rec.eval(self.size, x).into_iter().map(|p| p * env).collect()
    }

    /// Gauss–Jacobi collocation grid of `points` nodes with synthesis and analysis matrices.
    pub fn grid(&self, points: usize) -> AngularGrid {
        let (x, w) = gauss_jacobi(points, self.alpha, self.beta);
        let q: Vec<f64> = x.iter().zip(&w).map(|(&xi, &wi)| wi / self.envelope(xi).powi(2)).collect();
        let mut e = DMatrix::<f64>::zeros(points, self.size);
        for (i, &xi) in x.iter().enumerate() {
            for (j, v) in self.eval(xi).into_iter().enumerate() {
                e[(i, j)] = v;
            }
        }
        let theta = x.iter().map(|x| x.acos()).collect();
        AngularGrid { x, theta, q, e }
    }
}

/// Sample points in `x = cos θ` with `L²(dx)` quadrature weights.
#[derive(Clone, Debug)]
pub struct AngularGrid {
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
    pub q: Vec<f64>,
    /// `e[(i, j)] = e_j(x_i)`.
    pub e: DMatrix<f64>,
}

impl AngularGrid {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Basis coefficients `∫ e_j f dx` of grid samples `f`.
    pub fn analyze(&self, f: &[Complex64]) -> DVector<Complex64> {
        let n = self.e.ncols();
        DVector::from_fn(n, |j, _| (0..self.len()).map(|i| f[i] * (self.q[i] * self.e[(i, j)])).sum())
    }

    pub fn synthesize(&self, c: &DVector<Complex64>) -> Vec<Complex64> {
        (0..self.len())
            .map(|i| (0..self.e.ncols()).map(|j| c[j] * self.e[(i, j)]).sum())
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AngularEigenpair {
    pub n: usize,
    pub lambda: Complex64,
    /// Basis coefficients, normalized by `vᵀv = 1` (unconjugated).
    #[serde(skip)]
    pub coeffs: DVector<Complex64>,
    /// Eigenfunction samples on the decomposition grid.
    #[serde(skip)]
    pub samples: Vec<Complex64>,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct EigenOptions {
    pub basis_size: usize,
    pub grid_points: usize,
    /// Solve again at twice the basis size and report the eigenvalue change.
    pub certify: bool,
    pub certify_tol: f64,
    pub residual_tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { basis_size: 256, grid_points: 256, certify: false, certify_tol: 1e-8, residual_tol: 1e-10 }
    }
}

/// Lowest eigenpairs of `𝒜_ω` with the data needed to apply the spectral projectors.
#[derive(Clone, Debug)]
pub struct AngularDecomposition {
    pub params: AngularParams,
    pub pairs: Vec<AngularEigenpair>,
    pub grid: Arc<AngularGrid>,
    /// `max_n |λ_n(N) - λ_n(2N)|` when certified.
    pub certificate: Option<f64>,
}

/// Dense Galerkin matrix of `𝒜_ω` in the pole-regular basis.
pub fn assemble_operator(p: &AngularParams, size: usize) -> Result<DMatrix<Complex64>> {
    Ok(AngularBasis::new(p.s, p.k, size)?.operator(p.omega_a))
}

/// All eigenvalues and coefficient vectors, sorted by real part.
fn solve(basis: &AngularBasis, omega_a: Complex64) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    let n = basis.size;
    if omega_a.im == 0.0 {
        let eig = SymmetricEigen::new(basis.real_operator(omega_a.re));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = order.iter().map(|&i| Complex64::new(eig.eigenvalues[i], 0.0)).collect();
        let vecs = DMatrix::from_fn(n, n, |i, j| {
            // fix the sign so that the leading significant coefficient is positive
            Complex64::new(eig.eigenvectors[(i, order[j])], 0.0)
        });
        return Ok((vals, normalize_signs(vecs)));
    }
    let (vals, vecs) = eigen::eig(basis.operator(omega_a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].re.total_cmp(&vals[b].re));
    let vals: Vec<Complex64> = order.iter().map(|&i| vals[i]).collect();
    let mut out = DMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    for j in 0..n {
        let col = out.column(j);
        let vtv: Complex64 = col.iter().map(|z| z * z).sum();
        if vtv.norm() < SELF_ORTHOGONAL_TOL {
            continue;
        }
        let scale = 1.0 / vtv.sqrt();
        out.column_mut(j).scale_mut(scale.re);
        if scale.im != 0.0 {
            for i in 0..n {
                out[(i, j)] = out[(i, j)] / scale.re * scale;
            }
        }
    }
    Ok((vals, normalize_signs(out)))
}

fn normalize_signs(mut v: DMatrix<Complex64>) -> DMatrix<Complex64> {
    for j in 0..v.ncols() {
        let lead = v.column(j).iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(ZERO);
        if lead.re < 0.0 {
            v.column_mut(j).neg_mut();
        }
    }
    v
}

/// The `n_max + 1` lowest eigenpairs of `𝒜_ω`.
pub fn eigenpairs(p: &AngularParams, n_max: usize, opts: &EigenOptions) -> Result<AngularDecomposition> {
    let basis = AngularBasis::new(p.s, p.k, opts.basis_size)?;
    let grid = Arc::new(basis.grid(opts.grid_points));
    eigenpairs_with(&basis, grid, p, n_max, opts)
}

/// As [`eigenpairs`], reusing a prepared basis and grid.
pub fn eigenpairs_with(
    basis: &AngularBasis,
    grid: Arc<AngularGrid>,
    p: &AngularParams,
    n_max: usize,
    opts: &EigenOptions,
) -> Result<AngularDecomposition> {
    if n_max + 1 > basis.size / 2 {
        return Err(Error::NonConvergence(format!(
            "n_max = {n_max} needs a basis of at least {} functions",
            2 * (n_max + 1)
        )));
    }
    if grid.e.ncols() != basis.size {
        return Err(Error::GridMismatch("grid was built for a different basis size".into()));
    }
    let (vals, vecs) = solve(basis, p.omega_a)?;
    let op = basis.operator(p.omega_a);
    // a cluster straddling the truncation is kept whole
    let mut last = n_max;
    while last + 1 < vals.len() / 2 && (vals[last + 1] - vals[last]).norm() < CLUSTER_TOL * vals[last].norm().max(1.0) {
        last += 1;
    }
    let mut pairs = Vec::with_capacity(last + 1);
    for n in 0..=last {
        let lambda = vals[n];
        if p.omega_a.im == 0.0 && n > 0 && !(vals[n].re >= vals[n - 1].re) {
            return Err(Error::NonConvergence(format!("eigenvalues {} and {} not ordered", n - 1, n)));
        }
        let coeffs = vecs.column(n).into_owned();
        let vtv: Complex64 = coeffs.iter().map(|z| z * z).sum();
        if (vtv - 1.0).norm() > 1e-6 {
            return Err(Error::NearDegenerate { n, vtv: vtv.norm() });
        }
        let residual = eigen::residual(&op, lambda, &coeffs);
        if residual > opts.residual_tol {
            return Err(Error::NonConvergence(format!("eigenpair {n} residual {residual:e}")));
        }
        let samples = grid.synthesize(&coeffs);
        pairs.push(AngularEigenpair { n, lambda, coeffs, samples, residual });
    }
    let certificate = if opts.certify {
        let fine = AngularBasis::new(p.s, p.k, 2 * basis.size)?;
        let (fv, _) = solve(&fine, p.omega_a)?;
        let change = (0..=last).map(|n| (fv[n] - vals[n]).norm()).fold(0.0, f64::max);
        if change > opts.certify_tol * vals[last].norm().max(1.0) {
            return Err(Error::NonConvergence(format!("doubling the basis changes eigenvalues by {change:e}")));
        }
        Some(change)
    } else {
        None
    };
    Ok(AngularDecomposition { params: *p, pairs, grid, certificate })
}

impl AngularDecomposition {
    pub fn lambdas(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    /// Bilinear mode coefficient `⟨Ỹ_n, f⟩` of grid samples.
    pub fn coefficient(&self, f: &[Complex64], n: usize) -> Result<Complex64> {
        if f.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!("{} samples for a grid of {}", f.len(), self.grid.len())));
        }
        let pair = self.pairs.get(n).ok_or_else(|| Error::InvalidParams(format!("mode {n} not computed")))?;
        let c = self.grid.analyze(f);
        Ok(pair.coeffs.iter().zip(c.iter()).map(|(a, b)| a * b).sum())
    }

    /// `P_n f` sampled on the grid.
    pub fn project(&self, f: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
        let c = self.coefficient(f, n)?;
        Ok(self.pairs[n].samples.iter().map(|y| y * c).collect())
    }

    /// `Σ_{n ≤ n_max} P_n f`.
    pub fn reconstruct(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![ZERO; f.len()];
        for n in 0..self.pairs.len() {
            for (o, v) in out.iter_mut().zip(self.project(f, n)?) {
                *o += v;
            }
        }
        Ok(out)
    }
}

/// Fitted constant for the eigenvalue bounds over a sweep of real `Ω_a`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub s: f64,
    pub k: f64,
    pub n_max: usize,
    pub points: usize,
    /// Smallest `c` with `(n+1)²/c ≤ λ_n ≤ c|Ω|(n+1)²` and `λ_n ≥ (1+|Ω|)/c`; `None` if none exists.
    pub c: Option<f64>,
    pub c_lower: f64,
    pub c_upper: f64,
    pub c_lemma: f64,
    pub min_lambda: f64,
    pub pass: bool,
}

pub fn verify_eigenvalue_bounds(s: f64, k: f64, omegas: &[f64], n_max: usize, opts: &EigenOptions) -> Result<BoundReport> {
    let basis = AngularBasis::new(s, k, opts.basis_size)?;
    let (mut c_lower, mut c_upper, mut c_lemma) = (0.0f64, 0.0f64, 0.0f64);
    let mut min_lambda = f64::INFINITY;
    let mut feasible = true;
    for &om in omegas {
        let (vals, _) = solve(&basis, Complex64::new(om, 0.0))?;
        for (n, lam) in vals.iter().take(n_max + 1).enumerate() {
            let lam = lam.re;
            min_lambda = min_lambda.min(lam);
            let n1 = (n + 1) as f64;
            if lam <= 0.0 || om == 0.0 {
                feasible = false;
                continue;
            }
            c_lower = c_lower.max(n1 * n1 / lam);
            c_upper = c_upper.max(lam / (om.abs() * n1 * n1));
            c_lemma = c_lemma.max((1.0 + om.abs()) / lam);
        }
    }
    let c = feasible.then(|| c_lower.max(c_upper).max(c_lemma));
    Ok(BoundReport {
        s,
        k,
        n_max,
        points: omegas.len(),
        c,
        c_lower,
        c_upper,
        c_lemma,
        min_lambda,
        pass: c.is_some_and(f64::is_finite),
    })
}

/// Eigenvalues of `-d²/dθ² + W(θ)` acting on `φ = √(sin θ) Y`.
///
/// Writing `φ = sin(θ/2)^a cos(θ/2)^b g` with `a = |k-s| + 1/2`, `b = |k+s| + 1/2` removes the
/// pole singularities: `g` satisfies
/// `-g'' - (a cot(θ/2) - b tan(θ/2)) g' + (Ω² sin²θ - 2sΩ cos θ + c₀) g = λ g`,
/// which is discretized by Chebyshev collocation on `(0, π)`.
pub fn schrodinger_eigenvalues(p: &AngularParams, n_max: usize, points: usize) -> Result<Vec<Complex64>> {
    check_spin(p.s, p.k)?;
    let (s, k, om) = (p.s, p.k, p.omega_a);
    let a = (k - s).abs() + 0.5;
    let b = (k + s).abs() + 0.5;
    let c0 = Complex64::new((k * k + s * s - 0.25) / 2.0 - s * s - 0.25 + (a + b) / 4.0 + a * b / 2.0, 0.0)
        + 2.0 * om * k;
    let n = points;
    // Chebyshev–Gauss points on [-1, 1] mapped to θ = π(1 + ξ)/2
    let xi: Vec<f64> = (0..n).map(|j| -((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos()).collect();
    let d1 = cheb_diff(&xi);
    let d2 = &d1 * &d1;
    let scale = 2.0 / std::f64::consts::PI;
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let th = std::f64::consts::PI * (1.0 + xi[i]) / 2.0;
        let drift = a / (th / 2.0).tan() - b * (th / 2.0).tan();
        let pot = om * om * th.sin().powi(2) - 2.0 * s * om * th.cos() + c0;
        for j in 0..n {
            let v = -d2[(i, j)] * scale * scale - drift * d1[(i, j)] * scale;
            m[(i, j)] = Complex64::new(v, 0.0);
        }
        m[(i, i)] += pot;
    }
    let (mut vals, _) = eigen::eig(m);
    vals.sort_by(|x, y| x.re.total_cmp(&y.re));
    Ok(vals.into_iter().take(n_max + 1).collect())
}

/// Differentiation matrix for polynomial interpolation through distinct nodes.
fn cheb_diff(x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let w: Vec<f64> = (0..n)
        .map(|j| 1.0 / (0..n).filter(|&k| k != j).map(|k| x[j] - x[k]).product::<f64>())
        .collect();
    let mut d = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                d[(i, j)] = w[j] / w[i] / (x[i] - x[j]);
                diag -= d[(i, j)];
            }
        }
        d[(i, i)] = diag;
    }
    d
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckReport {
    pub galerkin: Vec<Complex64>,
    pub schrodinger: Vec<Complex64>,
    pub max_abs_diff: f64,
}

pub fn schrodinger_form_crosscheck(p: &AngularParams, n_max: usize, opts: &EigenOptions) -> Result<CrossCheckReport> {
    let dec = eigenpairs(p, n_max, opts)?;
    let galerkin = dec.lambdas();
    let points = (2 * (n_max + 1) + 40).max(64);
    let schrodinger = schrodinger_eigenvalues(p, n_max, points)?;
    let max_abs_diff = galerkin.iter().zip(&schrodinger).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(CrossCheckReport { galerkin, schrodinger, max_abs_diff })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(n: usize) -> EigenOptions {
        EigenOptions { basis_size: n, grid_points: n, ..Default::default() }
    }

    #[test]
    fn legendre_limit() {
        let p = AngularParams::new(0.0, 0.0, ZERO).unwrap();
        let dec = eigenpairs(&p, 10, &opts(64)).unwrap();
        for (n, l) in dec.lambdas().iter().enumerate() {
            assert!((l.re - (n * (n + 1)) as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn spin_two_lowest_eigenvalue_at_zero_frequency() {
        let p = AngularParams::new(2.0, 2.0, ZERO).unwrap();
        let dec = eigenpairs(&p, 3, &opts(32)).unwrap();
        // ℓ(ℓ+1) - s² for ℓ = 2, 3, ...
        for (n, l) in dec.lambdas().iter().enumerate() {
            let ell = 2.0 + n as f64;
            assert!((l.re - (ell * (ell + 1.0) - 4.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_parity_mismatch() {
        assert!(matches!(AngularParams::new(0.5, 1.0, ZERO), Err(Error::Parity(_))));
    }

    #[test]
    fn complex_symmetric_projectors_are_biorthogonal() {
        let p = AngularParams::new(2.0, 1.0, Complex64::new(0.8, -0.05)).unwrap();
        let dec = eigenpairs(&p, 5, &opts(40)).unwrap();
        for n in 0..5 {
            for m in 0..5 {
                let c = dec.coefficient(&dec.pairs[m].samples, n).unwrap();
                let e = if n == m { 1.0 } else { 0.0 };
                assert!((c - e).norm() < 1e-10, "n={n} m={m} c={c}");
            }
        }
    }
}
