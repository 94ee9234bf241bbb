//! Gauss rules and cumulative integration on uniform grids.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use super::jacobi::JacobiRecurrence;

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Jacobi rule for the weight (1-x)^alpha (1+x)^beta, by Golub–Welsch.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let rec = JacobiRecurrence::new(alpha, beta);
    let mut t = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        t[(j, j)] = rec.diag(j);
        if j + 1 < n {
            let b = rec.offdiag(j + 1);
            t[(j, j + 1)] = b;
            t[(j + 1, j)] = b;
        }
    }
    let eig = SymmetricEigen::new(t);
    let mu0 = jacobi_moment(alpha, beta);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Integral of (1-x)^alpha (1+x)^beta over [-1, 1].
pub fn jacobi_moment(alpha: f64, beta: f64) -> f64 {
    ((alpha + beta + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(alpha + beta + 2.0))
    .exp()
}

/// Composite Gauss–Legendre rule over panels with the given edges.
pub fn panel_rule(edges: &[f64], order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let mut x = Vec::with_capacity(order * edges.len());
    let mut w = Vec::with_capacity(order * edges.len());
    for e in edges.windows(2) {
        let (mid, half) = (0.5 * (e[0] + e[1]), 0.5 * (e[1] - e[0]));
        for (xi, wi) in gx.iter().zip(&gw) {
            x.push(mid + half * xi);
            w.push(half * wi);
        }
    }
    (x, w)
}

/// Cumulative integral on a uniform grid: `out[i] = ∫_{x_0}^{x_i} f`, using local
/// Lagrange interpolation of degree `2m - 1` over each cell (order `2m` accurate).
pub fn cumulative_uniform<T>(f: &[T], h: f64, m: usize) -> Vec<T>
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = f.len();
    let mut out = vec![T::default(); n];
    if n < 2 {
        return out;
    }
    let width = (2 * m).min(n);
    let weights = cell_weights(width);
    for i in 0..n - 1 {
        let start = (i + 1).saturating_sub(width / 2).min(n - width);
        let ws = &weights[i - start];
        let mut acc = T::default();
        for (j, wj) in ws.iter().enumerate() {
            acc = acc + f[start + j] * (wj * h);
        }
        out[i + 1] = out[i] + acc;
    }
    out
}

/// Weights `w[c][j]` with `∫_{c}^{c+1} p(x) dx = Σ_j w[c][j] p(j)` for the interpolant
/// through nodes `0..width`.
fn cell_weights(width: usize) -> Vec<Vec<f64>> {
    let (gx, gw) = gauss_legendre(width.max(2));
    (0..width.saturating_sub(1))
        .map(|c| {
            let mut w = vec![0.0; width];
            for (xg, wg) in gx.iter().zip(&gw) {
                let x = c as f64 + 0.5 + 0.5 * xg;
                for (j, wj) in w.iter_mut().enumerate() {
                    let mut l = 1.0;
                    for k in 0..width {
                        if k != j {
                            l *= (x - k as f64) / (j as f64 - k as f64);
                        }
                    }
                    *wj += 0.5 * wg * l;
                }
            }
            w
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_rule_moments() {
        let (x, w) = gauss_jacobi(12, 2.0, 1.0);
        let total: f64 = w.iter().sum();
        assert!((total - jacobi_moment(2.0, 1.0)).abs() < 1e-13);
        // x^2 = (1 - (1-x))^2 expanded in powers of (1-x)
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m = |p: f64| jacobi_moment(2.0 + p, 1.0);
        let exact = m(0.0) - 2.0 * m(1.0) + m(2.0);
        assert!((s - exact).abs() < 1e-13, "{s} {exact}");
    }

    #[test]
    fn cumulative_is_high_order() {
        let n = 201;
        let h = 4.0 / (n - 1) as f64;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).cos()).collect();
        let c = cumulative_uniform(&f, h, 4);
        let err = (0..n).map(|i| (c[i] - (i as f64 * h).sin()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-13, "{err}");
    }
}
