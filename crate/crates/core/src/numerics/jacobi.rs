//! Orthonormal Jacobi polynomials and their three-term recurrence.

use super::quadrature::jacobi_moment;

/// Recurrence `x p_j = b_{j+1} p_{j+1} + a_j p_j + b_j p_{j-1}` for polynomials
/// orthonormal under `(1-x)^alpha (1+x)^beta` on [-1, 1].
#[derive(Clone, Copy, Debug)]
pub struct JacobiRecurrence {
    pub alpha: f64,
    pub beta: f64,
}

impl JacobiRecurrence {
    pub fn new(alpha: f64, beta: f64) -> Self {
        JacobiRecurrence { alpha, beta }
    }

    pub fn diag(&self, j: usize) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        if j == 0 {
            return (b - a) / (a + b + 2.0);
        }
        let t = 2.0 * j as f64 + a + b;
        (b * b - a * a) / (t * (t + 2.0))
    }

    /// Coupling between degrees `j - 1` and `j`, for `j >= 1`.
    pub fn offdiag(&self, j: usize) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let jf = j as f64;
        let t = 2.0 * jf + a + b;
        (4.0 * jf * (jf + a) * (jf + b) * (jf + a + b) / (t * t * (t + 1.0) * (t - 1.0))).sqrt()
    }

    /// Values `p_0(x) .. p_{n-1}(x)`.
    pub fn eval(&self, n: usize, x: f64) -> Vec<f64> {
        let mut p = vec![0.0; n];
        if n == 0 {
            return p;
        }
        p[0] = 1.0 / jacobi_moment(self.alpha, self.beta).sqrt();
        if n > 1 {
            p[1] = (x - self.diag(0)) * p[0] / self.offdiag(1);
        }
        for j in 1..n.saturating_sub(1) {
            p[j + 1] = ((x - self.diag(j)) * p[j] - self.offdiag(j) * p[j - 1]) / self.offdiag(j + 1);
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature::gauss_jacobi;

    #[test]
    fn orthonormal_under_gauss_jacobi() {
        for &(a, b) in &[(0.0, 0.0), (0.0, 4.0), (3.0, 1.0), (2.0, 2.0)] {
            let rec = JacobiRecurrence::new(a, b);
            let (x, w) = gauss_jacobi(30, a, b);
            let vals: Vec<Vec<f64>> = x.iter().map(|&xi| rec.eval(12, xi)).collect();
            for i in 0..12 {
                for j in 0..12 {
                    let g: f64 = (0..30).map(|q| w[q] * vals[q][i] * vals[q][j]).sum();
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((g - e).abs() < 1e-12, "a={a} b={b} i={i} j={j} g={g}");
                }
            }
        }
    }

    #[test]
    fn legendre_normalization() {
        let rec = JacobiRecurrence::new(0.0, 0.0);
        let p = rec.eval(4, 0.3);
        let p3 = 0.5 * (5.0 * 0.3f64.powi(3) - 3.0 * 0.3);
        assert!((p[3] - p3 * (3.5f64).sqrt()).abs() < 1e-14);
    }
}
