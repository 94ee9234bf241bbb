//! Dense complex eigen-decomposition through the complex Schur form.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigenvalues and right eigenvectors (columns, unit 2-norm) of a general complex matrix.
pub fn eig(m: DMatrix<Complex64>) -> (Vec<Complex64>, DMatrix<Complex64>) {
    let n = m.nrows();
    let (q, t) = m.schur().unpack();
    let vals: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let lam = vals[k];
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lam;
            if d.norm() < 1e-14 * scale {
                d = Complex64::new(1e-14 * scale, 0.0);
            }
            y[(i, k)] = -acc / d;
        }
    }
    let mut v = q * y;
    for k in 0..n {
        let nrm = v.column(k).norm();
        v.column_mut(k).scale_mut(1.0 / nrm);
    }
    (vals, v)
}

/// Residual `‖A v - λ v‖ / (‖A‖_max ‖v‖)` for one eigenpair.
pub fn residual(m: &DMatrix<Complex64>, lam: Complex64, v: &DVector<Complex64>) -> f64 {
    let r = m * v - v * lam;
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    r.norm() / (scale * v.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenpairs_of_non_normal_matrix() {
        let i = Complex64::i();
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                Complex64::new(2.0, 0.0), 1.0 + i, Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0), -1.0 + 0.5 * i, 3.0 * i,
                Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(4.0, -1.0),
            ],
        );
        let (vals, vecs) = eig(m.clone());
        for k in 0..3 {
            let v = vecs.column(k).into_owned();
            assert!(residual(&m, vals[k], &v) < 1e-13);
        }
        let tr: Complex64 = vals.iter().sum();
        assert!((tr - Complex64::new(5.0, -0.5)).norm() < 1e-12);
    }
}
