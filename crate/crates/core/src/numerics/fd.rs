//! Centered finite-difference stencils on uniform grids.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Half-width and weights (offsets `-m..=m`) of the centered second-derivative stencil.
pub fn second_derivative(order: usize) -> Result<&'static [f64]> {
    Ok(match order {
        2 => &[1.0, -2.0, 1.0],
        4 => &[-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
        6 => &[1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
        8 => &[
            -1.0 / 560.0,
            8.0 / 315.0,
            -1.0 / 5.0,
            8.0 / 5.0,
            -205.0 / 72.0,
            8.0 / 5.0,
            -1.0 / 5.0,
            8.0 / 315.0,
            -1.0 / 560.0,
        ],
        _ => return Err(Error::InvalidParams(format!("unsupported finite-difference order {order}"))),
    })
}

pub fn first_derivative(order: usize) -> Result<&'static [f64]> {
    Ok(match order {
        2 => &[-0.5, 0.0, 0.5],
        4 => &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
        6 => &[-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
        8 => &[
            1.0 / 280.0,
            -4.0 / 105.0,
            1.0 / 5.0,
            -4.0 / 5.0,
            0.0,
            4.0 / 5.0,
            -1.0 / 5.0,
            4.0 / 105.0,
            -1.0 / 280.0,
        ],
        _ => return Err(Error::InvalidParams(format!("unsupported finite-difference order {order}"))),
    })
}

/// Applies a centered stencil along a strided line, treating values beyond the ends as zero.
/// `out[i*stride] = scale * Σ_k w[k] f[(i + k - m)*stride]`.
pub fn apply_strided(
    w: &[f64],
    scale: f64,
    f: &[Complex64],
    n: usize,
    stride: usize,
    offset: usize,
    out: &mut [Complex64],
) {
    let m = w.len() / 2;
    for i in 0..n {
        let lo = i.saturating_sub(m);
        let hi = (i + m).min(n - 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in lo..=hi {
            acc += f[offset + j * stride] * w[j + m - i];
        }
        out[offset + i * stride] = acc * scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_converge_at_stated_order() {
        for &order in &[2usize, 4, 6, 8] {
            let w = second_derivative(order).unwrap();
            let err = |h: f64| {
                let m = (w.len() / 2) as i64;
                let x0 = 0.3;
                let s: f64 = (-m..=m).map(|k| w[(k + m) as usize] * (x0 + k as f64 * h).sin()).sum();
                (s / (h * h) + x0.sin()).abs()
            };
            let rate = (err(0.2) / err(0.1)).log2();
            assert!(rate > order as f64 - 0.3, "order {order} rate {rate}");
        }
    }

    #[test]
    fn first_derivative_exact_on_cubics() {
        let w = first_derivative(4).unwrap();
        let f = |x: f64| x * x * x - 2.0 * x;
        let h = 0.1;
        let s: f64 = (0..5).map(|k| w[k] * f(1.0 + (k as f64 - 2.0) * h)).sum::<f64>() / h;
        assert!((s - 1.0).abs() < 1e-12);
    }
}
