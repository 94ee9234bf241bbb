//! Second-order forward-mode jets over the complex numbers.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A value together with its first and second derivative in one variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

impl Jet {
    pub fn constant(v: impl Into<Complex64>) -> Self {
        Jet { v: v.into(), d1: Complex64::new(0.0, 0.0), d2: Complex64::new(0.0, 0.0) }
    }

    /// The independent variable at `x`.
    pub fn variable(x: f64) -> Self {
        Jet { v: Complex64::new(x, 0.0), d1: Complex64::new(1.0, 0.0), d2: Complex64::new(0.0, 0.0) }
    }

    pub fn new(v: Complex64, d1: Complex64, d2: Complex64) -> Self {
        Jet { v, d1, d2 }
    }

    pub fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        let inv2 = inv * inv;
        Jet {
            v: inv,
            d1: -self.d1 * inv2,
            d2: (2.0 * self.d1 * self.d1 * inv - self.d2) * inv2,
        }
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let d1 = self.d1 / (2.0 * s);
        Jet { v: s, d1, d2: (self.d2 - 2.0 * d1 * d1) / (2.0 * s) }
    }

    pub fn powi(self, n: u32) -> Self {
        let mut out = Jet::constant(1.0);
        for _ in 0..n {
            out = out * self;
        }
        out
    }

    pub fn scale(self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        Jet { v: self.v * c, d1: self.d1 * c, d2: self.d2 * c }
    }

    /// Chain rule for a change of variable `x -> y` with `dx/dy = h` and `d^2x/dy^2 = h'·h`,
    /// where `h` is given as a jet in `x`.
    pub fn rechain(self, h: Jet) -> Self {
        Jet {
            v: self.v,
            d1: h.v * self.d1,
            d2: h.v * (h.d1 * self.d1 + h.v * self.d2),
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet { v: self.v + c, ..self }
    }
}

impl Add<Complex64> for Jet {
    type Output = Jet;
    fn add(self, c: Complex64) -> Jet {
        Jet { v: self.v + c, ..self }
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        Jet { v: self.v - c, ..self }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Mul<Complex64> for Jet {
    type Output = Jet;
    fn mul(self, c: Complex64) -> Jet {
        self.scale(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> Complex64, x: f64, h: f64) -> (Complex64, Complex64) {
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn rational_expression_matches_finite_differences() {
        let i = Complex64::i();
        let f = |x: Jet| ((x * x + 0.36) * (x - 1.0) * i + x.powi(3)) / (x * x + 0.36).powi(2);
        let g = |x: f64| f(Jet::variable(x)).v;
        let x = 2.3;
        let j = f(Jet::variable(x));
        let (d1, d2) = fd(g, x, 1e-4);
        assert!((j.d1 - d1).norm() < 1e-7);
        assert!((j.d2 - d2).norm() < 1e-5);
    }

    #[test]
    fn sqrt_derivatives() {
        let x = 1.7;
        let j = (Jet::variable(x) * Jet::variable(x) + 1.0).sqrt();
        let s = (x * x + 1.0f64).sqrt();
        assert!((j.d1.re - x / s).abs() < 1e-14);
        assert!((j.d2.re - 1.0 / s.powi(3)).abs() < 1e-14);
    }
}
