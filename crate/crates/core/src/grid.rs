//! Uniform grids in the Regge–Wheeler coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `u_i = start + i·step`, `i = 0..len`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl UniformGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0) || len < 2 || !start.is_finite() {
            return Err(Error::InvalidParams(format!("invalid grid start {start}, step {step}, len {len}")));
        }
        Ok(UniformGrid { start, step, len })
    }

    /// Grid on `[lo, hi]` with spacing at most `step`.
    pub fn spanning(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(hi > lo) || !(step > 0.0) {
            return Err(Error::InvalidParams(format!("invalid interval [{lo}, {hi}] with step {step}")));
        }
        let cells = ((hi - lo) / step).ceil() as usize;
        Self::new(lo, (hi - lo) / cells as f64, cells + 1)
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    #[inline]
    pub fn at(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.at(i)).collect()
    }

    /// Indices whose points lie in `[lo, hi]`.
    pub fn indices_in(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = ((lo - self.start) / self.step).ceil().max(0.0) as usize;
        let b = (((hi - self.start) / self.step).floor() + 1.0).clamp(0.0, self.len as f64) as usize;
        a.min(b)..b
    }

    /// Every `factor`-th point of a grid refined by `factor` coincides with this grid.
    pub fn refined(&self, factor: usize) -> Self {
        UniformGrid { start: self.start, step: self.step / factor as f64, len: (self.len - 1) * factor + 1 }
    }
}
