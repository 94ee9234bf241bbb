//! Field snapshots shared by the spectral propagator and the time-domain integrator.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic  b"TKSNAP\0\x01"
//! f64    t, s, k, u_start, u_step
//! u64    n_u, n_theta
//! f64    theta[n_theta]
//! f64    (re, im) of Φ   row-major, u outer
//! f64    (re, im) of i∂ₜΦ
//! ```
//!
//! The CSV form has one row per grid point: `t,u,theta,phi_re,phi_im,phi_t_re,phi_t_im`.

use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::propagator::WaveState;

const MAGIC: &[u8; 8] = b"TKSNAP\0\x01";

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub grid: UniformGrid,
    pub theta: Vec<f64>,
    pub state: WaveState,
}

fn io_err(e: io::Error) -> Error {
    Error::InvalidParams(format!("snapshot i/o: {e}"))
}

impl Snapshot {
    pub fn new(t: f64, grid: UniformGrid, theta: Vec<f64>, state: WaveState) -> Result<Self> {
        if state.phi.dim() != (grid.len, theta.len()) || state.phi_t.dim() != state.phi.dim() {
            return Err(Error::GridMismatch("snapshot state does not match its grid".into()));
        }
        Ok(Snapshot { t, grid, theta, state })
    }

    pub fn write_binary<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        let mut put = |b: &[u8]| w.write_all(b).map_err(io_err);
        put(MAGIC)?;
        for v in [self.t, self.state.s, self.state.k, self.grid.start, self.grid.step] {
            put(&v.to_le_bytes())?;
        }
        put(&(self.grid.len as u64).to_le_bytes())?;
        put(&(self.theta.len() as u64).to_le_bytes())?;
        for v in &self.theta {
            put(&v.to_le_bytes())?;
        }
        for field in [&self.state.phi, &self.state.phi_t] {
            for z in field.iter() {
                put(&z.re.to_le_bytes())?;
                put(&z.im.to_le_bytes())?;
            }
        }
        w.flush().map_err(io_err)
    }

    pub fn read_binary<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io_err)?;
        if &magic != MAGIC {
            return Err(Error::InvalidParams("not a snapshot file or unsupported version".into()));
        }
        let mut f = || -> Result<f64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(io_err)?;
            Ok(f64::from_le_bytes(b))
        };
        let (t, s, k, start, step) = (f()?, f()?, f()?, f()?, f()?);
        // the u64 dimensions are read through their bit patterns
        let (nu, nt) = (f()?.to_bits() as usize, f()?.to_bits() as usize);
        if nu.checked_mul(nt).is_none_or(|n| n > 1 << 32) {
            return Err(Error::InvalidParams("snapshot dimensions out of range".into()));
        }
        let theta = (0..nt).map(|_| f()).collect::<Result<Vec<f64>>>()?;
        let mut field = || -> Result<Array2<Complex64>> {
            let v = (0..nu * nt).map(|_| Ok(Complex64::new(f()?, f()?))).collect::<Result<Vec<_>>>()?;
            Array2::from_shape_vec((nu, nt), v).map_err(|e| Error::GridMismatch(e.to_string()))
        };
        let phi = field()?;
        let phi_t = field()?;
        let grid = UniformGrid::new(start, step, nu)?;
        Snapshot::new(t, grid, theta, WaveState { s, k, phi, phi_t, support: None })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        writeln!(w, "t,u,theta,phi_re,phi_im,phi_t_re,phi_t_im").map_err(io_err)?;
        for i in 0..self.grid.len {
            let u = self.grid.at(i);
            for (j, th) in self.theta.iter().enumerate() {
                let (p, q) = (self.state.phi[(i, j)], self.state.phi_t[(i, j)]);
                writeln!(w, "{:e},{:e},{:e},{:e},{:e},{:e},{:e}", self.t, u, th, p.re, p.im, q.re, q.im)
                    .map_err(io_err)?;
            }
        }
        w.flush().map_err(io_err)
    }
}

/// Number of data rows in a snapshot CSV.
pub fn csv_rows<R: Read>(r: R) -> Result<usize> {
    let lines = BufReader::new(r).lines().count();
    Ok(lines.saturating_sub(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip_is_exact() {
        let grid = UniformGrid::new(-1.5, 0.25, 5).unwrap();
        let mut st = WaveState::zeros(2.0, -1.0, (5, 3));
        for ((i, j), z) in st.phi.indexed_iter_mut() {
            *z = Complex64::new(i as f64 / 3.0, -(j as f64).exp());
        }
        st.phi_t[(4, 2)] = Complex64::new(f64::MIN_POSITIVE, 1e300);
        let snap = Snapshot::new(-5.0, grid, vec![0.1, 1.2, 3.0], st).unwrap();
        let mut buf = vec![];
        snap.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 7 * 8 + 3 * 8 + 2 * 15 * 16);
        assert_eq!(Snapshot::read_binary(&buf[..]).unwrap(), snap);
        let mut csv = vec![];
        snap.write_csv(&mut csv).unwrap();
        assert_eq!(csv_rows(&csv[..]).unwrap(), 15);
        buf[7] = 2;
        assert!(Snapshot::read_binary(&buf[..]).is_err());
    }
}
