//! Real zero-mean functions sampled on the uniform torus grid
//! `x_j = 2 pi j / N`, with Fourier helpers and the `BO3G` binary format.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const MAGIC: &[u8; 4] = b"BO3G";

/// Relative size of the sample mean tolerated by the zero-average constraint.
pub const MEAN_TOLERANCE: f64 = 1e-12;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Forward DFT scaled by `1/N`, so `buf[k]` is the Fourier coefficient of
/// mode `k` (negative modes wrap to `N + k`).
pub(crate) fn forward(buf: &mut [Complex64]) {
    let n = buf.len();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(buf));
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
}

/// Inverse of [`forward`]: synthesizes samples from coefficients.
pub(crate) fn inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(buf));
}

/// Signed wavenumber stored at FFT slot `j` of an `n`-point transform.
pub(crate) fn wavenumber(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Samples of a real function with zero average on `N = 2^m` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRecord", into = "GridRecord")]
pub struct TorusGrid {
    samples: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridRecord {
    n: usize,
    samples: Vec<f64>,
}

impl TryFrom<GridRecord> for TorusGrid {
    type Error = Error;

    fn try_from(r: GridRecord) -> Result<Self> {
        if r.n != r.samples.len() {
            return Err(Error::Format(format!(
                "grid header says {} samples but {} are present",
                r.n,
                r.samples.len()
            )));
        }
        TorusGrid::new(r.samples)
    }
}

impl From<TorusGrid> for GridRecord {
    fn from(g: TorusGrid) -> Self {
        GridRecord { n: g.samples.len(), samples: g.samples }
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(invalid(format!("grid size must be a power of two >= 2, got {n}")));
    }
    Ok(())
}

impl TorusGrid {
    /// Validates size, finiteness and the zero-average constraint.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        check_size(samples.len())?;
        if let Some(j) = samples.iter().position(|x| !x.is_finite()) {
            return Err(invalid(format!("non-finite sample at index {j}")));
        }
        let grid = Self { samples };
        let mean = grid.mean();
        if mean.abs() > MEAN_TOLERANCE * grid.max_abs().max(f64::MIN_POSITIVE) {
            return Err(invalid(format!("grid has nonzero mean {mean:e}")));
        }
        Ok(grid)
    }

    /// Projects arbitrary samples onto zero average before validating.
    pub fn zero_mean(mut samples: Vec<f64>) -> Result<Self> {
        check_size(samples.len())?;
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        samples.iter_mut().for_each(|x| *x -= mean);
        Self::new(samples)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    /// Samples `f(x_j)`, then removes the discrete mean.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_size(n)?;
        Self::zero_mean((0..n).map(|j| f(Self::node(j, n))).collect())
    }

    /// Synthesizes real samples from FFT-ordered coefficients; the imaginary
    /// residue of non-Hermitian input is dropped and mode 0 is ignored.
    pub fn from_coefficients(mut coeffs: Vec<Complex64>) -> Result<Self> {
        check_size(coeffs.len())?;
        coeffs[0] = Complex64::new(0.0, 0.0);
        inverse(&mut coeffs);
        Self::zero_mean(coeffs.into_iter().map(|z| z.re).collect())
    }

    pub fn node(j: usize, n: usize) -> f64 {
        2.0 * PI * j as f64 / n as f64
    }

    pub fn size(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.size() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// FFT-ordered Fourier coefficients `u_hat(k)`.
    pub fn coefficients(&self) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        forward(&mut buf);
        buf
    }

    /// Applies a Fourier multiplier `m(k)`; the Nyquist mode is zeroed since
    /// its sign is ambiguous for odd symbols.
    pub fn apply_multiplier(&self, m: impl Fn(i64) -> Complex64) -> Result<Self> {
        let n = self.size();
        let mut buf = self.coefficients();
        for (j, z) in buf.iter_mut().enumerate() {
            *z = if j == n / 2 { Complex64::new(0.0, 0.0) } else { *z * m(wavenumber(j, n)) };
        }
        Self::from_coefficients(buf)
    }

    /// `d/dx` as the multiplier `i k`.
    pub fn derivative(&self) -> Result<Self> {
        self.apply_multiplier(|k| Complex64::new(0.0, k as f64))
    }

    /// `u(. + theta)` by exact Fourier interpolation.
    pub fn shifted(&self, theta: f64) -> Result<Self> {
        self.apply_multiplier(|k| Complex64::from_polar(1.0, k as f64 * theta))
    }

    /// `u(. + 2 pi j / N)` by rotating samples.
    pub fn shifted_by_nodes(&self, j: isize) -> Self {
        let n = self.size() as isize;
        let shift = j.rem_euclid(n) as usize;
        let mut samples = self.samples.clone();
        samples.rotate_left(shift);
        Self { samples }
    }

    /// Band-limited resampling onto `n` points (modes `|k| < min(N, n)/2`).
    pub fn resampled(&self, n: usize) -> Result<Self> {
        check_size(n)?;
        if n == self.size() {
            return Ok(self.clone());
        }
        let src = self.coefficients();
        let m = self.size();
        let keep = (m.min(n) / 2) as i64;
        let mut dst = vec![Complex64::new(0.0, 0.0); n];
        for (j, &z) in src.iter().enumerate() {
            let k = wavenumber(j, m);
            if k.abs() < keep {
                dst[k.rem_euclid(n as i64) as usize] = z;
            }
        }
        Self::from_coefficients(dst)
    }

    /// `L^2` norm under the normalized measure `dx / 2 pi`.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.size() as f64).sqrt()
    }

    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        if self.size() != other.size() {
            return Err(invalid("grid sizes differ"));
        }
        let sum: f64 = self.samples.iter().zip(&other.samples).map(|(a, b)| (a - b).powi(2)).sum();
        Ok((sum / self.size() as f64).sqrt())
    }

    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.size() as u32).to_le_bytes())?;
        for x in &self.samples {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut header = [0u8; 8];
        r.read_exact(&mut header).map_err(|_| Error::Format("truncated BO3G header".into()))?;
        if &header[..4] != MAGIC {
            return Err(Error::Format("bad magic, expected BO3G".into()));
        }
        let n = u32::from_le_bytes(header[4..].try_into().expect("4 bytes")) as usize;
        let mut bytes = vec![0u8; n * 8];
        r.read_exact(&mut bytes)
            .map_err(|_| Error::Format(format!("BO3G body shorter than {n} samples")))?;
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::Format("trailing bytes after BO3G body".into()));
        }
        let samples = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Self::new(samples)
    }

    /// Writes `BO3G` binary unless the extension is `.json`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::to_writer(&mut w, self)?;
        } else {
            self.write_binary(&mut w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(MAGIC) {
            Self::read_binary(bytes.as_slice())
        } else {
            Ok(serde_json::from_slice(&bytes)?)
        }
    }
}

/// Hilbert transform, the multiplier `-i sgn(k)`.
pub fn hilbert_transform(u: &TorusGrid) -> Result<TorusGrid> {
    u.apply_multiplier(|k| Complex64::new(0.0, -(k.signum() as f64)))
}
