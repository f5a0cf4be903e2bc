//! Truncated Lax operator `L_u = D - T_u` on the Hardy space and the
//! Hamiltonians it defines, next to their physical-space integrals.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{hilbert_transform, TorusGrid};
use crate::hierarchy::ipow;

/// Default truncation of the Hardy space.
pub const DEFAULT_TRUNCATION: usize = 128;

/// Eigenvalue spacing below which the spectrum is reported as degenerate.
const MIN_SPACING: f64 = 1e-12;

/// Sorted truncated spectrum of `L_u` with the weights `|<1|f_n>|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaxSummary {
    pub truncation: usize,
    pub eigenvalues: Vec<f64>,
    pub overlaps: Vec<f64>,
}

impl LaxSummary {
    /// `gamma_n = lambda_n - lambda_{n-1} - 1` for `n = 1..M-1`; entry `n-1`
    /// holds `gamma_n`.
    pub fn gaps(&self) -> Vec<f64> {
        self.eigenvalues.windows(2).map(|w| w[1] - w[0] - 1.0).collect()
    }

    pub fn gap(&self, n: usize) -> f64 {
        self.eigenvalues[n] - self.eigenvalues[n - 1] - 1.0
    }

    pub fn overlap_sum(&self) -> f64 {
        self.overlaps.iter().sum()
    }

    /// Default cutoff of resolved eigenvalues used by
    /// [`hamiltonian_via_lax`]: the lower half of the truncated spectrum.
    pub fn default_cutoff(&self) -> usize {
        (self.truncation / 2).max(1)
    }
}

/// Fourier coefficients of `u`, rejecting grids whose mean is not negligible.
fn checked_coefficients(u: &TorusGrid, m: usize) -> Result<Vec<Complex64>> {
    if m == 0 || 4 * m > u.size() {
        return Err(invalid(format!(
            "truncation {m} must satisfy 1 <= M <= N/4 for grid size {}",
            u.size()
        )));
    }
    let coeffs = u.coefficients();
    if coeffs[0].norm() > 1e-12 * u.max_abs().max(f64::MIN_POSITIVE) {
        return Err(invalid("Lax operator requires a zero-mean potential"));
    }
    Ok(coeffs)
}

/// `L(n, m) = n delta_{nm} - u_hat(n - m)` for `0 <= n, m < M`.
pub fn lax_matrix(u: &TorusGrid, m: usize) -> Result<DMatrix<Complex64>> {
    let coeffs = checked_coefficients(u, m)?;
    let size = u.size();
    let uhat = |k: i64| coeffs[k.rem_euclid(size as i64) as usize];
    Ok(DMatrix::from_fn(m, m, |r, c| {
        let diag = if r == c { Complex64::new(r as f64, 0.0) } else { Complex64::new(0.0, 0.0) };
        diag - uhat(r as i64 - c as i64)
    }))
}

fn check_spacing(eigenvalues: &[f64]) -> Result<()> {
    if let Some(w) = eigenvalues.windows(2).find(|w| w[1] - w[0] < MIN_SPACING) {
        return Err(Error::EigenSolver(format!(
            "degenerate eigenvalues {} and {} violate the gap law",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Hermitian eigen-decomposition sorted ascending; column `n` of the returned
/// matrix is the eigenvector of `lambda_n`.
pub(crate) fn lax_eigensystem(u: &TorusGrid, m: usize) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let matrix = lax_matrix(u, m)?;
    let eig = SymmetricEigen::try_new(matrix, f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenSolver("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenSolver("non-finite eigenvalue".into()));
    }
    check_spacing(&values)?;
    let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Sorted eigenvalues only; cheaper when the overlaps are not needed.
pub(crate) fn lax_eigenvalues(u: &TorusGrid, m: usize) -> Result<Vec<f64>> {
    let matrix = lax_matrix(u, m)?;
    let mut values: Vec<f64> = matrix.symmetric_eigenvalues().iter().copied().collect();
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenSolver("non-finite eigenvalue".into()));
    }
    values.sort_by(f64::total_cmp);
    check_spacing(&values)?;
    Ok(values)
}

pub fn lax_spectrum(u: &TorusGrid, m: usize) -> Result<LaxSummary> {
    let (eigenvalues, vectors) = lax_eigensystem(u, m)?;
    let overlaps = (0..m).map(|n| vectors[(0, n)].norm_sqr()).collect();
    Ok(LaxSummary { truncation: m, eigenvalues, overlaps })
}

/// `H_k = sum_n |<1|f_n>|^2 lambda_n^k` over the default cutoff.
pub fn hamiltonian_via_lax(summary: &LaxSummary, k: u32) -> f64 {
    hamiltonian_via_lax_with_cutoff(summary, k, summary.default_cutoff())
}

pub fn hamiltonian_via_lax_with_cutoff(summary: &LaxSummary, k: u32, cutoff: usize) -> f64 {
    summary
        .eigenvalues
        .iter()
        .zip(&summary.overlaps)
        .take(cutoff)
        .map(|(&lambda, &w)| w * ipow(lambda, k))
        .sum()
}

fn grid_mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.sum::<f64>() / n as f64
}

/// `H_2 = ||u||^2 / 2` under the normalized measure.
pub fn h2_physical(u: &TorusGrid) -> f64 {
    0.5 * u.l2_norm().powi(2)
}

/// `H_3 = (1/2 pi) int (u H u_x / 2 - u^3 / 3)`.
pub fn h3_physical(u: &TorusGrid) -> Result<f64> {
    let hux = hilbert_transform(&u.derivative()?)?;
    let s = u.samples();
    Ok(grid_mean(
        s.iter().zip(hux.samples()).map(|(&v, &h)| 0.5 * v * h - v * v * v / 3.0),
        u.size(),
    ))
}

/// Physical-space `H_4`:
/// `(1/2 pi) int (u_x^2 / 2 - 3/4 u^2 H u_x + u^4 / 4) + H_2^2 / 2`.
///
/// The `+ H_2^2 / 2` sign is the one that reproduces the Lax-operator
/// definition `sum |<1|f_n>|^2 lambda_n^4`; with `- H_2^2 / 2` the two
/// disagree by exactly `H_2^2` on every finite-gap potential.
pub fn h4_physical(u: &TorusGrid) -> Result<f64> {
    let ux = u.derivative()?;
    let hux = hilbert_transform(&ux)?;
    let s = u.samples();
    let integral = grid_mean(
        s.iter().zip(ux.samples()).zip(hux.samples()).map(|((&v, &d), &h)| {
            0.5 * d * d - 0.75 * v * v * h + 0.25 * v * v * v * v
        }),
        u.size(),
    );
    let h2 = h2_physical(u);
    Ok(integral + 0.5 * h2 * h2)
}
