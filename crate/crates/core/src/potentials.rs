//! Finite-gap potentials in physical space.
//!
//! One-gap potentials are explicit. Two-gap potentials are written through a
//! rational symbol `Pi u(z) = -z Q'(z) / Q(z)` with
//! `Q(z) = 1 - a z^p - b z^q`; the coefficients are found by Newton iteration
//! against the Lax spectrum, which acts as the forward Birkhoff map. Angles
//! come from the eigenvectors of `L_u`, phase-fixed by `<1|f_0> > 0` and
//! `<f_n|S f_{n-1}> > 0` where `S` is multiplication by `e^{ix}`; then
//! `arg zeta_n = arg(-conj(<f_n|1>))`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::actions::GapSequence;
use crate::error::{invalid, Error, Result};
use crate::grid::TorusGrid;
use crate::lax::{lax_eigensystem, lax_eigenvalues};

/// Grid and truncation on which inversions are solved; symbols are
/// grid-independent, so callers may evaluate them on any grid afterwards.
pub const SOLVE_GRID: usize = 512;
pub const SOLVE_TRUNCATION: usize = 128;

/// Newton stops once every residual is below this.
const NEWTON_TOLERANCE: f64 = 1e-11;
const NEWTON_MAX_ITERATIONS: usize = 100;
const FD_STEP: f64 = 1e-7;
/// Pole radius beyond which the symbol is considered singular.
const SINGULAR_RADIUS: f64 = 0.999;
/// Largest tolerated gap away from the prescribed support.
const OFF_SUPPORT_GAP: f64 = 1e-6;
/// Gaps below this are treated as closed by [`birkhoff_coordinates`].
pub const DEFAULT_GAP_THRESHOLD: f64 = 1e-7;

fn wrap(angle: f64) -> f64 {
    let r = angle.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

fn unit(z: Complex64) -> Complex64 {
    z / z.norm()
}

/// `u(x) = 2 Re(p w e^{ipx} / (1 - w e^{ipx}))`, `w = zeta / sqrt(p + |zeta|^2)`.
pub fn one_gap_potential(p: usize, zeta: Complex64, n: usize) -> Result<TorusGrid> {
    if zeta.norm() == 0.0 || !zeta.norm().is_finite() {
        return Err(invalid("one-gap coordinate must be nonzero and finite"));
    }
    rational_potential(&RationalSymbol::one_gap(p, zeta)?, n)
}

/// Coefficients of `Q(z) = 1 - a z^p - b z^q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalSymbol {
    p: usize,
    q: Option<usize>,
    a: Complex64,
    b: Complex64,
}

impl RationalSymbol {
    pub fn new(p: usize, q: Option<usize>, a: Complex64, b: Complex64) -> Result<Self> {
        if p == 0 {
            return Err(invalid("symbol index p must be >= 1"));
        }
        if let Some(q) = q {
            if q <= p {
                return Err(invalid(format!("symbol indices need p < q, got p = {p}, q = {q}")));
            }
        } else if b.norm() != 0.0 {
            return Err(invalid("coefficient b requires an index q"));
        }
        if !(a.norm().is_finite() && b.norm().is_finite()) {
            return Err(invalid("symbol coefficients must be finite"));
        }
        let sym = Self { p, q, a, b };
        let radius = sym.pole_radius();
        if !(radius < 1.0) {
            return Err(Error::PoleNotExcluded(radius));
        }
        Ok(sym)
    }

    /// `max 1/|z|` over the zeros of `Q`; the potential is smooth iff this is
    /// below 1. `|a| + |b| < 1` is sufficient but not necessary.
    pub fn pole_radius(&self) -> f64 {
        let (p, a, b) = (self.p as i32, self.a, self.b);
        let q = match self.q {
            Some(q) if b.norm() != 0.0 => q,
            _ => return a.norm().powf(1.0 / p as f64),
        };
        if a.norm() == 0.0 {
            return b.norm().powf(1.0 / q as f64);
        }
        if q == 2 * self.p {
            // w = r^p solves w^2 - a w - b = 0.
            let disc = (a * a + 4.0 * b).sqrt();
            let w = ((a + disc) * 0.5).norm().max(((a - disc) * 0.5).norm());
            return w.powf(1.0 / p as f64);
        }
        // Reciprocal roots solve r^q - a r^(q-p) - b = 0: companion matrix.
        let mut companion = DMatrix::<Complex64>::zeros(q, q);
        for i in 1..q {
            companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        companion[(0, q - 1)] = b;
        companion[(q - self.p, q - 1)] += a;
        Schur::new(companion)
            .eigenvalues()
            .map_or(f64::INFINITY, |ev| ev.iter().fold(0.0, |m, z| m.max(z.norm())))
    }

    /// Symbol of the one-gap potential with coordinate `zeta` at `p`.
    pub fn one_gap(p: usize, zeta: Complex64) -> Result<Self> {
        let gamma = zeta.norm_sqr();
        Self::new(p, None, zeta / (p as f64 + gamma).sqrt(), Complex64::new(0.0, 0.0))
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> Option<usize> {
        self.q
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// Symbol of `u(. + tau)`.
    pub fn translated(&self, tau: f64) -> Self {
        let rot = |n: usize| Complex64::from_polar(1.0, n as f64 * tau);
        Self {
            a: self.a * rot(self.p),
            b: self.q.map_or(self.b, |q| self.b * rot(q)),
            ..*self
        }
    }
}

/// `u(x) = 2 Re((p a z^p + q b z^q) / (1 - a z^p - b z^q))`, `z = e^{ix}`.
pub fn rational_potential(sym: &RationalSymbol, n: usize) -> Result<TorusGrid> {
    let radius = sym.pole_radius();
    if !(radius < 1.0) {
        return Err(Error::PoleNotExcluded(radius));
    }
    let (p, q) = (sym.p as f64, sym.q.unwrap_or(0) as f64);
    TorusGrid::from_fn(n, |x| {
        let zp = Complex64::from_polar(1.0, p * x);
        let zq = Complex64::from_polar(1.0, q * x);
        let num = sym.a * zp * p + sym.b * zq * q;
        let den = Complex64::new(1.0, 0.0) - sym.a * zp - sym.b * zq;
        2.0 * (num / den).re
    })
}

/// Damped Newton with a forward-difference Jacobian. `residual` returns the
/// defect vector; `feasible` guards the domain.
fn damped_newton(
    mut residual: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    feasible: impl Fn(&[f64]) -> Result<()>,
    x0: Vec<f64>,
) -> Result<Vec<f64>> {
    let dim = x0.len();
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut x = x0;
    feasible(&x)?;
    let mut r = residual(&x)?;
    for _ in 0..NEWTON_MAX_ITERATIONS {
        if norm(&r) <= NEWTON_TOLERANCE {
            return Ok(x);
        }
        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        for j in 0..dim {
            let mut xp = x.clone();
            xp[j] += FD_STEP;
            let rp = residual(&xp)?;
            for i in 0..dim {
                jac[(i, j)] = (rp[i] - r[i]) / FD_STEP;
            }
        }
        let step = jac
            .lu()
            .solve(&DVector::from_column_slice(&r))
            .ok_or(Error::NoConvergence { iterations: 0, residual: norm(&r) })?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi - lambda * si).collect();
            if feasible(&trial).is_ok() {
                if let Ok(rt) = residual(&trial) {
                    if norm(&rt) < norm(&r) {
                        accepted = Some((trial, rt));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xn, rn)) => {
                x = xn;
                r = rn;
            }
            None => {
                // No descent along the Newton direction: either converged to
                // rounding level or stuck against the domain boundary.
                feasible(&x)?;
                break;
            }
        }
    }
    if norm(&r) <= NEWTON_TOLERANCE {
        Ok(x)
    } else {
        Err(Error::NoConvergence { iterations: NEWTON_MAX_ITERATIONS, residual: norm(&r) })
    }
}

/// Newton domain: nonnegative moduli and a symbol away from singularity.
fn radius_guard(build: impl Fn(&[f64]) -> Result<RationalSymbol>) -> impl Fn(&[f64]) -> Result<()> {
    move |x: &[f64]| {
        if x[0] < 0.0 || x[1] < 0.0 {
            return Err(invalid("negative modulus"));
        }
        let radius = build(x).map_or(f64::INFINITY, |s| s.pole_radius());
        if radius >= SINGULAR_RADIUS {
            return Err(Error::NearSingularSymbol(radius));
        }
        Ok(())
    }
}

fn solve_lab_grid(sym: &RationalSymbol) -> Result<TorusGrid> {
    rational_potential(sym, SOLVE_GRID)
}

/// Rejects potentials with a sizeable gap away from `support`.
fn check_off_support(gaps: &[f64], support: &[usize]) -> Result<()> {
    let resolved = gaps.len() / 2;
    for (i, &gap) in gaps.iter().take(resolved).enumerate() {
        let n = i + 1;
        if !support.contains(&n) && gap.abs() > OFF_SUPPORT_GAP {
            return Err(Error::ExtraGap { index: n, gap });
        }
    }
    Ok(())
}

fn gaps_of(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] - w[0] - 1.0).collect()
}

/// Solves for `(|a|, |b|)` at fixed `arg a = phase_p`, `arg b = phase_q` so
/// that the Lax gaps at `p`, `q` equal `gamma_p`, `gamma_q`.
///
/// Only `q = 2p` yields a genuine two-gap potential within this symbol
/// family; other pairs open extra gaps and are rejected.
pub fn two_gap_from_actions(
    p: usize,
    q: usize,
    gamma_p: f64,
    gamma_q: f64,
    phase_p: f64,
    phase_q: f64,
) -> Result<RationalSymbol> {
    if p == 0 || q <= p {
        return Err(invalid(format!("need 1 <= p < q, got p = {p}, q = {q}")));
    }
    if !(gamma_p > 0.0) || !(gamma_q >= 0.0) || !gamma_p.is_finite() || !gamma_q.is_finite() {
        return Err(invalid("actions must satisfy gamma_p > 0 and gamma_q >= 0"));
    }
    let a0 = (gamma_p / (p as f64 + gamma_p)).sqrt();
    if gamma_q == 0.0 {
        return RationalSymbol::new(
            p,
            Some(q),
            Complex64::from_polar(a0, phase_p),
            Complex64::new(0.0, 0.0),
        );
    }
    let build = |x: &[f64]| {
        RationalSymbol::new(
            p,
            Some(q),
            Complex64::from_polar(x[0], phase_p),
            Complex64::from_polar(x[1], phase_q),
        )
    };
    let residual = |x: &[f64]| -> Result<Vec<f64>> {
        let values = lax_eigenvalues(&solve_lab_grid(&build(x)?)?, SOLVE_TRUNCATION)?;
        let gaps = gaps_of(&values);
        Ok(vec![gaps[p - 1] - gamma_p, gaps[q - 1] - gamma_q])
    };
    let b0 = (gamma_q / (q as f64 + gamma_q)).sqrt().min(0.05);
    let x = damped_newton(residual, radius_guard(build), vec![a0, b0])?;
    let sym = build(&x)?;
    let values = lax_eigenvalues(&solve_lab_grid(&sym)?, SOLVE_TRUNCATION)?;
    check_off_support(&gaps_of(&values), &[p, q])?;
    Ok(sym)
}

/// Birkhoff angles `arg zeta_n`, `n = 1..=upto`, from sorted eigenvectors.
fn angles_from_eigenvectors(vectors: &DMatrix<Complex64>, upto: usize) -> Vec<f64> {
    let m = vectors.nrows();
    let mut prev: Vec<Complex64> = vectors.column(0).iter().copied().collect();
    let fix = unit(prev[0]).conj();
    prev.iter_mut().for_each(|z| *z *= fix);
    let mut angles = vec![0.0; upto + 1];
    for n in 1..=upto {
        let mut v: Vec<Complex64> = vectors.column(n).iter().copied().collect();
        // <f_n | S f_{n-1}> with (S f)[j] = f[j-1].
        let ip: Complex64 = (1..m).map(|j| v[j].conj() * prev[j - 1]).sum();
        let rot = unit(ip);
        v.iter_mut().for_each(|z| *z *= rot);
        angles[n] = (-v[0].conj()).arg();
        prev = v;
    }
    angles
}

/// Numerical forward Birkhoff map of a (finite-gap) potential: actions are
/// the Lax gaps above `threshold` and angles come from the eigenvectors.
pub fn birkhoff_coordinates(u: &TorusGrid, m: usize, threshold: f64) -> Result<GapSequence> {
    let (values, vectors) = lax_eigensystem(u, m)?;
    let gaps = gaps_of(&values);
    let resolved = m / 2;
    let support: Vec<usize> =
        (1..resolved).filter(|&n| gaps[n - 1] > threshold).collect();
    let Some(&last) = support.last() else {
        return Ok(GapSequence::empty());
    };
    let angles = angles_from_eigenvectors(&vectors, last);
    GapSequence::new(
        support.into_iter().map(|n| (n, Complex64::from_polar(gaps[n - 1].sqrt(), angles[n]))),
    )
}

/// Birkhoff coordinates of a symbol's potential at the given indices,
/// measured on the solve grid.
pub fn symbol_coordinates(sym: &RationalSymbol, indices: &[usize]) -> Result<Vec<Complex64>> {
    let (values, vectors) = lax_eigensystem(&solve_lab_grid(sym)?, SOLVE_TRUNCATION)?;
    let gaps = gaps_of(&values);
    let upto = indices.iter().copied().max().unwrap_or(0);
    let angles = angles_from_eigenvectors(&vectors, upto);
    Ok(indices
        .iter()
        .map(|&n| Complex64::from_polar(gaps[n - 1].max(0.0).sqrt(), angles[n]))
        .collect())
}

/// Symbol whose potential has Birkhoff coordinates `g`.
///
/// Supports the empty sequence, one gap, and two gaps at `(p, 2p)`.
pub fn reconstruct_symbol(g: &GapSequence) -> Result<RationalSymbol> {
    match g.entries() {
        [] => RationalSymbol::new(1, None, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        [(p, zeta)] => RationalSymbol::one_gap(*p, *zeta),
        [(p, zp), (q, zq)] => {
            let (p, q) = (*p, *q);
            if q != 2 * p {
                return Err(invalid(format!(
                    "two-gap reconstruction needs q = 2p (got p = {p}, q = {q}); the symbol family opens extra gaps otherwise"
                )));
            }
            let (gamma_p, gamma_q) = (zp.norm_sqr(), zq.norm_sqr());
            // Translation-invariant relative angle.
            let psi = wrap(2.0 * zp.arg() - zq.arg());
            let build = |x: &[f64]| {
                RationalSymbol::new(
                    p,
                    Some(q),
                    Complex64::new(x[0], 0.0),
                    Complex64::from_polar(x[1], x[2]),
                )
            };
            let residual = |x: &[f64]| -> Result<Vec<f64>> {
                let z = symbol_coordinates(&build(x)?, &[p, q])?;
                Ok(vec![
                    z[0].norm_sqr() - gamma_p,
                    z[1].norm_sqr() - gamma_q,
                    wrap(2.0 * z[0].arg() - z[1].arg() - psi),
                ])
            };
            let a0 = (gamma_p / (p as f64 + gamma_p)).sqrt();
            let b0 = (gamma_q / (q as f64 + gamma_q)).sqrt().min(0.05);
            let mut last_err = None;
            let mut solution = None;
            for offset in [0.0, 0.5 * PI, PI, -0.5 * PI] {
                match damped_newton(&residual, radius_guard(build), vec![a0, b0, -psi + offset]) {
                    Ok(x) => {
                        solution = Some(x);
                        break;
                    }
                    Err(e) => last_err = Some(e),
                }
            }
            let Some(x) = solution else {
                return Err(last_err.expect("at least one attempt"));
            };
            let sym = build(&x)?;
            let theta_p = symbol_coordinates(&sym, &[p])?[0].arg();
            let tau = wrap(zp.arg() - theta_p) / p as f64;
            Ok(sym.translated(tau))
        }
        _ => Err(invalid(format!(
            "reconstruction supports at most two gaps, got {}",
            g.len()
        ))),
    }
}

/// Potential with Birkhoff coordinates `g` sampled on `n` points.
pub fn reconstruct(g: &GapSequence, n: usize) -> Result<TorusGrid> {
    rational_potential(&reconstruct_symbol(g)?, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lax::lax_spectrum;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn one_gap_examples() {
        let tiny = one_gap_potential(1, c(1e-8, 0.0), 64).unwrap();
        assert!(tiny.max_abs() <= 3e-8);
        let u = one_gap_potential(1, c(1.0, 0.0), 256).unwrap();
        assert!((u.l2_norm().powi(2) - 2.0).abs() < 1e-12);
        let u = one_gap_potential(2, c(1.0, 0.0), 256).unwrap();
        let half = u.shifted_by_nodes(128);
        let diff = u.samples().iter().zip(half.samples()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-13);
        assert!(one_gap_potential(1, c(0.0, 0.0), 64).is_err());
    }

    #[test]
    fn rational_examples() {
        let zero = RationalSymbol::new(1, Some(2), c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(rational_potential(&zero, 32).unwrap().max_abs(), 0.0);
        let zeta = c(0.4, -0.9);
        let one = one_gap_potential(3, zeta, 128).unwrap();
        let w = zeta / (3.0 + zeta.norm_sqr()).sqrt();
        let sym = RationalSymbol::new(3, Some(5), w, c(0.0, 0.0)).unwrap();
        let same = rational_potential(&sym, 128).unwrap();
        let diff = one.samples().iter().zip(same.samples()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff <= 1e-15);
        let sym = RationalSymbol::new(1, Some(2), c(0.3, 0.0), c(0.2, 0.0)).unwrap();
        let raw: f64 = (0..256)
            .map(|j| {
                let x = TorusGrid::node(j, 256);
                let z = Complex64::from_polar(1.0, x);
                2.0 * ((0.3 * z + 0.4 * z * z) / (1.0 - 0.3 * z - 0.2 * z * z)).re
            })
            .sum::<f64>()
            / 256.0;
        assert!(raw.abs() <= 1e-13);
        assert!(rational_potential(&sym, 256).unwrap().mean().abs() <= 1e-13);
    }

    /// Zeros of `Q` inside `|z| < radius`, by the argument principle.
    fn zeros_inside(sym: &RationalSymbol, radius: f64) -> i64 {
        let q = |z: Complex64| {
            1.0 - sym.a() * z.powu(sym.p() as u32) - sym.b() * z.powu(sym.q().unwrap_or(0) as u32)
        };
        let m = 8192;
        let turns: f64 = (0..m)
            .map(|j| {
                let z0 = Complex64::from_polar(radius, 2.0 * PI * j as f64 / m as f64);
                let z1 = Complex64::from_polar(radius, 2.0 * PI * (j + 1) as f64 / m as f64);
                (q(z1) / q(z0)).arg()
            })
            .sum::<f64>()
            / (2.0 * PI);
        turns.round() as i64
    }

    #[test]
    fn pole_radius_matches_factored_symbols() {
        // Q = (1 - r1 z)(1 - r2 z): a = r1 + r2, b = -r1 r2.
        for (r1, r2) in [(c(0.9, 0.0), c(0.0, -0.8)), (c(0.3, 0.4), c(-0.2, 0.1)), (c(-0.95, 0.0), c(0.95, 0.0))] {
            let sym = RationalSymbol::new(1, Some(2), r1 + r2, -r1 * r2).unwrap();
            assert!((sym.pole_radius() - r1.norm().max(r2.norm())).abs() < 1e-14);
        }
        // Admissible although |a| + |b| > 1.
        assert!(c(0.9, -0.8).norm() + 0.72 > 1.0);
        // p = 2: w = z^2 roots.
        let sym = RationalSymbol::new(2, Some(4), c(0.5, 0.0), c(0.3, 0.0)).unwrap();
        let w = (0.5 + (0.25f64 + 1.2).sqrt()) / 2.0;
        assert!((sym.pole_radius() - w.sqrt()).abs() < 1e-14);
        // General q through the companion matrix, checked by winding numbers.
        for (p, q, a, b) in [(1, 3, c(0.5, 0.2), c(0.4, -0.1)), (2, 5, c(-0.3, 0.6), c(0.2, 0.0)), (1, 4, c(0.0, 0.7), c(0.5, 0.5))] {
            let sym = RationalSymbol { p, q: Some(q), a, b };
            let rho = sym.pole_radius();
            assert_eq!(zeros_inside(&sym, (1.0 - 1e-6) / rho), 0, "{sym:?}");
            assert!(zeros_inside(&sym, (1.0 + 1e-6) / rho) >= 1, "{sym:?}");
        }
    }

    #[test]
    fn singular_symbols_are_rejected() {
        // Q = (1 - z)(1 + 0.5 z) vanishes on the circle.
        assert_eq!(
            RationalSymbol::new(1, Some(2), c(0.5, 0.0), c(0.5, 0.0)),
            Err(Error::PoleNotExcluded(1.0))
        );
        assert!(matches!(
            RationalSymbol::new(1, Some(2), c(0.0, 1.1), c(0.0, 0.0)),
            Err(Error::PoleNotExcluded(_))
        ));
        assert!(RationalSymbol::new(2, Some(2), c(0.1, 0.0), c(0.1, 0.0)).is_err());
    }

    #[test]
    fn one_gap_spectrum_has_the_prescribed_gap() {
        for &(p, zeta) in &[(1usize, c(1.0, 0.0)), (2, c(0.3, 0.4)), (3, c(-1.2, 0.5))] {
            let u = one_gap_potential(p, zeta, 512).unwrap();
            let s = lax_spectrum(&u, 128).unwrap();
            let gaps = s.gaps();
            for n in 1..64 {
                let expected = if n == p { zeta.norm_sqr() } else { 0.0 };
                assert!((gaps[n - 1] - expected).abs() < 1e-8, "p={p} n={n}: {}", gaps[n - 1]);
            }
        }
    }

    #[test]
    fn angle_oracle_recovers_one_gap_coordinates() {
        for &(p, zeta) in &[(1usize, c(1.0, 0.0)), (1, c(-0.3, 0.9)), (2, c(0.2, -0.7)), (3, c(-1.0, -1.0))] {
            let u = one_gap_potential(p, zeta, 512).unwrap();
            let g = birkhoff_coordinates(&u, 128, DEFAULT_GAP_THRESHOLD).unwrap();
            assert_eq!(g.support().collect::<Vec<_>>(), vec![p]);
            assert!((g.get(p).unwrap() - zeta).norm() < 1e-9, "p={p}: {:?}", g.get(p));
        }
    }

    #[test]
    fn two_gap_inversion_round_trips_actions() {
        let sym = two_gap_from_actions(1, 2, 1.0, 0.5, 0.0, 0.0).unwrap();
        let s = lax_spectrum(&rational_potential(&sym, 512).unwrap(), 128).unwrap();
        assert!((s.gap(1) - 1.0).abs() <= 1e-8);
        assert!((s.gap(2) - 0.5).abs() <= 1e-8);
        assert!(s.gaps()[2..64].iter().all(|g| g.abs() < 1e-6));
        assert!((sym.a().re - 0.231_925_05).abs() < 1e-6);
        assert!((sym.b().re - 0.487_950_04).abs() < 1e-6);
    }

    #[test]
    fn two_gap_degenerate_and_perturbative_regimes() {
        let sym = two_gap_from_actions(1, 2, 1.0, 0.0, 0.3, 0.0).unwrap();
        assert_eq!(sym.b(), c(0.0, 0.0));
        assert!((sym.a().norm() - 0.5f64.sqrt()).abs() < 1e-15);
        let sym = two_gap_from_actions(1, 2, 1e-6, 1e-6, 0.0, 0.0).unwrap();
        assert!(sym.a().norm() > 1e-4 && sym.a().norm() < 1e-2);
        assert!(sym.b().norm() > 1e-4 && sym.b().norm() < 1e-2);
    }

    #[test]
    fn other_index_pairs_open_extra_gaps() {
        let err = two_gap_from_actions(1, 3, 0.5, 0.3, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::ExtraGap { .. }), "{err:?}");
    }

    #[test]
    fn reconstruction_matches_prescribed_coordinates() {
        // Targets produced by an admissible symbol, then translated.
        for beta in [2.0, -1.3] {
            let src = RationalSymbol::new(1, Some(2), c(0.2319, 0.0), Complex64::from_polar(0.4879, beta)).unwrap().translated(0.37);
            let z0 = symbol_coordinates(&src, &[1, 2]).unwrap();
            let g = GapSequence::new([(1, z0[0]), (2, z0[1])]).unwrap();
            let sym = reconstruct_symbol(&g).unwrap();
            let z = symbol_coordinates(&sym, &[1, 2]).unwrap();
            assert!((z[0] - z0[0]).norm() < 1e-8, "{z:?} vs {z0:?}");
            assert!((z[1] - z0[1]).norm() < 1e-8, "{z:?} vs {z0:?}");
        }
        // Reachable only with |a| + |b| > 1.
        let far = GapSequence::new([(1, Complex64::from_polar(1.0, 0.7)), (2, Complex64::from_polar(0.5f64.sqrt(), -2.1))]).unwrap();
        let sym = reconstruct_symbol(&far).unwrap();
        assert!(sym.a().norm() + sym.b().norm() > 1.0 && sym.pole_radius() < 1.0);
        let z = symbol_coordinates(&sym, &[1, 2]).unwrap();
        assert!((z[0] - far.get(1).unwrap()).norm() < 1e-8, "{z:?}");
        assert!((z[1] - far.get(2).unwrap()).norm() < 1e-8, "{z:?}");
        let g = GapSequence::new([(1, c(1.0, 0.0)), (2, c(0.5f64.sqrt(), 0.0))]).unwrap();
        let u = reconstruct(&g, 512).unwrap();
        let back = birkhoff_coordinates(&u, 128, DEFAULT_GAP_THRESHOLD).unwrap();
        assert_eq!(back.support().collect::<Vec<_>>(), vec![1, 2]);
        assert!(reconstruct(&GapSequence::new([(1, c(1.0, 0.0)), (3, c(0.5, 0.0))]).unwrap(), 64).is_err());
        assert_eq!(reconstruct(&GapSequence::empty(), 32).unwrap().max_abs(), 0.0);
    }
}
