//! Exact hierarchy flows in Birkhoff coordinates: every flow is a diagonal
//! rotation `zeta_n(t) = zeta_n(0) e^{i omega_n t}` with frequencies frozen by
//! the conserved actions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::actions::GapSequence;
use crate::error::{invalid, Error, Result};
use crate::hierarchy::HierarchyTable;

/// Highest order accepted without the experimental switch.
pub const MAX_STABLE_ORDER: usize = 5;

/// Which Hamiltonian drives the flow and for how long.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub order: usize,
    pub time: f64,
    #[serde(default)]
    pub experimental: bool,
}

impl FlowSpec {
    pub fn new(order: usize, time: f64) -> Result<Self> {
        let spec = Self { order, time, experimental: false };
        spec.validate()?;
        Ok(spec)
    }

    /// Orders above [`MAX_STABLE_ORDER`] are driven by the recurrence alone.
    pub fn experimental(order: usize, time: f64) -> Result<Self> {
        let spec = Self { order, time, experimental: true };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(invalid(format!("flow order must be >= 2, got {}", self.order)));
        }
        if self.order > MAX_STABLE_ORDER && !self.experimental {
            return Err(invalid(format!(
                "flow order {} exceeds {MAX_STABLE_ORDER}; enable the experimental flag",
                self.order
            )));
        }
        if !self.time.is_finite() {
            return Err(invalid("flow time must be finite"));
        }
        Ok(())
    }
}

/// `(hi, lo)` with `hi + lo = a * b` exactly.
fn two_product(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    (hi, a.mul_add(b, -hi))
}

/// `e^{i omega t}` with `omega * t` reduced modulo `2 pi` in double-double
/// arithmetic, so large `n^3 t` keep their low-order digits.
pub fn unit_phase(omega: f64, t: f64) -> Complex64 {
    // 2 pi split into a head and a tail that is exact to ~2^-106.
    const TWO_PI_HI: f64 = 2.0 * PI;
    const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;
    let (hi, lo) = two_product(omega, t);
    if hi == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let turns = (hi / TWO_PI_HI).round();
    let (k_hi, k_lo) = two_product(turns, TWO_PI_HI);
    let reduced = ((hi - k_hi) - k_lo) + (lo - turns * TWO_PI_LO);
    Complex64::from_polar(1.0, reduced)
}

/// `zeta_n -> zeta_n e^{i omega_n^(k) t}`.
pub fn evolve(g: &GapSequence, spec: &FlowSpec) -> Result<GapSequence> {
    spec.validate()?;
    if spec.time == 0.0 || g.is_empty() {
        return Ok(g.clone());
    }
    let table = HierarchyTable::new(&g.actions(), spec.order);
    Ok(g.rotate(|n| unit_phase(table.frequency(spec.order, n), spec.time)))
}

/// Birkhoff image of `u(. + tau)`: `zeta_n -> zeta_n e^{i n tau}`.
pub fn translate(g: &GapSequence, tau: f64) -> GapSequence {
    if tau == 0.0 {
        return g.clone();
    }
    g.rotate(|n| unit_phase(n as f64, tau))
}

/// Default tolerance `1e-10 max(1, |c|)` of the traveling-wave test.
pub fn default_speed_tolerance(c: f64) -> f64 {
    1e-10 * c.abs().max(1.0)
}

/// Common speed `c` with `c n = omega_n^(4)` on the support, if one exists
/// within `tol`.
pub fn traveling_wave_speed(g: &GapSequence, tol: f64) -> Result<Option<f64>> {
    if g.is_empty() {
        return Err(Error::NoSupport);
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let table = HierarchyTable::new(&g.actions(), 4);
    let speeds: Vec<f64> = g.support().map(|n| table.frequency(4, n) / n as f64).collect();
    let lo = speeds.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = speeds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((hi - lo <= tol).then_some(speeds[0]))
}
