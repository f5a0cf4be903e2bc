//! Hamiltonians `H_k` and frequencies `omega_n^(k) = dH_k/dgamma_n` of the
//! Benjamin-Ono hierarchy, as functions of the actions of a finite-gap
//! potential.
//!
//! The engine runs the generating-function recurrences
//!
//! ```text
//! H_k         = (1/k) sum_{l<k} P_l H_{k-1-l}
//! omega_n^(k) = (1/k) sum_{l<k} (dP_l/dgamma_n) H_{k-1-l} + P_l omega_n^(k-1-l)
//! ```
//!
//! with `P_l` and its gradient written through the Lax eigenvalues
//! `lambda_n = n - s_{n+1}`. The closed forms for `omega^(3)`, `omega^(4)` and
//! `omega^(5)` are evaluated independently by enumerating min-kernel sums over
//! the support and serve as oracles for the recurrence.

use crate::actions::ActionSpectrum;

/// `x^k` by repeated multiplication.
pub(crate) fn ipow(x: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..k {
        acc *= x;
    }
    acc
}

/// `(x^m - y^m) / (x - y) = sum_{j<m} x^j y^{m-1-j}`, free of cancellation.
fn difference_quotient(x: f64, y: f64, m: u32) -> f64 {
    let mut acc = 0.0;
    let mut xj = 1.0;
    for j in 0..m {
        acc += xj * ipow(y, m - 1 - j);
        xj *= x;
    }
    acc
}

/// `P_l = (-1)^{l+1} s_1^{l+1} + sum_n (n - s_{n+1})^{l+1} - (n - s_n)^{l+1}`.
///
/// Each bracket is evaluated in factored form `gamma_n * sum_m x^m y^{l-m}`
/// with `x = lambda_n` and `y = lambda_{n-1} + 1`, so no large powers cancel.
pub fn p_coefficient(a: &ActionSpectrum, l: u32) -> f64 {
    if l == 0 {
        return 0.0;
    }
    let tails = a.support_tail_sums();
    let s1 = tails.first().copied().unwrap_or(0.0);
    let head = ipow(-s1, l + 1);
    let body: f64 = a
        .entries()
        .iter()
        .enumerate()
        .map(|(i, &(n, gamma))| {
            let s_next = tails.get(i + 1).copied().unwrap_or(0.0);
            let lambda_n = n as f64 - s_next;
            let shifted = n as f64 - tails[i];
            gamma * difference_quotient(lambda_n, shifted, l + 1)
        })
        .sum();
    head + body
}

/// `dP_l/dgamma_n = (l+1) sum_{p=1}^{n} (p - s_p)^l - (p - 1 - s_p)^l`.
///
/// Past the last supported index `s_p = 0` and the sum telescopes to
/// `n^l - m^l`, so the loop stops at `min(n, max support)`.
pub fn p_derivative(a: &ActionSpectrum, l: u32, n: usize) -> f64 {
    if l == 0 || n == 0 {
        return 0.0;
    }
    let tails = a.support_tail_sums();
    let entries = a.entries();
    let last = a.max_index().unwrap_or(0).min(n);
    let mut cursor = 0;
    let mut sum = 0.0;
    for p in 1..=last {
        while cursor < entries.len() && entries[cursor].0 < p {
            cursor += 1;
        }
        let s_p = tails.get(cursor).copied().unwrap_or(0.0);
        let x = p as f64 - s_p;
        sum += difference_quotient(x, x - 1.0, l);
    }
    if n > last {
        sum += ipow(n as f64, l) - ipow(last as f64, l);
    }
    (l + 1) as f64 * sum
}

/// Cached `P_0..P_{K-1}` and `H_0..H_K` for one spectrum; frequencies are
/// recomputed per index on request.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyTable {
    spectrum: ActionSpectrum,
    max_order: usize,
    p: Vec<f64>,
    h: Vec<f64>,
}

impl HierarchyTable {
    pub fn new(spectrum: &ActionSpectrum, max_order: usize) -> Self {
        let p: Vec<f64> =
            (0..max_order.max(1)).map(|l| p_coefficient(spectrum, l as u32)).collect();
        let mut h = vec![0.0; max_order + 1];
        h[0] = 1.0;
        for k in 2..=max_order {
            let sum: f64 = (1..k).map(|l| p[l] * h[k - 1 - l]).sum();
            h[k] = sum / k as f64;
        }
        Self { spectrum: spectrum.clone(), max_order, p, h }
    }

    pub fn spectrum(&self) -> &ActionSpectrum {
        &self.spectrum
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn p_coefficients(&self) -> &[f64] {
        &self.p[..self.max_order]
    }

    pub fn hamiltonians(&self) -> &[f64] {
        &self.h
    }

    pub fn hamiltonian(&self, k: usize) -> f64 {
        assert!(k <= self.max_order, "order {k} beyond table order {}", self.max_order);
        self.h[k]
    }

    /// `omega_n^(0..=K)`.
    pub fn frequencies(&self, n: usize) -> Vec<f64> {
        let k_max = self.max_order;
        let dp: Vec<f64> =
            (0..k_max).map(|l| p_derivative(&self.spectrum, l as u32, n)).collect();
        let mut omega = vec![0.0; k_max + 1];
        for k in 1..=k_max {
            let sum: f64 =
                (0..k).map(|l| dp[l] * self.h[k - 1 - l] + self.p[l] * omega[k - 1 - l]).sum();
            omega[k] = sum / k as f64;
        }
        omega
    }

    pub fn frequency(&self, k: usize, n: usize) -> f64 {
        assert!(k <= self.max_order, "order {k} beyond table order {}", self.max_order);
        self.frequencies(n)[k]
    }
}

/// `H_k` from the recurrence.
pub fn hamiltonian(a: &ActionSpectrum, k: usize) -> f64 {
    HierarchyTable::new(a, k).hamiltonian(k)
}

/// `omega_n^(k)` from the recurrence.
pub fn frequency(a: &ActionSpectrum, k: usize, n: usize) -> f64 {
    HierarchyTable::new(a, k).frequency(k, n)
}

fn min_kernel_1(a: &ActionSpectrum, n: usize, power: u32) -> f64 {
    a.entries().iter().map(|&(p, g)| ipow(p.min(n) as f64, power) * g).sum()
}

fn min_kernel_2(a: &ActionSpectrum, n: usize, power: u32) -> f64 {
    let e = a.entries();
    let mut sum = 0.0;
    for &(p, gp) in e {
        for &(q, gq) in e {
            sum += ipow(p.min(q).min(n) as f64, power) * gp * gq;
        }
    }
    sum
}

fn min_kernel_3(a: &ActionSpectrum, n: usize) -> f64 {
    let e = a.entries();
    let mut sum = 0.0;
    for &(p, gp) in e {
        for &(q, gq) in e {
            for &(r, gr) in e {
                sum += p.min(q).min(r).min(n) as f64 * gp * gq * gr;
            }
        }
    }
    sum
}

/// `sum_{p >= 1} s_p^2`, enumerated index by index.
fn tail_square_sum(a: &ActionSpectrum) -> f64 {
    let last = a.max_index().unwrap_or(0);
    (1..=last).map(|p| a.tail_sum(p).powi(2)).sum()
}

/// `omega_n^(3) = n^2 - 2 sum min(p,n) gamma_p`.
pub fn omega3_closed(a: &ActionSpectrum, n: usize) -> f64 {
    let nf = n as f64;
    nf * nf - 2.0 * min_kernel_1(a, n, 1)
}

/// `omega_n^(4) = n^3 + n sum p gamma_p - 3 sum min(p,n)^2 gamma_p
///  + 3 sum sum min(p,q,n) gamma_p gamma_q`.
pub fn omega4_closed(a: &ActionSpectrum, n: usize) -> f64 {
    let nf = n as f64;
    nf * nf * nf + nf * a.moment(1) - 3.0 * min_kernel_1(a, n, 2) + 3.0 * min_kernel_2(a, n, 1)
}

/// Closed form of `omega_n^(5)`, with the triple min-kernel sum enumerated.
pub fn omega5_closed(a: &ActionSpectrum, n: usize) -> f64 {
    let nf = n as f64;
    let h3 = a.moment(2) - tail_square_sum(a);
    let mass = a.moment(1);
    nf * h3 + mass * (nf * nf - 2.0 * min_kernel_1(a, n, 1)) + ipow(nf, 4)
        - 4.0 * min_kernel_1(a, n, 3)
        + 6.0 * min_kernel_2(a, n, 2)
        - 4.0 * min_kernel_3(a, n)
}
