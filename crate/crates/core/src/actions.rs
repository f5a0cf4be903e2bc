//! Birkhoff coordinates and action spectra of finite-gap potentials.
//!
//! A [`GapSequence`] stores the nonzero Birkhoff coordinates `zeta_n`; a zero
//! coordinate is represented by the absence of its index. The derived
//! [`ActionSpectrum`] holds the actions `gamma_n = |zeta_n|^2` and answers the
//! tail sums `s_n` and Lax eigenvalues `lambda_n = n - s_{n+1}` that every
//! Hamiltonian and frequency formula is written in.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest admissible gap index unless a caller asks for more.
pub const DEFAULT_MAX_INDEX: usize = 4096;

/// Finite-support sequence of nonzero Birkhoff coordinates, sorted by index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<GapRecord>", into = "Vec<GapRecord>")]
pub struct GapSequence {
    entries: Vec<(usize, Complex64)>,
}

/// Wire form of one Birkhoff coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub n: usize,
    pub re: f64,
    pub im: f64,
}

impl GapSequence {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a sequence from `(index, zeta)` pairs in any order.
    pub fn new(entries: impl IntoIterator<Item = (usize, Complex64)>) -> Result<Self> {
        Self::with_max_index(entries, DEFAULT_MAX_INDEX)
    }

    pub fn with_max_index(
        entries: impl IntoIterator<Item = (usize, Complex64)>,
        max_index: usize,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, Complex64)> = entries.into_iter().collect();
        entries.sort_by_key(|&(n, _)| n);
        for window in entries.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(invalid(format!("duplicate gap index {}", window[0].0)));
            }
        }
        for &(n, zeta) in &entries {
            check_index(n, max_index)?;
            if !(zeta.re.is_finite() && zeta.im.is_finite()) {
                return Err(invalid(format!("non-finite coordinate at index {n}")));
            }
            if zeta == Complex64::new(0.0, 0.0) {
                return Err(invalid(format!(
                    "zero coordinate stored at index {n}; zero gaps are encoded by absence"
                )));
            }
        }
        Ok(Self { entries })
    }

    /// One-gap sequence `{(n, zeta)}`.
    pub fn single(n: usize, zeta: Complex64) -> Result<Self> {
        Self::new([(n, zeta)])
    }

    pub fn entries(&self) -> &[(usize, Complex64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, n: usize) -> Option<Complex64> {
        self.entries
            .binary_search_by_key(&n, |&(m, _)| m)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(n, _)| n)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(n, _)| n)
    }

    /// Returns a copy with coordinate `n` replaced; a zero coordinate removes it.
    pub fn with_entry(&self, n: usize, zeta: Complex64) -> Result<Self> {
        let mut entries: Vec<(usize, Complex64)> =
            self.entries.iter().copied().filter(|&(m, _)| m != n).collect();
        if zeta != Complex64::new(0.0, 0.0) {
            entries.push((n, zeta));
        }
        Self::new(entries)
    }

    /// Multiplies every coordinate by a unit phase factor; the support is kept.
    pub(crate) fn rotate(&self, mut factor: impl FnMut(usize) -> Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|&(n, z)| (n, z * factor(n))).collect(),
        }
    }

    /// Actions `gamma_n = |zeta_n|^2` on the same support.
    pub fn actions(&self) -> ActionSpectrum {
        ActionSpectrum {
            entries: self.entries.iter().map(|&(n, z)| (n, z.norm_sqr())).collect(),
        }
    }

    /// Weighted norm `(sum n^{1+2s} |zeta_n|^2)^{1/2}` of the `h^{1/2+s}_+` scale.
    pub fn weighted_norm(&self, s: f64) -> WeightedNorm {
        let sum: f64 = self
            .entries
            .iter()
            .map(|&(n, z)| (n as f64).powf(1.0 + 2.0 * s) * z.norm_sqr())
            .sum();
        WeightedNorm { exponent: s, value: sum.sqrt() }
    }
}

impl TryFrom<Vec<GapRecord>> for GapSequence {
    type Error = Error;

    fn try_from(records: Vec<GapRecord>) -> Result<Self> {
        Self::new(records.into_iter().map(|r| (r.n, Complex64::new(r.re, r.im))))
    }
}

impl From<GapSequence> for Vec<GapRecord> {
    fn from(g: GapSequence) -> Self {
        g.entries.into_iter().map(|(n, z)| GapRecord { n, re: z.re, im: z.im }).collect()
    }
}

fn check_index(n: usize, max_index: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("gap indices start at 1"));
    }
    if n > max_index {
        return Err(invalid(format!("gap index {n} exceeds the maximum {max_index}")));
    }
    Ok(())
}

/// Non-negative actions with finite support; only strictly positive values are stored.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "ActionsRepr", into = "Vec<ActionRecord>")]
pub struct ActionSpectrum {
    entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub n: usize,
    pub gamma: f64,
}

/// Accepted input encodings: the canonical record list, or a compact
/// `{"index": gamma}` object.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ActionsRepr {
    List(Vec<ActionRecord>),
    Map(BTreeMap<String, f64>),
}

impl ActionSpectrum {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a spectrum from `(index, gamma)` pairs; zero actions are dropped.
    pub fn new(entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        Self::with_max_index(entries, DEFAULT_MAX_INDEX)
    }

    pub fn with_max_index(
        entries: impl IntoIterator<Item = (usize, f64)>,
        max_index: usize,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, f64)> = entries.into_iter().collect();
        entries.sort_by_key(|&(n, _)| n);
        for window in entries.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(invalid(format!("duplicate action index {}", window[0].0)));
            }
        }
        for &(n, gamma) in &entries {
            check_index(n, max_index)?;
            if !gamma.is_finite() || gamma < 0.0 {
                return Err(invalid(format!("action at index {n} must be finite and >= 0")));
            }
        }
        entries.retain(|&(_, gamma)| gamma > 0.0);
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(n, _)| n)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(n, _)| n)
    }

    /// Action at `n`, zero off the support.
    pub fn get(&self, n: usize) -> f64 {
        self.entries
            .binary_search_by_key(&n, |&(m, _)| m)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    /// Returns a copy with the action at `n` replaced (zero removes it).
    pub fn with_action(&self, n: usize, gamma: f64) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .copied()
            .filter(|&(m, _)| m != n)
            .chain(std::iter::once((n, gamma)));
        Self::new(entries)
    }

    /// Tail sum `s_n = sum_{k >= n} gamma_k`.
    pub fn tail_sum(&self, n: usize) -> f64 {
        let start = self.entries.partition_point(|&(m, _)| m < n);
        self.entries[start..].iter().rev().map(|&(_, g)| g).sum()
    }

    /// Tail sums `s_m` at each support index, aligned with [`Self::entries`].
    pub(crate) fn support_tail_sums(&self) -> Vec<f64> {
        let mut tails = vec![0.0; self.entries.len()];
        let mut acc = 0.0;
        for (i, &(_, g)) in self.entries.iter().enumerate().rev() {
            acc += g;
            tails[i] = acc;
        }
        tails
    }

    /// Lax eigenvalue `lambda_n = n - s_{n+1}`.
    pub fn lambda(&self, n: usize) -> f64 {
        n as f64 - self.tail_sum(n + 1)
    }

    /// `sum_p p^j gamma_p`.
    pub fn moment(&self, j: u32) -> f64 {
        self.entries
            .iter()
            .map(|&(p, g)| crate::hierarchy::ipow(p as f64, j) * g)
            .sum()
    }
}

impl TryFrom<ActionsRepr> for ActionSpectrum {
    type Error = Error;

    fn try_from(repr: ActionsRepr) -> Result<Self> {
        match repr {
            ActionsRepr::List(records) => Self::new(records.into_iter().map(|r| (r.n, r.gamma))),
            ActionsRepr::Map(map) => {
                let mut entries = Vec::with_capacity(map.len());
                for (key, gamma) in map {
                    let n: usize = key
                        .trim()
                        .parse()
                        .map_err(|_| Error::Format(format!("action key {key:?} is not an index")))?;
                    entries.push((n, gamma));
                }
                Self::new(entries)
            }
        }
    }
}

impl From<ActionSpectrum> for Vec<ActionRecord> {
    fn from(a: ActionSpectrum) -> Self {
        a.entries.into_iter().map(|(n, gamma)| ActionRecord { n, gamma }).collect()
    }
}

/// Value of the weighted `h^{1/2+s}_+` norm together with its exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorm {
    pub exponent: f64,
    pub value: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spectrum(pairs: &[(usize, f64)]) -> ActionSpectrum {
        ActionSpectrum::new(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn actions_examples() {
        assert!(GapSequence::empty().actions().is_empty());
        let a = GapSequence::single(1, c(1.0, 0.0)).unwrap().actions();
        assert_eq!(a.entries(), &[(1, 1.0)]);
        let a = GapSequence::single(2, c(0.6, 0.8)).unwrap().actions();
        assert_eq!(a.support().collect::<Vec<_>>(), vec![2]);
        assert!((a.get(2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tail_sum_examples() {
        let a = spectrum(&[(1, 1.0)]);
        assert_eq!(a.tail_sum(1), 1.0);
        assert_eq!(a.tail_sum(2), 0.0);
        assert_eq!(spectrum(&[(1, 0.5), (3, 0.25)]).tail_sum(2), 0.25);
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(ActionSpectrum::empty().lambda(5), 5.0);
        let a = spectrum(&[(1, 1.0)]);
        assert_eq!(a.lambda(0), -1.0);
        assert_eq!(a.lambda(1), 1.0);
    }

    #[test]
    fn weighted_norm_examples() {
        assert_eq!(GapSequence::empty().weighted_norm(0.0).value, 0.0);
        let one = GapSequence::single(1, c(1.0, 0.0)).unwrap();
        assert_eq!(one.weighted_norm(0.0).value, 1.0);
        let four = GapSequence::single(4, c(1.0, 0.0)).unwrap();
        let norm = four.weighted_norm(0.5);
        assert_eq!(norm.value, 4.0);
        assert_eq!(norm.exponent, 0.5);
    }

    #[test]
    fn rejects_malformed_sequences() {
        assert!(GapSequence::new([(0, c(1.0, 0.0))]).is_err());
        assert!(GapSequence::new([(1, c(0.0, 0.0))]).is_err());
        assert!(GapSequence::new([(2, c(1.0, 0.0)), (2, c(0.5, 0.0))]).is_err());
        assert!(GapSequence::new([(DEFAULT_MAX_INDEX + 1, c(1.0, 0.0))]).is_err());
        assert!(GapSequence::with_max_index([(5000, c(1.0, 0.0))], 8192).is_ok());
        assert!(GapSequence::new([(1, c(f64::NAN, 0.0))]).is_err());
        assert!(ActionSpectrum::new([(1, -0.1)]).is_err());
    }

    #[test]
    fn unsorted_input_is_sorted_and_zero_actions_dropped() {
        let g = GapSequence::new([(3, c(1.0, 0.0)), (1, c(0.0, 2.0))]).unwrap();
        assert_eq!(g.support().collect::<Vec<_>>(), vec![1, 3]);
        let a = ActionSpectrum::new([(2, 0.0), (1, 1.0)]).unwrap();
        assert_eq!(a.entries(), &[(1, 1.0)]);
        let removed = g.with_entry(3, c(0.0, 0.0)).unwrap();
        assert_eq!(removed.support().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn json_wire_forms() {
        let g = GapSequence::new([(1, c(1.0, -0.5)), (2, c(0.1, 0.2))]).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"[{"n":1,"re":1.0,"im":-0.5},{"n":2,"re":0.1,"im":0.2}]"#);
        let a: ActionSpectrum = serde_json::from_str(r#"{"1":1.0,"2":0.5}"#).unwrap();
        assert_eq!(a.entries(), &[(1, 1.0), (2, 0.5)]);
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(text, r#"[{"n":1,"gamma":1.0},{"n":2,"gamma":0.5}]"#);
        assert!(serde_json::from_str::<GapSequence>(r#"[{"n":0,"re":1.0,"im":0.0}]"#).is_err());
        assert!(serde_json::from_str::<ActionSpectrum>(r#"{"x":1.0}"#).is_err());
    }

    fn arb_sequence() -> impl Strategy<Value = GapSequence> {
        proptest::collection::btree_map(1usize..64, (-1e3f64..1e3, -1e3f64..1e3), 0..10).prop_map(
            |map| {
                GapSequence::new(
                    map.into_iter()
                        .map(|(n, (re, im))| (n, c(re, im)))
                        .filter(|&(_, z)| z != c(0.0, 0.0)),
                )
                .unwrap()
            },
        )
    }

    fn arb_bits_sequence() -> impl Strategy<Value = GapSequence> {
        // |zeta|^2 must stay finite for the actions to serialize.
        let finite = prop_oneof![Just(0.0), any::<f64>().prop_filter("moderate", |x| (1e-150..1e150).contains(&x.abs()))];
        proptest::collection::btree_map(1usize..4096, (finite.clone(), finite), 0..8).prop_map(
            |map| {
                GapSequence::new(
                    map.into_iter()
                        .map(|(n, (re, im))| (n, c(re, im)))
                        .filter(|&(_, z)| z != c(0.0, 0.0)),
                )
                .unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(g in arb_bits_sequence()) {
            let text = serde_json::to_string(&g).unwrap();
            let back: GapSequence = serde_json::from_str(&text).unwrap();
            for (&(n, z), &(m, w)) in g.entries().iter().zip(back.entries()) {
                prop_assert_eq!(n, m);
                prop_assert_eq!(z.re.to_bits(), w.re.to_bits());
                prop_assert_eq!(z.im.to_bits(), w.im.to_bits());
            }
            let a = g.actions();
            let a_back: ActionSpectrum =
                serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
            for (&(_, x), &(_, y)) in a.entries().iter().zip(a_back.entries()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }

        #[test]
        fn tail_sums_telescope(g in arb_sequence(), n in 1usize..70) {
            let a = g.actions();
            let diff = a.tail_sum(n) - a.tail_sum(n + 1);
            let scale = a.tail_sum(1).max(f64::MIN_POSITIVE);
            prop_assert!((diff - a.get(n)).abs() <= 1e-14 * scale);
        }

        #[test]
        fn lambda_gaps_are_one_plus_action(g in arb_sequence(), n in 1usize..70) {
            let a = g.actions();
            let gap = a.lambda(n) - a.lambda(n - 1);
            prop_assert!(gap >= 1.0 - 1e-12 * a.tail_sum(1));
            prop_assert!((gap - 1.0 - a.get(n)).abs() <= 1e-12 * (1.0 + a.tail_sum(1)));
        }

        #[test]
        fn weighted_norm_is_monotone_in_exponent(g in arb_sequence(), s in -1.0f64..1.0, ds in 0.0f64..1.0) {
            let lo = g.weighted_norm(s).value;
            let hi = g.weighted_norm(s + ds).value;
            prop_assert!(hi >= lo * (1.0 - 1e-14));
        }
    }
}
