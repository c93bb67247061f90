//! Sparse multimode Fock states and the elementary two-mode operators that act
//! on them.
//!
//! A [`FockState`] keeps only non-negligible amplitudes, keyed by occupation
//! vector in lexicographic order. Operations are pure: they return new states.
//! Weight that would land above the per-mode cutoff is dropped and accumulated
//! in [`FockState::leaked_weight`] so that truncation stays observable.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{invalid, Error, Result};

/// Amplitudes with modulus below this are not stored.
pub const PRUNE_TOLERANCE: f64 = 1e-16;
/// Slack allowed on the squared norm of a state (truncation only removes weight).
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Default per-mode photon cutoff.
pub const DEFAULT_CUTOFF: u8 = 6;

/// One of the two optical modes held by a party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    First,
    Second,
}

/// Mode label `(party, slot)`; flattens to `2 * party + slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeId {
    pub party: usize,
    pub slot: Slot,
}

impl ModeId {
    pub fn new(party: usize, slot: Slot) -> Self {
        Self { party, slot }
    }

    pub fn first(party: usize) -> Self {
        Self::new(party, Slot::First)
    }

    pub fn second(party: usize) -> Self {
        Self::new(party, Slot::Second)
    }

    pub fn index(self) -> usize {
        2 * self.party
            + match self.slot {
                Slot::First => 0,
                Slot::Second => 1,
            }
    }

    pub fn from_index(index: usize) -> Self {
        let slot = if index % 2 == 0 { Slot::First } else { Slot::Second };
        Self::new(index / 2, slot)
    }

    /// Label in the `a1, a2, b1, ...` convention.
    pub fn label(self) -> String {
        let letter = (b'a' + (self.party % 26) as u8) as char;
        let slot = match self.slot {
            Slot::First => 1,
            Slot::Second => 2,
        };
        format!("{letter}{slot}")
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Photon counts, one per mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationVector(SmallVec<[u8; 16]>);

impl OccupationVector {
    pub fn zeros(modes: usize) -> Self {
        Self(SmallVec::from_elem(0, modes))
    }

    pub fn from_counts(counts: &[u8]) -> Self {
        Self(SmallVec::from_slice(counts))
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, mode: usize) -> u8 {
        self.0[mode]
    }

    pub fn total_photons(&self) -> u32 {
        self.0.iter().map(|&n| u32::from(n)).sum()
    }

    pub fn max_count(&self) -> u8 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Copy with `mode_i` and `mode_j` raised by one.
    pub fn raised(&self, mode_i: usize, mode_j: usize) -> Self {
        let mut next = self.clone();
        next.0[mode_i] += 1;
        next.0[mode_j] += 1;
        next
    }

    /// Copy with `mode_i` and `mode_j` lowered by one, or `None` if either is empty.
    pub fn lowered(&self, mode_i: usize, mode_j: usize) -> Option<Self> {
        if self.0[mode_i] == 0 || self.0[mode_j] == 0 {
            return None;
        }
        let mut next = self.clone();
        next.0[mode_i] -= 1;
        next.0[mode_j] -= 1;
        Some(next)
    }

    /// True when every `(mode, count)` pair matches.
    pub fn matches(&self, pattern: &[(usize, u8)]) -> bool {
        pattern.iter().all(|&(mode, count)| self.0[mode] == count)
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str(">")
    }
}

/// Sparse pure state over `mode_count` bosonic modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    mode_count: usize,
    cutoff: u8,
    terms: BTreeMap<OccupationVector, Complex64>,
    leaked: f64,
}

impl FockState {
    /// All modes empty, amplitude one.
    pub fn vacuum(mode_count: usize, cutoff: u8) -> Result<Self> {
        if mode_count < 2 || mode_count % 2 != 0 {
            return invalid(format!("mode count must be even and at least 2, got {mode_count}"));
        }
        if cutoff < 1 {
            return invalid("cutoff must be at least 1");
        }
        let mut terms = BTreeMap::new();
        terms.insert(OccupationVector::zeros(mode_count), Complex64::new(1.0, 0.0));
        Ok(Self { mode_count, cutoff, terms, leaked: 0.0 })
    }

    /// Build a state from explicit terms. Entries above the cutoff are rejected.
    pub fn from_terms(
        mode_count: usize,
        cutoff: u8,
        terms: impl IntoIterator<Item = (OccupationVector, Complex64)>,
    ) -> Result<Self> {
        let mut state = Self::vacuum(mode_count, cutoff)?;
        state.terms.clear();
        for (occ, amp) in terms {
            if occ.len() != mode_count {
                return invalid(format!("occupation {occ} has {} modes, expected {mode_count}", occ.len()));
            }
            if occ.max_count() > cutoff {
                return invalid(format!("occupation {occ} exceeds cutoff {cutoff}"));
            }
            *state.terms.entry(occ).or_default() += amp;
        }
        state.prune();
        Ok(state)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn cutoff(&self) -> u8 {
        self.cutoff
    }

    /// Weight dropped so far by the photon cutoff.
    pub fn leaked_weight(&self) -> f64 {
        self.leaked
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, occ: &OccupationVector) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    /// Terms in lexicographic occupation order.
    pub fn iter(&self) -> impl Iterator<Item = (&OccupationVector, &Complex64)> {
        self.terms.iter()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.mode_count {
            return invalid(format!("mode {mode} out of range for {} modes", self.mode_count));
        }
        Ok(())
    }

    fn check_pair(&self, mode_i: usize, mode_j: usize) -> Result<()> {
        self.check_mode(mode_i)?;
        self.check_mode(mode_j)?;
        if mode_i == mode_j {
            return invalid("pair operators need two distinct modes");
        }
        Ok(())
    }

    fn empty_like(&self) -> Self {
        Self {
            mode_count: self.mode_count,
            cutoff: self.cutoff,
            terms: BTreeMap::new(),
            leaked: self.leaked,
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, amp| amp.norm() >= PRUNE_TOLERANCE);
    }

    /// `a_i^† a_j^†`. Terms pushed above the cutoff are dropped and their
    /// weight is added to the leaked total.
    pub fn apply_pair_creation(&self, mode_i: usize, mode_j: usize) -> Result<Self> {
        self.check_pair(mode_i, mode_j)?;
        let mut out = self.empty_like();
        for (occ, amp) in &self.terms {
            let ni = f64::from(occ.get(mode_i));
            let nj = f64::from(occ.get(mode_j));
            let next_amp = amp * ((ni + 1.0) * (nj + 1.0)).sqrt();
            let next = occ.raised(mode_i, mode_j);
            if next.get(mode_i) > self.cutoff || next.get(mode_j) > self.cutoff {
                out.leaked += next_amp.norm_sqr();
                continue;
            }
            *out.terms.entry(next).or_default() += next_amp;
        }
        out.prune();
        Ok(out)
    }

    /// `a_i a_j`.
    pub fn apply_pair_annihilation(&self, mode_i: usize, mode_j: usize) -> Result<Self> {
        self.check_pair(mode_i, mode_j)?;
        let mut out = self.empty_like();
        for (occ, amp) in &self.terms {
            if let Some(next) = occ.lowered(mode_i, mode_j) {
                let factor = (f64::from(occ.get(mode_i)) * f64::from(occ.get(mode_j))).sqrt();
                *out.terms.entry(next).or_default() += amp * factor;
            }
        }
        out.prune();
        Ok(out)
    }

    /// Multiplies each amplitude by `exp(i * phi * n_mode)`.
    pub fn apply_number_phase(&self, mode: usize, phi: f64) -> Result<Self> {
        self.check_mode(mode)?;
        let mut out = self.clone();
        for (occ, amp) in out.terms.iter_mut() {
            *amp *= Complex64::from_polar(1.0, phi * f64::from(occ.get(mode)));
        }
        Ok(out)
    }

    /// Total weight of the terms whose counts match `pattern` on the listed modes.
    pub fn pattern_probability(&self, pattern: &[(usize, u8)]) -> Result<f64> {
        for &(mode, _) in pattern {
            self.check_mode(mode)?;
        }
        Ok(self
            .terms
            .iter()
            .filter(|(occ, _)| occ.matches(pattern))
            .map(|(_, amp)| amp.norm_sqr())
            .sum())
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        if self.mode_count != other.mode_count {
            return invalid(format!(
                "mode count mismatch: {} vs {}",
                self.mode_count, other.mode_count
            ));
        }
        let (small, large, flip) = if self.terms.len() <= other.terms.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::default();
        for (occ, amp) in &small.terms {
            if let Some(b) = large.terms.get(occ) {
                acc += if flip { b.conj() * amp } else { amp.conj() * b };
            }
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Same state under a different cutoff. Lowering the cutoff drops the
    /// offending terms into the leaked total.
    pub fn with_cutoff(&self, cutoff: u8) -> Self {
        let mut out = self.clone();
        out.cutoff = cutoff;
        let mut dropped = 0.0;
        out.terms.retain(|occ, amp| {
            let keep = occ.max_count() <= cutoff;
            if !keep {
                dropped += amp.norm_sqr();
            }
            keep
        });
        out.leaked += dropped;
        out
    }

    pub(crate) fn set_leaked(&mut self, leaked: f64) {
        self.leaked = leaked;
    }

    /// Serializable dump, ordered lexicographically by occupation.
    pub fn dump(&self) -> Vec<StateEntry> {
        self.terms
            .iter()
            .map(|(occ, amp)| StateEntry {
                occupation: occ.counts().to_vec(),
                re: amp.re,
                im: amp.im,
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.dump()).map_err(Error::from)
    }
}

/// One line of the JSON state dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    pub occupation: Vec<u8>,
    pub re: f64,
    pub im: f64,
}
