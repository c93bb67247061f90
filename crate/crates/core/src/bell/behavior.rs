use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::network::{evolve_network, subset_probabilities, NetworkSpec, PartySetting, Pump};

/// Negative cells above this are clamped to zero.
pub const CLAMP_TOLERANCE: f64 = 1e-12;
/// Inclusion-exclusion results below minus this abort.
pub const NEGATIVE_ABORT: f64 = 1e-9;

/// Two settings per party. Index 0 is the unprimed setting, index 1 the primed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingsProfile {
    pub settings: Vec<[PartySetting; 2]>,
}

impl SettingsProfile {
    /// Pump off for setting 0, on for setting 1, same phase for both.
    pub fn on_off(phases: &[f64]) -> Self {
        Self { settings: phases.iter().map(|&p| [PartySetting::off(p), PartySetting::on(p)]).collect() }
    }

    /// All pumps on; the two settings differ in phase only.
    pub fn phases_only(phase_pairs: &[(f64, f64)]) -> Self {
        Self { settings: phase_pairs.iter().map(|&(a, b)| [PartySetting::on(a), PartySetting::on(b)]).collect() }
    }

    pub fn parties(&self) -> usize {
        self.settings.len()
    }

    /// Party settings selected by the bits of `s_mask`.
    pub fn select(&self, s_mask: usize) -> Vec<PartySetting> {
        self.settings.iter().enumerate().map(|(x, pair)| pair[(s_mask >> x) & 1]).collect()
    }

    pub fn labels(&self) -> Vec<[String; 2]> {
        self.settings
            .iter()
            .map(|pair| pair.map(|s| format!("{}:{:.12}", s.pump, s.phase)))
            .collect()
    }
}

/// Joint outcome table `P(o | s)` with dichotomic outcomes. Both settings and
/// outcomes are bit masks over parties: bit `x` of `s` selects setting 1 for
/// party `x`, bit `x` of `o` means party `x` saw "+" (the 11 event).
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    parties: usize,
    table: Vec<f64>,
}

impl Behavior {
    pub fn from_table(parties: usize, table: Vec<f64>) -> Result<Self> {
        if parties == 0 || parties > 12 {
            return invalid(format!("unsupported party count {parties}"));
        }
        if table.len() != 1 << (2 * parties) {
            return invalid(format!("table length {} does not match {parties} parties", table.len()));
        }
        Ok(Self { parties, table })
    }

    /// Recovers the joint table from subset "+" probabilities by Moebius
    /// inversion. `subset_plus[s][U]` is `P(+ on every party of U | s)`;
    /// entry `U = 0` is ignored and taken as 1.
    pub fn from_subset_probabilities(parties: usize, subset_plus: &[Vec<f64>]) -> Result<Self> {
        let cells = 1usize << parties;
        if subset_plus.len() != cells || subset_plus.iter().any(|v| v.len() != cells) {
            return invalid("subset table has the wrong shape");
        }
        let mut table = vec![0.0; cells * cells];
        for (s, q) in subset_plus.iter().enumerate() {
            for o in 0..cells {
                // P(exactly o plus) = sum over U containing o of (-1)^{|U - o|} Q(U)
                let rest = (cells - 1) & !o;
                let mut acc = 0.0;
                let mut extra = rest;
                loop {
                    let u = o | extra;
                    let qu = if u == 0 { 1.0 } else { q[u] };
                    if extra.count_ones() % 2 == 0 {
                        acc += qu;
                    } else {
                        acc -= qu;
                    }
                    if extra == 0 {
                        break;
                    }
                    extra = (extra - 1) & rest;
                }
                if acc < -NEGATIVE_ABORT {
                    return Err(Error::Consistency(format!(
                        "inclusion-exclusion gave {acc:e} for settings {s:b}, outcome {o:b}"
                    )));
                }
                if acc < 0.0 && acc >= -CLAMP_TOLERANCE {
                    acc = 0.0;
                }
                table[s * cells + o] = acc;
            }
        }
        Self::from_table(parties, table)
    }

    /// Behavior of one deterministic local strategy: `outcomes[x][k]` is the
    /// outcome ("+" = true) of party `x` under setting `k`.
    pub fn deterministic(outcomes: &[[bool; 2]]) -> Self {
        let parties = outcomes.len();
        let cells = 1usize << parties;
        let mut table = vec![0.0; cells * cells];
        for s in 0..cells {
            let o = outcomes
                .iter()
                .enumerate()
                .fold(0usize, |acc, (x, pair)| acc | (usize::from(pair[(s >> x) & 1]) << x));
            table[s * cells + o] = 1.0;
        }
        Self { parties, table }
    }

    pub fn uniform(parties: usize) -> Self {
        let cells = 1usize << parties;
        Self { parties, table: vec![1.0 / cells as f64; cells * cells] }
    }

    /// Convex combination; weights must be non-negative and sum to one.
    pub fn mixture(components: &[(f64, &Behavior)]) -> Result<Self> {
        let first = components.first().ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let parties = first.1.parties;
        let mut table = vec![0.0; first.1.table.len()];
        for (w, b) in components {
            if b.parties != parties {
                return invalid("mixture components disagree on party count");
            }
            for (t, v) in table.iter_mut().zip(&b.table) {
                *t += w * v;
            }
        }
        Self::from_table(parties, table)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn cells(&self) -> usize {
        1 << self.parties
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn p(&self, s: usize, o: usize) -> f64 {
        self.table[s * self.cells() + o]
    }

    /// `P(+ on every party of subset | s)`.
    pub fn plus_marginal(&self, s: usize, subset: usize) -> f64 {
        (0..self.cells()).filter(|o| o & subset == subset).map(|o| self.p(s, o)).sum()
    }

    /// Marginal distribution of the parties in `subset` (outcomes restricted to it).
    pub fn marginal(&self, s: usize, subset: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.cells()];
        for o in 0..self.cells() {
            out[o & subset] += self.p(s, o);
        }
        out
    }

    /// Largest deviation of any settings block from total probability one.
    pub fn normalization_defect(&self) -> f64 {
        (0..self.cells())
            .map(|s| ((0..self.cells()).map(|o| self.p(s, o)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest change of any subset marginal when the settings of the other
    /// parties change.
    pub fn no_signaling_defect(&self) -> f64 {
        let cells = self.cells();
        let mut worst: f64 = 0.0;
        for subset in 1..cells - 1 {
            for s in 0..cells {
                // Compare against the representative with the other settings zeroed.
                let base = s & subset;
                if base == s {
                    continue;
                }
                let a = self.marginal(s, subset);
                let b = self.marginal(base, subset);
                for (x, y) in a.iter().zip(&b) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        worst
    }

    pub fn min_entry(&self) -> f64 {
        self.table.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Relabels the parties: new party `i` is old party `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.parties {
            return invalid("permutation length mismatch");
        }
        let map = |m: usize| perm.iter().enumerate().fold(0, |acc, (i, &old)| acc | (((m >> old) & 1) << i));
        let cells = self.cells();
        let mut table = vec![0.0; self.table.len()];
        for s in 0..cells {
            for o in 0..cells {
                table[map(s) * cells + map(o)] = self.p(s, o);
            }
        }
        Self::from_table(self.parties, table)
    }

    /// Swaps "+" and "-" for the parties in `mask`.
    pub fn outcomes_flipped(&self, mask: usize) -> Self {
        let cells = self.cells();
        let mut table = vec![0.0; self.table.len()];
        for s in 0..cells {
            for o in 0..cells {
                table[s * cells + (o ^ mask)] = self.p(s, o);
            }
        }
        Self { parties: self.parties, table }
    }

    pub fn to_file(&self, settings_labels: Vec<[String; 2]>) -> BehaviorFile {
        let cells = self.cells();
        let mut table = Vec::with_capacity(self.table.len());
        for s in 0..cells {
            for o in 0..cells {
                table.push(BehaviorCell {
                    s: (0..self.parties).map(|x| ((s >> x) & 1) as u8 + 1).collect(),
                    o: (0..self.parties).map(|x| if (o >> x) & 1 == 1 { '+' } else { '-' }).collect(),
                    p: self.p(s, o),
                });
            }
        }
        BehaviorFile { n: self.parties, settings_labels, table }
    }

    pub fn from_file(file: &BehaviorFile) -> Result<Self> {
        let cells = 1usize << file.n;
        let mut table = vec![f64::NAN; cells * cells];
        for cell in &file.table {
            if cell.s.len() != file.n || cell.o.chars().count() != file.n {
                return invalid("behavior cell has the wrong arity");
            }
            let mut s = 0;
            for (x, &v) in cell.s.iter().enumerate() {
                match v {
                    1 => {}
                    2 => s |= 1 << x,
                    _ => return invalid(format!("setting index {v} not in {{1,2}}")),
                }
            }
            let mut o = 0;
            for (x, ch) in cell.o.chars().enumerate() {
                match ch {
                    '-' => {}
                    '+' => o |= 1 << x,
                    _ => return invalid(format!("outcome symbol {ch:?} not in {{+,-}}")),
                }
            }
            table[s * cells + o] = cell.p;
        }
        if table.iter().any(|p| p.is_nan()) {
            return invalid("behavior file does not list every cell");
        }
        Self::from_table(file.n, table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorCell {
    /// Setting index per party, 1 or 2.
    pub s: Vec<u8>,
    /// Outcome string, one '+' or '-' per party.
    pub o: String,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub settings_labels: Vec<[String; 2]>,
    pub table: Vec<BehaviorCell>,
}

/// Subset "+" probabilities of every settings vector, from numeric evolution.
pub fn subset_table(network: &NetworkSpec, profile: &SettingsProfile, cutoff: u8) -> Result<Vec<Vec<f64>>> {
    let n = network.parties();
    if profile.parties() != n {
        return invalid(format!("profile has {} parties, network {n}", profile.parties()));
    }
    (0..1usize << n)
        .into_par_iter()
        .map(|s| {
            let report = evolve_network(network, &profile.select(s), cutoff)?;
            Ok(subset_probabilities(&report, n))
        })
        .collect()
}

/// Full behavior of the network for the given profile, one evolution per settings vector.
pub fn behavior_from_network(network: &NetworkSpec, profile: &SettingsProfile, cutoff: u8) -> Result<Behavior> {
    let table = subset_table(network, profile, cutoff)?;
    Behavior::from_subset_probabilities(network.parties(), &table)
}

/// Convenience: on/off behavior of the N-ring at coupling `g` with the given phases.
pub fn on_off_behavior(parties: usize, g: Complex64, phases: &[f64], cutoff: u8) -> Result<Behavior> {
    let network = crate::network::build_ring_network(parties, g)?;
    behavior_from_network(&network, &SettingsProfile::on_off(phases), cutoff)
}

/// Pump pattern selected by `s` in the on/off scenario.
pub fn on_off_pumps(parties: usize, s: usize) -> Vec<Pump> {
    (0..parties).map(|x| if (s >> x) & 1 == 1 { Pump::On } else { Pump::Off }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moebius_inversion_of_independent_parties() {
        // Two independent parties with P(+) = 0.3 and 0.6 in every setting.
        let q = vec![1.0, 0.3, 0.6, 0.18];
        let b = Behavior::from_subset_probabilities(2, &vec![q; 4]).unwrap();
        assert!((b.p(0, 0b00) - 0.7 * 0.4).abs() < 1e-15);
        assert!((b.p(0, 0b01) - 0.3 * 0.4).abs() < 1e-15);
        assert!((b.p(3, 0b11) - 0.18).abs() < 1e-15);
        assert!(b.normalization_defect() < 1e-15);
        assert!(b.no_signaling_defect() < 1e-15);
    }

    #[test]
    fn negative_cells_abort() {
        let q = vec![1.0, 0.1, 0.1, 0.5];
        assert!(matches!(
            Behavior::from_subset_probabilities(2, &vec![q; 4]),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn tiny_negatives_are_clamped() {
        let q = vec![1.0, 0.1, 0.1, 0.1 + 5e-13];
        let b = Behavior::from_subset_probabilities(2, &vec![q; 4]).unwrap();
        assert_eq!(b.p(0, 0b01), 0.0);
    }

    #[test]
    fn deterministic_behavior() {
        let b = Behavior::deterministic(&[[true, false], [false, false]]);
        assert_eq!(b.p(0b00, 0b01), 1.0);
        assert_eq!(b.p(0b01, 0b00), 1.0);
        assert_eq!(b.no_signaling_defect(), 0.0);
    }

    #[test]
    fn zero_coupling_gives_all_minus() {
        let b = on_off_behavior(3, Complex64::new(0.0, 0.0), &[0.1, 0.2, 0.3], 6).unwrap();
        for s in 0..8 {
            assert_eq!(b.p(s, 0), 1.0);
        }
    }

    #[test]
    fn file_round_trip() {
        let b = Behavior::deterministic(&[[true, false], [false, true], [true, true]]);
        let labels = SettingsProfile::on_off(&[0.0; 3]).labels();
        let f = b.to_file(labels);
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.contains("\"N\":3"));
        let back: BehaviorFile = serde_json::from_str(&text).unwrap();
        assert_eq!(Behavior::from_file(&back).unwrap(), b);
    }

    #[test]
    fn permutation_and_flip_are_involutive() {
        let b = Behavior::deterministic(&[[true, false], [false, true], [true, true]]);
        let p = b.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.permuted(&[1, 2, 0]).unwrap(), b);
        assert_eq!(b.outcomes_flipped(0b101).outcomes_flipped(0b101), b);
    }
}
