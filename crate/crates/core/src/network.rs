//! Ring networks of source and station squeezers, and their exact numeric
//! evolution on a truncated Fock space.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{FockState, ModeId, OccupationVector, DEFAULT_CUTOFF, NORM_TOLERANCE};

/// Largest coupling magnitude the engine accepts.
pub const MAX_COUPLING: f64 = 0.5;
/// A Taylor term with norm below this ends the series.
pub const TAYLOR_TOLERANCE: f64 = 1e-18;
pub const DEFAULT_MAX_TAYLOR_TERMS: usize = 40;
/// Extra photons per mode allowed inside a single squeezer before projecting
/// back onto the cutoff.
const WORKSPACE_HEADROOM: u8 = 2;

/// Two-mode squeezer `exp(i (g a_i^† a_j^† + conj(g) a_i a_j))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezerSpec {
    pub mode_i: ModeId,
    pub mode_j: ModeId,
    pub g: Complex64,
}

impl SqueezerSpec {
    pub fn new(mode_i: ModeId, mode_j: ModeId, g: Complex64) -> Result<Self> {
        if mode_i == mode_j {
            return invalid("squeezer modes must differ");
        }
        check_coupling(g)?;
        Ok(Self { mode_i, mode_j, g })
    }
}

fn check_coupling(g: Complex64) -> Result<()> {
    if !g.re.is_finite() || !g.im.is_finite() {
        return invalid("coupling must be finite");
    }
    if g.norm() > MAX_COUPLING {
        return invalid(format!("|g| = {} exceeds the validity guard {MAX_COUPLING}", g.norm()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pump {
    Off,
    On,
}

impl Pump {
    pub fn is_on(self) -> bool {
        self == Pump::On
    }
}

impl fmt::Display for Pump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pump::Off => "off",
            Pump::On => "on",
        })
    }
}

/// Local setting of one party: station pump and phase shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartySetting {
    pub pump: Pump,
    pub phase: f64,
}

impl PartySetting {
    pub fn new(pump: Pump, phase: f64) -> Self {
        Self { pump, phase }
    }

    pub fn off(phase: f64) -> Self {
        Self::new(Pump::Off, phase)
    }

    pub fn on(phase: f64) -> Self {
        Self::new(Pump::On, phase)
    }

    /// Phase reduced to `[0, 2pi)`.
    pub fn canonical_phase(&self) -> f64 {
        let r = self.phase.rem_euclid(TAU);
        if r >= TAU {
            0.0
        } else {
            r
        }
    }
}

/// N-party ring: source `k` feeds `(k, slot 1)` and `(k-1, slot 2)`, station `x`
/// couples the two modes of party `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    parties: usize,
    sources: Vec<SqueezerSpec>,
    stations: Vec<SqueezerSpec>,
    phase_modes: Vec<ModeId>,
}

pub fn build_ring_network(parties: usize, g: Complex64) -> Result<NetworkSpec> {
    if parties < 2 {
        return invalid(format!("a ring needs at least 2 parties, got {parties}"));
    }
    check_coupling(g)?;
    let sources = (0..parties)
        .map(|k| SqueezerSpec::new(ModeId::first(k), ModeId::second((k + parties - 1) % parties), g))
        .collect::<Result<Vec<_>>>()?;
    let stations = (0..parties)
        .map(|x| SqueezerSpec::new(ModeId::first(x), ModeId::second(x), g))
        .collect::<Result<Vec<_>>>()?;
    let phase_modes = (0..parties).map(ModeId::first).collect();
    Ok(NetworkSpec { parties, sources, stations, phase_modes })
}

impl NetworkSpec {
    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn mode_count(&self) -> usize {
        2 * self.parties
    }

    pub fn sources(&self) -> &[SqueezerSpec] {
        &self.sources
    }

    pub fn stations(&self) -> &[SqueezerSpec] {
        &self.stations
    }

    pub fn phase_modes(&self) -> &[ModeId] {
        &self.phase_modes
    }

    pub fn g(&self) -> Complex64 {
        self.sources[0].g
    }

    /// Same topology with every coupling replaced by `g`.
    pub fn with_coupling(&self, g: Complex64) -> Result<Self> {
        check_coupling(g)?;
        let mut out = self.clone();
        for s in out.sources.iter_mut().chain(out.stations.iter_mut()) {
            s.g = g;
        }
        Ok(out)
    }

    /// Ring rule: every mode appears in exactly one source and one station.
    pub fn check_ring_rule(&self) -> Result<()> {
        let n = self.parties;
        for (k, src) in self.sources.iter().enumerate() {
            if src.mode_i != ModeId::first(k) || src.mode_j != ModeId::second((k + n - 1) % n) {
                return Err(Error::Consistency(format!("source {k} violates the ring rule")));
            }
        }
        for (x, st) in self.stations.iter().enumerate() {
            if st.mode_i != ModeId::first(x) || st.mode_j != ModeId::second(x) {
                return Err(Error::Consistency(format!("station {x} violates the ring rule")));
            }
        }
        let mut seen = vec![(0u8, 0u8); self.mode_count()];
        for s in &self.sources {
            seen[s.mode_i.index()].0 += 1;
            seen[s.mode_j.index()].0 += 1;
        }
        for s in &self.stations {
            seen[s.mode_i.index()].1 += 1;
            seen[s.mode_j.index()].1 += 1;
        }
        if seen.iter().any(|&c| c != (1, 1)) {
            return Err(Error::Consistency("mode coverage violates the ring rule".into()));
        }
        Ok(())
    }
}

/// Result of a numeric evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionReport {
    pub final_state: FockState,
    pub leaked_weight: f64,
    pub taylor_terms_used: usize,
}

impl EvolutionReport {
    /// `norm_sq + leaked - 1`.
    pub fn unitarity_defect(&self) -> f64 {
        self.final_state.norm_sq() + self.leaked_weight - 1.0
    }
}

/// Applies the squeezer as a Taylor series of `exp(iH)`, returning the new
/// state and the number of series terms needed.
///
/// `H` conserves `n_i - n_j`, so the state splits into independent ladders
/// `|b_i + t, b_j + t>`; the series runs on each ladder inside a workspace of
/// `cutoff + 2` photons per mode and the result is projected back onto the cutoff.
pub fn apply_squeezer_exact(state: &FockState, spec: &SqueezerSpec, max_taylor_terms: usize) -> Result<(FockState, usize)> {
    if state.cutoff() < 4 {
        return invalid("numeric squeezers need a cutoff of at least 4");
    }
    if max_taylor_terms < 8 {
        return invalid("max_taylor_terms must be at least 8");
    }
    let (mi, mj) = (spec.mode_i.index(), spec.mode_j.index());
    if mi >= state.mode_count() || mj >= state.mode_count() || mi == mj {
        return invalid("squeezer modes out of range or equal");
    }
    let cutoff = state.cutoff();
    let workspace = cutoff + WORKSPACE_HEADROOM;

    // Group amplitudes into ladders keyed by the base occupation.
    let mut ladders: BTreeMap<OccupationVector, Vec<Complex64>> = BTreeMap::new();
    for (occ, amp) in state.iter() {
        let t = occ.get(mi).min(occ.get(mj));
        let mut counts = occ.counts().to_vec();
        counts[mi] -= t;
        counts[mj] -= t;
        let base = OccupationVector::from_counts(&counts);
        let len = usize::from(workspace - counts[mi].max(counts[mj])) + 1;
        let ladder = ladders.entry(base).or_insert_with(|| vec![Complex64::default(); len]);
        ladder[usize::from(t)] = *amp;
    }

    let g = spec.g;
    let mut terms_used = 0;
    let mut out_terms = Vec::new();
    let mut leaked = state.leaked_weight();
    for (base, v) in ladders {
        let (bi, bj) = (f64::from(base.get(mi)), f64::from(base.get(mj)));
        let len = v.len();
        // coupling[t] links ladder rungs t and t+1.
        let coupling: Vec<f64> = (0..len.saturating_sub(1))
            .map(|t| ((bi + t as f64 + 1.0) * (bj + t as f64 + 1.0)).sqrt())
            .collect();
        let mut result = v.clone();
        let mut term = v;
        let mut converged = false;
        let mut last_norm = f64::INFINITY;
        for k in 1..=max_taylor_terms {
            let mut next = vec![Complex64::default(); len];
            for t in 0..len - 1 {
                next[t + 1] += g * coupling[t] * term[t];
                next[t] += g.conj() * coupling[t] * term[t + 1];
            }
            let scale = Complex64::new(0.0, 1.0 / k as f64);
            let mut norm = 0.0;
            for (r, x) in result.iter_mut().zip(next.iter_mut()) {
                *x *= scale;
                *r += *x;
                norm += x.norm_sqr();
            }
            term = next;
            last_norm = norm.sqrt();
            if last_norm < TAYLOR_TOLERANCE {
                terms_used = terms_used.max(k);
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence { terms: max_taylor_terms, last_norm });
        }
        for (t, amp) in result.into_iter().enumerate() {
            let mut counts = base.counts().to_vec();
            counts[mi] += t as u8;
            counts[mj] += t as u8;
            if counts[mi] > cutoff || counts[mj] > cutoff {
                leaked += amp.norm_sqr();
            } else {
                out_terms.push((OccupationVector::from_counts(&counts), amp));
            }
        }
    }
    let mut out = FockState::from_terms(state.mode_count(), cutoff, out_terms)?;
    out.set_leaked(leaked);
    Ok((out, terms_used))
}

/// Numeric evolution with explicit Taylor limit.
pub fn evolve_network_with(
    network: &NetworkSpec,
    settings: &[PartySetting],
    cutoff: u8,
    max_taylor_terms: usize,
) -> Result<EvolutionReport> {
    if settings.len() != network.parties() {
        return invalid(format!("expected {} settings, got {}", network.parties(), settings.len()));
    }
    let mut state = FockState::vacuum(network.mode_count(), cutoff)?;
    let mut terms_used = 0;
    for src in network.sources() {
        let (next, used) = apply_squeezer_exact(&state, src, max_taylor_terms)?;
        state = next;
        terms_used = terms_used.max(used);
    }
    for (mode, setting) in network.phase_modes().iter().zip(settings) {
        state = state.apply_number_phase(mode.index(), setting.phase)?;
    }
    for (station, setting) in network.stations().iter().zip(settings) {
        if setting.pump.is_on() {
            let (next, used) = apply_squeezer_exact(&state, station, max_taylor_terms)?;
            state = next;
            terms_used = terms_used.max(used);
        }
    }
    let leaked = state.leaked_weight();
    let report = EvolutionReport { final_state: state, leaked_weight: leaked, taylor_terms_used: terms_used };
    if report.unitarity_defect().abs() > 1e-10 || report.final_state.norm_sq() > 1.0 + NORM_TOLERANCE {
        return Err(Error::Consistency(format!("unitarity defect {:e}", report.unitarity_defect())));
    }
    Ok(report)
}

/// Sources, then phase shifts on the slot-1 modes, then the pumped stations.
pub fn evolve_network(network: &NetworkSpec, settings: &[PartySetting], cutoff: u8) -> Result<EvolutionReport> {
    evolve_network_with(network, settings, cutoff, DEFAULT_MAX_TAYLOR_TERMS)
}

/// Pattern `{x_1 = 1, x_2 = 1}` for every `x` in `subset`.
pub fn coincidence_pattern(subset: &[usize]) -> Vec<(usize, u8)> {
    subset
        .iter()
        .flat_map(|&x| [(ModeId::first(x).index(), 1), (ModeId::second(x).index(), 1)])
        .collect()
}

/// Probability of the "11" event at every party of `subset`.
pub fn coincidence_probability(report: &EvolutionReport, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return invalid("subset must not be empty");
    }
    report.final_state.pattern_probability(&coincidence_pattern(subset))
}

/// Probabilities of the "11" event for every non-empty subset, indexed by bitmask.
pub fn subset_probabilities(report: &EvolutionReport, parties: usize) -> Vec<f64> {
    let mut out = vec![0.0; 1 << parties];
    out[0] = report.final_state.norm_sq();
    for (occ, amp) in report.final_state.iter() {
        let mut mask = 0usize;
        for x in 0..parties {
            if occ.get(2 * x) == 1 && occ.get(2 * x + 1) == 1 {
                mask |= 1 << x;
            }
        }
        if mask == 0 {
            continue;
        }
        let w = amp.norm_sqr();
        // Add to every non-empty sub-mask.
        let mut sub = mask;
        while sub > 0 {
            out[sub] += w;
            sub = (sub - 1) & mask;
        }
    }
    out
}

/// Complex number in `{re, im}` form for the network description file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexValue> for Complex64 {
    fn from(c: ComplexValue) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for ComplexValue {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

/// Network description file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub parties: usize,
    pub g: ComplexValue,
    pub settings: Vec<PartySetting>,
}

impl NetworkFile {
    pub fn network(&self) -> Result<NetworkSpec> {
        if self.settings.len() != self.parties {
            return invalid(format!("{} settings given for {} parties", self.settings.len(), self.parties));
        }
        build_ring_network(self.parties, self.g.into())
    }

    pub fn evolve(&self, cutoff: Option<u8>) -> Result<EvolutionReport> {
        evolve_network(&self.network()?, &self.settings, cutoff.unwrap_or(DEFAULT_CUTOFF))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pairs(specs: &[SqueezerSpec]) -> Vec<(String, String)> {
        specs.iter().map(|s| (s.mode_i.label(), s.mode_j.label())).collect()
    }

    fn owned(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn ring_topologies() {
        let n3 = build_ring_network(3, c(0.1)).unwrap();
        assert_eq!(pairs(n3.sources()), owned(&[("a1", "c2"), ("b1", "a2"), ("c1", "b2")]));
        assert_eq!(pairs(n3.stations()), owned(&[("a1", "a2"), ("b1", "b2"), ("c1", "c2")]));
        n3.check_ring_rule().unwrap();
        let n4 = build_ring_network(4, c(0.1)).unwrap();
        assert_eq!(pairs(n4.sources()), owned(&[("a1", "d2"), ("b1", "a2"), ("c1", "b2"), ("d1", "c2")]));
        let n2 = build_ring_network(2, c(0.1)).unwrap();
        assert_eq!(pairs(n2.sources()), owned(&[("a1", "b2"), ("b1", "a2")]));
        n2.check_ring_rule().unwrap();
    }

    #[test]
    fn ring_guards() {
        assert!(build_ring_network(1, c(0.1)).is_err());
        assert!(build_ring_network(3, c(0.6)).is_err());
        assert!(build_ring_network(3, c(f64::NAN)).is_err());
    }

    #[test]
    fn squeezer_at_zero_coupling_is_identity() {
        let v = FockState::vacuum(2, 6).unwrap();
        let spec = SqueezerSpec::new(ModeId::first(0), ModeId::second(0), c(0.0)).unwrap();
        let (out, _) = apply_squeezer_exact(&v, &spec, 40).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn squeezer_matches_closed_form() {
        // Two-mode squeezed vacuum: amplitude of |n,n> is (i tanh r)^n / cosh r for real g = r.
        let g = 0.1;
        let v = FockState::vacuum(2, 6).unwrap();
        let spec = SqueezerSpec::new(ModeId::first(0), ModeId::second(0), c(g)).unwrap();
        let (out, used) = apply_squeezer_exact(&v, &spec, 40).unwrap();
        assert!(used < 40);
        for n in 0..=4u8 {
            let expected = Complex64::new(0.0, g.tanh()).powu(u32::from(n)) / g.cosh();
            let got = out.amplitude(&OccupationVector::from_counts(&[n, n]));
            assert!((got - expected).norm() < 1e-14, "n={n}: {got} vs {expected}");
        }
        assert!((out.norm_sq() + out.leaked_weight() - 1.0).abs() < 1e-12);
        // Second-order expansion check.
        let a0 = out.amplitude(&OccupationVector::from_counts(&[0, 0]));
        assert!((a0.re - (1.0 - g * g / 2.0)).abs() < 2.0 * g.powi(4));
    }

    #[test]
    fn squeezer_convergence_error() {
        let v = FockState::vacuum(2, 6).unwrap();
        let spec = SqueezerSpec::new(ModeId::first(0), ModeId::second(0), c(0.5)).unwrap();
        assert!(matches!(apply_squeezer_exact(&v, &spec, 8), Err(Error::Convergence { .. })));
        assert!(apply_squeezer_exact(&v, &spec, 7).is_err());
        assert!(apply_squeezer_exact(&FockState::vacuum(2, 3).unwrap(), &spec, 40).is_err());
    }

    #[test]
    fn evolution_at_zero_coupling_is_vacuum() {
        let net = build_ring_network(3, c(0.0)).unwrap();
        let settings = [PartySetting::on(0.3), PartySetting::on(1.0), PartySetting::off(2.0)];
        let r = evolve_network(&net, &settings, 6).unwrap();
        assert_eq!(r.final_state, FockState::vacuum(6, 6).unwrap());
        assert_eq!(coincidence_probability(&r, &[0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn destructive_interference_at_pi() {
        let net = build_ring_network(3, c(0.1)).unwrap();
        let settings = [PartySetting::on(PI / 3.0); 3];
        let r = evolve_network(&net, &settings, 6).unwrap();
        // The |g|^6 and |g|^8 terms cancel; what is left starts at |g|^10.
        let p = coincidence_probability(&r, &[0, 1, 2]).unwrap();
        assert!(p < 1e-2 * 0.1f64.powi(6), "{p}");
        assert!(r.unitarity_defect().abs() < 1e-10);
    }

    #[test]
    fn subset_masks_agree_with_patterns() {
        let net = build_ring_network(3, c(0.1)).unwrap();
        let settings = [PartySetting::on(0.2), PartySetting::off(0.4), PartySetting::on(1.1)];
        let r = evolve_network(&net, &settings, 6).unwrap();
        let masks = subset_probabilities(&r, 3);
        for mask in 1..8usize {
            let subset: Vec<_> = (0..3).filter(|x| mask >> x & 1 == 1).collect();
            let direct = coincidence_probability(&r, &subset).unwrap();
            assert!((masks[mask] - direct).abs() < 1e-18);
        }
    }

    #[test]
    fn canonical_phase() {
        assert!((PartySetting::on(-PI).canonical_phase() - PI).abs() < 1e-15);
        assert!((PartySetting::on(5.0 * PI).canonical_phase() - PI).abs() < 1e-12);
    }

    #[test]
    fn network_file_round_trip() {
        let text = r#"{"parties":3,"g":{"re":0.1,"im":0.0},"settings":[{"pump":"on","phase":1.0},{"pump":"off","phase":0.0},{"pump":"on","phase":2.0}]}"#;
        let file: NetworkFile = serde_json::from_str(text).unwrap();
        assert_eq!(file.settings[1].pump, Pump::Off);
        let again: NetworkFile = serde_json::from_str(&serde_json::to_string(&file).unwrap()).unwrap();
        assert_eq!(again, file);
        assert!(file.evolve(Some(6)).is_ok());
    }
}
