use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::polynomial::{Monomial, PhaseMonomial, PolynomialAmplitude};
use super::rational::{GaussianRational, RationalParts};
use crate::error::{invalid, Result};
use crate::fock::OccupationVector;
use crate::network::{NetworkSpec, Pump};

/// Default amplitude order, matching the fourth-order reference tables.
pub const DEFAULT_ORDER: u32 = 4;
/// Upper bound on the amplitude order accepted by the symbolic engine.
pub const MAX_ORDER: u32 = 10;

/// Perturbative state. Amplitudes are stored in reduced form: the physical
/// amplitude of `|n>` is `r(n) * sqrt(prod_i n_i!)`, which keeps every ladder
/// factor rational (creation contributes 1, annihilation `n_i * n_j`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicState {
    parties: usize,
    order_max: u32,
    terms: BTreeMap<OccupationVector, PolynomialAmplitude>,
}

impl SymbolicState {
    pub fn vacuum(parties: usize, order_max: u32) -> Result<Self> {
        if parties < 1 {
            return invalid("symbolic state needs at least one party");
        }
        if order_max > MAX_ORDER {
            return invalid(format!("order {order_max} exceeds the supported maximum {MAX_ORDER}"));
        }
        let mut terms = BTreeMap::new();
        terms.insert(OccupationVector::zeros(2 * parties), PolynomialAmplitude::one(parties));
        Ok(Self { parties, order_max, terms })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn order_max(&self) -> u32 {
        self.order_max
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Occupations with a non-zero amplitude, in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = &OccupationVector> {
        self.terms.keys()
    }

    /// Reduced amplitudes `r(n)`.
    pub fn reduced_terms(&self) -> impl Iterator<Item = (&OccupationVector, &PolynomialAmplitude)> {
        self.terms.iter()
    }

    pub fn reduced_amplitude(&self, occ: &OccupationVector) -> Option<&PolynomialAmplitude> {
        self.terms.get(occ)
    }

    /// Physical amplitude of `occ`.
    pub fn amplitude(&self, occ: &OccupationVector) -> PhysicalAmplitude {
        let (square, radicand) = split_factorial_product(occ);
        let poly = match self.terms.get(occ) {
            Some(r) => r.scaled(&GaussianRational::real(BigRational::from_integer(square.into()))),
            None => PolynomialAmplitude::zero(self.parties),
        };
        PhysicalAmplitude { poly, radicand }
    }

    fn insert_acc(map: &mut BTreeMap<OccupationVector, PolynomialAmplitude>, occ: OccupationVector, poly: PolynomialAmplitude) {
        if poly.is_zero() {
            return;
        }
        match map.entry(occ) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(poly);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().add_assign(&poly);
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `(g a_i^† a_j^† + conj(g) a_i a_j)` on the reduced amplitudes.
    fn apply_generator(&self, mode_i: usize, mode_j: usize) -> BTreeMap<OccupationVector, PolynomialAmplitude> {
        let mut out: BTreeMap<OccupationVector, PolynomialAmplitude> = BTreeMap::new();
        for (occ, poly) in &self.terms {
            let mut up = PolynomialAmplitude::zero(self.parties);
            poly.map_raise(1, 0, 1, self.order_max, &mut up);
            Self::insert_acc(&mut out, occ.raised(mode_i, mode_j), up);

            if let Some(lower) = occ.lowered(mode_i, mode_j) {
                let factor = u64::from(occ.get(mode_i)) * u64::from(occ.get(mode_j));
                let mut down = PolynomialAmplitude::zero(self.parties);
                poly.map_raise(0, 1, factor, self.order_max, &mut down);
                Self::insert_acc(&mut out, lower, down);
            }
        }
        out
    }

    /// `exp(i (g a_i^† a_j^† + conj(g) a_i a_j))` expanded through `order_max`.
    /// Monomials above `order_max` are discarded after every generator application.
    pub fn expand_squeezer(&self, mode_i: usize, mode_j: usize) -> Result<Self> {
        let modes = 2 * self.parties;
        if mode_i >= modes || mode_j >= modes {
            return invalid(format!("mode out of range for {modes} modes"));
        }
        if mode_i == mode_j {
            return invalid("pair operators need two distinct modes");
        }
        let mut result = self.clone();
        let mut term = self.clone();
        for k in 1..=self.order_max {
            let scale = GaussianRational::new(BigRational::from_integer(0.into()), BigRational::new(1.into(), u64::from(k).into()));
            let applied = term.apply_generator(mode_i, mode_j);
            term.terms = applied
                .into_iter()
                .map(|(occ, p)| (occ, p.scaled(&scale)))
                .filter(|(_, p)| !p.is_zero())
                .collect();
            if term.terms.is_empty() {
                break;
            }
            for (occ, p) in &term.terms {
                Self::insert_acc(&mut result.terms, occ.clone(), p.clone());
            }
        }
        Ok(result)
    }

    /// Multiplies each amplitude by `exp(i phi_party n_mode)`, kept symbolic.
    pub fn apply_phase(&self, mode: usize, party: usize) -> Result<Self> {
        if mode >= 2 * self.parties || party >= self.parties {
            return invalid("phase mode or party out of range");
        }
        let terms = self
            .terms
            .iter()
            .map(|(occ, p)| (occ.clone(), p.phase_shifted(party, i32::from(occ.get(mode)))))
            .collect();
        Ok(Self { parties: self.parties, order_max: self.order_max, terms })
    }

    /// JSON-friendly dump of the physical amplitudes.
    pub fn dump(&self) -> Vec<SymbolicEntry> {
        self.terms
            .keys()
            .map(|occ| {
                let amp = self.amplitude(occ);
                SymbolicEntry {
                    occupation: occ.counts().to_vec(),
                    radicand: amp.radicand,
                    terms: amp
                        .poly
                        .iter()
                        .map(|(mono, c)| SymbolicTerm {
                            m: mono.m,
                            n: mono.n,
                            k: mono.k.exponents().to_vec(),
                            coeff: c.to_parts(),
                        })
                        .collect(),
                }
            })
            .collect()
    }
}

/// Source layer, symbolic phases on the slot-1 modes, then the station
/// squeezers whose pump is on.
pub fn evolve_network_symbolic(network: &NetworkSpec, pumps: &[Pump], order_max: u32) -> Result<SymbolicState> {
    let n = network.parties();
    if pumps.len() != n {
        return invalid(format!("expected {n} pump settings, got {}", pumps.len()));
    }
    let mut state = SymbolicState::vacuum(n, order_max)?;
    for src in network.sources() {
        state = state.expand_squeezer(src.mode_i.index(), src.mode_j.index())?;
    }
    for (party, mode) in network.phase_modes().iter().enumerate() {
        state = state.apply_phase(mode.index(), party)?;
    }
    for (station, pump) in network.stations().iter().zip(pumps) {
        if *pump == Pump::On {
            state = state.expand_squeezer(station.mode_i.index(), station.mode_j.index())?;
        }
    }
    Ok(state)
}

/// Physical amplitude `poly * sqrt(radicand)` with `radicand` square-free.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalAmplitude {
    pub poly: PolynomialAmplitude,
    pub radicand: u64,
}

/// Writes `prod n_i!` as `square^2 * radicand` with `radicand` square-free.
pub fn split_factorial_product(occ: &OccupationVector) -> (u64, u64) {
    let mut exponents: BTreeMap<u64, u32> = BTreeMap::new();
    for &n in occ.counts() {
        for mut f in 2..=u64::from(n) {
            let mut p = 2;
            while f > 1 {
                while f % p == 0 {
                    *exponents.entry(p).or_default() += 1;
                    f /= p;
                }
                p += 1;
            }
        }
    }
    let mut square = BigUint::one();
    let mut radicand = BigUint::one();
    for (p, e) in exponents {
        square *= BigUint::from(p).pow(e / 2);
        if e % 2 == 1 {
            radicand *= p;
        }
    }
    (
        square.to_u64().expect("square factor fits in u64"),
        radicand.to_u64().expect("radicand fits in u64"),
    )
}

/// Builds a monomial term for hand-written expectations.
pub fn term(m: u32, n: u32, k: &[i32], c: GaussianRational) -> (Monomial, GaussianRational) {
    (Monomial::new(m, n, PhaseMonomial::from_exponents(k)), c)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicTerm {
    pub m: u32,
    pub n: u32,
    pub k: Vec<i32>,
    pub coeff: RationalParts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicEntry {
    pub occupation: Vec<u8>,
    #[serde(default = "one_u64")]
    pub radicand: u64,
    pub terms: Vec<SymbolicTerm>,
}

fn one_u64() -> u64 {
    1
}

impl SymbolicEntry {
    pub fn polynomial(&self, parties: usize) -> Option<PolynomialAmplitude> {
        let mut poly = PolynomialAmplitude::zero(parties);
        for t in &self.terms {
            if t.k.len() != parties {
                return None;
            }
            poly.add_term(
                Monomial::new(t.m, t.n, PhaseMonomial::from_exponents(&t.k)),
                GaussianRational::from_parts(&t.coeff)?,
            );
        }
        Some(poly)
    }
}
