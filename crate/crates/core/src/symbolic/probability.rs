use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;

use super::polynomial::{Monomial, PhaseMonomial, PolynomialAmplitude};
use super::rational::GaussianRational;
use super::state::{evolve_network_symbolic, SymbolicState};
use crate::error::{invalid, Error, Result};
use crate::fock::OccupationVector;
use crate::network::{build_ring_network, Pump};

/// Probability of a coincidence event as an exact polynomial in `g`, `conj(g)`
/// and the phases. Built from a truncated state; `exact_through` is the total
/// order up to which every coefficient is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityPolynomial {
    poly: PolynomialAmplitude,
    exact_through: u32,
}

fn matches_subset(occ: &OccupationVector, subset: &[usize]) -> bool {
    subset.iter().all(|&x| occ.get(2 * x) == 1 && occ.get(2 * x + 1) == 1)
}

fn factorial_product(occ: &OccupationVector) -> BigRational {
    let mut product = BigUint::one();
    for &n in occ.counts() {
        for f in 2..=u64::from(n) {
            product *= f;
        }
    }
    BigRational::from_integer(product.into())
}

/// Sum over occupations with the "11" pattern on every party of `subset` of
/// `amp * conj(amp)`, marginal over everything else.
pub fn probability_polynomial(state: &SymbolicState, subset: &[usize]) -> Result<ProbabilityPolynomial> {
    if subset.is_empty() {
        return invalid("subset must not be empty");
    }
    if subset.iter().any(|&x| x >= state.parties()) {
        return invalid("subset references a party outside the network");
    }
    let mut poly = PolynomialAmplitude::zero(state.parties());
    let mut lowest = state.order_max() + 1;
    for (occ, r) in state.reduced_terms() {
        if !matches_subset(occ, subset) {
            continue;
        }
        if let Some(low) = r.min_order() {
            lowest = lowest.min(low);
        }
        let weight = GaussianRational::real(factorial_product(occ));
        poly.add_assign(&r.mul(&r.conj()).scaled(&weight));
    }
    Ok(ProbabilityPolynomial { poly, exact_through: state.order_max() + lowest })
}

/// Probability of the "11" event on every party of `subset` for the ring of
/// `parties` with the given pump pattern.
pub fn class_probability(parties: usize, pumps: &[Pump], subset: &[usize], order: u32) -> Result<ProbabilityPolynomial> {
    let network = build_ring_network(parties, Complex64::new(0.1, 0.0))?;
    let state = evolve_network_symbolic(&network, pumps, order)?;
    probability_polynomial(&state, subset)
}

impl ProbabilityPolynomial {
    pub fn from_polynomial(poly: PolynomialAmplitude, exact_through: u32) -> Self {
        Self { poly, exact_through }
    }

    /// Builds `sum c * |g|^(2j) * exp(i s sum(phi))` from `(j, s, c)` triples.
    pub fn from_x_series(parties: usize, coeffs: &[(u32, i32, BigRational)]) -> Self {
        let mut poly = PolynomialAmplitude::zero(parties);
        let mut top = 0;
        for (j, s, c) in coeffs {
            top = top.max(2 * j);
            let k = PhaseMonomial::from_exponents(&vec![*s; parties]);
            poly.add_term(Monomial::new(*j, *j, k), GaussianRational::real(c.clone()));
        }
        Self { poly, exact_through: top }
    }

    pub fn polynomial(&self) -> &PolynomialAmplitude {
        &self.poly
    }

    pub fn exact_through(&self) -> u32 {
        self.exact_through
    }

    /// Drops every term above `order`.
    pub fn truncated(&self, order: u32) -> Self {
        Self { poly: self.poly.truncated(order), exact_through: self.exact_through.min(order) }
    }

    /// Only the terms that are known exactly.
    pub fn exact_part(&self) -> Self {
        self.truncated(self.exact_through)
    }

    pub fn is_real(&self) -> bool {
        self.poly.is_hermitian()
    }

    /// True when every monomial is `|g|^(2j) exp(i s sum(phi))`.
    pub fn depends_on_phase_sum_only(&self) -> bool {
        self.poly.iter().all(|(m, _)| m.m == m.n && m.k.uniform_multiple().is_some())
    }

    /// Coefficient map `(j, s) -> c` for `c |g|^(2j) exp(i s sum(phi))`.
    pub fn x_series(&self) -> Result<BTreeMap<(u32, i32), GaussianRational>> {
        let mut out = BTreeMap::new();
        for (m, c) in self.poly.iter() {
            let s = m.k.uniform_multiple();
            match s {
                Some(s) if m.m == m.n => {
                    out.insert((m.m, s), c.clone());
                }
                _ => {
                    return Err(Error::Consistency(format!(
                        "probability term g^{} gbar^{} {} is not a power of |g|^2 times a phase-sum exponential",
                        m.m, m.n, m.k
                    )))
                }
            }
        }
        Ok(out)
    }

    /// Phase-independent coefficient of `|g|^(2j)`.
    pub fn x_coefficient(&self, j: u32) -> GaussianRational {
        let k = PhaseMonomial::zero(self.poly.parties());
        self.poly.coefficient(&Monomial::new(j, j, k))
    }

    /// Coefficient of `|g|^(2j) exp(i s sum(phi))`.
    pub fn x_phase_coefficient(&self, j: u32, s: i32) -> GaussianRational {
        let k = PhaseMonomial::from_exponents(&vec![s; self.poly.parties()]);
        self.poly.coefficient(&Monomial::new(j, j, k))
    }

    pub fn evaluate(&self, g: Complex64, phases: &[f64]) -> f64 {
        self.poly.evaluate(g, phases).re
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { poly: self.poly.sub(&other.poly), exact_through: self.exact_through.min(other.exact_through) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { poly: self.poly.add(&other.poly), exact_through: self.exact_through.min(other.exact_through) }
    }

    pub fn scaled(&self, c: i64) -> Self {
        Self { poly: self.poly.scaled(&GaussianRational::from_ints(c, 0)), exact_through: self.exact_through }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }
}
