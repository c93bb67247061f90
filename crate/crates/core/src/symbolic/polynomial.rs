use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use smallvec::SmallVec;

use super::rational::GaussianRational;

/// Exponent vector `k` of `exp(i * sum_x k_x * phi_x)`, one entry per party.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhaseMonomial(SmallVec<[i32; 8]>);

impl PhaseMonomial {
    pub fn zero(parties: usize) -> Self {
        Self(SmallVec::from_elem(0, parties))
    }

    pub fn from_exponents(k: &[i32]) -> Self {
        Self(SmallVec::from_slice(k))
    }

    pub fn exponents(&self) -> &[i32] {
        &self.0
    }

    pub fn parties(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn shifted(&self, party: usize, by: i32) -> Self {
        let mut out = self.clone();
        out.0[party] += by;
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn minus(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|k| -k).collect())
    }

    /// `Some(c)` when every entry equals `c`, i.e. the phase is `exp(i c sum(phi))`.
    pub fn uniform_multiple(&self) -> Option<i32> {
        let first = *self.0.first()?;
        self.0.iter().all(|&k| k == first).then_some(first)
    }

    pub fn angle(&self, phases: &[f64]) -> f64 {
        self.0.iter().zip(phases).map(|(&k, &phi)| f64::from(k) * phi).sum()
    }
}

impl fmt::Display for PhaseMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (x, &k) in self.0.iter().enumerate() {
            match k {
                0 => {}
                1 => parts.push(format!("p{x}")),
                -1 => parts.push(format!("-p{x}")),
                _ => parts.push(format!("{k}p{x}")),
            }
        }
        write!(f, "e^i({})", parts.join("+"))
    }
}

/// `g^m * conj(g)^n * exp(i k.phi)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub m: u32,
    pub n: u32,
    pub k: PhaseMonomial,
}

impl Monomial {
    pub fn new(m: u32, n: u32, k: PhaseMonomial) -> Self {
        Self { m, n, k }
    }

    pub fn order(&self) -> u32 {
        self.m + self.n
    }

    pub fn times(&self, other: &Self) -> Self {
        Self::new(self.m + other.m, self.n + other.n, self.k.plus(&other.k))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.n, self.m, self.k.negated())
    }

    pub fn evaluate(&self, g: Complex64, phases: &[f64]) -> Complex64 {
        g.powu(self.m) * g.conj().powu(self.n) * Complex64::from_polar(1.0, self.k.angle(phases))
    }
}

/// Exact polynomial in `g`, `conj(g)` and per-party phase exponentials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialAmplitude {
    parties: usize,
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl PolynomialAmplitude {
    pub fn zero(parties: usize) -> Self {
        Self { parties, terms: BTreeMap::new() }
    }

    pub fn constant(parties: usize, c: GaussianRational) -> Self {
        let mut p = Self::zero(parties);
        p.add_term(Monomial::new(0, 0, PhaseMonomial::zero(parties)), c);
        p
    }

    pub fn one(parties: usize) -> Self {
        Self::constant(parties, GaussianRational::one())
    }

    pub fn from_terms(parties: usize, terms: impl IntoIterator<Item = (Monomial, GaussianRational)>) -> Self {
        let mut p = Self::zero(parties);
        for (mono, c) in terms {
            p.add_term(mono, c);
        }
        p
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mono: &Monomial) -> GaussianRational {
        self.terms.get(mono).cloned().unwrap_or_default()
    }

    /// Adds `c * mono`, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, mono: Monomial, c: GaussianRational) {
        debug_assert_eq!(mono.k.parties(), self.parties);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (mono, c) in &other.terms {
            self.add_term(mono.clone(), c.clone());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (mono, c) in &other.terms {
            out.add_term(mono.clone(), -c);
        }
        out
    }

    pub fn scaled(&self, c: &GaussianRational) -> Self {
        Self::from_terms(self.parties, self.terms.iter().map(|(m, v)| (m.clone(), v * c)))
    }

    /// Product keeping only monomials with total order `<= max_order`.
    pub fn mul_truncated(&self, other: &Self, max_order: Option<u32>) -> Self {
        let mut out = Self::zero(self.parties);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some(limit) = max_order {
                    if ma.order() + mb.order() > limit {
                        continue;
                    }
                }
                out.add_term(ma.times(mb), ca * cb);
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_truncated(other, None)
    }

    /// Complex conjugate with `g` and `conj(g)` exchanged and phases negated.
    pub fn conj(&self) -> Self {
        Self::from_terms(self.parties, self.terms.iter().map(|(m, c)| (m.conj(), c.conj())))
    }

    pub fn truncated(&self, max_order: u32) -> Self {
        Self {
            parties: self.parties,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.order() <= max_order)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn min_order(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::order).min()
    }

    pub fn max_order(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::order).max()
    }

    /// Multiplies every term by `exp(i * by * phi_party)`.
    pub fn phase_shifted(&self, party: usize, by: i32) -> Self {
        if by == 0 {
            return self.clone();
        }
        Self {
            parties: self.parties,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (Monomial::new(m.m, m.n, m.k.shifted(party, by)), c.clone()))
                .collect(),
        }
    }

    /// Multiplies each term by `f(monomial)` and applies the order shift `(dm, dn)`,
    /// dropping anything above `max_order`. Used by the ladder operators.
    pub(crate) fn map_raise(&self, dm: u32, dn: u32, factor: u64, max_order: u32, out: &mut Self) {
        for (mono, c) in &self.terms {
            if mono.order() + dm + dn > max_order {
                continue;
            }
            let next = Monomial::new(mono.m + dm, mono.n + dn, mono.k.clone());
            let c = if factor == 1 { c.clone() } else { c.scale_int(factor) };
            out.add_term(next, c);
        }
    }

    pub fn evaluate(&self, g: Complex64, phases: &[f64]) -> Complex64 {
        self.terms.iter().map(|(m, c)| c.to_complex() * m.evaluate(g, phases)).sum()
    }

    /// Equal to its own conjugate, i.e. real for every `g` and phases.
    pub fn is_hermitian(&self) -> bool {
        *self == self.conj()
    }
}

impl fmt::Display for PolynomialAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (mono, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            if mono.m > 0 {
                write!(f, " g^{}", mono.m)?;
            }
            if mono.n > 0 {
                write!(f, " gbar^{}", mono.n)?;
            }
            if !mono.k.is_zero() {
                write!(f, " {}", mono.k)?;
            }
        }
        Ok(())
    }
}
