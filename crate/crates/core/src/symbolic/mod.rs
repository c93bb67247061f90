//! Exact perturbative evolution with Gaussian-rational coefficients.

mod polynomial;
mod probability;
mod rational;
mod state;

pub use polynomial::{Monomial, PhaseMonomial, PolynomialAmplitude};
pub use probability::{class_probability, probability_polynomial, ProbabilityPolynomial};
pub use rational::{ratio, to_f64, GaussianRational, RationalParts};
pub use state::{
    evolve_network_symbolic, split_factorial_product, term, PhysicalAmplitude, SymbolicEntry, SymbolicState,
    SymbolicTerm, DEFAULT_ORDER, MAX_ORDER,
};
