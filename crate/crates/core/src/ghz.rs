//! The GHZ/Hardy-type argument on the three-party ring: near-certain
//! implications with two pumps off, and the all-off versus all-on paradox.

use num_complex::Complex64;
use serde::Serialize;

use crate::bell::SymbolicEventModel;
use crate::error::{Error, Result};
use crate::network::{build_ring_network, evolve_network, coincidence_probability, PartySetting};
use crate::symbolic::ProbabilityPolynomial;

/// Symbolic order of the states behind every report here.
pub const GHZ_ORDER: u32 = 6;
/// Probabilities keep terms through `|g|^8`.
pub const GHZ_DEGREE: u32 = 8;
/// Conditioning events less likely than this are rejected.
pub const MIN_CONDITION_PROBABILITY: f64 = 1e-15;
/// Largest coupling treated as inside the small-`g` regime.
pub const SMALL_G_LIMIT: f64 = 0.1;

/// Exact probabilities for the three-party ring, truncated at `|g|^8`.
pub struct GhzModel {
    symbolic: SymbolicEventModel,
}

impl GhzModel {
    pub fn new() -> Result<Self> {
        Ok(Self { symbolic: SymbolicEventModel::new(3, GHZ_ORDER)? })
    }

    /// "11" on every party in `subset` with the pumps of `pump_mask` on.
    pub fn polynomial(&self, pump_mask: usize, subset: &[usize]) -> Result<ProbabilityPolynomial> {
        let p = self.symbolic.pattern_polynomial(pump_mask, subset)?;
        if p.exact_through() < GHZ_DEGREE {
            return Err(Error::Consistency(format!("probability exact only through order {}", p.exact_through())));
        }
        Ok(p.truncated(GHZ_DEGREE))
    }

    pub fn probability(&self, pump_mask: usize, subset: &[usize], g: f64, phases: &[f64]) -> Result<f64> {
        Ok(self.polynomial(pump_mask, subset)?.evaluate(Complex64::new(g, 0.0), phases))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Implication {
    /// Party whose "11" is implied by the other two.
    pub target: usize,
    pub target_pump_on: bool,
    pub condition_probability: f64,
    pub value: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImplicationReport {
    pub g: f64,
    pub implications: Vec<Implication>,
}

impl ImplicationReport {
    /// Largest deviation among implications with the target's pump on.
    pub fn worst_on_deviation(&self) -> f64 {
        self.implications.iter().filter(|i| i.target_pump_on).map(|i| i.deviation).fold(0.0, f64::max)
    }
}

/// `P(11 at X | 11 at Y and Z)` with Y and Z's pumps off, for each target X
/// and both of X's pump settings.
pub fn implication_check(model: &GhzModel, g: f64, phases: &[f64]) -> Result<ImplicationReport> {
    let mut implications = Vec::new();
    for target in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&y| y != target).collect();
        for on in [false, true] {
            let pumps = if on { 1 << target } else { 0 };
            let condition = model.probability(pumps, &others, g, phases)?;
            if condition < MIN_CONDITION_PROBABILITY {
                return Err(Error::UndefinedConditional { probability: condition });
            }
            let joint = model.probability(pumps, &[0, 1, 2], g, phases)?;
            let value = joint / condition;
            implications.push(Implication {
                target,
                target_pump_on: on,
                condition_probability: condition,
                value,
                deviation: 1.0 - value,
            });
        }
    }
    Ok(ImplicationReport { g, implications })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParadoxGap {
    /// All pumps off.
    pub lhs: f64,
    /// All pumps on at the given phases.
    pub rhs: f64,
    pub gap: f64,
}

pub fn paradox_gap(model: &GhzModel, g: f64, phases: &[f64]) -> Result<ParadoxGap> {
    let lhs = model.probability(0, &[0, 1, 2], g, phases)?;
    let rhs = model.probability(0b111, &[0, 1, 2], g, phases)?;
    Ok(ParadoxGap { lhs, rhs, gap: lhs - rhs })
}

/// The same gap from numeric evolution, as a cross-check.
pub fn paradox_gap_numeric(g: f64, phases: &[f64], cutoff: u8) -> Result<ParadoxGap> {
    let network = build_ring_network(3, Complex64::new(g, 0.0))?;
    let settings = |on: bool| -> Vec<PartySetting> {
        phases.iter().map(|&p| if on { PartySetting::on(p) } else { PartySetting::off(p) }).collect()
    };
    let lhs = coincidence_probability(&evolve_network(&network, &settings(false), cutoff)?, &[0, 1, 2])?;
    let rhs = coincidence_probability(&evolve_network(&network, &settings(true), cutoff)?, &[0, 1, 2])?;
    Ok(ParadoxGap { lhs, rhs, gap: lhs - rhs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegradationBudget {
    pub g: f64,
    /// `deviation / |g|^2`, largest over the three implications.
    pub c: f64,
    /// Slack the imperfect implications give a local model:
    /// the sum over targets of `P(condition) * deviation`.
    pub budget: f64,
    pub within_small_g: bool,
}

pub fn degradation_budget(model: &GhzModel, g: f64, phases: &[f64]) -> Result<DegradationBudget> {
    let report = implication_check(model, g, phases)?;
    let budget = report
        .implications
        .iter()
        .filter(|i| i.target_pump_on)
        .map(|i| i.condition_probability * i.deviation.max(0.0))
        .sum();
    Ok(DegradationBudget {
        g,
        c: report.worst_on_deviation() / (g * g),
        budget,
        within_small_g: g.abs() <= SMALL_G_LIMIT,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParadoxReport {
    pub g: f64,
    pub phases: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub budget: f64,
    pub c: f64,
    pub within_small_g: bool,
    /// Gap exceeds the budget: the contradiction survives the imperfect implications.
    pub survives: bool,
    pub implications: Vec<Implication>,
}

pub fn paradox_report(model: &GhzModel, g: f64, phases: &[f64]) -> Result<ParadoxReport> {
    let gap = paradox_gap(model, g, phases)?;
    let budget = degradation_budget(model, g, phases)?;
    let implications = implication_check(model, g, phases)?.implications;
    Ok(ParadoxReport {
        g,
        phases: phases.to_vec(),
        lhs: gap.lhs,
        rhs: gap.rhs,
        gap: gap.gap,
        budget: budget.budget,
        c: budget.c,
        within_small_g: budget.within_small_g,
        survives: gap.gap > budget.budget,
        implications,
    })
}

impl ParadoxReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
