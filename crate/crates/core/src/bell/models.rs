use std::collections::BTreeMap;
use std::sync::Mutex;

use num_complex::Complex64;

use super::inequalities::{BellExpression, Event, EventProbabilities};
use crate::error::{invalid, Result};
use crate::network::{build_ring_network, Pump};
use crate::symbolic::{evolve_network_symbolic, probability_polynomial, ProbabilityPolynomial, SymbolicState};

/// Analytic leading-order probabilities in `x = |g|^2`.
///
/// Full N-fold events are `x^N`, or `2 x^N (1 + V cos(sum phi))` when every
/// pump is on. For three parties the lower-order events of the on/off
/// scenario are tabulated too.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadingOrderModel {
    pub parties: usize,
    pub x: f64,
    pub phase_sum: f64,
    pub visibility: f64,
}

impl LeadingOrderModel {
    pub fn new(parties: usize, g: f64, phase_sum: f64) -> Self {
        Self { parties, x: g * g, phase_sum, visibility: 1.0 }
    }

    pub fn with_visibility(mut self, visibility: f64) -> Self {
        self.visibility = visibility;
        self
    }
}

/// Leading-order N-fold coincidence probability for a pump pattern.
pub fn leading_order_probability(pumps: &[Pump], x: f64, phase_sum: f64, visibility: f64) -> f64 {
    let scale = x.powi(pumps.len() as i32);
    if pumps.iter().all(|p| p.is_on()) {
        2.0 * scale * (1.0 + visibility * phase_sum.cos())
    } else {
        scale
    }
}

impl EventProbabilities for LeadingOrderModel {
    fn parties(&self) -> usize {
        self.parties
    }

    fn event_probability(&self, event: &Event) -> Result<f64> {
        let n = self.parties;
        let size = event.0.len();
        let primed = event.0.iter().filter(|&&(_, s)| s == 1).count();
        if size == n {
            let pumps: Vec<Pump> = event.0.iter().map(|&(_, s)| if s == 1 { Pump::On } else { Pump::Off }).collect();
            return Ok(leading_order_probability(&pumps, self.x, self.phase_sum, self.visibility));
        }
        if n == 3 {
            match (size, primed) {
                (1, 0) => return Ok(self.x * self.x),
                (1, 1) => return Ok(self.x),
                (2, 2) => return Ok(self.x * self.x),
                (2, _) => return Ok(self.x.powi(3)),
                _ => {}
            }
        }
        invalid(format!("no leading-order value for {event} with {n} parties"))
    }
}

/// Exact probability polynomials for the on/off scenario of the N-ring. The
/// pump pattern of an event turns on exactly the primed parties; all others
/// stay off.
pub struct SymbolicEventModel {
    parties: usize,
    order: u32,
    states: Mutex<BTreeMap<usize, SymbolicState>>,
}

impl SymbolicEventModel {
    pub fn new(parties: usize, order: u32) -> Result<Self> {
        if parties < 2 {
            return invalid("the ring needs at least two parties");
        }
        Ok(Self { parties, order, states: Mutex::new(BTreeMap::new()) })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    fn state(&self, pump_mask: usize) -> Result<SymbolicState> {
        if let Some(s) = self.states.lock().expect("cache lock").get(&pump_mask) {
            return Ok(s.clone());
        }
        let network = build_ring_network(self.parties, Complex64::new(0.1, 0.0))?;
        let pumps: Vec<Pump> =
            (0..self.parties).map(|x| if (pump_mask >> x) & 1 == 1 { Pump::On } else { Pump::Off }).collect();
        let state = evolve_network_symbolic(&network, &pumps, self.order)?;
        self.states.lock().expect("cache lock").insert(pump_mask, state.clone());
        Ok(state)
    }

    /// "+" on every party of `subset` with the pumps of `pump_mask` on.
    pub fn pattern_polynomial(&self, pump_mask: usize, subset: &[usize]) -> Result<ProbabilityPolynomial> {
        if pump_mask >> self.parties != 0 {
            return invalid(format!("pump mask {pump_mask:#b} does not fit {} parties", self.parties));
        }
        probability_polynomial(&self.state(pump_mask)?, subset)
    }

    pub fn event_polynomial(&self, event: &Event) -> Result<ProbabilityPolynomial> {
        if event.0.iter().any(|&(x, s)| x >= self.parties || s > 1) || event.0.is_empty() {
            return invalid(format!("event {event} does not fit {} parties", self.parties));
        }
        let state = self.state(event.settings_mask())?;
        probability_polynomial(&state, &event.parties())
    }

    /// Combination of the event polynomials; exact through the smallest
    /// exactness order among the terms.
    pub fn expression_polynomial(&self, expr: &BellExpression) -> Result<ProbabilityPolynomial> {
        let mut total: Option<ProbabilityPolynomial> = None;
        for (c, event) in &expr.terms {
            let p = self.event_polynomial(event)?.scaled(*c);
            total = Some(match total {
                None => p,
                Some(t) => t.add(&p),
            });
        }
        total.ok_or_else(|| crate::Error::InvalidArgument("empty expression".into()))
    }

    /// Numeric view at coupling `g`, using only the exactly known terms.
    pub fn evaluated(&self, g: Complex64, phases: Vec<f64>) -> EvaluatedSymbolicModel<'_> {
        EvaluatedSymbolicModel { model: self, g, phases, truncate_at: None }
    }
}

/// Symbolic model evaluated at a coupling and phase vector.
pub struct EvaluatedSymbolicModel<'a> {
    model: &'a SymbolicEventModel,
    g: Complex64,
    phases: Vec<f64>,
    truncate_at: Option<u32>,
}

impl EvaluatedSymbolicModel<'_> {
    /// Keep only terms up to this total order (on top of the exactness cut).
    pub fn truncated(mut self, order: u32) -> Self {
        self.truncate_at = Some(order);
        self
    }
}

impl EventProbabilities for EvaluatedSymbolicModel<'_> {
    fn parties(&self) -> usize {
        self.model.parties
    }

    fn event_probability(&self, event: &Event) -> Result<f64> {
        let mut p = self.model.event_polynomial(event)?.exact_part();
        if let Some(order) = self.truncate_at {
            p = p.truncated(order);
        }
        Ok(p.evaluate(self.g, &self.phases))
    }
}
