use std::fmt;

use super::behavior::Behavior;
use crate::error::{invalid, Result};

/// Conjunction of "+" outcomes: `(party, setting index)` pairs, setting 0 is
/// the unprimed (pump off) setting and 1 the primed (pump on) one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event(pub Vec<(usize, usize)>);

impl Event {
    pub fn new(mut terms: Vec<(usize, usize)>) -> Self {
        terms.sort_unstable();
        Self(terms)
    }

    pub fn subset_mask(&self) -> usize {
        self.0.iter().fold(0, |acc, &(x, _)| acc | 1 << x)
    }

    /// Settings vector with unlisted parties at setting 0.
    pub fn settings_mask(&self) -> usize {
        self.0.iter().fold(0, |acc, &(x, s)| acc | (s & 1) << x)
    }

    pub fn parties(&self) -> Vec<usize> {
        self.0.iter().map(|&(x, _)| x).collect()
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self
            .0
            .iter()
            .map(|&(x, s)| {
                let letter = (b'A' + (x % 26) as u8) as char;
                if s == 1 {
                    format!("{letter}'")
                } else {
                    letter.to_string()
                }
            })
            .collect();
        write!(f, "P({})", names.join(","))
    }
}

/// Anything that can report the probability of a conjunction of "+" events.
pub trait EventProbabilities {
    fn parties(&self) -> usize;
    fn event_probability(&self, event: &Event) -> Result<f64>;
}

impl EventProbabilities for Behavior {
    fn parties(&self) -> usize {
        Behavior::parties(self)
    }

    fn event_probability(&self, event: &Event) -> Result<f64> {
        if event.0.iter().any(|&(x, s)| x >= self.parties() || s > 1) {
            return invalid(format!("event {event} does not fit a {}-party behavior", self.parties()));
        }
        Ok(self.plus_marginal(event.settings_mask(), event.subset_mask()))
    }
}

/// Integer combination of event probabilities, read as `value <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellExpression {
    pub name: String,
    pub parties: usize,
    pub terms: Vec<(i64, Event)>,
}

impl BellExpression {
    pub fn evaluate(&self, probs: &impl EventProbabilities) -> Result<f64> {
        if probs.parties() != self.parties {
            return invalid(format!(
                "{} needs {} parties, got {}",
                self.name,
                self.parties,
                probs.parties()
            ));
        }
        let mut total = 0.0;
        for (c, event) in &self.terms {
            total += *c as f64 * probs.event_probability(event)?;
        }
        Ok(total)
    }

    /// Coefficients over the `(s, o)` cells of a behavior table.
    pub fn cell_coefficients(&self) -> Vec<f64> {
        let cells = 1usize << self.parties;
        let mut out = vec![0.0; cells * cells];
        for (c, event) in &self.terms {
            let s = event.settings_mask();
            let subset = event.subset_mask();
            for o in 0..cells {
                if o & subset == subset {
                    out[s * cells + o] += *c as f64;
                }
            }
        }
        out
    }

    pub fn plus(&self, other: &Self, name: impl Into<String>) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { name: name.into(), parties: self.parties, terms }
    }
}

/// CH over parties `x`, `y` with every term conjoined with the primed "+"
/// event of each party in `lifts`:
/// `P(X,Y,L') + P(X,Y',L') + P(X',Y,L') - P(X',Y',L') - P(X,L') - P(Y,L')`.
pub fn lifted_ch(parties: usize, x: usize, y: usize, lifts: &[usize]) -> Result<BellExpression> {
    let mut all = vec![x, y];
    all.extend_from_slice(lifts);
    let mut sorted = all.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != all.len() || sorted.iter().any(|&p| p >= parties) {
        return invalid("lifted CH needs distinct parties inside the network");
    }
    let lift: Vec<(usize, usize)> = lifts.iter().map(|&z| (z, 1)).collect();
    let ev = |extra: &[(usize, usize)]| {
        let mut t = extra.to_vec();
        t.extend_from_slice(&lift);
        Event::new(t)
    };
    let name = if lifts.is_empty() {
        format!("CH[{x},{y}]")
    } else {
        let l: Vec<String> = lifts.iter().map(|z| z.to_string()).collect();
        format!("CH[{x},{y}|{}']", l.join(","))
    };
    Ok(BellExpression {
        name,
        parties,
        terms: vec![
            (1, ev(&[(x, 0), (y, 0)])),
            (1, ev(&[(x, 0), (y, 1)])),
            (1, ev(&[(x, 1), (y, 0)])),
            (-1, ev(&[(x, 1), (y, 1)])),
            (-1, ev(&[(x, 0)])),
            (-1, ev(&[(y, 0)])),
        ],
    })
}

/// Three-party CH lifted by Charlie's primed setting.
pub fn lifted_ch_expression() -> BellExpression {
    lifted_ch(3, 0, 1, &[2]).expect("fixed parties are valid")
}

/// Sum of the liftings over each party in turn.
pub fn symmetrized_ch_expression() -> BellExpression {
    let a = lifted_ch(3, 1, 2, &[0]).expect("valid");
    let b = lifted_ch(3, 0, 2, &[1]).expect("valid");
    let c = lifted_ch(3, 0, 1, &[2]).expect("valid");
    a.plus(&b, "").plus(&c, "CH^A'+CH^B'+CH^C'")
}

/// Symmetrized sum minus `P(A',B',C')`.
pub fn genuine_tripartite_expression() -> BellExpression {
    let mut e = symmetrized_ch_expression();
    e.terms.push((-1, Event::new(vec![(0, 1), (1, 1), (2, 1)])));
    e.name = "CH^A'+CH^B'+CH^C'-P(A',B',C')".into();
    e
}

/// CH over the first two parties lifted by the primed "+" of all others.
pub fn n_lifted_ch_expression(parties: usize) -> Result<BellExpression> {
    let lifts: Vec<usize> = (2..parties).collect();
    lifted_ch(parties, 0, 1, &lifts)
}

pub fn lifted_ch_value(probs: &impl EventProbabilities) -> Result<f64> {
    if probs.parties() != 3 {
        return invalid("the lifted CH expression needs three parties");
    }
    lifted_ch_expression().evaluate(probs)
}

/// Lifted CH with every term divided by `P(C')`, i.e. CH between Alice and
/// Bob conditioned on Charlie's primed "+".
pub fn conditional_ch_value(probs: &impl EventProbabilities) -> Result<f64> {
    let lifted = lifted_ch_value(probs)?;
    let condition = probs.event_probability(&Event::new(vec![(2, 1)]))?;
    if condition <= 0.0 {
        return Err(crate::Error::UndefinedConditional { probability: condition });
    }
    Ok(lifted / condition)
}

pub fn symmetrized_ch_value(probs: &impl EventProbabilities) -> Result<f64> {
    symmetrized_ch_expression().evaluate(probs)
}

pub fn genuine_tripartite_value(probs: &impl EventProbabilities) -> Result<f64> {
    genuine_tripartite_expression().evaluate(probs)
}

pub fn doubly_lifted_ch_value(probs: &impl EventProbabilities) -> Result<f64> {
    if probs.parties() != 4 {
        return invalid("the doubly lifted CH expression needs four parties");
    }
    n_lifted_ch_expression(4)?.evaluate(probs)
}

pub fn n_lifted_ch_value(probs: &impl EventProbabilities) -> Result<f64> {
    n_lifted_ch_expression(probs.parties())?.evaluate(probs)
}

/// The six probabilities entering a two-party CH expression.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChProbabilities {
    pub ab: f64,
    pub ab_primed: f64,
    pub a_primed_b: f64,
    pub a_primed_b_primed: f64,
    pub a: f64,
    pub b: f64,
}

/// `P(A,B) + P(A,B') + P(A',B) - P(A',B') - P(A) - P(B)`.
pub fn two_party_ch_value(p: &ChProbabilities) -> f64 {
    p.ab + p.ab_primed + p.a_primed_b - p.a_primed_b_primed - p.a - p.b
}
