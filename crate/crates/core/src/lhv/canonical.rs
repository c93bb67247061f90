use serde::Serialize;

use super::polytope::{cells_to_cg, cg_keys, CgKey};
use crate::bell::{n_lifted_ch_expression, BellExpression};
use crate::error::{invalid, Result};

/// Coefficients below this fraction of the largest one are treated as zero.
pub const COEFFICIENT_TOLERANCE: f64 = 1e-6;

/// Relabeling of a behavior: outcome flips (per party and setting), then
/// setting swaps, then a party permutation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Relabeling {
    /// Bit `2x + t` flips party `x`'s outcome under setting `t`.
    pub outcome_flips: usize,
    pub setting_swaps: usize,
    /// Party `x` becomes party `permutation[x]`.
    pub permutation: Vec<usize>,
}

impl Relabeling {
    pub fn map_cell(&self, s: usize, o: usize) -> (usize, usize) {
        let n = self.permutation.len();
        let mut o2 = o;
        for x in 0..n {
            let t = (s >> x) & 1;
            if (self.outcome_flips >> (2 * x + t)) & 1 == 1 {
                o2 ^= 1 << x;
            }
        }
        let s2 = s ^ self.setting_swaps;
        let permute = |m: usize| (0..n).fold(0, |acc, x| acc | ((m >> x) & 1) << self.permutation[x]);
        (permute(s2), permute(o2))
    }

    /// Cell coefficients `c'` with `c' . (relabeled behavior) = c . behavior`.
    pub fn apply(&self, coeffs: &[f64]) -> Vec<f64> {
        let cells = 1usize << self.permutation.len();
        let mut out = vec![0.0; coeffs.len()];
        for s in 0..cells {
            for o in 0..cells {
                let (s2, o2) = self.map_cell(s, o);
                out[s2 * cells + o2] = coeffs[s * cells + o];
            }
        }
        out
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every relabeling of `parties` two-setting dichotomic parties.
pub fn relabelings(parties: usize) -> Vec<Relabeling> {
    let mut out = Vec::new();
    for permutation in permutations(parties) {
        for setting_swaps in 0..1usize << parties {
            for outcome_flips in 0..1usize << (2 * parties) {
                out.push(Relabeling { outcome_flips, setting_swaps, permutation: permutation.clone() });
            }
        }
    }
    out
}

/// An inequality `constant + sum alpha_k cg_k <= 0` with the largest
/// `|alpha_k|` scaled to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedInequality {
    pub parties: usize,
    pub terms: Vec<(CgKey, f64)>,
    pub constant: f64,
    /// Factor the raw certificate was divided by.
    pub scale: f64,
    /// Relabeling taking this inequality onto the lifted CH form, if any.
    pub lifted_ch_match: Option<Relabeling>,
}

impl NormalizedInequality {
    pub fn value(&self, cg_point: &[f64]) -> f64 {
        let keys = cg_keys(self.parties);
        self.constant
            + self
                .terms
                .iter()
                .map(|(k, a)| a * cg_point[keys.binary_search(k).expect("key in range")])
                .sum::<f64>()
    }

    pub fn describe(&self) -> String {
        let mut out = String::new();
        for (k, a) in &self.terms {
            let event = super::certifier::key_event(self.parties, k);
            out.push_str(&format!("{a:+.6} {event} "));
        }
        out.push_str(&format!("{:+.6} <= 0", self.constant));
        out
    }
}

fn normalized_cg(parties: usize, coeffs: &[f64], keys: &[CgKey]) -> Option<(Vec<f64>, f64, f64)> {
    let (alpha, constant) = cells_to_cg(parties, coeffs, keys);
    let scale = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut alpha: Vec<f64> = alpha.iter().map(|a| a / scale).collect();
    for a in &mut alpha {
        if a.abs() < COEFFICIENT_TOLERANCE {
            *a = 0.0;
        }
    }
    let mut constant = constant / scale;
    if constant.abs() < COEFFICIENT_TOLERANCE {
        constant = 0.0;
    }
    Some((alpha, constant, scale))
}

fn same(a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)) -> bool {
    (a.1 - b.1).abs() < COEFFICIENT_TOLERANCE
        && a.0.iter().zip(&b.0).all(|(x, y)| (x - y).abs() < COEFFICIENT_TOLERANCE)
}

/// Rescales a certificate into CG form and searches the relabeling group for a
/// map onto CH over the first two parties lifted by the others' primed "+".
pub fn certificate_to_inequality(parties: usize, coeffs: &[f64]) -> Result<NormalizedInequality> {
    let cells = 1usize << parties;
    if coeffs.len() != cells * cells {
        return invalid(format!("expected {} cell coefficients, got {}", cells * cells, coeffs.len()));
    }
    let keys = cg_keys(parties);
    let Some((alpha, constant, scale)) = normalized_cg(parties, coeffs, &keys) else {
        return invalid("certificate has no non-constant part");
    };
    let lifted_ch_match = if parties >= 2 && parties <= 4 {
        let target = expression_cg(&n_lifted_ch_expression(parties)?, &keys);
        relabelings(parties).into_iter().find(|r| {
            normalized_cg(parties, &r.apply(coeffs), &keys).is_some_and(|(a, c, _)| same(&(a, c), &target))
        })
    } else {
        None
    };
    let terms = keys.iter().zip(&alpha).filter(|(_, a)| **a != 0.0).map(|(k, a)| (*k, *a)).collect();
    Ok(NormalizedInequality { parties, terms, constant, scale, lifted_ch_match })
}

fn expression_cg(expr: &BellExpression, keys: &[CgKey]) -> (Vec<f64>, f64) {
    let (a, c, _) = normalized_cg(expr.parties, &expr.cell_coefficients(), keys).expect("non-trivial expression");
    (a, c)
}
