use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::behavior::{subset_table, Behavior, SettingsProfile};
use super::inequalities::{genuine_tripartite_expression, lifted_ch_expression, BellExpression};
use super::models::{LeadingOrderModel, SymbolicEventModel};
use crate::error::{invalid, Error, Result};
use crate::network::{build_ring_network, evolve_network, subset_probabilities, PartySetting};
use crate::symbolic::to_f64;

/// Bisection stops once the bracket is this narrow.
pub const BISECTION_TOLERANCE: f64 = 1e-9;
/// Phase-sum samples used to average the all-on block for dephasing.
pub const DEPHASING_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityReport {
    pub v_threshold_ch: f64,
    pub v_threshold_genuine: f64,
    /// The same thresholds found by bisection on a behavior-level model.
    pub bisection_ch: f64,
    pub bisection_genuine: f64,
}

/// Visibility at which an expression's leading `|g|^6` part vanishes at
/// `cos(sum phi) = -1`, assuming V scales every phase-dependent term.
pub fn exact_threshold(expr: &BellExpression) -> Result<BigRational> {
    let model = SymbolicEventModel::new(expr.parties, 3)?;
    let poly = model.expression_polynomial(expr)?;
    let lowest = poly
        .polynomial()
        .min_order()
        .ok_or_else(|| Error::Consistency(format!("{} vanishes identically", expr.name)))?;
    let j = lowest / 2;
    if poly.exact_through() < lowest {
        return Err(Error::Consistency(format!("{} is not exact at its leading order", expr.name)));
    }
    let series = poly.truncated(lowest).x_series()?;
    let mut constant = BigRational::zero();
    let mut oscillating = BigRational::zero();
    for ((power, s), c) in series {
        if power != j || !c.im.is_zero() {
            return Err(Error::Consistency(format!("unexpected leading term in {}", expr.name)));
        }
        if s == 0 {
            constant += c.re;
        } else if s % 2 == 0 {
            oscillating += c.re;
        } else {
            oscillating -= c.re;
        }
    }
    if oscillating.is_zero() {
        return invalid(format!("{} has no interference term", expr.name));
    }
    let v = -constant / oscillating;
    if v.is_negative() || v > BigRational::from_integer(1.into()) {
        return Err(Error::Consistency(format!("{} has no threshold in [0,1]", expr.name)));
    }
    Ok(v)
}

/// Root of a function that changes sign on `[lo, hi]`.
pub fn bisect(mut f: impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return invalid(format!("no sign change on [{lo}, {hi}]: {f_lo} and {f_hi}"));
    }
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Exact leading-order thresholds, cross-checked by bisection on the
/// leading-order model at `g` and `sum phi = pi`.
pub fn visibility_thresholds(g: f64) -> Result<VisibilityReport> {
    let ch = lifted_ch_expression();
    let genuine = genuine_tripartite_expression();
    let model = |v: f64| LeadingOrderModel::new(3, g, PI).with_visibility(v);
    Ok(VisibilityReport {
        v_threshold_ch: to_f64(&exact_threshold(&ch)?),
        v_threshold_genuine: to_f64(&exact_threshold(&genuine)?),
        bisection_ch: bisect(|v| ch.evaluate(&model(v)), 0.0, 1.0)?,
        bisection_genuine: bisect(|v| genuine.evaluate(&model(v)), 0.0, 1.0)?,
    })
}

/// Full-order on/off behaviors with the all-on block dephased:
/// `Q_V = Q_avg + V (Q - Q_avg)`, where `Q_avg` averages over the phase sum.
pub struct DephasedOnOff {
    parties: usize,
    table: Vec<Vec<f64>>,
    average: Vec<f64>,
}

impl DephasedOnOff {
    pub fn new(parties: usize, g: Complex64, phases: &[f64], cutoff: u8) -> Result<Self> {
        if phases.len() != parties {
            return invalid(format!("{} phases for {parties} parties", phases.len()));
        }
        let network = build_ring_network(parties, g)?;
        let table = subset_table(&network, &SettingsProfile::on_off(phases), cutoff)?;
        let samples: Vec<Vec<f64>> = (0..DEPHASING_SAMPLES)
            .into_par_iter()
            .map(|k| {
                let each = 2.0 * PI * k as f64 / (DEPHASING_SAMPLES * parties) as f64;
                let settings = vec![PartySetting::on(each); parties];
                Ok(subset_probabilities(&evolve_network(&network, &settings, cutoff)?, parties))
            })
            .collect::<Result<_>>()?;
        let mut average = vec![0.0; samples[0].len()];
        for sample in &samples {
            for (a, v) in average.iter_mut().zip(sample) {
                *a += v / DEPHASING_SAMPLES as f64;
            }
        }
        Ok(Self { parties, table, average })
    }

    pub fn behavior(&self, visibility: f64) -> Result<Behavior> {
        let mut table = self.table.clone();
        let all_on = table.len() - 1;
        for (q, avg) in table[all_on].iter_mut().zip(&self.average) {
            *q = avg + visibility * (*q - avg);
        }
        Behavior::from_subset_probabilities(self.parties, &table)
    }
}

/// Thresholds found by bisection on dephased full-order behaviors at
/// `sum phi = pi`.
pub fn full_order_thresholds(g: f64, cutoff: u8) -> Result<(f64, f64)> {
    let model = DephasedOnOff::new(3, Complex64::new(g, 0.0), &[PI / 3.0; 3], cutoff)?;
    let ch = lifted_ch_expression();
    let genuine = genuine_tripartite_expression();
    let v_ch = bisect(|v| ch.evaluate(&model.behavior(v)?), 0.0, 1.0)?;
    let v_gen = bisect(|v| genuine.evaluate(&model.behavior(v)?), 0.0, 1.0)?;
    Ok((v_ch, v_gen))
}

/// `(1 - 8x) / (2 - 28x)` and `(5 - 52x) / (8 - 112x)`: thresholds including
/// the `|g|^8` corrections of the three-party expressions.
pub fn corrected_thresholds(g: f64) -> (f64, f64) {
    let x = g * g;
    ((1.0 - 8.0 * x) / (2.0 - 28.0 * x), (5.0 - 52.0 * x) / (8.0 - 112.0 * x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::ratio;

    #[test]
    fn exact_thresholds_are_half_and_five_eighths() {
        assert_eq!(exact_threshold(&lifted_ch_expression()).unwrap(), ratio(1, 2));
        assert_eq!(exact_threshold(&genuine_tripartite_expression()).unwrap(), ratio(5, 8));
    }

    #[test]
    fn bisection_on_leading_model() {
        let r = visibility_thresholds(0.1).unwrap();
        assert_eq!(r.v_threshold_ch, 0.5);
        assert_eq!(r.v_threshold_genuine, 0.625);
        assert!((r.bisection_ch - 0.5).abs() < 1e-8);
        assert!((r.bisection_genuine - 0.625).abs() < 1e-8);
        assert!(r.v_threshold_ch <= r.v_threshold_genuine);
    }

    #[test]
    fn bisect_requires_sign_change() {
        assert!(bisect(|v| Ok(v + 1.0), 0.0, 1.0).is_err());
        assert!((bisect(|v| Ok(v * v - 0.25), 0.0, 1.0).unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn dephased_behavior_at_unit_visibility_is_the_quantum_one() {
        let g = Complex64::new(0.1, 0.0);
        let phases = [PI / 3.0; 3];
        let model = DephasedOnOff::new(3, g, &phases, 6).unwrap();
        let direct = crate::bell::behavior::on_off_behavior(3, g, &phases, 6).unwrap();
        let dephased = model.behavior(1.0).unwrap();
        assert!(direct.table().iter().zip(dephased.table()).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(model.behavior(0.3).unwrap().no_signaling_defect() < 1e-10);
    }

    #[test]
    fn full_order_thresholds_track_corrected_formula() {
        let g = 0.05;
        let (v_ch, v_gen) = full_order_thresholds(g, 6).unwrap();
        let (c_ch, c_gen) = corrected_thresholds(g);
        assert!((v_ch - c_ch).abs() < 2e-3, "{v_ch} vs {c_ch}");
        assert!((v_gen - c_gen).abs() < 2e-3, "{v_gen} vs {c_gen}");
    }
}
