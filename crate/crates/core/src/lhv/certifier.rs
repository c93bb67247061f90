use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::polytope::{cg_keys, cg_to_cells, cg_vector, enumerate_strategies, strategy_cg, CgKey};
use super::simplex::{solve_standard_form, LpOutcome, PivotCounts, Scalar};
use crate::bell::{Behavior, Event, SymbolicEventModel};
use crate::error::{Error, Result};
use crate::symbolic::to_f64;

pub const DEFAULT_TOLERANCE: f64 = 1e-11;
/// Behaviors must be this close to no-signaling before we try.
pub const NO_SIGNALING_TOLERANCE: f64 = 1e-10;

/// Minimal gauge of a point relative to the local polytope, measured from the
/// barycenter `q` of the deterministic points: the smallest `Lambda` with
/// `cg(p) - q = sum lambda_j (v_j - q)`, `lambda >= 0`, `sum lambda = Lambda`.
/// The point is local iff `Lambda <= 1`; the optimal dual is a facet
/// `a^T (v - q) <= 1` of the polytope that `p` violates when `Lambda > 1`.
#[derive(Debug, Clone)]
pub struct GaugeSolution<F> {
    pub gauge: F,
    pub lambda: Vec<F>,
    pub facet: Vec<F>,
    pub barycenter: Vec<F>,
    pub pivots: PivotCounts,
}

pub fn gauge_lp<F: Scalar>(parties: usize, point: &[F]) -> Result<GaugeSolution<F>> {
    let keys = cg_keys(parties);
    if point.len() != keys.len() {
        return Err(Error::InvalidArgument(format!("expected {} coordinates, got {}", keys.len(), point.len())));
    }
    let strategies = enumerate_strategies(parties)?;
    let columns: Vec<Vec<bool>> = strategies.iter().map(|st| strategy_cg(st, &keys)).collect();
    let count = columns.len() as i64;
    let barycenter: Vec<F> = (0..keys.len())
        .map(|k| F::from_ratio(columns.iter().filter(|c| c[k]).count() as i64, count))
        .collect();
    let a: Vec<Vec<F>> = (0..keys.len())
        .map(|k| {
            columns
                .iter()
                .map(|c| if c[k] { F::one() } else { F::zero() } - barycenter[k].clone())
                .collect()
        })
        .collect();
    let b: Vec<F> = point.iter().zip(&barycenter).map(|(p, q)| p.clone() - q.clone()).collect();
    let c = vec![F::one(); columns.len()];
    match solve_standard_form(&a, &b, &c)? {
        LpOutcome::Optimal(sol) => Ok(GaugeSolution {
            gauge: sol.objective,
            lambda: sol.x,
            facet: sol.dual,
            barycenter,
            pivots: sol.pivots,
        }),
        // The barycenter is interior, so every point has a finite gauge.
        other => Err(Error::Consistency(format!("gauge LP should always be solvable, got {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    /// Coefficients over cells `s * 2^N + o`; non-positive on every local behavior.
    pub coeffs: Vec<f64>,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverStats {
    pub rows: usize,
    pub columns: usize,
    pub gauge: f64,
    pub pivots: PivotCounts,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LhvVerdict {
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    pub solver_stats: SolverStats,
}

impl LhvVerdict {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn apply(coeffs: &[f64], behavior: &Behavior) -> f64 {
    coeffs.iter().zip(behavior.table()).map(|(c, p)| c * p).sum()
}

/// Decides whether a behavior is a mixture of deterministic local strategies.
pub fn lhv_feasible(behavior: &Behavior, tol: f64) -> Result<LhvVerdict> {
    let n = behavior.parties();
    let signaling = behavior.no_signaling_defect().max(behavior.normalization_defect());
    if signaling > NO_SIGNALING_TOLERANCE {
        return Err(Error::InvalidArgument(format!("behavior violates no-signaling by {signaling:e}")));
    }
    let keys = cg_keys(n);
    let point = cg_vector(behavior, &keys);
    let sol = gauge_lp::<f64>(n, &point)?;
    let strategies = enumerate_strategies(n)?;
    let stats = SolverStats { rows: keys.len(), columns: strategies.len(), gauge: sol.gauge, pivots: sol.pivots, exact: false };
    let precision = |detail: String| Error::Precision {
        tol,
        detail: format!("{detail}; retry with the exact-rational solver"),
    };

    if sol.gauge <= 1.0 + tol {
        // Pad with the barycenter up to unit weight, or shrink onto the
        // boundary when rounding put the gauge just above one.
        let weights: Vec<f64> = if sol.gauge <= 1.0 {
            let spread = (1.0 - sol.gauge) / strategies.len() as f64;
            sol.lambda.iter().map(|l| l.max(0.0) + spread).collect()
        } else {
            sol.lambda.iter().map(|l| l.max(0.0) / sol.gauge).collect()
        };
        let mut table = vec![0.0; behavior.table().len()];
        let cells = behavior.cells();
        for (st, w) in strategies.iter().zip(&weights) {
            for s in 0..cells {
                table[s * cells + st.response(s)] += w;
            }
        }
        let error = table.iter().zip(behavior.table()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if error > tol {
            return Err(precision(format!("mixture reproduces the behavior only to {error:e}")));
        }
        return Ok(LhvVerdict { feasible: true, weights: Some(weights), certificate: None, solver_stats: stats });
    }
    {
        let constant = -1.0 - sol.facet.iter().zip(&sol.barycenter).map(|(a, q)| a * q).sum::<f64>();
        let coeffs = cg_to_cells(n, &sol.facet, constant, &keys);
        let violation = apply(&coeffs, behavior);
        let worst_local = strategies.iter().map(|st| apply(&coeffs, &st.column())).fold(f64::MIN, f64::max);
        if worst_local > tol || violation < 10.0 * tol {
            return Err(precision(format!(
                "certificate separates poorly: local maximum {worst_local:e}, violation {violation:e}"
            )));
        }
        return Ok(LhvVerdict {
            feasible: false,
            weights: None,
            certificate: Some(Certificate { coeffs, violation }),
            solver_stats: stats,
        })
    }
}

/// Exact verdict: feasibility decided with zero tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactVerdict {
    pub feasible: bool,
    pub gauge: BigRational,
    /// CG coefficients and constant of a violated inequality `constant + alpha.cg <= 0`.
    pub facet: Option<(Vec<BigRational>, BigRational)>,
    pub pivots: PivotCounts,
}

impl ExactVerdict {
    pub fn stats(&self, parties: usize) -> SolverStats {
        SolverStats {
            rows: cg_keys(parties).len(),
            columns: 1 << (2 * parties),
            gauge: to_f64(&self.gauge),
            pivots: self.pivots,
            exact: true,
        }
    }
}

pub fn lhv_feasible_exact(parties: usize, point: &[BigRational]) -> Result<ExactVerdict> {
    let sol = gauge_lp::<BigRational>(parties, point)?;
    let one = <BigRational as One>::one();
    if sol.gauge <= one {
        return Ok(ExactVerdict { feasible: true, gauge: sol.gauge, facet: None, pivots: sol.pivots });
    }
    let mut constant = -one;
    for (a, q) in sol.facet.iter().zip(&sol.barycenter) {
        constant -= a * q;
    }
    Ok(ExactVerdict { feasible: false, gauge: sol.gauge, facet: Some((sol.facet, constant)), pivots: sol.pivots })
}

/// Exact CG coordinates of the on/off behavior from truncated symbolic
/// probabilities, at a rational coupling and phase sum `half_turns * pi`.
/// Every coordinate keeps its exactly known terms up to `|g|^degree`.
pub fn symbolic_on_off_point(
    model: &SymbolicEventModel,
    g: &BigRational,
    half_turns: i64,
    degree: u32,
) -> Result<Vec<BigRational>> {
    let x = g * g;
    let keys = cg_keys(model.parties());
    keys.iter()
        .map(|k| {
            let event = key_event(model.parties(), k);
            let p = model.event_polynomial(&event)?;
            if p.exact_through() < degree {
                return Err(Error::InvalidArgument(format!(
                    "{event} is exact only through order {}, below {degree}",
                    p.exact_through()
                )));
            }
            let mut value = <BigRational as Zero>::zero();
            for ((j, s), c) in p.truncated(degree).x_series()? {
                let sign = if (s as i64 * half_turns).rem_euclid(2) == 0 { 1 } else { -1 };
                value += c.re * num_traits::pow(x.clone(), j as usize) * BigRational::from_integer(BigInt::from(sign));
            }
            Ok(value)
        })
        .collect()
}

/// Event probability represented by a CG coordinate.
pub fn key_event(parties: usize, key: &CgKey) -> Event {
    Event::new((0..parties).filter(|x| key.subset >> x & 1 == 1).map(|x| (x, key.settings >> x & 1)).collect())
}

/// Floating view of an exact CG point, for reuse with `f64` tooling.
pub fn point_to_f64(point: &[BigRational]) -> Vec<f64> {
    point.iter().map(to_f64).collect()
}

/// Convenience: verdict for the numeric on/off behavior of the ring.
pub fn on_off_verdict(parties: usize, g: f64, phases: &[f64], cutoff: u8, tol: f64) -> Result<LhvVerdict> {
    let behavior = crate::bell::on_off_behavior(parties, Complex64::new(g, 0.0), phases, cutoff)?;
    lhv_feasible(&behavior, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::ratio;
    use std::f64::consts::PI;

    #[test]
    fn deterministic_behaviors_are_feasible() {
        for st in enumerate_strategies(2).unwrap() {
            let v = lhv_feasible(&st.column(), DEFAULT_TOLERANCE).unwrap();
            assert!(v.feasible);
        }
        let v = lhv_feasible(&enumerate_strategies(3).unwrap()[37].column(), DEFAULT_TOLERANCE).unwrap();
        assert!(v.feasible);
        let w = v.weights.unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((w[37] - 1.0).abs() < 1e-11, "{}", w[37]);
    }

    #[test]
    fn uniform_behavior_is_feasible() {
        let v = lhv_feasible(&Behavior::uniform(3), DEFAULT_TOLERANCE).unwrap();
        assert!(v.feasible);
        assert!(v.weights.unwrap().iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn quantum_on_off_behavior_is_nonlocal() {
        let v = on_off_verdict(3, 0.1, &[PI / 3.0; 3], 6, DEFAULT_TOLERANCE).unwrap();
        assert!(!v.feasible);
        let cert = v.certificate.unwrap();
        assert!(cert.violation > 0.0);
        for st in enumerate_strategies(3).unwrap() {
            assert!(apply(&cert.coeffs, &st.column()) <= DEFAULT_TOLERANCE);
        }
    }

    #[test]
    fn exact_mode_agrees() {
        let model = SymbolicEventModel::new(3, 5).unwrap();
        let point = symbolic_on_off_point(&model, &ratio(1, 10), 1, 6).unwrap();
        let v = lhv_feasible_exact(3, &point).unwrap();
        assert!(!v.feasible);
        let (alpha, constant) = v.facet.unwrap();
        let value = point.iter().zip(&alpha).fold(constant, |acc, (p, a)| acc + p * a);
        assert!(value > <BigRational as Zero>::zero());
        let local = lhv_feasible_exact(3, &symbolic_on_off_point(&model, &ratio(1, 10), 0, 6).unwrap()).unwrap();
        assert!(local.feasible);
    }

    #[test]
    fn signaling_input_is_rejected() {
        let mut table = Behavior::uniform(2).table().to_vec();
        table[0] += 0.1;
        table[1] -= 0.1;
        let b = Behavior::from_table(2, table).unwrap();
        assert!(matches!(lhv_feasible(&b, DEFAULT_TOLERANCE), Err(Error::InvalidArgument(_))));
    }
}
