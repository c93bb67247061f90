use super::behavior::Behavior;
use crate::error::{invalid, Result};

/// Correlation functions `E(s) = sum_o (prod ±1) P(o|s)`, indexed by the
/// settings mask. "+" counts as +1.
pub fn correlation_tensor(behavior: &Behavior) -> Vec<f64> {
    let cells = behavior.cells();
    let n = behavior.parties();
    (0..cells)
        .map(|s| {
            (0..cells)
                .map(|o| {
                    let minus = n - o.count_ones() as usize;
                    let sign = if minus % 2 == 0 { 1.0 } else { -1.0 };
                    sign * behavior.p(s, o)
                })
                .sum()
        })
        .collect()
}

/// `sum_k |xi(k)|` with `xi(k) = 2^-N sum_s (-1)^(k.s) E(s)`. Correlations
/// admit a local model iff the result is at most 1.
pub fn wwwzb_condition(correlations: &[f64]) -> Result<f64> {
    let cells = correlations.len();
    if cells < 2 || !cells.is_power_of_two() {
        return invalid(format!("expected 2^N correlation values, got {cells}"));
    }
    // In-place Walsh-Hadamard transform.
    let mut xi = correlations.to_vec();
    let mut h = 1;
    while h < cells {
        for block in (0..cells).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (xi[i], xi[i + h]);
                xi[i] = a + b;
                xi[i + h] = a - b;
            }
        }
        h *= 2;
    }
    Ok(xi.iter().map(|v| v.abs()).sum::<f64>() / cells as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn brute_force(e: &[f64]) -> f64 {
        let cells = e.len();
        (0..cells)
            .map(|k| {
                let xi: f64 = (0..cells)
                    .map(|s| if (k & s).count_ones() % 2 == 0 { e[s] } else { -e[s] })
                    .sum();
                (xi / cells as f64).abs()
            })
            .sum()
    }

    #[test]
    fn all_minus_and_uniform() {
        let minus = Behavior::deterministic(&[[false; 2]; 3]);
        assert_eq!(correlation_tensor(&minus), vec![-1.0; 8]);
        let uniform = Behavior::uniform(3);
        assert!(correlation_tensor(&uniform).iter().all(|e| e.abs() < 1e-15));
        assert_eq!(wwwzb_condition(&[0.0; 8]).unwrap(), 0.0);
    }

    #[test]
    fn product_sign_patterns_give_one() {
        for j in 0..64usize {
            let signs: Vec<[f64; 2]> = (0..3)
                .map(|x| [(j >> (2 * x)) & 1, (j >> (2 * x + 1)) & 1].map(|b| if b == 1 { 1.0 } else { -1.0 }))
                .collect();
            let e: Vec<f64> = (0..8usize).map(|s| (0..3).map(|x| signs[x][(s >> x) & 1]).product()).collect();
            assert!((wwwzb_condition(&e).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn mermin_correlations_give_two() {
        let theta = [0.0, FRAC_PI_2];
        let e: Vec<f64> =
            (0..8usize).map(|s| (0..3).map(|x| theta[(s >> x) & 1]).sum::<f64>().cos()).collect();
        assert!((wwwzb_condition(&e).unwrap() - 2.0).abs() < 1e-12);
        assert!((brute_force(&e) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn transform_matches_direct_sum() {
        let e: Vec<f64> = (0..16).map(|i| ((i * 7 % 5) as f64 - 2.0) / 3.0).collect();
        assert!((wwwzb_condition(&e).unwrap() - brute_force(&e)).abs() < 1e-14);
        assert!(wwwzb_condition(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn deterministic_behaviors_stay_local() {
        let b = Behavior::deterministic(&[[true, false], [false, false], [true, true]]);
        assert!((wwwzb_condition(&correlation_tensor(&b)).unwrap() - 1.0).abs() < 1e-15);
    }
}
