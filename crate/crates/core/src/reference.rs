//! Reference values: the fourth-order source state and the table of
//! coincidence probabilities for the three-party ring.

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::fock::OccupationVector;
use crate::network::Pump;
use crate::symbolic::{ratio, PolynomialAmplitude, ProbabilityPolynomial, SymbolicEntry};

const GOLDEN_JSON: &str = include_str!("../data/golden_state.json");

/// One reference amplitude of the all-off three-party state at fourth order.
#[derive(Debug, Clone)]
pub struct GoldenAmplitude {
    pub occupation: OccupationVector,
    pub amplitude: PolynomialAmplitude,
    pub radicand: u64,
}

/// Reference amplitudes, sorted by occupation.
pub fn golden_amplitudes() -> Result<Vec<GoldenAmplitude>> {
    let entries: Vec<SymbolicEntry> = serde_json::from_str(GOLDEN_JSON)?;
    entries
        .into_iter()
        .map(|e| {
            let amplitude = e
                .polynomial(3)
                .ok_or_else(|| Error::Consistency(format!("malformed reference entry {:?}", e.occupation)))?;
            Ok(GoldenAmplitude {
                occupation: OccupationVector::from_counts(&e.occupation),
                amplitude,
                radicand: e.radicand,
            })
        })
        .collect()
}

/// Raw golden file in the symbolic dump format.
pub fn golden_json() -> &'static str {
    GOLDEN_JSON
}

/// A coincidence probability with its reference series in `x = |g|^2`.
#[derive(Debug, Clone)]
pub struct ProbabilityClass {
    pub name: &'static str,
    pub pumps: [Pump; 3],
    pub subset: &'static [usize],
    /// `(power of x, multiple of the phase sum, coefficient)`.
    pub series: Vec<(u32, i32, BigRational)>,
}

impl ProbabilityClass {
    pub fn expected(&self) -> ProbabilityPolynomial {
        ProbabilityPolynomial::from_x_series(3, &self.series)
    }
}

/// Pump patterns use "off" for every party outside the event; the lifted CH
/// combination is listed last.
pub fn probability_classes() -> Vec<ProbabilityClass> {
    use Pump::{Off, On};
    let r = |n: i64, d: i64| ratio(n, d);
    let x3 = || vec![(3, 0, r(1, 1))];
    vec![
        ProbabilityClass {
            name: "P(off)",
            pumps: [Off, Off, Off],
            subset: &[0],
            series: vec![(2, 0, r(1, 1)), (3, 0, r(-10, 3)), (4, 0, r(205, 36))],
        },
        ProbabilityClass {
            name: "P(on)",
            pumps: [On, Off, Off],
            subset: &[0],
            series: vec![(1, 0, r(1, 1)), (2, 0, r(-8, 3)), (3, 0, r(-65, 9)), (4, 0, r(278, 9))],
        },
        ProbabilityClass { name: "P(A,B)", pumps: [Off, Off, Off], subset: &[0, 1], series: x3() },
        ProbabilityClass { name: "P(off,off,off)", pumps: [Off, Off, Off], subset: &[0, 1, 2], series: x3() },
        ProbabilityClass { name: "P(on,off,off)", pumps: [On, Off, Off], subset: &[0, 1, 2], series: x3() },
        ProbabilityClass { name: "P(on,on,off)", pumps: [On, On, Off], subset: &[0, 1, 2], series: x3() },
        ProbabilityClass { name: "P(on,off)", pumps: [On, Off, Off], subset: &[0, 1], series: x3() },
        ProbabilityClass {
            name: "P(on,on)",
            pumps: [On, On, Off],
            subset: &[0, 1],
            series: vec![(2, 0, r(1, 1)), (3, 0, r(-16, 3)), (4, 0, r(361, 36))],
        },
        ProbabilityClass {
            name: "P(A',B',C')",
            pumps: [On, On, On],
            subset: &[0, 1, 2],
            series: vec![(3, 0, r(2, 1)), (3, 1, r(1, 1)), (3, -1, r(1, 1))],
        },
    ]
}

/// Lifted CH value `-|g|^6 (1 + 2 cos(sum phi))` as a series.
pub fn lifted_ch_series() -> Vec<(u32, i32, BigRational)> {
    vec![(3, 0, ratio(-1, 1)), (3, 1, ratio(-1, 1)), (3, -1, ratio(-1, 1))]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_file_parses() {
        let amps = golden_amplitudes().unwrap();
        assert_eq!(amps.len(), 35);
        assert!(amps.windows(2).all(|w| w[0].occupation < w[1].occupation));
        assert!(amps.iter().all(|a| a.radicand == 1 && !a.amplitude.is_zero()));
    }

    #[test]
    fn table_has_nine_classes() {
        let classes = probability_classes();
        assert_eq!(classes.len(), 9);
        assert!(classes.iter().all(|c| c.expected().is_real()));
    }
}
