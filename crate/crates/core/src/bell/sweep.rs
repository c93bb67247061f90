use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::behavior::on_off_behavior;
use super::inequalities::{genuine_tripartite_value, lifted_ch_value, symmetrized_ch_value};
use super::visibility::DephasedOnOff;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub phase_sum: f64,
    pub ch: f64,
    pub symmetrized: f64,
    pub genuine: f64,
}

/// Three-party inequality values over phase sums, each split evenly across
/// the parties. Visibility below one dephases the all-on block.
pub fn inequality_sweep(g: Complex64, phase_sums: &[f64], cutoff: u8, visibility: f64) -> Result<Vec<SweepRow>> {
    phase_sums
        .par_iter()
        .map(|&sum| {
            let phases = [sum / 3.0; 3];
            let behavior = if visibility == 1.0 {
                on_off_behavior(3, g, &phases, cutoff)?
            } else {
                DephasedOnOff::new(3, g, &phases, cutoff)?.behavior(visibility)?
            };
            Ok(SweepRow {
                phase_sum: sum,
                ch: lifted_ch_value(&behavior)?,
                symmetrized: symmetrized_ch_value(&behavior)?,
                genuine: genuine_tripartite_value(&behavior)?,
            })
        })
        .collect()
}

/// CSV with 12 significant digits.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("phase_sum,ch,symmetrized,genuine\n");
    for r in rows {
        out.push_str(&format!("{:.11e},{:.11e},{:.11e},{:.11e}\n", r.phase_sum, r.ch, r.symmetrized, r.genuine));
    }
    out
}
