use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::certifier::{lhv_feasible, LhvVerdict};
use crate::bell::{on_off_behavior, Behavior};
use crate::error::{invalid, Result};
use crate::network::{build_ring_network, evolve_network, subset_probabilities, PartySetting};

/// Number of grid points in `[0, 2 pi)` for a step; the step must divide the circle.
pub fn grid_points(step: f64) -> Result<usize> {
    if !(step > 0.0) || !step.is_finite() {
        return invalid(format!("grid step must be positive, got {step}"));
    }
    let count = (2.0 * PI / step).round();
    if (count * step - 2.0 * PI).abs() > 1e-9 || count < 1.0 {
        return invalid(format!("grid step {step} does not divide 2 pi"));
    }
    Ok(count as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnOffPoint {
    pub g: f64,
    pub phase_sum: f64,
    pub feasible: bool,
    pub gauge: f64,
}

/// On/off scenario at every phase sum of the grid, the sum split evenly over
/// the parties.
pub fn on_off_lp_sweep(parties: usize, g_list: &[f64], step: f64, cutoff: u8, tol: f64) -> Result<Vec<OnOffPoint>> {
    let points = grid_points(step)?;
    let jobs: Vec<(f64, usize)> = g_list.iter().flat_map(|&g| (0..points).map(move |k| (g, k))).collect();
    jobs.par_iter()
        .map(|&(g, k)| {
            let sum = k as f64 * step;
            let phases = vec![sum / parties as f64; parties];
            let behavior = on_off_behavior(parties, Complex64::new(g, 0.0), &phases, cutoff)?;
            let verdict = lhv_feasible(&behavior, tol)?;
            Ok(OnOffPoint { g, phase_sum: sum, feasible: verdict.feasible, gauge: verdict.solver_stats.gauge })
        })
        .collect()
}

/// Three-party phases-only data: with every pump on, the marginals of fewer
/// than all parties do not depend on the phases and the full coincidence
/// depends on the phase sum only. A settings choice is then fixed by the sum
/// at the all-zero settings and each party's phase difference.
pub struct PhasesOnlyCache {
    pub g: f64,
    pub points: usize,
    base: Vec<f64>,
    full: Vec<f64>,
}

impl PhasesOnlyCache {
    pub fn new(g: f64, points: usize, cutoff: u8) -> Result<Self> {
        let network = build_ring_network(3, Complex64::new(g, 0.0))?;
        let base = subset_probabilities(&evolve_network(&network, &[PartySetting::on(0.0); 3], cutoff)?, 3);
        let full = (0..points)
            .into_par_iter()
            .map(|k| {
                let sum = 2.0 * PI * k as f64 / points as f64;
                let settings = [PartySetting::on(sum), PartySetting::on(0.0), PartySetting::on(0.0)];
                Ok(subset_probabilities(&evolve_network(&network, &settings, cutoff)?, 3)[7])
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { g, points, base, full })
    }

    /// Behavior for grid indices `(sum at settings 000, difference per party)`.
    pub fn behavior(&self, offset: usize, diffs: [usize; 3]) -> Result<Behavior> {
        let table: Vec<Vec<f64>> = (0..8usize)
            .map(|s| {
                let k = (offset + (0..3).filter(|x| s >> x & 1 == 1).map(|x| diffs[x]).sum::<usize>()) % self.points;
                let mut row = self.base.clone();
                row[7] = self.full[k];
                row
            })
            .collect();
        Behavior::from_subset_probabilities(3, &table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasesOnlyReport {
    pub g: f64,
    pub grid_points: usize,
    /// Distinct behaviors tested, `points^4`.
    pub behaviors_checked: usize,
    /// Settings choices covered, `points^6`.
    pub settings_covered: u64,
    pub max_gauge: f64,
    /// `(offset, diffs)` of every infeasible behavior.
    pub infeasible: Vec<(usize, [usize; 3])>,
}

/// Every two-phase-settings choice per party on the grid, all pumps on.
pub fn phases_only_lp_sweep(g_list: &[f64], step: f64, cutoff: u8, tol: f64) -> Result<Vec<PhasesOnlyReport>> {
    let points = grid_points(step)?;
    g_list
        .iter()
        .map(|&g| {
            let cache = PhasesOnlyCache::new(g, points, cutoff)?;
            let results: Vec<(usize, [usize; 3], LhvVerdict)> = (0..points.pow(4))
                .into_par_iter()
                .map(|idx| {
                    let offset = idx % points;
                    let diffs = [idx / points % points, idx / points.pow(2) % points, idx / points.pow(3) % points];
                    Ok((offset, diffs, lhv_feasible(&cache.behavior(offset, diffs)?, tol)?))
                })
                .collect::<Result<_>>()?;
            let max_gauge = results.iter().map(|r| r.2.solver_stats.gauge).fold(f64::MIN, f64::max);
            let infeasible = results.iter().filter(|r| !r.2.feasible).map(|r| (r.0, r.1)).collect();
            Ok(PhasesOnlyReport {
                g,
                grid_points: points,
                behaviors_checked: results.len(),
                settings_covered: (points as u64).pow(6),
                max_gauge,
                infeasible,
            })
        })
        .collect()
}

/// CSV: one row per grid point and coupling.
pub fn on_off_csv(points: &[OnOffPoint]) -> String {
    let mut out = String::from("g,phase_sum,feasible,gauge\n");
    for p in points {
        out.push_str(&format!("{:.11e},{:.11e},{},{:.11e}\n", p.g, p.phase_sum, p.feasible, p.gauge));
    }
    out
}

pub fn phases_only_csv(reports: &[PhasesOnlyReport]) -> String {
    let mut out = String::from("g,grid_points,behaviors_checked,settings_covered,infeasible,max_gauge\n");
    for r in reports {
        out.push_str(&format!(
            "{:.11e},{},{},{},{},{:.11e}\n",
            r.g,
            r.grid_points,
            r.behaviors_checked,
            r.settings_covered,
            r.infeasible.len(),
            r.max_gauge
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{behavior_from_network, SettingsProfile};
    use crate::lhv::DEFAULT_TOLERANCE;

    #[test]
    fn grid_validation() {
        assert_eq!(grid_points(0.1 * PI).unwrap(), 20);
        assert!(grid_points(0.0).is_err());
        assert!(grid_points(0.3).is_err());
    }

    #[test]
    fn cached_behavior_matches_direct_evolution() {
        let g = 0.1;
        let cache = PhasesOnlyCache::new(g, 20, 6).unwrap();
        let step = 0.1 * PI;
        // Party phases (a0, a1), (b0, b1), (c0, c1) in grid units.
        let (a, b, c) = ((3, 11), (7, 2), (15, 19));
        let pairs = [a, b, c].map(|(u, v)| (u as f64 * step, v as f64 * step));
        let network = build_ring_network(3, Complex64::new(g, 0.0)).unwrap();
        let direct = behavior_from_network(&network, &SettingsProfile::phases_only(&pairs), 6).unwrap();
        let diff = |(u, v): (usize, usize)| (v + 20 - u) % 20;
        let cached = cache.behavior((a.0 + b.0 + c.0) % 20, [diff(a), diff(b), diff(c)]).unwrap();
        let err = direct.table().iter().zip(cached.table()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-15, "{err}");
    }

    #[test]
    fn on_off_window_at_coarse_grid() {
        let pts = on_off_lp_sweep(3, &[0.1], 0.25 * PI, 6, DEFAULT_TOLERANCE).unwrap();
        let flags: Vec<bool> = pts.iter().map(|p| p.feasible).collect();
        assert_eq!(flags, [true, true, true, false, false, false, true, true]);
        assert_eq!(on_off_csv(&pts).lines().count(), 9);
    }

    #[test]
    fn zero_coupling_is_local_everywhere() {
        let pts = on_off_lp_sweep(3, &[0.0], 0.5 * PI, 4, DEFAULT_TOLERANCE).unwrap();
        assert!(pts.iter().all(|p| p.feasible));
    }
}
