use std::f64::consts::PI;

use num_complex::Complex64;
use pdc_core::bell::{n_lifted_ch_expression, on_off_behavior, SymbolicEventModel};
use pdc_core::lhv::{
    certificate_to_inequality, grid_points, lhv_feasible, lhv_feasible_exact, phases_only_csv, phases_only_lp_sweep,
    symbolic_on_off_point, DEFAULT_TOLERANCE,
};
use pdc_core::symbolic::{ratio, to_f64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Backend, RunConfig, Scenario};
use crate::output::{json, num, Sink};
use crate::CliError;

/// Certificates are matched against the lifted CH family up to this size.
const MAX_MATCH_PARTIES: usize = 4;

#[derive(Debug, Clone, Serialize)]
pub struct LpRow {
    pub g: f64,
    pub phase_sum: f64,
    pub exact: bool,
    pub feasible: bool,
    pub gauge: f64,
    /// Lifted CH value of the behavior.
    pub ch_value: f64,
    /// Infeasible rows: whether the certificate is lifted CH up to relabeling.
    pub lifted_ch_match: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OnOffSummary {
    pub parties: usize,
    pub backend: Backend,
    pub rows: usize,
    pub infeasible: usize,
    /// Infeasible exactly where the lifted CH value is positive.
    pub infeasible_iff_ch_positive: bool,
    pub certificates_match_lifted_ch: bool,
}

/// Decimal text of a coupling as an exact fraction, e.g. `0.1` -> `1/10`.
fn exact_coupling(g: f64) -> Result<num_rational::BigRational, CliError> {
    let text = format!("{g}");
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let digits = format!("{int}{frac}");
    let bad = || CliError::Usage(format!("coupling {g} has too many digits for the exact solver"));
    let numerator: i64 = digits.parse().map_err(|_| bad())?;
    let denominator = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    Ok(ratio(numerator, denominator))
}

fn numeric_row(config: &RunConfig, g: f64, sum: f64) -> Result<LpRow, CliError> {
    let n = config.parties;
    let behavior = on_off_behavior(n, Complex64::new(g, 0.0), &vec![sum / n as f64; n], config.cutoff)?;
    let verdict = lhv_feasible(&behavior, DEFAULT_TOLERANCE)?;
    let lifted_ch_match = match &verdict.certificate {
        Some(cert) if n <= MAX_MATCH_PARTIES => {
            Some(certificate_to_inequality(n, &cert.coeffs)?.lifted_ch_match.is_some())
        }
        _ => None,
    };
    Ok(LpRow {
        g,
        phase_sum: sum,
        exact: false,
        feasible: verdict.feasible,
        gauge: verdict.solver_stats.gauge,
        ch_value: n_lifted_ch_expression(n)?.evaluate(&behavior)?,
        lifted_ch_match,
    })
}

/// Exact verdicts exist where the phase sum is a multiple of pi, so that every
/// probability is rational.
fn exact_row(config: &RunConfig, model: &SymbolicEventModel, g: f64, sum: f64) -> Result<Option<LpRow>, CliError> {
    let turns = sum / PI;
    if (turns - turns.round()).abs() > 1e-9 {
        return Ok(None);
    }
    let n = config.parties;
    let degree = 2 * n as u32;
    let point = symbolic_on_off_point(model, &exact_coupling(g)?, turns.round() as i64, degree)?;
    let verdict = lhv_feasible_exact(n, &point)?;
    let lifted_ch_match = match &verdict.facet {
        Some((alpha, constant)) if n <= MAX_MATCH_PARTIES => {
            let keys = pdc_core::lhv::cg_keys(n);
            let alpha: Vec<f64> = alpha.iter().map(to_f64).collect();
            let cells = pdc_core::lhv::cg_to_cells(n, &alpha, to_f64(constant), &keys);
            Some(certificate_to_inequality(n, &cells)?.lifted_ch_match.is_some())
        }
        _ => None,
    };
    let evaluated = model.evaluated(Complex64::new(g, 0.0), vec![sum / n as f64; n]).truncated(degree);
    Ok(Some(LpRow {
        g,
        phase_sum: sum,
        exact: true,
        feasible: verdict.feasible,
        gauge: to_f64(&verdict.gauge),
        ch_value: n_lifted_ch_expression(n)?.evaluate(&evaluated)?,
        lifted_ch_match,
    }))
}

pub fn on_off_rows(config: &RunConfig) -> Result<Vec<LpRow>, CliError> {
    let points = grid_points(config.grid_step)?;
    let jobs: Vec<(f64, f64)> =
        config.g.iter().flat_map(|&g| (0..points).map(move |k| (g, k as f64 * config.grid_step))).collect();
    let mut rows = Vec::new();
    if config.backend.numeric() {
        rows.extend(jobs.par_iter().map(|&(g, s)| numeric_row(config, g, s)).collect::<Result<Vec<_>, _>>()?);
    }
    if config.backend.symbolic() {
        let model = SymbolicEventModel::new(config.parties, config.order)?;
        for &(g, s) in &jobs {
            rows.extend(exact_row(config, &model, g, s)?);
        }
    }
    Ok(rows)
}

fn on_off_csv(rows: &[LpRow]) -> String {
    let mut out = String::from("g,phase_sum,exact,feasible,gauge,ch_value,lifted_ch_match\n");
    for r in rows {
        let matched = r.lifted_ch_match.map(|m| m.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{matched}\n",
            num(r.g),
            num(r.phase_sum),
            r.exact,
            r.feasible,
            num(r.gauge),
            num(r.ch_value)
        ));
    }
    out
}

pub fn summarize(config: &RunConfig, rows: &[LpRow]) -> OnOffSummary {
    OnOffSummary {
        parties: config.parties,
        backend: config.backend,
        rows: rows.len(),
        infeasible: rows.iter().filter(|r| !r.feasible).count(),
        infeasible_iff_ch_positive: rows.iter().all(|r| r.feasible == (r.ch_value <= 0.0)),
        certificates_match_lifted_ch: rows.iter().all(|r| r.lifted_ch_match != Some(false)),
    }
}

pub fn run(config: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    match config.scenario {
        Scenario::OnOff => {
            let rows = on_off_rows(config)?;
            if rows.is_empty() {
                return Err(CliError::Usage("no grid point is a multiple of pi for the exact solver".into()));
            }
            sink.primary("lp_on_off.csv", &on_off_csv(&rows))?;
            let summary = summarize(config, &rows);
            sink.write("lp_on_off.json", &json(&summary)?)?;
            sink.note(&format!(
                "{} of {} grid points infeasible; infeasible exactly where CH > 0: {}; certificates match lifted CH: {}",
                summary.infeasible, summary.rows, summary.infeasible_iff_ch_positive, summary.certificates_match_lifted_ch
            ));
        }
        Scenario::PhasesOnly => {
            if config.parties != 3 {
                return Err(CliError::Usage("the phases-only sweep is implemented for three parties".into()));
            }
            if config.backend != Backend::Numeric {
                return Err(CliError::Usage("the phases-only sweep runs on the numeric backend".into()));
            }
            let reports = phases_only_lp_sweep(&config.g, config.grid_step, config.cutoff, DEFAULT_TOLERANCE)?;
            sink.primary("lp_phases_only.csv", &phases_only_csv(&reports))?;
            sink.write("lp_phases_only.json", &json(&reports)?)?;
            for r in &reports {
                sink.note(&format!(
                    "g={}: {} behaviors covering {} settings choices, {} infeasible, max gauge {}",
                    r.g,
                    r.behaviors_checked,
                    r.settings_covered,
                    r.infeasible.len(),
                    num(r.max_gauge)
                ));
            }
        }
    }
    Ok(())
}
