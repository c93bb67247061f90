use num_complex::Complex64;
use pdc_core::bell::{
    genuine_tripartite_expression, lifted_ch_expression, n_lifted_ch_expression, on_off_behavior,
    symmetrized_ch_expression, BellExpression, DephasedOnOff, SymbolicEventModel,
};
use pdc_core::lhv::grid_points;
use pdc_core::symbolic::GaussianRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{json, num, windows, Sink};
use crate::CliError;

/// Expressions reported for a party count, with their CSV column names.
pub fn expressions(parties: usize) -> Result<Vec<(&'static str, BellExpression)>, CliError> {
    Ok(match parties {
        3 => vec![
            ("ch", lifted_ch_expression()),
            ("symmetrized", symmetrized_ch_expression()),
            ("genuine", genuine_tripartite_expression()),
        ],
        2 => vec![("ch", n_lifted_ch_expression(2)?)],
        4 => vec![("doubly_lifted", n_lifted_ch_expression(4)?)],
        _ => vec![("lifted_ch", n_lifted_ch_expression(parties)?)],
    })
}

/// Phase-sum series of an expression, `(power of x, multiple of the sum, coefficient)`.
type Series = Vec<(u32, i32, GaussianRational)>;

/// Exactly known part of each expression at the configured order.
fn symbolic_series(config: &RunConfig, exprs: &[(&str, BellExpression)]) -> Result<Vec<Series>, CliError> {
    let model = SymbolicEventModel::new(config.parties, config.order)?;
    let leading = 2 * config.parties as u32;
    exprs
        .iter()
        .map(|(_, e)| {
            let p = model.expression_polynomial(e)?;
            if p.exact_through() < leading {
                return Err(CliError::Usage(format!(
                    "order {} leaves {} exact only through g^{}; the leading term needs g^{leading}",
                    config.order,
                    e.name,
                    p.exact_through()
                )));
            }
            Ok(p.exact_part().x_series()?.into_iter().map(|((j, s), c)| (j, s, c)).collect())
        })
        .collect()
}

/// Visibility scales every phase-dependent term.
fn evaluate_series(series: &Series, g: f64, sum: f64, visibility: f64) -> f64 {
    let x = g * g;
    series
        .iter()
        .map(|(j, s, c)| {
            let c = c.to_complex();
            let angle = *s as f64 * sum;
            let wave = c.re * angle.cos() - c.im * angle.sin();
            x.powi(*j as i32) * if *s == 0 { wave } else { visibility * wave }
        })
        .sum()
}

fn numeric_values(config: &RunConfig, exprs: &[(&str, BellExpression)], g: f64, sum: f64) -> Result<Vec<f64>, CliError> {
    let n = config.parties;
    let phases = vec![sum / n as f64; n];
    let coupling = Complex64::new(g, 0.0);
    let behavior = if config.visibility == 1.0 {
        on_off_behavior(n, coupling, &phases, config.cutoff)?
    } else {
        DephasedOnOff::new(n, coupling, &phases, config.cutoff)?.behavior(config.visibility)?
    };
    exprs.iter().map(|(_, e)| Ok(e.evaluate(&behavior)?)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpressionSummary {
    pub g: f64,
    pub expression: String,
    pub max: f64,
    pub argmax_phase_sum: f64,
    /// `max / |g|^(2N)`.
    pub max_in_leading_units: f64,
    /// `[first, last]` grid phase sums of each run of positive values.
    pub violation_windows: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BellSummary {
    pub parties: usize,
    pub backend: crate::config::Backend,
    pub order: Option<u32>,
    pub visibility: f64,
    pub grid_points: usize,
    pub expressions: Vec<ExpressionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_backend_deviation: Option<f64>,
}

pub struct Sweep {
    pub sums: Vec<f64>,
    /// Per coupling, per grid point: `(numeric, symbolic)` values per expression.
    pub values: Vec<Vec<(Option<Vec<f64>>, Option<Vec<f64>>)>>,
}

pub fn sweep(config: &RunConfig) -> Result<(Vec<(&'static str, BellExpression)>, Sweep), CliError> {
    let exprs = expressions(config.parties)?;
    let points = grid_points(config.grid_step)?;
    let sums: Vec<f64> = (0..points).map(|k| k as f64 * config.grid_step).collect();
    let series = if config.backend.symbolic() { Some(symbolic_series(config, &exprs)?) } else { None };
    let values = config
        .g
        .iter()
        .map(|&g| {
            sums.par_iter()
                .map(|&sum| {
                    let numeric =
                        if config.backend.numeric() { Some(numeric_values(config, &exprs, g, sum)?) } else { None };
                    let symbolic = series
                        .as_ref()
                        .map(|ss| ss.iter().map(|s| evaluate_series(s, g, sum, config.visibility)).collect());
                    Ok((numeric, symbolic))
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok((exprs, Sweep { sums, values }))
}

fn primary(cell: &(Option<Vec<f64>>, Option<Vec<f64>>)) -> &[f64] {
    cell.0.as_deref().or(cell.1.as_deref()).expect("at least one backend")
}

pub fn summarize(config: &RunConfig, exprs: &[(&str, BellExpression)], sweep: &Sweep) -> BellSummary {
    let mut summaries = Vec::new();
    let mut deviation: Option<f64> = None;
    for (gi, &g) in config.g.iter().enumerate() {
        let rows = &sweep.values[gi];
        for (ei, (name, _)) in exprs.iter().enumerate() {
            let column: Vec<f64> = rows.iter().map(|c| primary(c)[ei]).collect();
            let best = (0..column.len()).max_by(|&a, &b| column[a].total_cmp(&column[b])).unwrap_or(0);
            let positive: Vec<bool> = column.iter().map(|&v| v > 0.0).collect();
            let unit = g.powi(2 * config.parties as i32);
            summaries.push(ExpressionSummary {
                g,
                expression: name.to_string(),
                max: column[best],
                argmax_phase_sum: sweep.sums[best],
                max_in_leading_units: if unit > 0.0 { column[best] / unit } else { 0.0 },
                violation_windows: windows(&sweep.sums, &positive),
            });
        }
        for cell in rows {
            if let (Some(a), Some(b)) = cell {
                let d = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                deviation = Some(deviation.unwrap_or(0.0).max(d));
            }
        }
    }
    BellSummary {
        parties: config.parties,
        backend: config.backend,
        order: config.backend.symbolic().then_some(config.order),
        visibility: config.visibility,
        grid_points: sweep.sums.len(),
        expressions: summaries,
        max_backend_deviation: deviation,
    }
}

pub fn csv(config: &RunConfig, exprs: &[(&str, BellExpression)], sweep: &Sweep) -> String {
    let both = config.backend.numeric() && config.backend.symbolic();
    let mut header = vec!["g".to_string(), "phase_sum".to_string()];
    for (name, _) in exprs {
        if both {
            header.push(format!("{name}_numeric"));
            header.push(format!("{name}_symbolic"));
        } else {
            header.push(name.to_string());
        }
    }
    let mut out = header.join(",") + "\n";
    for (gi, &g) in config.g.iter().enumerate() {
        for (k, cell) in sweep.values[gi].iter().enumerate() {
            let mut fields = vec![num(g), num(sweep.sums[k])];
            for ei in 0..exprs.len() {
                for v in [&cell.0, &cell.1].into_iter().flatten() {
                    fields.push(num(v[ei]));
                }
            }
            out.push_str(&(fields.join(",") + "\n"));
        }
    }
    out
}

pub fn run(config: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let (exprs, sweep) = sweep(config)?;
    sink.primary("bell_sweep.csv", &csv(config, &exprs, &sweep))?;
    let summary = summarize(config, &exprs, &sweep);
    sink.write("bell_summary.json", &json(&summary)?)?;
    for s in &summary.expressions {
        let windows: Vec<String> =
            s.violation_windows.iter().map(|w| format!("[{:.4}, {:.4}]", w[0], w[1])).collect();
        sink.note(&format!(
            "g={} {}: max {} at phase sum {:.6} ({:.6} g^{}), violated on {}",
            s.g,
            s.expression,
            num(s.max),
            s.argmax_phase_sum,
            s.max_in_leading_units,
            2 * config.parties,
            if windows.is_empty() { "none".into() } else { windows.join(" ") }
        ));
    }
    if let Some(d) = summary.max_backend_deviation {
        sink.note(&format!("largest numeric-symbolic deviation {}", num(d)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Backend, CommandKind, ConfigFile, Flags};
    use std::f64::consts::PI;

    fn config(flags: Flags) -> RunConfig {
        RunConfig::resolve(CommandKind::Bell, ConfigFile::default(), &flags).unwrap()
    }

    #[test]
    fn default_maximum_is_g6_at_pi() {
        let c = config(Flags::default());
        let (exprs, s) = sweep(&c).unwrap();
        let summary = summarize(&c, &exprs, &s);
        let ch = &summary.expressions[0];
        assert!((ch.argmax_phase_sum - PI).abs() < 1e-12);
        assert!((ch.max - 1e-6).abs() < 1e-3 * 1e-6);
    }

    #[test]
    fn four_parties_reach_g8() {
        let c = config(Flags { parties: Some(4), grid_step: Some(0.05 * PI), ..Default::default() });
        let (exprs, s) = sweep(&c).unwrap();
        let summary = summarize(&c, &exprs, &s);
        assert_eq!(summary.expressions[0].expression, "doubly_lifted");
        assert!((summary.expressions[0].max - 1e-8).abs() < 1e-3 * 1e-8);
    }

    #[test]
    fn low_visibility_never_violates() {
        for backend in [Backend::Symbolic, Backend::Numeric] {
            let c = config(Flags {
                visibility: Some(0.4),
                backend: Some(backend),
                grid_step: Some(0.05 * PI),
                ..Default::default()
            });
            let (exprs, s) = sweep(&c).unwrap();
            assert!(summarize(&c, &exprs, &s).expressions.iter().all(|e| e.violation_windows.is_empty()));
        }
    }

    #[test]
    fn order_too_low_is_rejected() {
        let c = config(Flags { order: Some(1), ..Default::default() });
        assert!(matches!(sweep(&c), Err(CliError::Usage(_))));
    }
}
