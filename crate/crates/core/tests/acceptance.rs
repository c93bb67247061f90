//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p pdc-core --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use pdc_core::bell::{
    correlation_tensor, genuine_tripartite_expression, lifted_ch_expression, lifted_ch_value, n_lifted_ch_expression,
    on_off_behavior, symmetrized_ch_value, genuine_tripartite_value, exact_threshold, full_order_thresholds,
    wwwzb_condition, Behavior, LeadingOrderModel, SymbolicEventModel,
};
use pdc_core::ghz::{degradation_budget, paradox_gap, GhzModel};
use pdc_core::lhv::{
    certificate_to_inequality, enumerate_strategies, lhv_feasible, phases_only_lp_sweep, DEFAULT_TOLERANCE,
};
use pdc_core::network::{build_ring_network, evolve_network, subset_probabilities, PartySetting};
use pdc_core::reference::{golden_amplitudes, lifted_ch_series, probability_classes};
use pdc_core::symbolic::{evolve_network_symbolic, probability_polynomial, ratio, GaussianRational, ProbabilityPolynomial};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CUTOFF: u8 = 6;

// Criterion tolerances.
const FULL_ORDER_CH_SLACK: f64 = 5.0; // times |g|^8
const CROSS_VALIDATION_SLACK: f64 = 100.0; // times |g|^10
const VISIBILITY_AGREEMENT: f64 = 0.01;
const NO_SIGNALING_TOL: f64 = 1e-10;
const UNITARITY_TOL: f64 = 1e-10;
const PHASE_SUM_TOL: f64 = 1e-12;
const LOCAL_MIXTURE_TOL: f64 = 1e-12;

type Check = Result<(bool, String), String>;

fn run(id: u32, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let (mut ok, mut detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = start.elapsed();
    if let Some(b) = budget {
        if elapsed > b {
            ok = false;
            detail.push_str(&format!("; over the {:.0} s budget", b.as_secs_f64()));
        }
    }
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] {id} {name} ({:.2} s): {detail}", elapsed.as_secs_f64());
    ok
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn x_series(p: &ProbabilityPolynomial) -> Result<BTreeMap<(u32, i32), GaussianRational>, String> {
    p.x_series().map_err(err)
}

fn golden_state() -> Check {
    let network = build_ring_network(3, Complex64::new(0.1, 0.0)).map_err(err)?;
    let state = evolve_network_symbolic(&network, &[pdc_core::network::Pump::Off; 3], 4).map_err(err)?;
    let golden = golden_amplitudes().map_err(err)?;
    let mismatched: Vec<String> = golden
        .iter()
        .filter(|e| {
            let got = state.amplitude(&e.occupation);
            got.radicand != e.radicand || got.poly != e.amplitude
        })
        .map(|e| e.occupation.to_string())
        .collect();
    let support: Vec<_> = state.support().cloned().collect();
    let listed: Vec<_> = golden.iter().map(|e| e.occupation.clone()).collect();
    let same_support = support == listed;
    Ok((
        mismatched.is_empty() && same_support,
        format!("{} amplitudes, mismatched {:?}, support identical: {same_support}", golden.len(), mismatched),
    ))
}

fn probability_table() -> Check {
    let network = build_ring_network(3, Complex64::new(0.1, 0.0)).map_err(err)?;
    let mut failed = Vec::new();
    let classes = probability_classes();
    for class in &classes {
        let state = evolve_network_symbolic(&network, &class.pumps, 4).map_err(err)?;
        let p = probability_polynomial(&state, class.subset).map_err(err)?;
        if p.polynomial() != class.expected().polynomial() {
            failed.push(class.name.to_string());
        }
    }
    let model = SymbolicEventModel::new(3, 4).map_err(err)?;
    let ch = model.expression_polynomial(&lifted_ch_expression()).map_err(err)?;
    let expected: BTreeMap<(u32, i32), GaussianRational> =
        lifted_ch_series().into_iter().map(|(j, s, c)| ((j, s), GaussianRational::real(c))).collect();
    if x_series(&ch.truncated(8))? != expected {
        failed.push("CH_Q".into());
    }
    Ok((failed.is_empty(), format!("{} classes at order 4, mismatched {:?}", classes.len() + 1, failed)))
}

fn lifted_ch() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;

    let model = SymbolicEventModel::new(3, 3).map_err(err)?;
    let ch = model.expression_polynomial(&lifted_ch_expression()).map_err(err)?;
    let expected: BTreeMap<(u32, i32), GaussianRational> =
        lifted_ch_series().into_iter().map(|(j, s, c)| ((j, s), GaussianRational::real(c))).collect();
    let leading_exact = ch.exact_through() >= 6 && x_series(&ch.truncated(6))? == expected;
    ok &= leading_exact;
    notes.push(format!("leading -x^3(1+2cos) exact: {leading_exact}"));

    let g: f64 = 0.1;
    let grid: Vec<f64> = (0..200).map(|k| k as f64 * 0.01 * PI).collect();
    let values: Vec<f64> =
        grid.iter().map(|&s| lifted_ch_value(&LeadingOrderModel::new(3, g, s))).collect::<Result<_, _>>().map_err(err)?;
    let argmax = (0..grid.len()).max_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    let max_ok = argmax == 100 && (values[argmax] - g.powi(6)).abs() <= 1e-3 * g.powi(6);
    ok &= max_ok;
    notes.push(format!("max {:.6e} at {:.2} pi: {max_ok}", values[argmax], grid[argmax] / PI));

    let positive: Vec<usize> = (0..grid.len()).filter(|&k| values[k] > 0.0).collect();
    let wanted: Vec<usize> = (51..150).collect();
    let window_ok = positive == wanted;
    ok &= window_ok;
    let bounds = match (positive.first(), positive.last()) {
        (Some(a), Some(b)) => format!("[{:.2} pi, {:.2} pi]", grid[*a] / PI, grid[*b] / PI),
        _ => "empty".into(),
    };
    notes.push(format!("violation on {bounds}, wanted (0.5 pi, 1.5 pi): {window_ok}"));

    let b = on_off_behavior(3, Complex64::new(g, 0.0), &[PI / 3.0; 3], CUTOFF).map_err(err)?;
    let full = lifted_ch_value(&b).map_err(err)?;
    let gap = (full - g.powi(6)).abs() / g.powi(8);
    let full_ok = gap <= FULL_ORDER_CH_SLACK;
    ok &= full_ok;
    notes.push(format!("full order at g=0.1 differs by {gap:.3} g^8 (limit {FULL_ORDER_CH_SLACK}): {full_ok}"));
    Ok((ok, notes.join("; ")))
}

fn cross_validation() -> Check {
    let model = SymbolicEventModel::new(3, 8).map_err(err)?;
    let subsets: Vec<Vec<usize>> = (1..8usize).map(|m| (0..3).filter(|x| m >> x & 1 == 1).collect()).collect();
    let mut notes = Vec::new();
    let mut ok = true;
    let phases = [0.37, 1.21, 2.9];
    for g in [0.02f64, 0.05, 0.1] {
        let network = build_ring_network(3, Complex64::new(g, 0.0)).map_err(err)?;
        let mut worst = 0.0f64;
        let mut compared = 0;
        for pumps in 0..8usize {
            let settings: Vec<PartySetting> = (0..3)
                .map(|x| if pumps >> x & 1 == 1 { PartySetting::on(phases[x]) } else { PartySetting::off(phases[x]) })
                .collect();
            let numeric = subset_probabilities(&evolve_network(&network, &settings, CUTOFF).map_err(err)?, 3);
            for (m, subset) in subsets.iter().enumerate() {
                let p = model.pattern_polynomial(pumps, subset).map_err(err)?.exact_part();
                let symbolic = p.evaluate(Complex64::new(g, 0.0), &phases);
                worst = worst.max((symbolic - numeric[m + 1]).abs());
                compared += 1;
            }
        }
        let ratio = worst / g.powi(10);
        ok &= ratio <= CROSS_VALIDATION_SLACK;
        notes.push(format!("g={g}: {compared} probabilities, worst {worst:.3e} = {ratio:.3} g^10"));
    }
    Ok((ok, notes.join("; ")))
}

fn lp_certification() -> Check {
    let mut notes = Vec::new();
    let g = 0.1;
    let b = on_off_behavior(3, Complex64::new(g, 0.0), &[PI / 3.0; 3], CUTOFF).map_err(err)?;
    let verdict = lhv_feasible(&b, DEFAULT_TOLERANCE).map_err(err)?;
    let mut ok = !verdict.feasible;
    notes.push(format!("on/off at pi infeasible: {}", !verdict.feasible));
    if let Some(cert) = &verdict.certificate {
        let normalized = certificate_to_inequality(3, &cert.coeffs).map_err(err)?;
        let matched = normalized.lifted_ch_match.is_some();
        ok &= matched;
        notes.push(format!("certificate is lifted CH up to relabeling: {matched} (scale {:.4})", normalized.scale));
    } else {
        ok = false;
        notes.push("no certificate".into());
    }
    let reports = phases_only_lp_sweep(&[0.02, 0.05, 0.1], 0.1 * PI, CUTOFF, DEFAULT_TOLERANCE).map_err(err)?;
    for r in &reports {
        ok &= r.infeasible.is_empty();
        notes.push(format!(
            "phases-only g={}: {} behaviors ({} settings), {} infeasible, max gauge {:.10}",
            r.g,
            r.behaviors_checked,
            r.settings_covered,
            r.infeasible.len(),
            r.max_gauge
        ));
    }
    Ok((ok, notes.join("; ")))
}

fn visibility() -> Check {
    let ch = exact_threshold(&lifted_ch_expression()).map_err(err)?;
    let genuine = exact_threshold(&genuine_tripartite_expression()).map_err(err)?;
    let exact_ok = ch == ratio(1, 2) && genuine == ratio(5, 8);
    let (v_ch, v_gen) = full_order_thresholds(0.05, CUTOFF).map_err(err)?;
    let agree = (v_ch - 0.5).abs() <= VISIBILITY_AGREEMENT && (v_gen - 0.625).abs() <= VISIBILITY_AGREEMENT;
    let (w_ch, w_gen) = full_order_thresholds(0.1, CUTOFF).map_err(err)?;
    Ok((
        exact_ok && agree,
        format!(
            "exact {ch} and {genuine}; bisection at g=0.05: {v_ch:.5}, {v_gen:.5} (within {VISIBILITY_AGREEMENT}: {agree}); \
             at g=0.1: {w_ch:.5}, {w_gen:.5}"
        ),
    ))
}

/// Value of an x-series at a phase sum that is a multiple of pi, exactly.
fn at_half_turns(series: &BTreeMap<(u32, i32), GaussianRational>, j: u32, half_turns: i32) -> GaussianRational {
    let mut total = GaussianRational::zero();
    for ((power, s), c) in series {
        if *power == j {
            let sign = if (s * half_turns).rem_euclid(2) == 0 { 1 } else { -1 };
            total += &c.scale(&ratio(sign, 1));
        }
    }
    total
}

fn many_parties() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for (n, order) in [(4usize, 5u32), (5, 6)] {
        let model = SymbolicEventModel::new(n, order).map_err(err)?;
        let p = model.expression_polynomial(&n_lifted_ch_expression(n).map_err(err)?).map_err(err)?;
        let j = n as u32;
        if p.exact_through() < 2 * j {
            return Err(format!("N={n} exact only through {}", p.exact_through()));
        }
        let series = x_series(&p.truncated(2 * j))?;
        let lower_orders_vanish = series.keys().all(|&(power, _)| power == j);
        let at_pi = at_half_turns(&series, j, 1);
        let pi_ok = lower_orders_vanish && at_pi == GaussianRational::one();
        ok &= pi_ok;
        notes.push(format!("N={n}: value at pi = {at_pi} x^{n}: {pi_ok}"));
        if n == 4 {
            let g: f64 = 0.1;
            let worst = (0..200)
                .map(|k| k as f64 * 0.01 * PI)
                .filter(|s| !(PI / 2.0 < *s && *s < 1.5 * PI))
                .map(|s| p.truncated(2 * j).evaluate(Complex64::new(g, 0.0), &[s, 0.0, 0.0, 0.0]))
                .fold(f64::MIN, f64::max);
            let outside_ok = worst <= 0.0;
            ok &= outside_ok;
            notes.push(format!("N=4 largest value outside (pi/2, 3pi/2): {worst:.3e}"));
        }
    }
    Ok((ok, notes.join("; ")))
}

fn paradox() -> Check {
    let model = GhzModel::new().map_err(err)?;
    let off = x_series(&model.polynomial(0, &[0, 1, 2]).map_err(err)?.truncated(6))?;
    let lhs_ok = off.len() == 1 && off.get(&(3, 0)) == Some(&GaussianRational::one());
    let on = x_series(&model.polynomial(0b111, &[0, 1, 2]).map_err(err)?.truncated(6))?;
    let rhs_zero = at_half_turns(&on, 3, 1).is_zero();
    let pi3 = [PI / 3.0; 3];
    let mut smallest = f64::MAX;
    for k in 1..=100 {
        let g = 0.001 * k as f64;
        smallest = smallest.min(paradox_gap(&model, g, &pi3).map_err(err)?.gap / g.powi(6));
    }
    let gap = paradox_gap(&model, 0.1, &pi3).map_err(err)?;
    let budget = degradation_budget(&model, 0.1, &pi3).map_err(err)?;
    let ok = lhs_ok && rhs_zero && smallest > 0.0 && budget.budget < gap.gap;
    Ok((
        ok,
        format!(
            "off: x^3 leading {lhs_ok}; on at pi, x^3 part zero {rhs_zero}; min gap/g^6 over (0, 0.1] = {smallest:.4}; \
             at g=0.1 gap {:.4e} vs budget {:.4e}",
            gap.gap, budget.budget
        ),
    ))
}

fn settings(pumps: usize, phases: &[f64; 3]) -> Vec<PartySetting> {
    (0..3).map(|x| if pumps >> x & 1 == 1 { PartySetting::on(phases[x]) } else { PartySetting::off(phases[x]) }).collect()
}

fn property_suites() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let (mut signaling, mut unitarity, mut phase_sum) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..40 {
        let g = rng.gen_range(0.0..0.12);
        let phases: [f64; 3] = [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)];
        let b = on_off_behavior(3, Complex64::new(g, 0.0), &phases, CUTOFF).map_err(err)?;
        signaling = signaling.max(b.no_signaling_defect()).max(b.normalization_defect());

        let network = build_ring_network(3, Complex64::new(g, 0.0)).map_err(err)?;
        let pumps = rng.gen_range(0..8usize);
        let report = evolve_network(&network, &settings(pumps, &phases), CUTOFF).map_err(err)?;
        unitarity = unitarity.max(report.unitarity_defect().abs());
        let shift = rng.gen_range(-3.0..3.0);
        let moved = [phases[0] + shift, phases[1] - shift, phases[2]];
        let other = evolve_network(&network, &settings(pumps, &moved), CUTOFF).map_err(err)?;
        let (p, q) = (subset_probabilities(&report, 3), subset_probabilities(&other, 3));
        phase_sum = phase_sum.max(p.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }

    let strategies: Vec<Behavior> = enumerate_strategies(3).map_err(err)?.iter().map(|s| s.column()).collect();
    let mut worst_local = f64::MIN;
    let mut worst_wwwzb = f64::MIN;
    for _ in 0..10_000 {
        let picks: Vec<&Behavior> = if rng.gen_bool(0.5) {
            (0..3).map(|_| &strategies[rng.gen_range(0..strategies.len())]).collect()
        } else {
            strategies.iter().collect()
        };
        let weights: Vec<f64> = picks.iter().map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
        let total: f64 = weights.iter().sum();
        let parts: Vec<(f64, &Behavior)> = weights.iter().zip(picks).map(|(w, s)| (w / total, s)).collect();
        let m = Behavior::mixture(&parts).map_err(err)?;
        for v in [lifted_ch_value(&m), symmetrized_ch_value(&m), genuine_tripartite_value(&m)] {
            worst_local = worst_local.max(v.map_err(err)?);
        }
        worst_wwwzb = worst_wwwzb.max(wwwzb_condition(&correlation_tensor(&m)).map_err(err)?);
    }
    let ok = signaling <= NO_SIGNALING_TOL
        && unitarity <= UNITARITY_TOL
        && phase_sum <= PHASE_SUM_TOL
        && worst_local <= LOCAL_MIXTURE_TOL;
    Ok((
        ok,
        format!(
            "no-signaling {signaling:.2e}, unitarity {unitarity:.2e}, phase-sum {phase_sum:.2e}, \
             largest CH-family value on 10^4 local mixtures {worst_local:.2e}, largest WWWZB sum {worst_wwwzb:.6}"
        ),
    ))
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "golden state", Some(secs(5)), golden_state),
        run(2, "probability table", Some(secs(30)), probability_table),
        run(3, "lifted CH", None, lifted_ch),
        run(4, "numeric vs symbolic", Some(secs(120)), cross_validation),
        run(5, "LP certification", Some(secs(600)), lp_certification),
        run(6, "visibility thresholds", None, visibility),
        run(7, "four and five parties", None, many_parties),
        run(8, "paradox", None, paradox),
        run(9, "property suites", None, property_suites),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
