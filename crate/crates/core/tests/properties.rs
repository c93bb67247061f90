use std::f64::consts::PI;

use num_complex::Complex64;
use pdc_core::bell::{
    correlation_tensor, genuine_tripartite_value, lifted_ch_value, on_off_behavior, symmetrized_ch_value,
    wwwzb_condition, Behavior,
};
use pdc_core::fock::{FockState, OccupationVector};
use pdc_core::lhv::{enumerate_strategies, lhv_feasible, DEFAULT_TOLERANCE};
use pdc_core::network::{build_ring_network, evolve_network, subset_probabilities, PartySetting, Pump};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn settings(pumps: [bool; 3], phases: [f64; 3]) -> Vec<PartySetting> {
    (0..3).map(|x| if pumps[x] { PartySetting::on(phases[x]) } else { PartySetting::off(phases[x]) }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolution_is_unitary(g in 0.0f64..0.2, pumps in any::<[bool; 3]>(), phases in prop::array::uniform3(0.0f64..6.3)) {
        let net = build_ring_network(3, Complex64::new(g, 0.0)).unwrap();
        let r = evolve_network(&net, &settings(pumps, phases), 6).unwrap();
        prop_assert!(r.unitarity_defect().abs() < 1e-10);
    }

    // Above |g| ~ 0.15 the cutoff-6 truncation error itself exceeds 1e-10.
    #[test]
    fn behaviors_are_no_signaling(g in 0.0f64..0.12, phases in prop::array::uniform3(0.0f64..6.3)) {
        let b = on_off_behavior(3, Complex64::new(g, 0.0), &phases, 6).unwrap();
        prop_assert!(b.no_signaling_defect() < 1e-10);
        prop_assert!(b.normalization_defect() < 1e-10);
        prop_assert!(b.min_entry() >= 0.0);
    }

    #[test]
    fn probabilities_depend_on_the_phase_sum_only(
        g in 0.01f64..0.15,
        pumps in any::<[bool; 3]>(),
        a in 0.0f64..6.3,
        b in 0.0f64..6.3,
        shift in -3.0f64..3.0,
    ) {
        let net = build_ring_network(3, Complex64::new(g, 0.0)).unwrap();
        let p = subset_probabilities(&evolve_network(&net, &settings(pumps, [a, b, 0.0]), 6).unwrap(), 3);
        let q = subset_probabilities(&evolve_network(&net, &settings(pumps, [a + shift, b - shift, 0.0]), 6).unwrap(), 3);
        let r = subset_probabilities(&evolve_network(&net, &settings(pumps, [0.0, 0.0, a + b]), 6).unwrap(), 3);
        for i in 0..8 {
            prop_assert!((p[i] - q[i]).abs() < 1e-12);
            prop_assert!((p[i] - r[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_creation_inverts_annihilation(counts in prop::collection::vec(0u8..4, 4), i in 0usize..4, j in 0usize..4) {
        prop_assume!(i != j);
        let occ = OccupationVector::from_counts(&counts);
        prop_assert_eq!(occ.raised(i, j).lowered(i, j), Some(occ.clone()));
        let state = FockState::from_terms(4, 6, vec![(occ.clone(), Complex64::new(1.0, 0.0))]).unwrap();
        let up = state.apply_pair_creation(i, j).unwrap();
        let expected = ((counts[i] as f64 + 1.0) * (counts[j] as f64 + 1.0)).sqrt();
        prop_assert!((up.amplitude(&occ.raised(i, j)).re - expected).abs() < 1e-12);
        // <raised| a_i^dag a_j^dag |occ> = <occ| a_i a_j |raised>.
        let down = FockState::from_terms(4, 6, vec![(occ.raised(i, j), Complex64::new(1.0, 0.0))]).unwrap()
            .apply_pair_annihilation(i, j).unwrap();
        prop_assert!((down.amplitude(&occ).re - expected).abs() < 1e-12);
    }

    #[test]
    fn number_phase_keeps_norm(counts in prop::collection::vec(0u8..4, 4), phi in -7.0f64..7.0, mode in 0usize..4) {
        let occ = OccupationVector::from_counts(&counts);
        let state = FockState::from_terms(4, 6, vec![(occ.clone(), Complex64::new(0.6, 0.8))]).unwrap();
        let rotated = state.apply_number_phase(mode, phi).unwrap();
        prop_assert!((rotated.norm_sq() - 1.0).abs() < 1e-12);
        let overlap = state.inner_product(&rotated).unwrap();
        prop_assert!((overlap.arg() - (phi * counts[mode] as f64)).sin().abs() < 1e-9);
    }

    #[test]
    fn lhv_verdict_survives_relabeling(sum in 0.0f64..6.28, perm in Just(vec![2usize, 0, 1]), flip in 0usize..8) {
        let b = on_off_behavior(3, Complex64::new(0.1, 0.0), &[sum / 3.0; 3], 6).unwrap();
        let base = lhv_feasible(&b, DEFAULT_TOLERANCE);
        prop_assume!(base.is_ok());
        let base = base.unwrap().feasible;
        let other = lhv_feasible(&b.permuted(&perm).unwrap().outcomes_flipped(flip), DEFAULT_TOLERANCE).unwrap();
        prop_assert_eq!(base, other.feasible);
    }
}

fn random_local_mixture(rng: &mut ChaCha8Rng, strategies: &[Behavior]) -> Behavior {
    let weights: Vec<f64> = strategies.iter().map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let total: f64 = weights.iter().sum();
    let parts: Vec<(f64, &Behavior)> = weights.iter().zip(strategies).map(|(w, s)| (w / total, s)).collect();
    Behavior::mixture(&parts).unwrap()
}

#[test]
fn local_mixtures_satisfy_every_inequality() {
    let strategies: Vec<Behavior> = enumerate_strategies(3).unwrap().iter().map(|s| s.column()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..10_000 {
        // Sparse mixtures reach the facets; dense ones sit near the center.
        let mixture = if rng.gen_bool(0.5) {
            let picks: Vec<Behavior> = (0..3).map(|_| strategies[rng.gen_range(0..64)].clone()).collect();
            random_local_mixture(&mut rng, &picks)
        } else {
            random_local_mixture(&mut rng, &strategies)
        };
        assert!(lifted_ch_value(&mixture).unwrap() <= 1e-12);
        assert!(symmetrized_ch_value(&mixture).unwrap() <= 1e-12);
        assert!(genuine_tripartite_value(&mixture).unwrap() <= 1e-12);
        assert!(wwwzb_condition(&correlation_tensor(&mixture)).unwrap() <= 1.0 + 1e-12);
    }
}

#[test]
fn lp_feasible_behaviors_pass_the_correlation_condition() {
    for k in 0..20 {
        let sum = k as f64 * 0.1 * PI;
        let b = on_off_behavior(3, Complex64::new(0.1, 0.0), &[sum / 3.0; 3], 6).unwrap();
        let verdict = lhv_feasible(&b, DEFAULT_TOLERANCE).unwrap();
        let wwwzb = wwwzb_condition(&correlation_tensor(&b)).unwrap();
        if verdict.feasible {
            assert!(wwwzb <= 1.0 + 1e-12, "sum {sum}: {wwwzb}");
        } else {
            assert!(lifted_ch_value(&b).unwrap() > 0.0);
        }
    }
}

#[test]
fn pump_labels_round_trip() {
    for p in [Pump::On, Pump::Off] {
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Pump>(&text).unwrap(), p);
    }
}
