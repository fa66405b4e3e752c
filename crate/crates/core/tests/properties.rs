use proptest::prelude::*;

use synlab_core::cosmo::{calibrate, CosmoParams};
use synlab_core::gauge::{induced_weight, SelectionRule};
use synlab_core::grammar::{check_prefix_free, decode_stream, kraft_sum, HeaderDef, JunkRule};
use synlab_core::pathint::{exhaustive_measure, hbar_eff_fit, ActionSpec, LatticeSpec};
use synlab_core::redundancy::{scale_redundancy_check, weight_table, EmergentScale, RedundancyProfile};
use synlab_core::variational::{el_locality_fit, el_operator, grid_segments, ElMethod};
use synlab_core::{Grammar, LocalCost, Potential};

fn brute_force_count(rule: &JunkRule, length: usize) -> u64 {
    let b = rule.alphabet_size();
    let mut word = vec![0u8; length];
    let mut count = 0;
    loop {
        if rule.accepts(&word) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == length {
                return count;
            }
            word[i] += 1;
            if (word[i] as usize) < b {
                break;
            }
            word[i] = 0;
            i += 1;
        }
    }
}

fn dfa() -> impl Strategy<Value = JunkRule> {
    (2usize..=3, 1usize..=3).prop_flat_map(|(b, states)| {
        proptest::collection::vec(proptest::option::weighted(0.8, 0..states), b * states).prop_map(move |table| {
            let transitions: Vec<[usize; 3]> =
                table.iter().enumerate().filter_map(|(i, t)| t.map(|to| [i / b, i % b, to])).collect();
            JunkRule::new(b, states, 0, &transitions).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dp_counts_match_enumeration(rule in dfa(), length in 0usize..=7) {
        let exact = rule.count_strings(length);
        prop_assert_eq!(exact, brute_force_count(&rule, length).into());
    }

    #[test]
    fn prefix_free_sets_satisfy_kraft(words in proptest::collection::vec(proptest::collection::vec(0u8..3, 1..5), 1..8)) {
        if check_prefix_free(&words).unwrap().is_ok() {
            let k = kraft_sum(&words, 3);
            prop_assert!(k.sum <= num_rational::BigRational::from_integer(1.into()));
        }
    }

    #[test]
    fn block_code_round_trips(picks in proptest::collection::vec((0usize..4, proptest::collection::vec(0u8..2, 2)), 0..20)) {
        // four two-symbol headers over {2, 3}, binary payloads of length 2
        let headers: Vec<HeaderDef> = (0..4u8)
            .map(|i| HeaderDef::new(vec![2 + (i >> 1), 2 + (i & 1)], format!("t{i}"), 2, &[0, 1]))
            .collect();
        let grammar = Grammar::new(4, headers, JunkRule::unconstrained(4)).unwrap();
        let mut stream = Vec::new();
        for (h, payload) in &picks {
            stream.extend_from_slice(&grammar.headers()[*h].codeword);
            stream.extend_from_slice(payload);
        }
        let decoded = decode_stream(&grammar, &stream).unwrap();
        prop_assert_eq!(decoded.len(), picks.len());
        for (seg, (h, payload)) in decoded.segments.iter().zip(&picks) {
            prop_assert_eq!(seg.header, *h);
            prop_assert_eq!(&seg.payload, payload);
        }
        prop_assert_eq!(decoded.to_symbols(&grammar), stream);
    }

    #[test]
    fn weight_tables_normalize_and_order(costs in proptest::collection::vec(0.0f64..40.0, 1..30), lambda in 0.05f64..3.0, ceiling in proptest::option::of(40.0f64..120.0)) {
        let profile = match ceiling {
            Some(_) => RedundancyProfile::from_rule(JunkRule::unconstrained(2)).unwrap(),
            None => RedundancyProfile::from_lambda(lambda).unwrap(),
        };
        let entries: Vec<(String, f64)> = costs.iter().enumerate().map(|(i, l)| (i.to_string(), *l)).collect();
        let table = weight_table(&profile, &entries, ceiling, true).unwrap();
        let total: f64 = table.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for x in &table.entries {
            for y in &table.entries {
                if x.ell < y.ell {
                    prop_assert!(x.probability >= y.probability);
                }
            }
        }
    }

    #[test]
    fn exact_weights_decrease_with_cost(l1 in 0.0f64..20.0, gap in 0.01f64..10.0, extra in 0.0f64..50.0) {
        let profile = RedundancyProfile::from_rule(JunkRule::no_consecutive_ones()).unwrap();
        let k = l1 + gap + extra;
        let r = profile.relative_weight(l1, l1 + gap, k).unwrap();
        prop_assert!(r.value > 1.0);
    }

    #[test]
    fn scale_redundancy_holds(costs in proptest::collection::vec(0.0f64..10.0, 1..20), c in 0.05f64..50.0, alpha in 0.1f64..5.0) {
        let scale = EmergentScale::new(alpha, 3f64.ln()).unwrap();
        let r = scale_redundancy_check(&scale, &costs, c).unwrap();
        prop_assert!(r.max_weight_deviation < 1e-12);
        prop_assert!(r.hbar_relative_deviation < 1e-12);
    }

    #[test]
    fn analytic_and_difference_operators_agree(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, k in 0.1f64..3.0) {
        let cost = LocalCost::KineticPotential { mass: 1.3, step: 0.4, potential: Potential::Polynomial { coeffs: vec![0.0, 0.2, k, 0.1, 0.05] } };
        let h = vec![vec![a], vec![b], vec![c]];
        let exact = el_operator(&cost, &h, 1, ElMethod::Analytic).unwrap().value[0];
        let fd = el_operator(&cost, &h, 1, ElMethod::CentralDifference).unwrap().value[0];
        prop_assert!((exact - fd).abs() < 1e-6 * (1.0 + exact.abs()));
    }

    #[test]
    fn construct_and_recover(c in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], g in proptest::collection::vec(-1.0f64..1.0, 3)) {
        let reference = LocalCost::kinetic(1.0, 1.0);
        let gauge = Potential::Polynomial { coeffs: vec![0.0, g[0], g[1], g[2]] };
        let ell = reference.clone().scaled(c).with_boundary(gauge.clone());
        let grid: Vec<f64> = (0..7).map(|i| -1.0 + i as f64 / 3.0).collect();
        let fit = el_locality_fit(&ell, &reference, &grid_segments(&grid), Some(&[grid[0]])).unwrap();
        prop_assert!((fit.c_hat - c).abs() < 1e-8);
        for (n, gh) in fit.nodes.iter().zip(&fit.g_hat) {
            prop_assert!((gh - (gauge.value(n[0]) - gauge.value(grid[0]))).abs() < 1e-7);
        }
    }

    #[test]
    fn cosmological_identities(h0 in -20.0f64..2.0, g in -12.0f64..2.0, hbar in -36.0f64..2.0, eta in 0.001f64..=1.0, lambda in 0.01f64..10.0) {
        let p = CosmoParams::new(10f64.powf(h0), 10f64.powf(g), 10f64.powf(hbar), eta, lambda).unwrap();
        let r = calibrate(&p).unwrap();
        prop_assert!(r.action_identity_error <= 1e-14);
        prop_assert!((r.hbar_eff * eta / p.hbar - 1.0).abs() <= 1e-14);
        prop_assert!(r.cost_identity_error <= 1e-14);
    }

    #[test]
    fn gauge_exponential_part_is_rule_independent(lp in 0.0f64..10.0, lm in 0.0f64..10.0, lambda in 0.01f64..5.0) {
        let a = induced_weight(&SelectionRule::RuleA, lp, lm, lambda).unwrap();
        let b = induced_weight(&SelectionRule::RuleB, lp, lm, lambda).unwrap();
        prop_assert_eq!(a.unnormalized_plus / a.g_plus as f64, b.unnormalized_plus / b.g_plus as f64);
        prop_assert_eq!(a.unnormalized_minus / a.g_minus as f64, b.unnormalized_minus / b.g_minus as f64);
    }

    #[test]
    fn hbar_fit_recovers_generating_scale(hbar in 0.1f64..5.0, k in 0.0f64..2.0) {
        let lattice = LatticeSpec { steps: 3, epsilon: 0.5, grid: vec![-1.0, -0.5, 0.0, 0.5, 1.0], x_initial: 0.0, x_final: 0.5 };
        let action = ActionSpec { potential: Potential::Harmonic { k }, ..ActionSpec::free(1.0) };
        let m = exhaustive_measure(&lattice, &action, hbar).unwrap();
        let samples: Vec<(f64, f64)> = m.actions.iter().copied().zip(m.probabilities.iter().copied()).collect();
        let fit = hbar_eff_fit(&samples).unwrap();
        prop_assert!((fit.hbar_eff - hbar).abs() < 1e-9 * hbar.max(1.0));
    }
}
