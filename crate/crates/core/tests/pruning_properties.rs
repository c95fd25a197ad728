use fluxfsp_core::{adaptive_dt, prune, FluxDiagnostics, PruneParams, SolverConfig, StateSet};
use proptest::prelude::*;

fn line_set(n: usize) -> StateSet {
    let mut set = StateSet::new(1);
    for i in 0..n {
        set.insert(&[i as u32]);
    }
    set
}

/// Probabilities spanning many decades, so that candidate sets are non-trivial.
fn distribution() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..300)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(prop_oneof![Just(0.0), (-14.0f64..0.0).prop_map(|e| 10f64.powf(e))], n),
                prop::collection::vec(prop_oneof![Just(0.0), (-3.0f64..4.0).prop_map(|e| 10f64.powf(e))], n),
            )
        })
        .prop_filter("some mass", |(p, _)| p.iter().any(|x| *x > 0.0))
        .prop_map(|(p, w)| {
            let s: f64 = p.iter().sum();
            (p.iter().map(|x| x / s).collect(), w)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn pruning_invariants(
        (p, w) in distribution(),
        alpha in prop_oneof![1e-12f64..1e-6, 1e-6f64..0.999],
        flux_tol in prop_oneof![Just(0.0), (-12.0f64..0.0).prop_map(|e| 10f64.powf(e))],
    ) {
        let set = line_set(p.len());
        let params = PruneParams { quantile_tol: alpha, flux_tol };
        let (kept, q, report) = prune(&set, &p, &w, &params).unwrap();

        let phi_total: f64 = p.iter().zip(&w).map(|(p, w)| p * w).sum();
        let survivors: Vec<usize> = kept.iter().map(|x| x[0] as usize).collect();
        prop_assert_eq!(&survivors, &report.kept);
        if flux_tol > 0.0 {
            for i in 0..p.len() {
                if p[i] * w[i] >= flux_tol * phi_total {
                    prop_assert!(kept.contains(&[i as u32]), "protected state {} removed", i);
                }
            }
        }
        let top = p.iter().cloned().fold(0.0, f64::max);
        prop_assert!(survivors.iter().any(|&i| p[i] == top));

        let removed: f64 = (0..p.len()).filter(|i| !survivors.contains(i)).map(|i| p[i]).sum();
        prop_assert!(removed <= alpha, "removed {} > alpha {}", removed, alpha);
        prop_assert!((removed - report.removed_mass).abs() <= 1e-15);

        let norm: f64 = q.iter().sum();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
        prop_assert!(q.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn unclamped_step_meets_tolerance(
        phi_max in (-12.0f64..6.0).prop_map(|e| 10f64.powf(e)),
        dt_tol in (-8.0f64..0.0).prop_map(|e| 10f64.powf(e)),
    ) {
        let cfg = SolverConfig { dt_tol, tf: 1e30, dt_min: Some(1e-300), ..SolverConfig::default() };
        let diag = FluxDiagnostics::compute(&[1.0], &[phi_max], &[0.0]).unwrap();
        let dt = adaptive_dt(&diag, &cfg);
        prop_assert_eq!(dt, dt_tol / phi_max);
        // The product recovers the tolerance up to one rounding of the division.
        prop_assert!((dt * phi_max - dt_tol).abs() <= 2.0 * f64::EPSILON * dt_tol);
    }

    #[test]
    fn clamped_step_respects_bounds(phi_max in (-12.0f64..6.0).prop_map(|e| 10f64.powf(e))) {
        let cfg = SolverConfig { dt_tol: 0.1, tf: 1.0, dt_min: Some(1e-4), dt_max: Some(0.5), ..SolverConfig::default() };
        let diag = FluxDiagnostics::compute(&[1.0], &[phi_max], &[0.0]).unwrap();
        let dt = adaptive_dt(&diag, &cfg);
        prop_assert!((1e-4..=0.5).contains(&dt));
    }
}
