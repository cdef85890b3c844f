//! Wrappers, coarsening, data processing, and layered composition.

use boundq::layered::{apply_wrapper, check_data_processing, covering, run_layered, LayeredPlan, Wrapped, Wrapper};
use boundq::model::benchmarks::{random_pomdp, tiger_full};
use boundq::model::TIGER_ACCURACY;
use boundq::probes::{enumerate_family, observation_law, FamilyKind, DEFAULT_FAMILY_CAP};
use boundq::{GroundMetric, Pomdp};
use proptest::prelude::*;

fn plane_metric(points: &[(f64, f64)]) -> GroundMetric {
    let cost = points.iter().flat_map(|a| points.iter().map(move |b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())).collect();
    GroundMetric::custom(points.len(), cost).unwrap()
}

/// Size of the smallest δ-covering by exhaustive search.
fn min_cover_size(metric: &GroundMetric, delta: f64) -> usize {
    let n = metric.size();
    (1u32..(1 << n))
        .filter(|mask| (0..n).all(|o| (0..n).any(|r| mask & (1 << r) != 0 && metric.d(o, r) <= delta + 1e-12)))
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

/// Observation channel with random rows onto `k` wrapped symbols under the discrete metric.
fn random_channel(p: &Pomdp, k: usize, rows: &[Vec<f64>]) -> Wrapper {
    let no = p.n_observations();
    let na = p.n_actions();
    let remap = (0..na * na).map(|i| if i / na == i % na { 1.0 } else { 0.0 }).collect();
    let channel = rows.iter().take(no).flat_map(|r| {
        let total: f64 = r.iter().take(k).sum();
        r.iter().take(k).map(move |x| x / total).collect::<Vec<_>>()
    }).collect();
    Wrapper::new(
        "channel",
        p.action_names().to_vec(),
        na,
        remap,
        (0..k).map(|i| format!("w{i}")).collect(),
        no,
        channel,
        GroundMetric::discrete(k),
    )
    .unwrap()
}

#[test]
fn identity_wrapper_is_one_lipschitz() {
    let p = tiger_full(TIGER_ACCURACY).unwrap();
    let w = Wrapper::identity(&p);
    assert!((w.lipschitz(p.metric()).unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn layered_tiger_respects_its_ledger() {
    let p = tiger_full(TIGER_ACCURACY).unwrap();
    let plan = LayeredPlan::uniform(p, 4, 2, 0.5, FamilyKind::Stationary, 1).unwrap();
    let report = run_layered(&plan, 1.0).unwrap();
    assert!(report.holds());
    assert_eq!(report.histories_direct, 31);
    assert!(report.histories_layered < report.histories_direct);
    for row in &report.rows {
        assert!(row.empirical <= row.bound + 1e-9);
    }
}

#[test]
fn negative_resolution_is_rejected() {
    assert!(covering(&GroundMetric::discrete(3), -0.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn covering_is_valid_and_minimal(points in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..8), delta in 0.0f64..0.8) {
        let metric = plane_metric(&points);
        let spec = covering(&metric, delta).unwrap();
        prop_assert_eq!(spec.quantize.len(), points.len());
        for (o, &k) in spec.quantize.iter().enumerate() {
            prop_assert!(metric.d(o, spec.representatives[k]) <= delta + 1e-12);
        }
        prop_assert_eq!(spec.size(), min_cover_size(&metric, delta));
    }

    /// `D(W(A), W(B)) ≤ L_C · D(A, B)` for random models and random channels.
    #[test]
    fn data_processing_on_random_channels(
        seed in 0u64..10_000,
        k in 2usize..4,
        rows in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 3), 3),
    ) {
        let a = random_pomdp(3, 3, seed, false).unwrap();
        let b = random_pomdp(3, 3, seed + 1, false).unwrap();
        let w = random_channel(&a, k, &rows);
        let check = check_data_processing(&a, &b, a.metric(), &w, FamilyKind::Stationary, 1, 2).unwrap();
        prop_assert!(check.holds(), "{:?}", check);
        prop_assert!(check.lipschitz >= 0.0);
    }

    /// The lazily wrapped model and its materialization emit the same observation laws.
    #[test]
    fn wrapped_mixture_matches_materialized(seed in 0u64..10_000, rows in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 3), 2)) {
        let p = random_pomdp(3, 2, seed, false).unwrap();
        let w = random_channel(&p, 3, &rows);
        let lazy = Wrapped::new(&p, &w).unwrap();
        let eager = apply_wrapper(&p, &w).unwrap();
        let fam = enumerate_family(FamilyKind::Stationary, 1, w.n_actions(), w.n_observations(), 3, DEFAULT_FAMILY_CAP).unwrap();
        for fsc in fam.members() {
            let x = observation_law(&lazy, fsc, 3).unwrap();
            let y = observation_law(&eager, fsc, 3).unwrap();
            for (&s, &m) in x.support().iter().zip(x.masses()) {
                prop_assert!((y.mass(s) - m).abs() <= 1e-10);
            }
            prop_assert_eq!(x.len(), y.len());
        }
    }
}
