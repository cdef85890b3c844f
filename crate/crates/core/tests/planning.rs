//! Policy evaluation against path enumeration, planning on quotients, and value bounds.

use boundq::model::benchmarks::{random_pomdp, tiger_full};
use boundq::model::TIGER_ACCURACY;
use boundq::planning::{check_value_bound, exhaustive_search, family_values, plan_compare, policy_value, Objective, ObjectiveKind};
use boundq::probes::{enumerate_family, ClockAwareFsc, FamilyKind, Fsc, ProbeFamily, DEFAULT_FAMILY_CAP};
use boundq::{build_cache, eps_partition, CacheOptions, LawDistance, Pomdp, QuotientPomdp};
use proptest::prelude::*;

fn family(p: &Pomdp, kind: FamilyKind, m: usize, t: usize) -> ProbeFamily {
    enumerate_family(kind, m, p.n_actions(), p.n_observations(), t, DEFAULT_FAMILY_CAP).unwrap()
}

fn quotient(p: &Pomdp, fam: &ProbeFamily, t: usize, eps: f64) -> QuotientPomdp {
    let c = build_cache(p, p.name(), fam, t, &LawDistance::Wasserstein(p.metric().clone()), CacheOptions::serial()).unwrap();
    QuotientPomdp::build(p, &eps_partition(&c, eps).unwrap()).unwrap()
}

/// Expected objective by summing over every state, action, observation and node path.
fn path_value(p: &Pomdp, fsc: &Fsc, objective: &Objective, horizon: usize) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn go(p: &Pomdp, fsc: &Fsc, obj: &ObjectiveKind, t: usize, horizon: usize, s: usize, node: usize, w: f64) -> f64 {
        if t == horizon || w == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (a, pa) in fsc.act(t, node).iter() {
            let step_reward = match obj {
                ObjectiveKind::Latent => p.r(s, a),
                ObjectiveKind::ActionObservationScore { productive, action_weight, .. } => if productive[a] { *action_weight } else { 0.0 },
                ObjectiveKind::ObservationScore { .. } => 0.0,
            };
            acc += w * pa * step_reward;
            for s2 in 0..p.n_states() {
                for o in 0..p.n_observations() {
                    let wo = w * pa * p.p(a, s, s2) * p.z(a, s2, o);
                    if wo == 0.0 {
                        continue;
                    }
                    acc += wo * match obj {
                        ObjectiveKind::Latent => 0.0,
                        ObjectiveKind::ObservationScore { g } => g[o],
                        ObjectiveKind::ActionObservationScore { g, obs_weight, .. } => obs_weight * g[o],
                    };
                    for (n2, pn) in fsc.next(t, node, o).iter() {
                        acc += go(p, fsc, obj, t + 1, horizon, s2, n2, wo * pn);
                    }
                }
            }
        }
        acc
    }
    p.initial().iter().enumerate().map(|(s, &b)| go(p, fsc, &objective.kind, 0, horizon, s, 0, b)).sum()
}

fn objectives(p: &Pomdp) -> Vec<Objective> {
    vec![Objective::latent(p), Objective::default_observation_score(p), Objective::default_action_observation_score(p)]
}

#[test]
fn tiger_listening_scores() {
    let p = tiger_full(TIGER_ACCURACY).unwrap();
    let listen = Fsc::ClockAware(ClockAwareFsc::open_loop(vec![0; 4], p.n_observations()));
    let score = policy_value(&p, &listen, &Objective::default_observation_score(&p), 4).unwrap();
    assert!((score - 2.0).abs() <= 1e-12);
    let latent = policy_value(&p, &listen, &Objective::latent(&p), 4).unwrap();
    assert!((latent + 4.0).abs() <= 1e-12);
}

#[test]
fn tiger_latent_best_policy_listens() {
    let p = tiger_full(TIGER_ACCURACY).unwrap();
    let fam = family(&p, FamilyKind::ClockAware, 1, 2);
    let best = exhaustive_search(&p, &fam, &Objective::latent(&p), 2).unwrap();
    assert!((best.value + 2.0).abs() <= 1e-12);
    let values = family_values(&p, &fam, &Objective::latent(&p), 2).unwrap();
    let first_max = values.iter().position(|&v| v == best.value).unwrap();
    assert_eq!(best.index, first_max);
}

#[test]
fn tiger_values_match_path_enumeration() {
    let p = tiger_full(TIGER_ACCURACY).unwrap();
    let fam = family(&p, FamilyKind::Stationary, 2, 3);
    for obj in objectives(&p) {
        for fsc in fam.members().iter().step_by(7) {
            let v = policy_value(&p, fsc, &obj, 3).unwrap();
            assert!((v - path_value(&p, fsc, &obj, 3)).abs() <= 1e-10, "{}", obj.id());
        }
    }
}

#[test]
fn exact_quotient_preserves_agent_accessible_values() {
    let p = tiger_full(TIGER_ACCURACY).unwrap();
    let fam = family(&p, FamilyKind::ClockAware, 1, 3);
    let q = quotient(&p, &fam, 3, 0.0);
    for obj in [Objective::default_observation_score(&p), Objective::default_action_observation_score(&p)] {
        let r = plan_compare(&p, &q, &fam, &obj, 3).unwrap();
        assert!(r.regret.abs() <= 1e-9);
        assert!(obj.is_agent_accessible());
    }
    assert!(!Objective::latent(&p).is_agent_accessible());
}

#[test]
fn negative_lipschitz_is_rejected() {
    let p = tiger_full(TIGER_ACCURACY).unwrap();
    assert!(Objective::latent(&p).with_lipschitz(-1.0).is_err());
    assert!(Objective::observation_score(&p, vec![2.0, 0.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_values_match_path_enumeration(seed in 0u64..10_000, n_states in 1usize..4, t in 1usize..4) {
        let p = random_pomdp(n_states, 2, seed, false).unwrap();
        let fam = family(&p, FamilyKind::Stationary, 2, t);
        let obj = Objective::latent(&p);
        for fsc in fam.members().iter().step_by(5) {
            let v = policy_value(&p, fsc, &obj, t).unwrap();
            prop_assert!((v - path_value(&p, fsc, &obj, t)).abs() <= 1e-10);
        }
        let score = Objective::default_observation_score(&p);
        let fsc = &fam.members()[seed as usize % fam.len()];
        prop_assert!((policy_value(&p, fsc, &score, t).unwrap() - path_value(&p, fsc, &score, t)).abs() <= 1e-10);
    }

    /// `|V_M − V_Q| ≤ L_R T ε` and regret ≤ `2 L_R T ε` on ε-quotients of random models.
    #[test]
    fn value_bound_holds_on_random_models(seed in 0u64..10_000, eps in 0.0f64..1.0) {
        let p = random_pomdp(3, 2, seed, false).unwrap();
        let t = 3;
        let fam = family(&p, FamilyKind::Stationary, 1, t);
        let q = quotient(&p, &fam, t, eps);
        let score = Objective::default_observation_score(&p);
        let r = check_value_bound(&p, &q, &fam, &score, eps, t).unwrap();
        prop_assert!(r.holds(), "{:?}", r);
        prop_assert!(r.bound <= r.canonical_bound + 1e-12);
    }
}
