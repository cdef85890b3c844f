//! Sampled laws: determinism, convergence to exact laws, and bootstrap intervals.

use boundq::model::benchmarks::{random_pomdp, tiger_full};
use boundq::model::TIGER_ACCURACY;
use boundq::probes::{enumerate_family, suffix_law, FamilyKind, ProbeFamily, DEFAULT_FAMILY_CAP};
use boundq::sampling::{bootstrap_ci_max_w1, empirical_suffix_law, sampled_cache, SampledLaws, SamplingConfig};
use boundq::transport::total_variation;
use boundq::{LawDistance, Pomdp};

fn family(p: &Pomdp, m: usize, t: usize) -> ProbeFamily {
    enumerate_family(FamilyKind::Stationary, m, p.n_actions(), p.n_observations(), t, DEFAULT_FAMILY_CAP).unwrap()
}

fn config(trajectories: usize, seed: u64, parallel: bool) -> SamplingConfig {
    SamplingConfig { trajectories, seed, parallel, ..SamplingConfig::default() }
}

#[test]
fn empirical_law_approaches_exact_law() {
    let p = tiger_full(TIGER_ACCURACY).unwrap();
    let fam = family(&p, 2, 3);
    for (k, fsc) in fam.members().iter().enumerate().step_by(29) {
        for h in [vec![], vec![0], vec![1, 0]] {
            let exact = suffix_law(&p, fsc, &h, 3).unwrap();
            let sampled = empirical_suffix_law(&p, fsc, &h, 3, 40_000, k as u64).unwrap();
            match (exact.law, sampled) {
                (Some(e), Some(s)) => assert!(total_variation(&e, &s) <= 0.02, "probe {k} history {h:?}"),
                (None, None) => {}
                (e, s) => panic!("reachability differs for probe {k} {h:?}: {e:?} vs {s:?}"),
            }
        }
    }
}

#[test]
fn empirical_law_is_seeded() {
    let p = random_pomdp(4, 2, 9, false).unwrap();
    let fam = family(&p, 1, 3);
    let fsc = &fam.members()[1];
    let a = empirical_suffix_law(&p, fsc, &[1], 3, 500, 17).unwrap();
    let b = empirical_suffix_law(&p, fsc, &[1], 3, 500, 17).unwrap();
    assert_eq!(a, b);
    assert!(empirical_suffix_law(&p, fsc, &[1], 3, 0, 17).is_err());
    assert!(empirical_suffix_law(&p, fsc, &[1, 0, 1], 3, 10, 17).is_err());
}

#[test]
fn sampled_cache_is_identical_serial_and_parallel() {
    let p = tiger_full(TIGER_ACCURACY).unwrap();
    let fam = family(&p, 1, 3);
    let dist = LawDistance::Wasserstein(p.metric().clone());
    let a = sampled_cache(&p, &fam, 3, &dist, &config(200, 5, false)).unwrap();
    let b = sampled_cache(&p, &fam, 3, &dist, &config(200, 5, true)).unwrap();
    for d in 0..3 {
        assert!(a.block(d).iter().zip(b.block(d)).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    let c = sampled_cache(&p, &fam, 3, &dist, &config(200, 6, false)).unwrap();
    assert!((0..3).any(|d| a.block(d) != c.block(d)), "different seeds should give different samples");
}

#[test]
fn bootstrap_interval_is_ordered_and_seeded() {
    let p = tiger_full(TIGER_ACCURACY).unwrap();
    let fam = family(&p, 1, 2);
    let dist = LawDistance::Wasserstein(p.metric().clone());
    let laws = SampledLaws::draw(&p, &fam, 2, &config(300, 3, true)).unwrap();
    let (lo, hi) = bootstrap_ci_max_w1(&laws, &dist, 200, 0.95, 11).unwrap();
    assert!(lo <= hi && lo >= 0.0);
    assert_eq!((lo, hi), bootstrap_ci_max_w1(&laws, &dist, 200, 0.95, 11).unwrap());
    assert!(bootstrap_ci_max_w1(&laws, &dist, 200, 1.5, 11).is_err());
}

#[test]
fn zero_trajectories_rejected() {
    assert!(config(0, 1, false).validate().is_err());
}
