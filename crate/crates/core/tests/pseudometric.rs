//! Suffix laws and the history pseudometric against a path-enumeration oracle.

use boundq::experiments::{load_cache, save_cache};
use boundq::model::benchmarks::{random_pomdp, stationary_witness, tiger_full};
use boundq::model::TIGER_ACCURACY;
use boundq::probes::{enumerate_family, suffix_law, FamilyKind, Fsc, ProbeFamily, DEFAULT_FAMILY_CAP};
use boundq::pseudometric::{delta_s, envelope};
use boundq::transport::DiscreteDistribution;
use boundq::{build_cache, CacheOptions, DistanceCache, LawDistance, Pomdp};
use proptest::prelude::*;

/// Joint law of `O_{1:T}` by summing over every state, action and node path.
fn path_sum(p: &Pomdp, fsc: &Fsc, horizon: usize) -> Vec<f64> {
    let no = p.n_observations();
    let mut out = vec![0.0; no.pow(horizon as u32)];
    #[allow(clippy::too_many_arguments)]
    fn go(p: &Pomdp, fsc: &Fsc, t: usize, horizon: usize, s: usize, node: usize, w: f64, index: usize, out: &mut [f64]) {
        if w == 0.0 {
            return;
        }
        if t == horizon {
            out[index] += w;
            return;
        }
        let no = p.n_observations();
        for (a, pa) in fsc.act(t, node).iter() {
            for s2 in 0..p.n_states() {
                let ps = p.p(a, s, s2);
                for o in 0..no {
                    let po = p.z(a, s2, o);
                    for (n2, pn) in fsc.next(t, node, o).iter() {
                        go(p, fsc, t + 1, horizon, s2, n2, w * pa * ps * po * pn, index * no + o, out);
                    }
                }
            }
        }
    }
    for (s, &b) in p.initial().iter().enumerate() {
        go(p, fsc, 0, horizon, s, 0, b, 0, &mut out);
    }
    out
}

/// Suffix law below `h` from the joint law: leaf masses under the prefix, normalized.
fn oracle_suffix(joint: &[f64], no: usize, horizon: usize, h: &[usize]) -> (f64, Option<Vec<f64>>) {
    let width = no.pow((horizon - h.len()) as u32);
    let start = h.iter().fold(0, |acc, &o| acc * no + o) * width;
    let block = &joint[start..start + width];
    let reach: f64 = block.iter().sum();
    (reach, (reach > 0.0).then(|| block.iter().map(|m| m / reach).collect()))
}

fn to_dist(masses: &[f64]) -> DiscreteDistribution {
    DiscreteDistribution::new(masses.iter().enumerate().filter(|(_, &m)| m > 0.0).map(|(k, &m)| (k as u64, m)).collect()).unwrap()
}

fn family(p: &Pomdp, kind: FamilyKind, m: usize, t: usize) -> ProbeFamily {
    enumerate_family(kind, m, p.n_actions(), p.n_observations(), t, DEFAULT_FAMILY_CAP).unwrap()
}

fn w1(p: &Pomdp) -> LawDistance {
    LawDistance::Wasserstein(p.metric().clone())
}

fn histories(no: usize, depth: usize) -> Vec<Vec<usize>> {
    (0..no.pow(depth as u32)).map(|mut k| {
        let mut h = vec![0; depth];
        for slot in h.iter_mut().rev() {
            *slot = k % no;
            k /= no;
        }
        h
    }).collect()
}

fn check_against_oracle(p: &Pomdp, fam: &ProbeFamily, t: usize) {
    let no = p.n_observations();
    let dist = w1(p);
    let cache = build_cache(p, p.name(), fam, t, &dist, CacheOptions::serial()).unwrap();
    for (pi, fsc) in fam.members().iter().enumerate() {
        let joint = path_sum(p, fsc, t);
        for d in 0..t {
            let hs = histories(no, d);
            let oracle: Vec<(f64, Option<Vec<f64>>)> = hs.iter().map(|h| oracle_suffix(&joint, no, t, h)).collect();
            for (h, (reach, law)) in hs.iter().zip(&oracle) {
                let got = suffix_law(p, fsc, h, t).unwrap();
                assert!((got.reach - reach).abs() <= 1e-12, "reach of {h:?}");
                match (&got.law, law) {
                    (Some(g), Some(o)) => {
                        for (k, &m) in o.iter().enumerate() {
                            assert!((g.mass(k as u64) - m).abs() <= 1e-12, "suffix of {h:?} at {k}");
                        }
                    }
                    (None, None) => {}
                    _ => panic!("reachability of {h:?} disagrees"),
                }
            }
            for i in 0..hs.len() {
                for j in i + 1..hs.len() {
                    let expected = match (&oracle[i].1, &oracle[j].1) {
                        (Some(a), Some(b)) => Some(dist.between(&to_dist(a), &to_dist(b), t - d).unwrap()),
                        _ => None,
                    };
                    match (cache.entry(d, i, j, pi), expected) {
                        (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-9, "entry d={d} ({i},{j}) p={pi}: {x} vs {y}"),
                        (None, None) => {}
                        (x, y) => panic!("entry d={d} ({i},{j}) p={pi}: {x:?} vs {y:?}"),
                    }
                }
            }
        }
    }
}

#[test]
fn tiger_cache_matches_path_enumeration() {
    let p = tiger_full(TIGER_ACCURACY).unwrap();
    check_against_oracle(&p, &family(&p, FamilyKind::Stationary, 1, 3), 3);
    check_against_oracle(&p, &family(&p, FamilyKind::ClockAware, 1, 2), 2);
}

#[test]
fn witness_cache_matches_path_enumeration() {
    let p = stationary_witness().unwrap();
    check_against_oracle(&p, &family(&p, FamilyKind::Stationary, 2, 2), 2);
}

#[test]
fn random_models_match_path_enumeration() {
    for seed in 0..4 {
        let p = random_pomdp(4, 2, seed, seed % 2 == 1).unwrap();
        check_against_oracle(&p, &family(&p, FamilyKind::Stationary, 2, 3), 3);
    }
}

fn tiger_cache(t: usize) -> DistanceCache {
    let p = tiger_full(TIGER_ACCURACY).unwrap();
    build_cache(&p, "tiger-full", &family(&p, FamilyKind::Stationary, 1, t), t, &w1(&p), CacheOptions::default()).unwrap()
}

#[test]
fn serial_and_parallel_builds_agree() {
    let p = random_pomdp(5, 3, 11, false).unwrap();
    let fam = family(&p, FamilyKind::Stationary, 1, 3);
    let a = build_cache(&p, "r", &fam, 3, &w1(&p), CacheOptions::serial()).unwrap();
    let b = build_cache(&p, "r", &fam, 3, &w1(&p), CacheOptions::default()).unwrap();
    assert_eq!(a.reach_mask(), b.reach_mask());
    for d in 0..3 {
        let (x, y) = (a.block(d), b.block(d));
        assert!(x.iter().zip(y).all(|(u, v)| u.to_bits() == v.to_bits()));
    }
}

#[test]
fn save_load_roundtrip_preserves_every_entry() {
    let cache = tiger_cache(3);
    let dir = tempfile::tempdir().unwrap();
    let path = save_cache(&cache, dir.path()).unwrap();
    assert!(path.with_extension("csv").exists());
    let back = load_cache(&path).unwrap();
    assert_eq!(back.meta(), cache.meta());
    assert_eq!(back.reach_mask(), cache.reach_mask());
    for d in 0..cache.horizon() {
        assert!(back.block(d).iter().zip(cache.block(d)).all(|(u, v)| u.to_bits() == v.to_bits()));
    }
}

#[test]
fn truncated_cache_file_is_rejected() {
    let cache = tiger_cache(2);
    let dir = tempfile::tempdir().unwrap();
    let path = save_cache(&cache, dir.path()).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    assert!(load_cache(&path).is_err());
    std::fs::write(&path, b"nonsense").unwrap();
    assert!(load_cache(&path).is_err());
}

#[test]
fn restriction_equals_subset_build() {
    let p = tiger_full(TIGER_ACCURACY).unwrap();
    let fam = family(&p, FamilyKind::Stationary, 2, 3);
    let full = build_cache(&p, "t", &fam, 3, &w1(&p), CacheOptions::default()).unwrap();
    let subset = [5, 0, 17, 42];
    let restricted = full.restrict(&subset).unwrap();
    let direct = build_cache(&p, "t", &fam.subset(&subset).unwrap(), 3, &w1(&p), CacheOptions::default()).unwrap();
    assert_eq!(restricted.reach_mask(), direct.reach_mask());
    for d in 0..3 {
        assert!(restricted.block(d).iter().zip(direct.block(d)).all(|(u, v)| u.to_bits() == v.to_bits()));
    }
}

#[test]
fn mismatched_metric_is_rejected() {
    let p = tiger_full(TIGER_ACCURACY).unwrap();
    let fam = family(&p, FamilyKind::Stationary, 1, 2);
    let wrong = LawDistance::Wasserstein(boundq::GroundMetric::discrete(5));
    assert!(build_cache(&p, "t", &fam, 2, &wrong, CacheOptions::default()).is_err());
    assert!(build_cache(&p, "t", &fam, 3, &w1(&p), CacheOptions::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Per probe, distances among reachable histories form a pseudometric.
    #[test]
    fn per_probe_distances_are_pseudometric(seed in 0u64..1000, n_states in 2usize..5) {
        let p = random_pomdp(n_states, 2, seed, false).unwrap();
        let fam = family(&p, FamilyKind::Stationary, 1, 3);
        let c = build_cache(&p, "r", &fam, 3, &w1(&p), CacheOptions::serial()).unwrap();
        for d in 0..3 {
            let n = c.tree().layer_size(d);
            for pi in 0..c.n_probes() {
                for i in 0..n {
                    for j in 0..n {
                        prop_assert_eq!(c.entry(d, i, j, pi), c.entry(d, j, i, pi));
                        for k in 0..n {
                            if let (Some(ij), Some(jk), Some(ik)) = (c.entry(d, i, j, pi), c.entry(d, j, k, pi), c.entry(d, i, k, pi)) {
                                prop_assert!(ik <= ij + jk + 1e-9);
                            }
                        }
                    }
                }
            }
        }
    }

    /// A probe subset never sees more than the full family, and δ_S is non-increasing in the subset.
    #[test]
    fn subset_envelope_is_dominated(seed in 0u64..1000, picks in prop::collection::btree_set(0usize..9, 1..9)) {
        let p = random_pomdp(3, 2, seed, false).unwrap();
        let fam = family(&p, FamilyKind::Stationary, 2, 2);
        let c = build_cache(&p, "r", &fam, 2, &w1(&p), CacheOptions::serial()).unwrap();
        let subset: Vec<usize> = picks.into_iter().collect();
        let full = envelope(&c, None).unwrap();
        let sub = envelope(&c, Some(&subset)).unwrap();
        prop_assert!(sub.max() <= full.max() + 1e-12);
        let d1 = delta_s(&c, &subset).unwrap();
        let mut larger = subset.clone();
        larger.push(c.n_probes() - 1);
        prop_assert!(delta_s(&c, &larger).unwrap() <= d1 + 1e-12);
        prop_assert!(d1 >= 0.0);
    }

    /// W1 under the discrete ground metric equals sequence TV, which bounds it under any metric of diameter 1.
    #[test]
    fn tv_dominates_w1_with_unit_diameter(seed in 0u64..1000) {
        let p = random_pomdp(3, 3, seed, true).unwrap();
        let fam = family(&p, FamilyKind::Stationary, 1, 2);
        let tv = build_cache(&p, "r", &fam, 2, &LawDistance::TotalVariation, CacheOptions::serial()).unwrap();
        let wd = build_cache(&p, "r", &fam, 2, &w1(&p), CacheOptions::serial()).unwrap();
        let line = build_cache(&p, "r", &fam, 2, &LawDistance::Wasserstein(boundq::GroundMetric::line(3, 0.5).unwrap()), CacheOptions::serial()).unwrap();
        // Sequence costs add over positions, so W1 ≤ (T − t) · TV at depth t.
        for d in 0..2 {
            let len = (2 - d) as f64;
            for (k, (&t, (&w, &l))) in tv.block(d).iter().zip(wd.block(d).iter().zip(line.block(d))).enumerate() {
                if t.is_nan() {
                    continue;
                }
                prop_assert!(w <= len * t + 1e-9, "depth {d} entry {k}");
                prop_assert!(l <= len * t + 1e-9, "depth {d} entry {k}");
                prop_assert!(t <= w + 1e-9, "discrete W1 dominates TV at depth {d} entry {k}");
            }
        }
    }
}
