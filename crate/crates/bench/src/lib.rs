//! Shared fixtures for the criterion benches.

use boundq::probes::{enumerate_family, DEFAULT_FAMILY_CAP};
use boundq::{BenchmarkSpec, FamilyKind, LawDistance, Pomdp, ProbeFamily};

/// Benchmark model from its spec string.
pub fn model(spec: &str) -> Pomdp {
    spec.parse::<BenchmarkSpec>().and_then(|s| s.build()).expect("valid benchmark spec")
}

/// Full family of `kind` with `m` nodes at horizon `horizon`.
pub fn family(pomdp: &Pomdp, kind: FamilyKind, m: usize, horizon: usize) -> ProbeFamily {
    enumerate_family(kind, m, pomdp.n_actions(), pomdp.n_observations(), horizon, DEFAULT_FAMILY_CAP).expect("family within cap")
}

/// `W1` under the model's ground metric.
pub fn w1(pomdp: &Pomdp) -> LawDistance {
    LawDistance::Wasserstein(pomdp.metric().clone())
}

/// Deterministic pair of distributions on `n` points with a line cost matrix.
pub fn transport_instance(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let normalize = |v: Vec<f64>| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect::<Vec<_>>()
    };
    let p = normalize((0..n).map(|i| ((i * 7) % 11 + 1) as f64).collect());
    let q = normalize((0..n).map(|i| ((i * 5) % 13 + 1) as f64).collect());
    let cost = (0..n * n).map(|k| (k / n).abs_diff(k % n) as f64).collect();
    (p, q, cost)
}
