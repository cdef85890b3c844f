//! Optimal transport: metric properties, closed forms, and plan feasibility.

use boundq::transport::{solve_transport, total_variation, w1_exact, w1_sequences, DiscreteDistribution, GroundMetric};
use proptest::prelude::*;

fn normalize(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|w| normalize(&w))
}

/// Sparse weights: some entries forced to zero, at least one positive.
fn sparse_weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(0.0f64..1.0, n), prop::collection::vec(any::<bool>(), n)).prop_map(|(w, keep)| {
        let mut v: Vec<f64> = w.iter().zip(&keep).map(|(&x, &k)| if k { x + 0.01 } else { 0.0 }).collect();
        if v.iter().all(|&x| x == 0.0) {
            v[0] = 1.0;
        }
        normalize(&v)
    })
}

fn points(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
}

fn euclid(x: &[(f64, f64)], y: &[(f64, f64)]) -> Vec<f64> {
    x.iter().flat_map(|a| y.iter().map(move |b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())).collect()
}

/// `W1` on the line as `∫ |F_p − F_q|`, computed on the merged sorted support.
fn line_w1(xp: &[f64], p: &[f64], xq: &[f64], q: &[f64]) -> f64 {
    let mut events: Vec<(f64, f64)> = xp.iter().zip(p).map(|(&x, &m)| (x, m)).chain(xq.iter().zip(q).map(|(&x, &m)| (x, -m))).collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    let mut diff = 0.0;
    for w in events.windows(2) {
        diff += w[0].1;
        acc += diff.abs() * (w[1].0 - w[0].0);
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn w1_is_symmetric((p, q, xs) in (2usize..7).prop_flat_map(|n| (weights(n), weights(n), points(n)))) {
        let c = euclid(&xs, &xs);
        let a = w1_exact(&p, &q, &c).unwrap();
        let b = w1_exact(&q, &p, &c).unwrap();
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn w1_vanishes_on_identical_marginals((p, xs) in (1usize..8).prop_flat_map(|n| (sparse_weights(n), points(n)))) {
        let c = euclid(&xs, &xs);
        prop_assert!(w1_exact(&p, &p, &c).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn w1_triangle_inequality((p, q, r, xs) in (2usize..7).prop_flat_map(|n| (weights(n), weights(n), weights(n), points(n)))) {
        let c = euclid(&xs, &xs);
        let pq = w1_exact(&p, &q, &c).unwrap();
        let qr = w1_exact(&q, &r, &c).unwrap();
        let pr = w1_exact(&p, &r, &c).unwrap();
        prop_assert!(pr <= pq + qr + 1e-9);
    }

    #[test]
    fn discrete_metric_gives_total_variation((p, q) in (1usize..9).prop_flat_map(|n| (sparse_weights(n), sparse_weights(n)))) {
        let n = p.len();
        let metric = GroundMetric::discrete(n);
        let cost: Vec<f64> = (0..n * n).map(|k| metric.d(k / n, k % n)).collect();
        let tv = 0.5 * p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>();
        prop_assert!((w1_exact(&p, &q, &cost).unwrap() - tv).abs() <= 1e-9);
    }

    #[test]
    fn line_metric_matches_cdf_formula(
        (p, q, xp, xq) in (1usize..8, 1usize..8).prop_flat_map(|(n, m)| (
            sparse_weights(n), sparse_weights(m), prop::collection::vec(-5.0f64..5.0, n), prop::collection::vec(-5.0f64..5.0, m)))
    ) {
        let cost: Vec<f64> = xp.iter().flat_map(|a| xq.iter().map(move |b| (a - b).abs())).collect();
        let w = w1_exact(&p, &q, &cost).unwrap();
        prop_assert!((w - line_w1(&xp, &p, &xq, &q)).abs() <= 1e-9, "{w} vs {}", line_w1(&xp, &p, &xq, &q));
    }

    #[test]
    fn plan_is_feasible_and_attains_cost(
        (p, q, xs, ys) in (1usize..8, 1usize..8).prop_flat_map(|(n, m)| (sparse_weights(n), sparse_weights(m), points(n), points(m)))
    ) {
        let c = euclid(&xs, &ys);
        let plan = solve_transport(&p, &q, &c).unwrap();
        let (mut rows, mut cols) = (vec![0.0; p.len()], vec![0.0; q.len()]);
        let mut cost = 0.0;
        for &(i, j, x) in &plan.flows {
            prop_assert!(x > 0.0);
            rows[i] += x;
            cols[j] += x;
            cost += x * c[i * q.len() + j];
        }
        for (a, b) in rows.iter().zip(&p).chain(cols.iter().zip(&q)) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        prop_assert!((cost - plan.cost).abs() <= 1e-9);
    }

    #[test]
    fn w1_sandwiched_by_mean_shift_and_diameter((p, q, xs) in (2usize..7).prop_flat_map(|n| (weights(n), weights(n), points(n)))) {
        let c = euclid(&xs, &xs);
        let w = w1_exact(&p, &q, &c).unwrap();
        let shift = |k: fn(&(f64, f64)) -> f64| xs.iter().zip(p.iter().zip(&q)).map(|(x, (a, b))| k(x) * (a - b)).sum::<f64>();
        let mean = (shift(|x| x.0).powi(2) + shift(|x| x.1).powi(2)).sqrt();
        let diam = c.iter().copied().fold(0.0, f64::max);
        let tv = 0.5 * p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>();
        prop_assert!(mean <= w + 1e-9);
        prop_assert!(w <= diam * tv + 1e-9);
    }

    #[test]
    fn sequence_w1_on_single_symbols_equals_ground_distance(a in 0usize..4, b in 0usize..4, len in 1usize..4) {
        let metric = GroundMetric::grid_quadrant();
        let index = |s: usize| (0..len).fold(0u64, |acc, _| acc * 4 + s as u64);
        let w = w1_sequences(&DiscreteDistribution::point(index(a)), &DiscreteDistribution::point(index(b)), len, &metric).unwrap();
        prop_assert!((w - len as f64 * metric.d(a, b)).abs() <= 1e-12);
    }

    #[test]
    fn total_variation_agrees_with_dense_formula((p, q) in (1usize..9).prop_flat_map(|n| (sparse_weights(n), sparse_weights(n)))) {
        let to_dist = |w: &[f64]| DiscreteDistribution::new(w.iter().enumerate().filter(|(_, &m)| m > 0.0).map(|(k, &m)| (k as u64, m)).collect()).unwrap();
        let dense = 0.5 * p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>();
        prop_assert!((total_variation(&to_dist(&p), &to_dist(&q)) - dense).abs() <= 1e-12);
    }
}

#[test]
fn rejects_unbalanced_marginals() {
    assert!(w1_exact(&[0.5, 0.5], &[0.7, 0.7], &[0.0, 1.0, 1.0, 0.0]).is_err());
    assert!(w1_exact(&[1.0], &[1.0], &[0.0, 1.0]).is_err());
}

#[test]
fn custom_metric_rejects_triangle_violation() {
    assert!(GroundMetric::custom(3, vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0]).is_err());
    assert!(GroundMetric::custom(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
}

#[test]
fn two_point_shift_on_grid() {
    // Half the mass moves from NW to SE (diagonal, cost 1): W1 = 0.5.
    let metric = GroundMetric::grid_quadrant();
    let p = DiscreteDistribution::new(vec![(0, 1.0)]).unwrap();
    let q = DiscreteDistribution::new(vec![(0, 0.5), (3, 0.5)]).unwrap();
    assert!((w1_sequences(&p, &q, 1, &metric).unwrap() - 0.5).abs() <= 1e-12);
}
