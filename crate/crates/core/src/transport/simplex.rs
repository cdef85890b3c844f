//! Exact discrete optimal transport by the transportation simplex method.
//!
//! The basis is a spanning tree of the bipartite support graph; potentials are
//! recomputed from the tree at every pivot and the entering arc is chosen by most
//! negative reduced cost, switching to Bland's rule after a run of degenerate pivots.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Relative pivot tolerance on reduced costs.
const PIVOT_TOL: f64 = 1e-12;
/// Marginal mismatch accepted before a problem is rejected.
const MARGINAL_TOL: f64 = 1e-9;
/// Degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_RUN: usize = 50;

/// Optimal coupling returned by [`solve_transport`].
#[derive(Debug, Clone)]
pub struct TransportPlan {
    /// Optimal transport cost.
    pub cost: f64,
    /// Positive-flow cells `(row, column, mass)` in the caller's indexing.
    pub flows: Vec<(usize, usize, f64)>,
}

/// Exact `W1` between `p` and `q` under the row-major cost matrix `cost` (`p.len() × q.len()`).
pub fn w1_exact(p: &[f64], q: &[f64], cost: &[f64]) -> Result<f64> {
    solve_transport(p, q, cost).map(|plan| plan.cost)
}

/// Solve the balanced transportation problem with marginals `p`, `q`.
pub fn solve_transport(p: &[f64], q: &[f64], cost: &[f64]) -> Result<TransportPlan> {
    validate(p, q, cost)?;
    let full_m = q.len();
    let rows: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    let cols: Vec<usize> = (0..q.len()).filter(|&j| q[j] > 0.0).collect();
    if rows.is_empty() || cols.is_empty() {
        return Ok(TransportPlan { cost: 0.0, flows: Vec::new() });
    }
    let n = rows.len();
    let m = cols.len();
    let c: Vec<f64> = rows
        .iter()
        .flat_map(|&i| cols.iter().map(move |&j| cost[i * full_m + j]))
        .collect();
    let supply: Vec<f64> = rows.iter().map(|&i| p[i]).collect();
    let demand: Vec<f64> = cols.iter().map(|&j| q[j]).collect();

    let mut tableau = Tableau::northwest(n, m, &supply, &demand);
    tableau.optimize(&c)?;

    let mut total = 0.0;
    let mut flows = Vec::new();
    for (cell, &x) in tableau.flow.iter().enumerate() {
        if tableau.basic[cell] && x > 0.0 {
            total += x * c[cell];
            flows.push((rows[cell / m], cols[cell % m], x));
        }
    }
    Ok(TransportPlan { cost: total, flows })
}

fn validate(p: &[f64], q: &[f64], cost: &[f64]) -> Result<()> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::InvalidMarginals("empty support".into()));
    }
    if cost.len() != p.len() * q.len() {
        return Err(Error::DimensionMismatch(format!(
            "cost has {} entries for a {}×{} problem",
            cost.len(),
            p.len(),
            q.len()
        )));
    }
    for (name, v) in [("p", p), ("q", q)] {
        if let Some(x) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidMarginals(format!("{name} has entry {x}")));
        }
    }
    if let Some(x) = cost.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidMarginals(format!("cost has entry {x}")));
    }
    let (sp, sq) = (p.iter().sum::<f64>(), q.iter().sum::<f64>());
    if (sp - sq).abs() > MARGINAL_TOL * sp.max(sq).max(1.0) {
        return Err(Error::InvalidMarginals(format!("total masses differ: {sp} vs {sq}")));
    }
    Ok(())
}

struct Tableau {
    n: usize,
    m: usize,
    flow: Vec<f64>,
    basic: Vec<bool>,
}

impl Tableau {
    /// North-west corner basis with exactly `n + m − 1` basic cells.
    fn northwest(n: usize, m: usize, supply: &[f64], demand: &[f64]) -> Self {
        let mut s = supply.to_vec();
        let mut d = demand.to_vec();
        let mut flow = vec![0.0; n * m];
        let mut basic = vec![false; n * m];
        let (mut i, mut j) = (0, 0);
        loop {
            let x = s[i].min(d[j]);
            flow[i * m + j] = x;
            basic[i * m + j] = true;
            s[i] -= x;
            d[j] -= x;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if i == n - 1 {
                j += 1;
            } else if j == m - 1 || s[i] <= d[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { n, m, flow, basic }
    }

    fn optimize(&mut self, c: &[f64]) -> Result<()> {
        let scale = 1.0 + c.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        let tol = PIVOT_TOL * scale;
        let max_iter = 10_000 + 50 * self.n * self.m;
        let mut degenerate = 0;
        let mut bland = false;
        let mut u = vec![0.0; self.n];
        let mut v = vec![0.0; self.m];
        for _ in 0..max_iter {
            self.potentials(c, &mut u, &mut v);
            let Some(enter) = self.entering(c, &u, &v, tol, bland) else {
                return Ok(());
            };
            let theta = self.pivot(enter);
            if theta <= 0.0 {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
        }
        Err(Error::InvalidMarginals(format!(
            "transportation simplex did not converge on a {}×{} problem",
            self.n, self.m
        )))
    }

    fn adjacency(&self) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let mut row_adj = vec![Vec::new(); self.n];
        let mut col_adj = vec![Vec::new(); self.m];
        for (cell, &b) in self.basic.iter().enumerate() {
            if b {
                row_adj[cell / self.m].push(cell % self.m);
                col_adj[cell % self.m].push(cell / self.m);
            }
        }
        (row_adj, col_adj)
    }

    fn potentials(&self, c: &[f64], u: &mut [f64], v: &mut [f64]) {
        let (row_adj, col_adj) = self.adjacency();
        let mut row_set = vec![false; self.n];
        let mut col_set = vec![false; self.m];
        let mut queue = VecDeque::new();
        u[0] = 0.0;
        row_set[0] = true;
        queue.push_back((true, 0usize));
        while let Some((is_row, k)) = queue.pop_front() {
            if is_row {
                for &j in &row_adj[k] {
                    if !col_set[j] {
                        v[j] = c[k * self.m + j] - u[k];
                        col_set[j] = true;
                        queue.push_back((false, j));
                    }
                }
            } else {
                for &i in &col_adj[k] {
                    if !row_set[i] {
                        u[i] = c[i * self.m + k] - v[k];
                        row_set[i] = true;
                        queue.push_back((true, i));
                    }
                }
            }
        }
    }

    #[allow(clippy::needless_range_loop)]
    fn entering(&self, c: &[f64], u: &[f64], v: &[f64], tol: f64, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.n {
            for j in 0..self.m {
                let cell = i * self.m + j;
                if self.basic[cell] {
                    continue;
                }
                let rc = c[cell] - u[i] - v[j];
                if rc < -tol {
                    if bland {
                        return Some(cell);
                    }
                    if best.is_none_or(|(_, b)| rc < b) {
                        best = Some((cell, rc));
                    }
                }
            }
        }
        best.map(|(cell, _)| cell)
    }

    /// Pivot `enter` into the basis; returns the step length θ.
    fn pivot(&mut self, enter: usize) -> f64 {
        let (ei, ej) = (enter / self.m, enter % self.m);
        let (row_adj, col_adj) = self.adjacency();
        // Tree nodes: rows 0..n, columns n..n+m. Search from column ej to row ei.
        let total = self.n + self.m;
        let mut parent: Vec<Option<usize>> = vec![None; total];
        let mut seen = vec![false; total];
        let start = self.n + ej;
        let goal = ei;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            if node == goal {
                break;
            }
            let next: Vec<usize> = if node < self.n {
                row_adj[node].iter().map(|&j| self.n + j).collect()
            } else {
                col_adj[node - self.n].clone()
            };
            for nb in next {
                if !seen[nb] {
                    seen[nb] = true;
                    parent[nb] = Some(node);
                    queue.push_back(nb);
                }
            }
        }
        // Walk back from the goal row to the start column, collecting cells.
        let mut path = Vec::new();
        let mut node = goal;
        while node != start {
            let prev = parent[node].expect("basis is a spanning tree");
            let cell = if node < self.n {
                node * self.m + (prev - self.n)
            } else {
                prev * self.m + (node - self.n)
            };
            path.push(cell);
            node = prev;
        }
        // path runs from row ei toward column ej; the edge at ei gets −, alternating.
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (k, &cell) in path.iter().enumerate() {
            if k % 2 == 0 {
                let x = self.flow[cell];
                if x < theta || (x == theta && cell < leave) {
                    theta = x;
                    leave = cell;
                }
            }
        }
        for (k, &cell) in path.iter().enumerate() {
            if k % 2 == 0 {
                self.flow[cell] -= theta;
            } else {
                self.flow[cell] += theta;
            }
        }
        self.flow[enter] = theta;
        self.basic[enter] = true;
        self.basic[leave] = false;
        self.flow[leave] = 0.0;
        theta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_marginals_cost_zero() {
        let p = [0.2, 0.3, 0.5];
        let cost = [0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0];
        assert!(w1_exact(&p, &p, &cost).unwrap().abs() < 1e-15);
    }

    #[test]
    fn two_point_discrete() {
        let p = [0.745, 0.255];
        let q = [0.255, 0.745];
        let cost = [0.0, 1.0, 1.0, 0.0];
        assert!((w1_exact(&p, &q, &cost).unwrap() - 0.49).abs() < 1e-12);
    }

    #[test]
    fn rejects_unbalanced() {
        assert!(w1_exact(&[0.5, 0.5], &[0.9], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn zero_mass_entries_are_ignored() {
        let p = [0.0, 1.0];
        let q = [1.0, 0.0];
        let cost = [0.0, 5.0, 3.0, 0.0];
        assert!((w1_exact(&p, &q, &cost).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn plan_marginals_match() {
        let p = [0.1, 0.4, 0.2, 0.3];
        let q = [0.25, 0.25, 0.5];
        let cost: Vec<f64> = (0..12).map(|k| ((k * 7) % 5) as f64).collect();
        let plan = solve_transport(&p, &q, &cost).unwrap();
        let mut rows = [0.0; 4];
        let mut cols = [0.0; 3];
        for &(i, j, x) in &plan.flows {
            rows[i] += x;
            cols[j] += x;
        }
        for i in 0..4 {
            assert!((rows[i] - p[i]).abs() < 1e-12);
        }
        for j in 0..3 {
            assert!((cols[j] - q[j]).abs() < 1e-12);
        }
    }
}
