//! Greedy controller-subset selection on the coverage objective, plus spectral
//! diagnostics (effective rank of the distance tensor, open-loop Hankel rank).

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Pomdp;
use crate::pseudometric::DistanceCache;

/// Greedy selection trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSelection {
    /// Chosen probe indices in selection order.
    pub chosen: Vec<usize>,
    /// Marginal gain of each pick.
    pub gains: Vec<f64>,
    /// `f(S_t)` after each pick.
    pub coverage: Vec<f64>,
    /// `δ_{S_t}` after each pick.
    pub delta_s: Vec<f64>,
}

impl SubsetSelection {
    /// Final `δ_S`.
    pub fn final_delta_s(&self) -> f64 {
        self.delta_s.last().copied().unwrap_or(0.0)
    }
}

/// Pair-major rows of every stored depth, with skipped entries as 0.
fn entries(cache: &DistanceCache) -> (usize, Vec<f64>) {
    let np = cache.n_probes();
    let mut flat = Vec::new();
    for d in 0..cache.horizon() {
        flat.extend(cache.block(d).iter().map(|&v| if v.is_nan() { 0.0 } else { v }));
    }
    (np, flat)
}

/// `f(S) = Σ_u max_{p ∈ S} D(u, p)`; the empty set has coverage 0.
pub fn coverage(cache: &DistanceCache, subset: &[usize]) -> Result<f64> {
    let (np, flat) = entries(cache);
    if let Some(&p) = subset.iter().find(|&&p| p >= np) {
        return Err(Error::InvalidConfig(format!("probe index {p} out of range")));
    }
    Ok(flat.chunks(np.max(1)).map(|row| subset.iter().map(|&p| row[p]).fold(0.0, f64::max)).sum())
}

/// Greedy maximization of [`coverage`]: each step adds the probe with the largest marginal
/// gain, ties going to the lowest index.
pub fn greedy_select(cache: &DistanceCache, k: usize) -> Result<SubsetSelection> {
    let (np, flat) = entries(cache);
    if k == 0 || k > np {
        return Err(Error::InvalidConfig(format!("k = {k} outside [1, {np}]")));
    }
    let rows: Vec<&[f64]> = flat.chunks(np).collect();
    let full: Vec<f64> = rows.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).collect();
    let mut current = vec![0.0; rows.len()];
    let mut taken = vec![false; np];
    let mut out = SubsetSelection { chosen: Vec::new(), gains: Vec::new(), coverage: Vec::new(), delta_s: Vec::new() };
    let mut total = 0.0;
    for _ in 0..k {
        let mut best: Option<(f64, usize)> = None;
        for p in (0..np).filter(|&p| !taken[p]) {
            let gain: f64 = rows.iter().zip(&current).map(|(r, &c)| (r[p] - c).max(0.0)).sum();
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, p));
            }
        }
        let (gain, p) = best.expect("k ≤ family size");
        taken[p] = true;
        for (c, r) in current.iter_mut().zip(&rows) {
            *c = c.max(r[p]);
        }
        total += gain;
        out.chosen.push(p);
        out.gains.push(gain);
        out.coverage.push(total);
        out.delta_s.push(full.iter().zip(&current).map(|(f, c)| f - c).fold(0.0, f64::max));
    }
    Ok(out)
}

/// Eigenvalues of the Gram matrix of `m` (the squared singular values), descending.
fn squared_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let gram = if m.nrows() <= m.ncols() { m * m.transpose() } else { m.transpose() * m };
    let mut ev: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().map(|&x| x.max(0.0)).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Smallest `r` with `Σ_{i≤r} σ_i² ≥ fraction·Σ σ_i²` for the pair×probe matrix of one
/// depth, or of all depths stacked when `depth` is `None`.
pub fn effective_rank(cache: &DistanceCache, fraction: f64, depth: Option<usize>) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!("variance fraction {fraction} outside (0, 1]")));
    }
    let np = cache.n_probes();
    let depths: Vec<usize> = match depth {
        Some(d) if d < cache.horizon() => vec![d],
        Some(d) => return Err(Error::InvalidConfig(format!("depth {d} has no stored pairs"))),
        None => (0..cache.horizon()).collect(),
    };
    let data: Vec<f64> = depths.iter().flat_map(|&d| cache.block(d).iter().map(|&v| if v.is_nan() { 0.0 } else { v })).collect();
    let rows = data.len() / np.max(1);
    if rows == 0 || np == 0 {
        return Err(Error::InvalidConfig("empty distance matrix".into()));
    }
    let m = DMatrix::from_row_slice(rows, np, &data);
    let ev = squared_singular_values(&m);
    let total: f64 = ev.iter().sum();
    if total == 0.0 {
        return Ok(0);
    }
    let mut acc = 0.0;
    for (r, &v) in ev.iter().enumerate() {
        acc += v;
        if acc >= fraction * total - 1e-12 * total {
            return Ok(r + 1);
        }
    }
    Ok(ev.len())
}

/// Open-loop Hankel matrix: rows are `(action prefix, observation prefix)` of depth `d < T`
/// with positive probability; columns are tests `(action sequence, observation suffix)` of
/// length `1..=T`; entries are `P(suffix | prefix, actions)`. Rows are linear in the prefix
/// belief, so the rank is at most `|S|`.
pub fn hankel_matrix(pomdp: &Pomdp, horizon: usize) -> Result<DMatrix<f64>> {
    if horizon < 2 {
        return Err(Error::InvalidConfig("Hankel rank requires T ≥ 2".into()));
    }
    let (na, no) = (pomdp.n_actions(), pomdp.n_observations());
    let mut tests: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for len in 1..=horizon {
        let (ca, co) = ((na as u64).pow(len as u32), (no as u64).pow(len as u32));
        if ca * co * (len as u64) > 5_000_000 {
            return Err(Error::SizeGuard {
                what: "Hankel test columns".into(),
                requested: (ca * co) as u128,
                cap: 5_000_000,
                hint: "use a shorter horizon".into(),
            });
        }
        for ai in 0..ca {
            for oi in 0..co {
                tests.push((decode(ai, na, len), decode(oi, no, len)));
            }
        }
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut layer: Vec<Vec<f64>> = vec![pomdp.initial().to_vec()];
    for d in 0..horizon {
        for b in &layer {
            rows.push(tests.iter().map(|(acts, obs)| sequence_prob(pomdp, b, acts, obs)).collect());
        }
        if d + 1 == horizon {
            break;
        }
        let mut next = Vec::new();
        for b in &layer {
            for a in 0..na {
                for z in 0..no {
                    let mut out = vec![0.0; pomdp.n_states()];
                    let mass = pomdp.filter_unnormalized(b, a, z, &mut out);
                    if mass > 0.0 {
                        out.iter_mut().for_each(|x| *x /= mass);
                        next.push(out);
                    }
                }
            }
        }
        if rows.len() + next.len() > HANKEL_ROW_CAP {
            return Err(Error::SizeGuard {
                what: "Hankel prefix rows".into(),
                requested: (rows.len() + next.len()) as u128,
                cap: HANKEL_ROW_CAP as u128,
                hint: "use a shorter horizon".into(),
            });
        }
        layer = next;
    }
    let data: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), tests.len(), &data))
}

fn decode(mut index: u64, radix: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for k in (0..len).rev() {
        out[k] = (index % radix as u64) as usize;
        index /= radix as u64;
    }
    out
}

fn sequence_prob(pomdp: &Pomdp, belief: &[f64], actions: &[usize], obs: &[usize]) -> f64 {
    let mut b = belief.to_vec();
    let mut out = vec![0.0; b.len()];
    for (&a, &o) in actions.iter().zip(obs) {
        pomdp.filter_unnormalized(&b, a, o, &mut out);
        std::mem::swap(&mut b, &mut out);
    }
    b.iter().sum()
}

/// Numerical rank of [`hankel_matrix`]: singular values above `tolerance·σ_max`.
pub fn hankel_rank(pomdp: &Pomdp, horizon: usize, tolerance: f64) -> Result<usize> {
    let h = hankel_matrix(pomdp, horizon)?;
    // Singular values directly: squaring through the Gram matrix would lift roundoff above tolerance.
    let sv = h.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    Ok(sv.iter().filter(|&&v| v > tolerance * smax).count())
}

/// Maximum number of prefix rows in [`hankel_matrix`].
pub const HANKEL_ROW_CAP: usize = 20_000;

/// Default relative tolerance for [`hankel_rank`].
pub const HANKEL_TOL: f64 = 1e-8;
