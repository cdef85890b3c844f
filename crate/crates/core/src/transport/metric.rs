//! Ground metrics on observation alphabets and their additive extension to sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const AXIOM_TOL: f64 = 1e-12;

/// Shape of a ground metric, kept for artifact identifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MetricKind {
    /// 0 on the diagonal, 1 elsewhere.
    Discrete,
    /// `scale · |o − o'|` on integer-labelled observations.
    Line { scale: f64 },
    /// Taxicab distance on the 2×2 quadrant lattice NW, NE, SW, SE, halved.
    GridQuadrant,
    /// Arbitrary validated matrix.
    Custom,
}

/// A pseudometric on a finite observation alphabet, stored as a dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundMetric {
    kind: MetricKind,
    n: usize,
    cost: Vec<f64>,
}

impl GroundMetric {
    /// Discrete metric on `n` symbols.
    pub fn discrete(n: usize) -> Self {
        let mut cost = vec![1.0; n * n];
        for i in 0..n {
            cost[i * n + i] = 0.0;
        }
        Self { kind: MetricKind::Discrete, n, cost }
    }

    /// Line metric `scale · |i − j|` on `n` symbols.
    pub fn line(n: usize, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::InvalidMetric(format!("line scale {scale} must be finite and ≥ 0")));
        }
        let mut cost = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                cost[i * n + j] = scale * (i as f64 - j as f64).abs();
            }
        }
        Ok(Self { kind: MetricKind::Line { scale }, n, cost })
    }

    /// Quadrant metric on NW, NE, SW, SE: adjacent quadrants 0.5 apart, diagonal ones 1.
    pub fn grid_quadrant() -> Self {
        let pos = [(0i32, 0i32), (0, 1), (1, 0), (1, 1)];
        let mut cost = vec![0.0; 16];
        for (i, a) in pos.iter().enumerate() {
            for (j, b) in pos.iter().enumerate() {
                cost[i * 4 + j] = ((a.0 - b.0).abs() + (a.1 - b.1).abs()) as f64 / 2.0;
            }
        }
        Self { kind: MetricKind::GridQuadrant, n: 4, cost }
    }

    /// Validated custom metric from a row-major `n × n` matrix.
    pub fn custom(n: usize, cost: Vec<f64>) -> Result<Self> {
        let metric = Self { kind: MetricKind::Custom, n, cost };
        metric.validate()?;
        Ok(metric)
    }

    /// Check symmetry, zero diagonal, non-negativity, and the triangle inequality.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if self.cost.len() != n * n {
            return Err(Error::InvalidMetric(format!("expected {} entries, got {}", n * n, self.cost.len())));
        }
        for i in 0..n {
            if self.d(i, i).abs() > AXIOM_TOL {
                return Err(Error::InvalidMetric(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let dij = self.d(i, j);
                if !dij.is_finite() || dij < -AXIOM_TOL {
                    return Err(Error::InvalidMetric(format!("entry ({i},{j}) = {dij}")));
                }
                if (dij - self.d(j, i)).abs() > AXIOM_TOL {
                    return Err(Error::InvalidMetric(format!("asymmetric at ({i},{j})")));
                }
                for k in 0..n {
                    if dij > self.d(i, k) + self.d(k, j) + AXIOM_TOL {
                        return Err(Error::InvalidMetric(format!("triangle inequality fails at ({i},{k},{j})")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Alphabet size.
    pub fn size(&self) -> usize {
        self.n
    }

    /// Metric shape.
    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    /// Distance between two symbols.
    #[inline]
    pub fn d(&self, a: usize, b: usize) -> f64 {
        self.cost[a * self.n + b]
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        self.cost.iter().copied().fold(0.0, f64::max)
    }

    /// Stable identifier used in artifact headers.
    pub fn id(&self) -> String {
        match &self.kind {
            MetricKind::Discrete => format!("discrete/{}", self.n),
            MetricKind::Line { scale } => format!("line/{}/{scale}", self.n),
            MetricKind::GridQuadrant => "quadrant/4".to_string(),
            MetricKind::Custom => {
                let body: Vec<String> = self.cost.iter().map(|c| format!("{c}")).collect();
                format!("custom/{}/{}", self.n, body.join(","))
            }
        }
    }

    /// Additive sequence cost `Σ_t d(x_t, y_t)`.
    pub fn sequence_cost(&self, x: &[usize], y: &[usize]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "sequence lengths {} and {} differ",
                x.len(),
                y.len()
            )));
        }
        Ok(x.iter().zip(y).map(|(&a, &b)| self.d(a, b)).sum())
    }

    /// Additive cost between two sequences of length `len` given by base-|O| indices
    /// (first symbol most significant).
    #[inline]
    pub fn indexed_sequence_cost(&self, mut x: u64, mut y: u64, len: usize) -> f64 {
        let n = self.n as u64;
        let mut total = 0.0;
        for _ in 0..len {
            total += self.d((x % n) as usize, (y % n) as usize);
            x /= n;
            y /= n;
        }
        total
    }
}
