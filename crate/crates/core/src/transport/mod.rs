//! Ground metrics, sequence costs, and exact 1-Wasserstein distances.

mod distribution;
mod metric;
mod simplex;

pub use distribution::{total_variation, w1_sequences, DiscreteDistribution, LawDistance, MASS_TOL};
pub use metric::{GroundMetric, MetricKind};
pub use simplex::{solve_transport, w1_exact, TransportPlan};
