//! Probability bounds for incomparable clique-induced tangles in similarity
//! graphs built from Gaussian-mixture samples, with Monte Carlo and
//! brute-force cross-checks.

pub mod bounds;
pub mod error;
pub mod graph;
pub mod mixture;
pub mod montecarlo;
pub mod numeric;
pub mod regions;
pub mod tangle_oracle;

pub use error::{Error, Result};
pub use graph::{WeightModel, WeightedGraph};
pub use mixture::{Dataset, HiddenLabeling, MixtureSpec, Ratio, Which};
pub use regions::{MeasureResult, NumericOptions, Region};
