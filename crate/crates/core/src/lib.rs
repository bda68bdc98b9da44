//! Extremal dependence modelling for multivariate return series.
//!
//! The crate covers the whole peaks-over-threshold workflow:
//!
//! - [`market_data`]: price ingestion, log returns and date alignment.
//! - [`gpd`]: generalized Pareto fits to threshold excesses and diagnostics.
//! - [`threshold_mix`]: kernel-bulk / GPD-tail mixture for threshold selection.
//! - [`margins`]: semiparametric marginal transforms to Laplace and Fréchet scales.
//! - [`cmev`]: Heffernan–Tawn conditional extremes with importance-sampled prediction.
//! - [`bvpp`]: bivariate point-process dependence over six parametric families.
//! - [`simulate`]: seeded generators used as ground truth.
//!
//! All randomness flows through [`rng::Philox4x32`], so every result is
//! reproducible from its seed.

// `!(x > 0.0)` is used on purpose: it also rejects NaN. Matrix code indexes.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bvpp;
pub mod cmev;
pub mod empirical;
pub mod error;
pub mod gpd;
pub mod margins;
pub mod market_data;
pub mod numeric;
pub mod optim;
pub mod plot;
pub mod rng;
mod serde_nan;
pub mod simulate;
pub mod smooth;
pub mod threshold_mix;

pub use bvpp::{DependenceFamily, FamilyTag, PpFit, Strength};
pub use cmev::{HtFit, PredictionResult};
pub use error::{Error, Result};
pub use gpd::GpdFit;
pub use margins::{MarginTransform, Scale};
pub use market_data::{PriceSeries, ReturnPanel, ReturnSeries};
pub use threshold_mix::MixtureFit;

use serde::{Deserialize, Serialize};

/// Non-fatal conditions attached to a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FitFlag {
    /// Shape estimate at or below -1/2 where MLE asymptotics break down.
    UnreliableShape { xi: f64 },
    /// A parameter estimate sits on (or numerically at) the edge of its domain.
    Boundary { param: String, value: f64 },
    /// Threshold estimate outside the admissible quantile band.
    ThresholdOutsideBand { level: f64 },
    /// Optimizer stopped on its evaluation budget rather than its tolerance.
    BudgetExhausted,
}
