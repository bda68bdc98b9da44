//! Bivariate point-process dependence modelling on unit-Fréchet margins.

pub mod family;
pub mod fit;
pub mod strength;

pub use family::{from_pseudo_polar, pseudo_polar, DependenceFamily, FamilyTag};
pub use fit::{aic, aic_order, fit_pp, fit_pp_with, radial_threshold, rank_fits, select_family, Objective, PpFit, PpOptions, Selection};
pub use strength::{classify_pp_strength, compare_models, Agreement, Comparison, ComparisonRow, Panel, Strength, StrengthBands};
