//! The (1-G)/G gamma family of lifetime distributions: evaluation, series
//! diagnostics, maximum-likelihood fitting and model comparison.

pub mod base_dist;
pub mod comparison;
pub mod competitors;
pub mod data;
pub mod error;
pub mod fit;
pub mod gamma_ratio;
pub mod gof;
pub mod oe_gamma;
pub mod parse;
pub mod quad;
pub mod sampling;
pub mod series;
pub mod specfun;

pub use base_dist::{make_exponential, BaseDistribution, Exponential};
pub use comparison::{compare, parse_models, ComparisonRow, ModelId};
pub use data::{wheaton, Dataset};
pub use error::{Error, Result};
pub use fit::{mle_fit, FitOptions, FitResult, FittableModel};
pub use gamma_ratio::GammaRatioDist;
pub use gof::{EdfVariant, GofReport};
pub use oe_gamma::{oe_loglik_and_score, OEGammaDist, OeGammaModel};
pub use series::{SeriesControl, SeriesResult};
