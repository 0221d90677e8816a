//! Information-theoretic quantities of linearized tables.
//!
//! Everything is in nats. Analytic results come from a [`ColumnModel`];
//! empirical ones from sampled [`LinearizedSequence`](crate::table::LinearizedSequence)s.

use thiserror::Error;

pub mod dist;
pub mod lag;
pub mod model;
pub mod text;

pub use dist::{
    entropy, kl_divergence, kl_from_probs, plugin_mutual_information, CategoricalDist,
    Divergence, JointDist, MASS_TOLERANCE,
};
pub use lag::{
    analytic_lag_profile, empirical_lag_profile, max_lag, EmpiricalOptions, LagProfile,
    LagValue, ProfileMeta, ProfileMode,
};
pub use model::{ColumnModel, CrossColumnVariance, DISTINCT_KL_TOLERANCE};
pub use text::{
    dominance_ratio, effective_distance, DependencySource, EffectiveDistanceReport,
    PowerLawModel,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("duplicate symbol {0:?}")]
    DuplicateSymbol(String),
    #[error("probabilities must be finite, nonnegative and sum to 1 (got total {0})")]
    Mass(f64),
    #[error("distributions are over different alphabets")]
    AlphabetMismatch,
    #[error("model file: {0}")]
    ModelFile(String),
    #[error("degenerate model: same-column MI is zero")]
    DegenerateModel,
    #[error("d_max {d_max} outside 1..={limit}")]
    LagOutOfRange { d_max: usize, limit: usize },
    #[error("threshold must be positive and finite, got {0}")]
    InvalidTau(f64),
    #[error("lag must be at least 1, got {0}")]
    InvalidLag(f64),
    #[error("power law needs C > 0 and alpha > 0, got C = {c}, alpha = {alpha}")]
    InvalidPowerLaw { c: f64, alpha: f64 },
    #[error("no samples")]
    NoSamples,
}
