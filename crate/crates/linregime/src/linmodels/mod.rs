//! Random-features and neural-tangent linear models.

pub mod features;
pub mod fit;
pub mod population;
pub mod target;

pub use features::{
    build_design, sample_weights, sample_weights_with, sparse_nn_weights, sparse_nn_weights_with, FeatureModel,
    ModelKind, DEFAULT_MAX_ENTRIES,
};
pub use fit::{estimate_risk, fit_minnorm, fit_ridge, mse, risk_on, FitResult, MinNormFit, RidgeScaling, RiskEstimate};
pub use population::{rf_population_risk, rf_population_risks, PopulationMethod, PopulationRisk};
pub use target::{PolyTarget, TargetFunction, TargetKind};
