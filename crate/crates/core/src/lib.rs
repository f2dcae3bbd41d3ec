//! Stress-based navigation for a microrobot travelling through small blood
//! vessels: vessel geometry, a boundary-element Stokes solver, path
//! simulation, surface-stress features and a branch classifier.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod demo;
pub mod features;
pub mod geometry;
pub mod path;
pub mod stokes;

pub use classifier::{
    classify_online, evaluate_path, extract_training_features, p_branch, roc_auc, train_logistic, ClassifierError,
    ClassifierOutcome, PathEvaluation, RegressionParams,
};
pub use features::{
    correlation, encode_pattern, fit_pca, max_correlation, relative_position, FeatureError, FeatureVector, PcaModel,
    StressPattern,
};
pub use geometry::{
    build_geometry, discretize, murray_main_diameter, vessel_mesh, wall_gap, BcTag, BoundaryMesh, FluidParams,
    GeometryError, GeometryOptions, MeshOptions, RobotState, Vec2, VesselKind, VesselSpec,
};
pub use path::{
    draw_scenario, generate_corpus, reverse_measurements, simulate_path, Corpus, CorpusConfig, Direction, PathError,
    PathLabel, PathOptions, PathRecord, ScenarioKind, ScenarioSpec, TerminalReason, TimedSample,
};
pub use stokes::{
    inlet_profile, max_surface_stress, solve_mobility, FlowError, FlowProblem, RigidMotion, SolverOptions,
    TractionField, VesselOperator,
};
