//! Observability analysis for multi-target passive tracking.
//!
//! The crate models planar targets and an observer with polynomial motion,
//! generates noise-free bearing and Doppler histories, and answers two
//! questions about them:
//!
//! * Is the stacked initial state of all targets recoverable from the
//!   pseudo-linearized bearing measurements? ([`observability`],
//!   [`estimator`])
//! * Can two distinct trajectories produce identical Doppler, bearing, or
//!   combined measurement histories? ([`ambiguity`])
//!
//! State vectors are ordered per target as `[x, y, x', y', ..., x^(p), y^(p)]`
//! (raw time derivatives at the reference time), and the super state
//! concatenates targets in index order.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambiguity;
pub mod error;
pub mod estimator;
pub mod grid;
pub mod measurement;
pub mod observability;
pub mod scenario;
pub mod trajectory;

pub use ambiguity::{
    check_combined_condition, check_sufficiency, doppler_condition_residual,
    generate_bearing_ambiguous, generate_doppler_ambiguous, verify_ambiguity, AmbiguityCertificate,
    DopplerAmbiguitySpec, EigenReport, Profile, Regime, SampledFunction, SufficiencyReport, Track,
    TransformModel, Verdict,
};
pub use error::{Error, Result};
pub use estimator::{cross_validate, estimate_initial_state, EstimateResult, Uniqueness};
pub use grid::TimeGrid;
pub use measurement::{
    assemble_c, bearing, doppler, measure_scenario, pseudo_row, MeasurementHistory, Tonal,
};
pub use observability::{
    bearing_separation_mod_pi, check_observable, detect_collinearity, gramian, m_submatrix_det,
    CollinearityEvent, ObservabilityReport, RankDecision,
};
pub use scenario::{load_scenario, save_scenario, Scenario, Target, Tolerances};
pub use trajectory::{
    assemble_block_transition, propagate_ode, relative_state, transition_matrix,
    PolynomialTrajectory, RelativeState, SampledTrajectory, TransitionMatrix, Vec2,
};
