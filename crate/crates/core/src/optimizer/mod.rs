//! Derivative-free design synthesis.
//!
//! [`nelder_mead`] is a self-contained simplex minimizer; [`objective`] turns a workspace
//! requirement and an actuator family into a scalar cost over either design space.

pub mod nelder_mead;
pub mod objective;

pub use nelder_mead::{nelder_mead, nelder_mead_with_steps, OptimizationResult, OptimizerConfig, Termination, TracePoint};
pub use objective::{
    build_objective, decode_vector, encode_design, objective_from_evaluation, optimize_design, DesignOutcome,
    ObjectiveConfig, ParameterSpace, SpaceKind,
};
