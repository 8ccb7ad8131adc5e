//! Calculus of RO-varying weights: evaluation, membership evidence,
//! Matuszewska indices and the embedding integral criteria.

mod criterion;
mod indices;
mod weight;

pub use criterion::{
    classical_solution_criterion, embed_criterion, ClassicalVerdict, ConvergenceStatus,
    ConvergenceVerdict, IntegralOptions,
};
pub use indices::{
    analytic_indices, best_indices, check_ro_membership, estimate_indices, IndexEstimate, IndexEstimateOptions,
    IndexPair, LambdaEstimate, RoMembership,
};
pub use weight::{RoWeight, MAX_LOG_DEPTH};
