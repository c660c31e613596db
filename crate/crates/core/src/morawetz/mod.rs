//! Morawetz weights, actions, identity verification and space-time estimates.

pub mod conditions;
pub mod estimates;
pub mod identity;
pub mod interaction;
pub mod weight;

pub use conditions::{weight_condition_check, ConditionReport};
pub use estimates::{
    correlation_norm, nonlinear_morawetz_integrals, NonlinearMorawetz, NonlinearMorawetzRecord,
    ACCUMULATOR_NAMES,
};
pub use identity::{
    action_m, morawetz_rhs, observed_orders, verify_identity, IdentityMonitor, IdentitySummary,
    Morawetz, MorawetzReport, RhsTerms,
};
pub use interaction::{interaction_action, InteractionAction};
pub use weight::{weight_derivatives, WeightDerivatives, WeightKind, WeightSpec};
