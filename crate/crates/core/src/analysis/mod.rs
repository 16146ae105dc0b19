//! Scalar bounds, smallness conditions, the one-step cubic, timestep
//! restrictions, Gronwall and comparison sequences, and per-step verdicts.

mod bounds;
mod check;
mod constants;
mod cubic;
mod restrictions;
mod sequences;
mod verdict;

pub use bounds::{compute_bounds, smallness_check, BoundsReport, HorizonReport, SmallnessVariant};
pub use check::Check;
pub use constants::{estimate_constants, ConstantEstimates, ConstantsOverrides, ConstantsSet};
pub use cubic::{cubic_analyze, cubic_from_x, CubicAnalysis};
pub use restrictions::{dt_restrictions, evaluate_constraints, Admissible, Constraint, ConstraintLimit, Variant};
pub use sequences::{
    comparison_flow, comparison_ode, comparison_seq, comparison_sequence, gronwall_envelope, one_step_explicit_bound,
};
pub use verdict::{bound_check, step_verdict, Monitor, StepContext, StepVerdict};

pub(crate) fn require_positive(name: &str, v: f64) -> crate::Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(crate::error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

pub(crate) fn require_nonnegative(name: &str, v: f64) -> crate::Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(crate::error::invalid(format!("{name} must be non-negative and finite, got {v}")))
    }
}
