//! The full height-function system on the fixed rectangle and continuation of
//! the bifurcating branch.

mod branch;
mod field;
mod newton;
mod operator;
mod reference;
mod system;

pub use branch::{continue_branch, expansion_deviation, power_law_fit, Branch, BranchOptions, BranchRecord, StepKind};
pub use field::HeightField;
pub use newton::{
    apply_state_vector, newton_solve, state_vector, AmplitudeFunctional, Constraint, NewtonOptions,
    NewtonOutcome,
};
pub use operator::{linearized_operator_check, singular_probe, OperatorCheck, SingularProbe, TestField};
pub use reference::{
    discrete_bifurcation_point, discrete_laminar, mode_one_residual, BifurcationPoint, DiscreteLaminar,
};
pub use system::{interior_row, jacobian_apply, residual, top_row, LocalRow, ResidualBundle};
