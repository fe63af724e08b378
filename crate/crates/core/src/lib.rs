//! Implicit finite-difference time-domain solvers for the 3-D Maxwell
//! equations in a perfectly conducting box.
//!
//! Every splitting scheme comes in two algebraic forms that produce the same
//! fields: the *original* form, whose right-hand sides apply explicit
//! operator products, and the *fundamental* form, whose right-hand sides are
//! free of matrix operators and reduce to a few first differences.

#[macro_use]
mod exec;

pub mod cost_model;
pub mod error;
pub mod grid;
pub mod operators;
pub mod scalar;
pub mod schemes;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use grid::{
    diff_backward, diff_forward, AuxFieldSet, Axis, Coefficients, Component, FieldSet, Medium,
    Scaling, TimeConfig, YeeGrid,
};
pub use operators::{apply_A, apply_B, apply_curl, apply_split, identity_plus, Split};
pub use scalar::{Real, Work};
pub use schemes::{
    crank_nicolson_reference_step, douglas_gunn_step, dyakonov_intermediate, lod2_input,
    lod2_output, lod_to_adi_convert, CrankNicolson, DeltaPair, Formulation, HUpdate, SchemeId,
    Stepper, StepperConfig,
};
pub use tridiag::{build_line_system, factorize, shifted_laplacian, TridiagFactorization};
