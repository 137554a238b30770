//! Finite element pricing of convertible bonds under the two-equation
//! (bond value / cash-only part) model with call and put provisions.
//!
//! The engine is generic over the scalar type (`f32` or `f64`); the `*64` aliases
//! below fix it to `f64`.

// `!(a > b)` is used on purpose so NaN inputs fail validation; index loops mirror
// the textbook LU recurrences.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytics;
pub mod banded;
pub mod contracts;
pub mod error;
pub mod fdm;
pub mod fem;
pub mod mms;
pub mod scalar;
pub mod stepper;
pub mod tf_model;

pub use banded::{BandedLu, BandedMatrix};
pub use contracts::{
    constraint_bounds, terminal_payoff, BondContract, ExercisePrices, MarketParams, Provision,
    Window,
};
pub use error::{Error, Result};
pub use fem::{assemble, build_mesh, ElementMatrices, ElementOrder, GlobalOperators, Mesh};
pub use scalar::Real;
pub use stepper::{
    full_solve, NewtonConfig, PenaltyTfSolver, PriceSurface, SolveReport, SolverSettings,
    StepDiagnostics,
};
pub use tf_model::{SolutionState, ThetaSystem};

pub type Mesh64 = Mesh<f64>;
pub type BondContract64 = BondContract<f64>;
pub type MarketParams64 = MarketParams<f64>;
pub type NewtonConfig64 = NewtonConfig<f64>;
pub type PriceSurface64 = PriceSurface<f64>;
pub type SolveReport64 = SolveReport<f64>;
pub type BandedMatrix64 = BandedMatrix<f64>;

pub type Mesh32 = Mesh<f32>;
pub type BondContract32 = BondContract<f32>;
pub type MarketParams32 = MarketParams<f32>;
