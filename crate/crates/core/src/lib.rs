//! Weak-approximation stochastic Runge-Kutta (SRK) methods for Ito SDEs
//!
//! ```text
//! dX = a(t, X) dt + b(t, X) dW,      X(t0) = x0,
//! ```
//!
//! with a d-dimensional state and an m-dimensional driving Wiener process.
//!
//! The crate provides:
//!
//! * extended Butcher tableaux for explicit s-stage SRK schemes, with
//!   validation and a compiled execution plan ([`tableau`]),
//! * numerical evaluation of the 59 weak order conditions (orders 1 and 2)
//!   and the classical deterministic conditions up to order 3
//!   ([`order_conditions`]),
//! * parametric constructors for every solvable order-(2,2) coefficient
//!   family, the optimized order-(3,2) scheme DRI1, and the local error
//!   constant functional it minimizes ([`families`]),
//! * the discrete random variables driving one weak step, with exact support
//!   enumeration for oracle tests ([`rng`]),
//! * a one-step/whole-path integrator with evaluation counting and an exact
//!   one-step expectation oracle ([`integrator`]),
//! * benchmark SDEs with known expectation functionals ([`problems`]),
//! * parallel, bit-reproducible Monte Carlo estimation of weak errors,
//!   extrapolated Euler estimation, and convergence-order regression
//!   ([`montecarlo`]).

pub mod families;
pub mod integrator;
pub mod montecarlo;
pub mod order_conditions;
pub mod problems;
pub mod rng;
pub mod tableau;

pub use integrator::{EvalCounters, SdeProblem, SimError, Stepper};
pub use montecarlo::{ConvergenceReport, ExemOptions, McEstimate, McError, SchemeSpec};
pub use order_conditions::{ConditionResidual, OrderReport};
pub use problems::BenchmarkProblem;
pub use rng::{RandomStream, WeakIncrements};
pub use tableau::{ButcherTableau, ExecutionPlan, RawTableau, TableauError};
