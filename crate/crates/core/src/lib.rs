//! Guessing entropy, Massey-like lower bounds on it, brute-force verifiers
//! for those bounds, and simulated template-attack experiments that
//! evaluate them on side-channel key-candidate distributions.
//!
//! The numerical core ([`dist`], [`bounds`], [`optimize`], [`oracle`]) is
//! generic over the scalar type through [`Real`]; the aliases below fix it
//! to `f64` (or `f32`). The simulation ([`sca`]), experiment ([`experiment`]),
//! verification ([`verify`]) and CSV ([`io`]) layers work in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dist;
pub mod error;
pub mod experiment;
pub mod io;
pub mod optimize;
pub mod oracle;
pub mod sca;
pub mod scalar;
pub mod verify;

pub use bounds::{
    bound_at_alpha, bound_log2, evaluate, evaluate_all, evaluate_methods, max_entropy_given_ge,
    BoundResult, EntropyInput, MasseyLikeCoefficients, Method,
};
pub use dist::{
    binary_entropy, combine_materialize, combine_stats, guessing_entropy_exact, make_dist,
    normalize, shannon_entropy, Normalized, ProbDist, ProductDistStats,
};
pub use error::{Error, Result};
pub use experiment::{run_ge_experiment, run_ge_experiment_with, ExperimentOptions, GECurve};
pub use optimize::{optimize_alpha, AlphaOptimum};
pub use sca::LeakageParams;
pub use scalar::Real;
pub use verify::{run_verification, VerifyConfig, VerifyReport};

pub type ProbDist64 = ProbDist<f64>;
pub type ProbDist32 = ProbDist<f32>;
pub type ProductDistStats64 = ProductDistStats<f64>;
pub type EntropyInput64 = EntropyInput<f64>;
pub type BoundResult64 = BoundResult<f64>;
pub type Coefficients64 = MasseyLikeCoefficients<f64>;
