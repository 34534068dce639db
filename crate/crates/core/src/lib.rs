//! Crowdsourced M-ary classification with a reject option.
//!
//! Workers answer `N = ceil(log2 M)` binary microtasks and may skip any of
//! them. Part of the crowd may be spammers who either skip everything or
//! answer everything with fair coin flips. This crate provides:
//!
//! - [`model`]: the generative crowd model (abilities, truth, responses);
//! - [`aggregation`]: weight schemes and per-bit weighted-majority fusion;
//! - [`estimation`]: manager-side estimates of the skip rate, the
//!   correctness rate and the spammer counts;
//! - [`analysis`]: analytic, brute-force and Monte Carlo evaluation of the
//!   probability of correct classification.
//!
//! The crate is `no_std` and only needs `alloc`. Randomness is always passed
//! in explicitly, so every operation is reproducible from a seed.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod aggregation;
pub mod analysis;
pub mod error;
pub mod estimation;
pub mod math;
pub mod model;

pub use aggregation::{classify, compute_weight, decide_bit, BitTally, Counting, Decision, SchemeKind, WeightParams, WeightScheme};
pub use error::{Error, Result};
pub use estimation::{CrowdEstimates, LikelihoodModel, MuMethod, ObservedCensus};
pub use model::{
    AbilityDistributions, Answer, CrowdCounts, Distribution, ResponseMatrix, SamplingMode, TaskSpec, TruthWord,
    WorkerKind, WorkerProfile,
};
