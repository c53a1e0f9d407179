//! Data-dependent generalization bounds for stationary mixing processes.
//!
//! The central quantities are the prefix missing-mass estimators of a sample
//! path `X_1..X_n` relative to a gauge `g`:
//!
//! ```text
//! G   = (1/(n−τ)) Σ_{k=τ+1}^{n} min_{i ≤ k−τ, i ∉ B} g(X_k, X_i)
//! G_t = (1/(n−τ)) Σ_{k=τ+1}^{n} 1{ min_{i ≤ k−τ, i ∉ B} g(X_k, X_i) > t }
//! ```
//!
//! which enter risk and excess-loss bounds together with the mixing
//! coefficient `φ(τ)` and a confidence term. Modules:
//!
//! - [`geometry`]: points, gauges, Φ rules, covers.
//! - [`estimators`]: `G`, `G_t`, Good-Turing, ground-truth missing mass.
//! - [`nnindex`]: naive and vantage-point-tree backends for the minima.
//! - [`bounds`]: closed-form bound formulas.
//! - [`processes`]: reset-chain simulators and embeddings.
//! - [`pathio`]: CSV and binary path files.
//! - [`verify`]: Monte Carlo validators and decay studies.

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod nnindex;
pub mod pathio;
pub mod processes;
pub mod seeds;
pub mod verify;

pub use bounds::{
    corollary_bound, entropy_penalty, excess_loss_probability_bound, lemma1_threshold, risk_bound,
    theorem3_worst_case, BoundKind, BoundReport, ClassBounds, ConcentrationVariant, MixingProfile,
};
pub use error::{Error, Result};
pub use estimators::{
    good_turing, missing_mass_g, missing_mass_gt, prefix_min_profile, true_missing_mass, ExceptionSet,
    FiniteDistribution, InvariantDistribution, PrefixGaugeProfile,
};
pub use geometry::{eval_gauge, eval_phi, greedy_cover, BaseMetric, FunctionSample, GaugeSpec, Point, SamplePath};
pub use nnindex::{leave_one_out_min, prefix_min_indexed, Backend, SearchStats};
pub use processes::{embed, mixing_bounds, simulate, EmbeddingSpec, ProcessKind, ProcessSpec, Space};
