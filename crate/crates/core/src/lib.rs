//! Local Metropolis–Hastings samplers (random-walk, simplified Langevin, MALA and
//! their preconditioned and implicit variants) on high-dimensional targets defined
//! as a change of measure from a product reference law
//!
//! ```text
//!     dπ_n/dπ̃_n (x) = exp{-φ_n(x)},    π̃_n(x) = Π_i λ_i^{-1} f(x_i / λ_i)
//! ```
//!
//! together with the closed-form optimal-scaling predictions (limiting acceptance
//! curves, optimal acceptance rates, squared-jump-distance laws) and the streaming
//! diagnostics needed to check them empirically.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectrum`] and [`density`]: reference scales λ_{i,n} and the scalar density f = e^{-g}.
//! - [`targets`]: change-of-measure functionals φ_n (product, bounded perturbation,
//!   diffusion bridges, Navier–Stokes prior surrogate).
//! - [`samplers`]: proposal kernels, acceptance exponents and the chain runner.
//! - [`theory`]: constants K and T_p, acceptance curves a(l), optimal step sizes.
//! - [`diagnostics`]: batch-means estimators, power-law fits and the scaling sweep.
//! - [`validation`]: the fast invariant suite behind `scaling-lab validate`.

// `!(x > 0.0)` guards are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod diagnostics;
mod error;
pub mod quadrature;
pub mod samplers;
pub mod seeding;
pub mod special;
pub mod spectrum;
pub mod targets;
pub mod theory;
pub mod validation;

pub use density::ReferenceDensity;
pub use diagnostics::{
    fit_power_law, scaling_sweep, AcceptanceEstimate, AcceptanceObserver, PowerLawFit, SjdEstimate, SjdObserver,
    SweepConfig, SweepResult, SweepRow, TargetFamily, TraceObserver,
};
pub use error::{Error, Result};
pub use samplers::{
    direct_log_ratio_oracle, log_accept_ratio, propose, run_chain, Chain, ChainReport, InitialState, ProposalKind,
    StepOutcome, StepSize,
};
pub use spectrum::{sample_reference, sobolev_norm, Spectrum, SpectrumKind};
pub use targets::{BridgeModel, ChangeOfMeasure, NsPriorModel, Potential, TargetModel};
pub use theory::{Algorithm, ScalingLaw};
