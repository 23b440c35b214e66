//! Streaming estimators, power-law fits and the scaling sweep engine.

mod batch;
mod fit;
mod observers;
mod sweep;

pub use batch::{BatchMeans, MIN_BATCHES};
pub use fit::{fit_power_law, PowerLawFit};
pub use observers::{lag1_from_sjd, AcceptanceEstimate, AcceptanceObserver, SjdEstimate, SjdObserver, TraceObserver};
pub use sweep::{
    law_for, scaling_sweep, CriticalKeyword, OptimalKeyword, Regime, StepConstant, StepExponent, SweepConfig,
    SweepResult, SweepRow, TargetFamily, DEFAULT_DEGENERATE_HIGH, DEFAULT_DEGENERATE_LOW, DEFAULT_I_STAR,
    DEFAULT_REPLICATES, DEFAULT_SJD_TOLERANCE, DEFAULT_TOLERANCE,
};
