//! Proposal kernels, acceptance exponents and the Metropolis–Hastings chain.

mod chain;
mod kernels;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub use chain::{default_burn_in, run_chain, Chain, ChainReport, InitialState, Observer, StepOutcome};
pub use kernels::{check_kernel, direct_log_ratio_oracle, log_accept_ratio, propose, theta_sla_gaussian_exponent};
pub(crate) use kernels::{exponent_with_delta_sign, Endpoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ProposalKind {
    /// y = x + σZ
    Rwm,
    /// y = x + (σ²/2)∇log π̃(x) + σZ
    Sla,
    /// y = x + (σ²/2)∇log π(x) + σZ
    Mala,
    /// yᵢ = xᵢ + σλᵢZᵢ
    Prwm,
    /// yᵢ = xᵢ + (σ²λᵢ²/2)∂ᵢlog π̃(x) + σλᵢZᵢ
    Psla,
    /// y − x = (σ²/2)[θ∇log π̃(y) + (1−θ)∇log π̃(x)] + σZ, Gaussian reference only
    ThetaSla(f64),
}

impl ProposalKind {
    pub fn theta_sla(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!("theta must lie in [0, 1], got {theta}")));
        }
        Ok(Self::ThetaSla(theta))
    }

    /// Reference-law preconditioned kernels propose with per-coordinate scale λᵢ.
    pub fn is_preconditioned(self) -> bool {
        matches!(self, Self::Prwm | Self::Psla)
    }

    pub fn needs_gradient(self) -> bool {
        matches!(self, Self::Mala)
    }

    pub const ALL_NAMES: [&'static str; 6] = ["rwm", "sla", "mala", "p-rwm", "p-sla", "theta-sla:<θ>"];
}

impl fmt::Display for ProposalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rwm => f.write_str("rwm"),
            Self::Sla => f.write_str("sla"),
            Self::Mala => f.write_str("mala"),
            Self::Prwm => f.write_str("p-rwm"),
            Self::Psla => f.write_str("p-sla"),
            Self::ThetaSla(t) => write!(f, "theta-sla:{t}"),
        }
    }
}

impl FromStr for ProposalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "rwm" => Ok(Self::Rwm),
            "sla" => Ok(Self::Sla),
            "mala" => Ok(Self::Mala),
            "p-rwm" | "prwm" => Ok(Self::Prwm),
            "p-sla" | "psla" => Ok(Self::Psla),
            other => {
                let theta = other.strip_prefix("theta-sla:").and_then(|t| t.parse::<f64>().ok()).ok_or_else(|| {
                    Error::Configuration(format!(
                        "unknown kernel '{s}' (expected one of {})",
                        Self::ALL_NAMES.join(", ")
                    ))
                })?;
                Self::theta_sla(theta)
            }
        }
    }
}

impl TryFrom<String> for ProposalKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ProposalKind> for String {
    fn from(k: ProposalKind) -> String {
        k.to_string()
    }
}

/// σₙ = l·n^{-ρ/2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSize {
    l: f64,
    rho: f64,
    n: usize,
    sigma: f64,
}

impl StepSize {
    /// `l = 0` is accepted and gives the degenerate kernel y = x for RWM.
    pub fn new(l: f64, rho: f64, n: usize) -> Result<Self> {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::Domain(format!("step constant l must be >= 0, got {l}")));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Domain(format!("step exponent rho must be > 0, got {rho}")));
        }
        if n == 0 {
            return Err(Error::InvalidDimension("step size needs n >= 1".into()));
        }
        let sigma = l * (n as f64).powf(-rho / 2.0);
        Ok(Self { l, rho, n, sigma })
    }

    /// The step size with a prescribed σₙ; l is back-solved from σₙ = l·n^{-ρ/2}.
    pub fn from_sigma(sigma: f64, rho: f64, n: usize) -> Result<Self> {
        let mut s = Self::new(sigma * (n as f64).powf(rho / 2.0), rho, n)?;
        s.sigma = sigma;
        Ok(s)
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma * self.sigma
    }
}
