//! Navier–Stokes initial-condition prior with a direct-observation surrogate for
//! the observation operator.
//!
//! The prior on the Fourier coefficients (x_k^sin, x_k^cos), k ∈ Z²_{U,N}, is
//! N(0, (4π²)^{-α}|k|^{-2α}) independently. The surrogate operator reads off a
//! set of low-mode coefficients, so with isotropic noise
//! φ(x) = ½σ_obs^{-2} Σ_{observed} (W_j - x_j)².

use super::spiral::spiral_order_inverse;
use super::{ChangeOfMeasure, TargetModel};
use crate::density::ReferenceDensity;
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct NsPriorModel {
    pub alpha: f64,
    /// Fourier cutoff N; the state has n = 4N(N+1) coordinates.
    pub cutoff: usize,
    /// Observed modes as 1-based spiral indices in 1..=2N(N+1). Each observed mode
    /// contributes both its sine and cosine coefficient.
    pub obs_modes: Vec<usize>,
    /// Observations, two per observed mode: (W_sin, W_cos) in `obs_modes` order.
    pub observations: Vec<f64>,
    pub sigma_obs: f64,
}

impl NsPriorModel {
    pub fn n(&self) -> usize {
        4 * self.cutoff * (self.cutoff + 1)
    }

    pub fn mode_count(&self) -> usize {
        2 * self.cutoff * (self.cutoff + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0) {
            return Err(Error::NonTraceClass { alpha: self.alpha });
        }
        if self.cutoff == 0 {
            return Err(Error::InvalidDimension("Fourier cutoff must be >= 1".into()));
        }
        if !(self.sigma_obs > 0.0) {
            return Err(Error::Domain(format!("sigma_obs must be > 0, got {}", self.sigma_obs)));
        }
        let modes = self.mode_count();
        if let Some(&bad) = self.obs_modes.iter().find(|&&m| m == 0 || m > modes) {
            return Err(Error::Domain(format!("observed mode {bad} outside 1..={modes}")));
        }
        if self.observations.len() != 2 * self.obs_modes.len() {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.obs_modes.len(),
                found: self.observations.len(),
            });
        }
        Ok(())
    }

    /// Wavenumber of the i-th coordinate (1-based).
    pub fn wavenumber(coordinate: usize) -> (i64, i64) {
        spiral_order_inverse(coordinate.div_ceil(2))
    }
}

#[derive(Debug, Clone)]
pub struct CoefficientObservation {
    /// 0-based coordinates that are observed.
    coordinates: Vec<usize>,
    observations: Vec<f64>,
    precision: f64,
}

impl ChangeOfMeasure for CoefficientObservation {
    fn value(&self, x: &[f64]) -> f64 {
        let ss: f64 = self.coordinates.iter().zip(&self.observations).map(|(&c, &w)| (w - x[c]).powi(2)).sum();
        0.5 * self.precision * ss
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        for (&c, &w) in self.coordinates.iter().zip(&self.observations) {
            out[c] -= self.precision * (w - x[c]);
        }
        Ok(())
    }
}

pub fn ns_prior_target(model: &NsPriorModel) -> Result<TargetModel> {
    model.validate()?;
    let spectrum = Spectrum::ns_prior(model.alpha, model.cutoff)?;
    let coordinates = model.obs_modes.iter().flat_map(|&m| [2 * m - 2, 2 * m - 1]).collect();
    let functional = CoefficientObservation {
        coordinates,
        observations: model.observations.clone(),
        precision: model.sigma_obs.powi(-2),
    };
    Ok(TargetModel::new(spectrum, ReferenceDensity::Gaussian, Arc::new(functional), "ns-prior"))
}
