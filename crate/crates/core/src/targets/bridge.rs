//! Diffusion bridges dX = -∇V(X)dt + √(2/β)dW pinned at zero on [0, T].
//!
//! Relative to the Brownian bridge the path law has density exp{-∫₀ᵀ G(X_t) dt}
//! with G(u) = (β/4)|∇V(u)|² - ½ΔV(u). Two finite-dimensional versions are
//! provided: spectral truncation of the sine expansion (integral by the
//! trapezoidal rule) and the finite-difference grid.

use super::{ChangeOfMeasure, TargetModel};
use crate::density::ReferenceDensity;
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Largest state dimension d supported by the bridge functionals.
pub const MAX_STATE_DIM: usize = 8;
const MAX_TABLE_ENTRIES: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Potential {
    /// V(u) = |u|²/2.
    #[serde(alias = "ou")]
    OrnsteinUhlenbeck,
    /// V(u) = (|u|² - 1)².
    DoubleWell,
}

impl Potential {
    pub fn value(self, u: &[f64]) -> f64 {
        let r2: f64 = u.iter().map(|v| v * v).sum();
        match self {
            Self::OrnsteinUhlenbeck => 0.5 * r2,
            Self::DoubleWell => (r2 - 1.0).powi(2),
        }
    }

    pub fn gradient(self, u: &[f64], out: &mut [f64]) {
        let c = match self {
            Self::OrnsteinUhlenbeck => 1.0,
            Self::DoubleWell => 4.0 * (u.iter().map(|v| v * v).sum::<f64>() - 1.0),
        };
        for (o, &v) in out.iter_mut().zip(u) {
            *o = c * v;
        }
    }

    pub fn laplacian(self, u: &[f64]) -> f64 {
        let d = u.len() as f64;
        match self {
            Self::OrnsteinUhlenbeck => d,
            Self::DoubleWell => {
                let r2: f64 = u.iter().map(|v| v * v).sum();
                4.0 * (r2 - 1.0) * d + 8.0 * r2
            }
        }
    }

    /// G(u) = (β/4)|∇V(u)|² - ½ΔV(u).
    #[inline]
    pub fn g(self, beta: f64, u: &[f64]) -> f64 {
        let r2: f64 = u.iter().map(|v| v * v).sum();
        let d = u.len() as f64;
        match self {
            Self::OrnsteinUhlenbeck => 0.25 * beta * r2 - 0.5 * d,
            Self::DoubleWell => {
                let c = 4.0 * (r2 - 1.0);
                0.25 * beta * c * c * r2 - 0.5 * (c * d + 8.0 * r2)
            }
        }
    }

    /// ∇G(u) = (β/2)·∇²V·∇V - ½∇ΔV.
    #[inline]
    pub fn grad_g(self, beta: f64, u: &[f64], out: &mut [f64]) {
        let d = u.len() as f64;
        match self {
            Self::OrnsteinUhlenbeck => {
                for (o, &v) in out.iter_mut().zip(u) {
                    *o = 0.5 * beta * v;
                }
            }
            Self::DoubleWell => {
                // ∇V = c u, ∇²V = c I + 8uuᵀ, ∇ΔV = (8d + 16) u, with c = 4(|u|² - 1)
                let r2: f64 = u.iter().map(|v| v * v).sum();
                let c = 4.0 * (r2 - 1.0);
                let hess_grad = c * c + 8.0 * r2 * c;
                let coef = 0.5 * beta * hess_grad - 0.5 * (8.0 * d + 16.0);
                for (o, &v) in out.iter_mut().zip(u) {
                    *o = coef * v;
                }
            }
        }
    }
}

/// Parameters of a bridge target: potential V, inverse temperature β, horizon T,
/// state dimension d, number of modes (or grid points) N, and the number M of
/// trapezoid intervals used by the spectral version.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeModel {
    pub potential: Potential,
    pub beta: f64,
    pub horizon: f64,
    pub dim: usize,
    pub modes: usize,
    pub quadrature_points: usize,
}

impl BridgeModel {
    /// Uses M = 4N trapezoid intervals, which integrates products of two modes
    /// exactly.
    pub fn new(potential: Potential, beta: f64, horizon: f64, dim: usize, modes: usize) -> Result<Self> {
        let model = Self { potential, beta, horizon, dim, modes, quadrature_points: 4 * modes };
        model.validate()?;
        Ok(model)
    }

    pub fn with_quadrature_points(mut self, m: usize) -> Result<Self> {
        self.quadrature_points = m;
        self.validate()?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.dim * self.modes
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !(self.horizon > 0.0) {
            return Err(Error::Domain(format!(
                "bridge needs beta > 0 and T > 0, got beta = {}, T = {}",
                self.beta, self.horizon
            )));
        }
        if self.dim == 0 || self.dim > MAX_STATE_DIM {
            return Err(Error::InvalidDimension(format!(
                "bridge state dimension must be in 1..={MAX_STATE_DIM}, got {}",
                self.dim
            )));
        }
        if self.modes == 0 {
            return Err(Error::InvalidDimension("bridge needs N >= 1".into()));
        }
        if self.quadrature_points < 2 {
            return Err(Error::Configuration("spectral quadrature needs M >= 2".into()));
        }
        Ok(())
    }
}

/// G(u) for the model's potential and β.
pub fn g_of_u(model: &BridgeModel, u: &[f64]) -> f64 {
    model.potential.g(model.beta, u)
}

/// P_N(x)(t) = Σ_i x_{·,i} √(2/T) sin(iπt/T), with x laid out mode-major.
pub fn kl_synthesize_spectral(x: &[f64], model: &BridgeModel, t: f64) -> Result<Vec<f64>> {
    if !(0.0..=model.horizon).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, {}]", model.horizon)));
    }
    if x.len() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), found: x.len() });
    }
    let d = model.dim;
    let norm = (2.0 / model.horizon).sqrt();
    let mut out = vec![0.0; d];
    for (i, chunk) in x.chunks_exact(d).enumerate() {
        let e = norm * ((i + 1) as f64 * PI * t / model.horizon).sin();
        for (o, &c) in out.iter_mut().zip(chunk) {
            *o += c * e;
        }
    }
    Ok(out)
}

/// Shared machinery: φ(x) = w₀ + Δt Σ_m G(X_m) where X_m = Σ_i x_{·,i} basis[m][i].
#[derive(Debug, Clone)]
struct PathQuadrature {
    potential: Potential,
    beta: f64,
    dim: usize,
    modes: usize,
    /// Row-major (points × modes) basis values.
    basis: Vec<f64>,
    points: usize,
    dt: f64,
    /// Contribution of nodes where the path is pinned at zero.
    pinned: f64,
}

impl PathQuadrature {
    fn path_at(&self, x: &[f64], m: usize, out: &mut [f64; MAX_STATE_DIM]) {
        let d = self.dim;
        out[..d].fill(0.0);
        let row = &self.basis[m * self.modes..(m + 1) * self.modes];
        for (chunk, &e) in x.chunks_exact(d).zip(row) {
            for (o, &c) in out[..d].iter_mut().zip(chunk) {
                *o += c * e;
            }
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut u = [0.0; MAX_STATE_DIM];
        let mut sum = 0.0;
        for m in 0..self.points {
            self.path_at(x, m, &mut u);
            sum += self.potential.g(self.beta, &u[..self.dim]);
        }
        self.pinned + self.dt * sum
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        let mut u = [0.0; MAX_STATE_DIM];
        let mut dg = [0.0; MAX_STATE_DIM];
        out.fill(0.0);
        for m in 0..self.points {
            self.path_at(x, m, &mut u);
            self.potential.grad_g(self.beta, &u[..d], &mut dg[..d]);
            let row = &self.basis[m * self.modes..(m + 1) * self.modes];
            for (chunk, &e) in out.chunks_exact_mut(d).zip(row) {
                for (o, &g) in chunk.iter_mut().zip(&dg[..d]) {
                    *o += self.dt * g * e;
                }
            }
        }
    }
}

fn check_table(points: usize, modes: usize) -> Result<()> {
    if points.saturating_mul(modes) > MAX_TABLE_ENTRIES {
        return Err(Error::Configuration(format!(
            "bridge basis table {points}x{modes} exceeds {MAX_TABLE_ENTRIES} entries"
        )));
    }
    Ok(())
}

/// Spectral-truncation bridge functional, trapezoidal rule on M intervals.
#[derive(Debug, Clone)]
pub struct SpectralBridge(PathQuadrature);

impl SpectralBridge {
    pub fn new(model: &BridgeModel) -> Result<Self> {
        model.validate()?;
        let m = model.quadrature_points;
        let interior = m - 1;
        check_table(interior, model.modes)?;
        let norm = (2.0 / model.horizon).sqrt();
        let mut basis = Vec::with_capacity(interior * model.modes);
        for k in 1..m {
            for i in 1..=model.modes {
                basis.push(norm * (i as f64 * k as f64 * PI / m as f64).sin());
            }
        }
        let dt = model.horizon / m as f64;
        // Endpoints carry half weight each and the path vanishes there.
        let zero = [0.0; MAX_STATE_DIM];
        let pinned = dt * model.potential.g(model.beta, &zero[..model.dim]);
        Ok(Self(PathQuadrature {
            potential: model.potential,
            beta: model.beta,
            dim: model.dim,
            modes: model.modes,
            basis,
            points: interior,
            dt,
            pinned,
        }))
    }
}

impl ChangeOfMeasure for SpectralBridge {
    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x)
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.0.gradient(x, out);
        Ok(())
    }
}

/// Finite-difference bridge functional φ(x) = Σ_{t=1}^N G(X_t)Δt, Δt = T/(N+1).
#[derive(Debug, Clone)]
pub struct FdBridge(PathQuadrature);

impl FdBridge {
    pub fn new(model: &BridgeModel) -> Result<Self> {
        model.validate()?;
        let n = model.modes;
        check_table(n, n)?;
        let norm = (2.0 / model.horizon).sqrt();
        let np1 = (n + 1) as f64;
        let mut basis = Vec::with_capacity(n * n);
        for t in 1..=n {
            for i in 1..=n {
                basis.push(norm * (i as f64 * t as f64 * PI / np1).sin());
            }
        }
        Ok(Self(PathQuadrature {
            potential: model.potential,
            beta: model.beta,
            dim: model.dim,
            modes: n,
            basis,
            points: n,
            dt: model.horizon / np1,
            pinned: 0.0,
        }))
    }
}

impl ChangeOfMeasure for FdBridge {
    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x)
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.0.gradient(x, out);
        Ok(())
    }
}

fn potential_label(p: Potential) -> &'static str {
    match p {
        Potential::OrnsteinUhlenbeck => "ou",
        Potential::DoubleWell => "double-well",
    }
}

pub fn bridge_target_spectral(model: &BridgeModel) -> Result<TargetModel> {
    let spectrum = Spectrum::bridge_spectral(model.beta, model.horizon, model.dim, model.modes)?;
    Ok(TargetModel::new(
        spectrum,
        ReferenceDensity::Gaussian,
        Arc::new(SpectralBridge::new(model)?),
        format!("bridge-spectral-{}", potential_label(model.potential)),
    ))
}

pub fn bridge_target_fd(model: &BridgeModel) -> Result<TargetModel> {
    let spectrum = Spectrum::bridge_fd(model.beta, model.horizon, model.dim, model.modes)?;
    Ok(TargetModel::new(
        spectrum,
        ReferenceDensity::Gaussian,
        Arc::new(FdBridge::new(model)?),
        format!("bridge-fd-{}", potential_label(model.potential)),
    ))
}
