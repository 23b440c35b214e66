//! Reference scale sequences λ_{i,n}, weighted Sobolev norms and i.i.d. sampling
//! from the product reference law π̃_n.

use crate::density::ReferenceDensity;
use crate::error::{Error, Result};
use crate::targets::spiral::spiral_order_inverse;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumKind {
    PowerLaw,
    BridgeSpectral,
    BridgeFd,
    NsPrior,
}

/// Scales λ_{1,n}, …, λ_{n,n} of a product reference law together with the decay
/// exponent κ and the constants C₋, C₊ of the two-sided bound
/// C₋ i^{-κ} ≤ λ_{i,n} ≤ C₊ i^{-κ}.
///
/// Scales are stored explicitly (0-based: `scales[i - 1]` is λ_{i,n}).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    kind: SpectrumKind,
    kappa: f64,
    scales: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl Spectrum {
    /// λ_i = i^{-κ}.
    pub fn power_law(kappa: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("power-law spectrum needs n >= 1".into()));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::Domain(format!("decay exponent must be >= 0, got {kappa}")));
        }
        let scales = (1..=n).map(|i| (i as f64).powf(-kappa)).collect();
        Self::checked(SpectrumKind::PowerLaw, kappa, scales, 1.0, 1.0)
    }

    /// Karhunen–Loève scales of a d-dimensional Brownian bridge with inverse
    /// temperature β on [0, T], truncated to `modes` sine modes. Coordinates are
    /// mode-major: coordinate i belongs to mode ⌈i/d⌉, and
    /// Λ_i = √(2/β)·(T/π)·⌈i/d⌉^{-1}.
    pub fn bridge_spectral(beta: f64, horizon: f64, d: usize, modes: usize) -> Result<Self> {
        check_bridge_args(beta, horizon, d, modes)?;
        let c = (2.0 / beta).sqrt() * horizon / PI;
        let scales = (1..=d * modes).map(|i| c / i.div_ceil(d) as f64).collect();
        // ⌈i/d⌉ ∈ [i/d, i]
        Self::checked(SpectrumKind::BridgeSpectral, 1.0, scales, c, c * d as f64)
    }

    /// Scales of the finite-difference Brownian bridge on `grid` interior points,
    /// Λ_{i,n} = √(1/(2β))·T·(sin(⌈i/d⌉π/(2(N+1)))·(N+1))^{-1}.
    pub fn bridge_fd(beta: f64, horizon: f64, d: usize, grid: usize) -> Result<Self> {
        check_bridge_args(beta, horizon, d, grid)?;
        let c = horizon / (2.0 * beta).sqrt();
        let np1 = (grid + 1) as f64;
        let scales = (1..=d * grid)
            .map(|i| {
                let m = i.div_ceil(d) as f64;
                c / ((m * PI / (2.0 * np1)).sin() * np1)
            })
            .collect();
        // sin(vπ/2) ∈ [v, vπ/2] on [0, 1] and ⌈i/d⌉ ∈ [i/d, i]
        Self::checked(SpectrumKind::BridgeFd, 1.0, scales, 2.0 * c / PI, c * d as f64)
    }

    /// Navier–Stokes prior N(0, A^{-α}) truncated to the wavenumbers with
    /// |k₁|, |k₂| ≤ N, laid out as (sin, cos) pairs in spiral order:
    /// Λ_i = (4π²)^{-α/2}·|σ^{-1}(⌈i/2⌉)|^{-α}, n = 4N(N+1).
    pub fn ns_prior(alpha: f64, cutoff: usize) -> Result<Self> {
        if !(alpha > 1.0) {
            return Err(Error::NonTraceClass { alpha });
        }
        if cutoff == 0 {
            return Err(Error::InvalidDimension("Fourier cutoff must be >= 1".into()));
        }
        let c = (4.0 * PI * PI).powf(-alpha / 2.0);
        let n = 4 * cutoff * (cutoff + 1);
        let scales = (1..=n)
            .map(|i| {
                let (k1, k2) = spiral_order_inverse(i.div_ceil(2));
                let k_sq = (k1 * k1 + k2 * k2) as f64;
                c * k_sq.powf(-alpha / 2.0)
            })
            .collect();
        // For mode m in spiral ring N₀: m/4 ≤ |k|² ≤ 2m, and m = ⌈i/2⌉ ∈ [i/2, i],
        // so i/8 ≤ |k|² ≤ 2i.
        let lower = c * 2f64.powf(-alpha / 2.0);
        let upper = c * 8f64.powf(alpha / 2.0);
        Self::checked(SpectrumKind::NsPrior, alpha / 2.0, scales, lower, upper)
    }

    /// All-ones spectrum: the reference law of a whitened target.
    pub fn unit(n: usize) -> Result<Self> {
        Self::power_law(0.0, n)
    }

    fn checked(kind: SpectrumKind, kappa: f64, scales: Vec<f64>, lower: f64, upper: f64) -> Result<Self> {
        let spectrum = Self { kind, kappa, scales, lower, upper };
        spectrum.verify_bounds()?;
        Ok(spectrum)
    }

    /// Re-check positivity and C₋ i^{-κ} ≤ λ_i ≤ C₊ i^{-κ} for every coordinate.
    pub fn verify_bounds(&self) -> Result<()> {
        const SLACK: f64 = 1e-12;
        for (idx, &s) in self.scales.iter().enumerate() {
            let i = (idx + 1) as f64;
            let reference = i.powf(-self.kappa);
            let ok =
                s > 0.0 && s >= self.lower * reference * (1.0 - SLACK) && s <= self.upper * reference * (1.0 + SLACK);
            if !ok {
                return Err(Error::Numeric(format!(
                    "{:?} scale {} = {s} violates {} i^-κ <= λ <= {} i^-κ (κ = {})",
                    self.kind,
                    idx + 1,
                    self.lower,
                    self.upper,
                    self.kappa
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn n(&self) -> usize {
        self.scales.len()
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// (C₋, C₊).
    pub fn bound_constants(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    /// n^{-(pκ+1)} Σ λ_{i,n}^{-p}, the finite-n value of the limiting factor T_p.
    pub fn partial_limit_factor(&self, p: i32) -> f64 {
        let n = self.n() as f64;
        let sum: f64 = self.scales.iter().map(|s| s.powi(-p)).sum();
        sum * n.powf(-(p as f64 * self.kappa + 1.0))
    }
}

fn check_bridge_args(beta: f64, horizon: f64, d: usize, modes: usize) -> Result<()> {
    if !(beta > 0.0) || !(horizon > 0.0) {
        return Err(Error::Domain(format!("bridge needs beta > 0 and T > 0, got beta = {beta}, T = {horizon}")));
    }
    if d == 0 || modes == 0 {
        return Err(Error::InvalidDimension(format!("bridge needs d >= 1 and N >= 1, got d = {d}, N = {modes}")));
    }
    Ok(())
}

/// |x|_s = (Σ_i i^{2s} x_i²)^{1/2} with 1-based i.
pub fn sobolev_norm(x: &[f64], s: f64) -> f64 {
    x.iter().enumerate().map(|(idx, &v)| ((idx + 1) as f64).powf(2.0 * s) * v * v).sum::<f64>().sqrt()
}

/// x_i = λ_{i,n} ξ_i with ξ_i i.i.d. ~ f.
pub fn sample_reference<R: Rng + ?Sized>(spectrum: &Spectrum, f: ReferenceDensity, rng: &mut R) -> Vec<f64> {
    spectrum.scales().iter().map(|&lam| lam * f.sample(rng)).collect()
}
