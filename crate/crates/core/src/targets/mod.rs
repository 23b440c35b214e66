//! Targets π_n defined through dπ_n/dπ̃_n = exp{-φ_n}: a reference product law
//! (spectrum plus scalar density) and a change-of-measure functional φ_n.

pub mod bridge;
pub mod ns_prior;
pub mod spiral;

use crate::density::ReferenceDensity;
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;
use std::fmt;
use std::sync::Arc;

pub use bridge::{bridge_target_fd, bridge_target_spectral, g_of_u, kl_synthesize_spectral, BridgeModel, Potential};
pub use ns_prior::{ns_prior_target, NsPriorModel};
pub use spiral::{spiral_order, spiral_order_inverse};

/// A change-of-measure functional φ_n on ℝⁿ. Implementations are pure and may be
/// evaluated concurrently.
pub trait ChangeOfMeasure: Send + Sync + fmt::Debug {
    fn value(&self, x: &[f64]) -> f64;

    fn has_gradient(&self) -> bool {
        false
    }

    /// Writes ∇φ_n(x) into `out`.
    fn gradient(&self, _x: &[f64], _out: &mut [f64]) -> Result<()> {
        Err(Error::Unsupported("this functional has no gradient".into()))
    }

    /// True when φ_n ≡ 0.
    fn is_zero(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl ChangeOfMeasure for Zero {
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, _x: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        Ok(())
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// φ(x) = M·tanh(|x|²/n), bounded by M in absolute value.
#[derive(Debug, Clone, Copy)]
pub struct BoundedPerturbation {
    pub bound: f64,
}

impl ChangeOfMeasure for BoundedPerturbation {
    fn value(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64;
        self.bound * r.tanh()
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = x.len().max(1) as f64;
        let r = x.iter().map(|v| v * v).sum::<f64>() / n;
        let sech2 = 1.0 - r.tanh().powi(2);
        let c = self.bound * sech2 * 2.0 / n;
        for (o, &v) in out.iter_mut().zip(x) {
            *o = c * v;
        }
        Ok(())
    }
}

/// u ↦ φ(Λu): the functional seen in whitened coordinates.
#[derive(Debug, Clone)]
pub struct Whitened {
    inner: Arc<dyn ChangeOfMeasure>,
    scales: Vec<f64>,
}

impl Whitened {
    fn unwhiten(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.scales).map(|(u, l)| u * l).collect()
    }
}

impl ChangeOfMeasure for Whitened {
    fn value(&self, u: &[f64]) -> f64 {
        if self.inner.is_zero() {
            return 0.0;
        }
        self.inner.value(&self.unwhiten(u))
    }

    fn has_gradient(&self) -> bool {
        self.inner.has_gradient()
    }

    fn gradient(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        self.inner.gradient(&self.unwhiten(u), out)?;
        for (o, l) in out.iter_mut().zip(&self.scales) {
            *o *= l;
        }
        Ok(())
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }
}

/// A reference law π̃_n (spectrum and density) with a change of measure φ_n.
#[derive(Debug, Clone)]
pub struct TargetModel {
    spectrum: Spectrum,
    density: ReferenceDensity,
    functional: Arc<dyn ChangeOfMeasure>,
    label: String,
}

impl TargetModel {
    pub fn new(
        spectrum: Spectrum,
        density: ReferenceDensity,
        functional: Arc<dyn ChangeOfMeasure>,
        label: impl Into<String>,
    ) -> Self {
        Self { spectrum, density, functional, label: label.into() }
    }

    /// π_n = π̃_n (φ_n ≡ 0).
    pub fn product(spectrum: Spectrum, density: ReferenceDensity) -> Self {
        Self::new(spectrum, density, Arc::new(Zero), "product")
    }

    pub fn bounded_perturbation(spectrum: Spectrum, density: ReferenceDensity, bound: f64) -> Result<Self> {
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::Domain(format!("perturbation bound must be > 0, got {bound}")));
        }
        Ok(Self::new(spectrum, density, Arc::new(BoundedPerturbation { bound }), "bounded-perturbation"))
    }

    /// The same target expressed in u = Λ^{-1}x: unit scales, functional φ_n(Λu).
    pub fn whitened(&self) -> Result<Self> {
        let functional = Whitened { inner: Arc::clone(&self.functional), scales: self.spectrum.scales().to_vec() };
        Ok(Self::new(Spectrum::unit(self.n())?, self.density, Arc::new(functional), format!("{}-whitened", self.label)))
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn scales(&self) -> &[f64] {
        self.spectrum.scales()
    }

    pub fn density(&self) -> ReferenceDensity {
        self.density
    }

    pub fn kappa(&self) -> f64 {
        self.spectrum.kappa()
    }

    pub fn n(&self) -> usize {
        self.spectrum.n()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn functional(&self) -> &Arc<dyn ChangeOfMeasure> {
        &self.functional
    }

    pub fn phi(&self, x: &[f64]) -> f64 {
        self.functional.value(x)
    }

    pub fn has_gradient(&self) -> bool {
        self.functional.has_gradient()
    }

    pub fn grad_phi(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.functional.gradient(x, out)
    }

    pub fn check_dimension(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: x.len() });
        }
        Ok(())
    }

    /// log π̃_n(x) including normalization.
    pub fn log_reference_density(&self, x: &[f64]) -> f64 {
        let f = self.density;
        x.iter().zip(self.scales()).map(|(&v, &lam)| -f.g(v / lam) - lam.ln()).sum()
    }

    /// log π_n(x) up to the (unknown) normalizing constant of exp{-φ_n}.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        self.log_reference_density(x) - self.phi(x)
    }

    /// ∇ log π̃_n(x)_i = -g'(x_i/λ_i)/λ_i.
    pub fn grad_log_reference(&self, x: &[f64], out: &mut [f64]) {
        let f = self.density;
        for ((o, &v), &lam) in out.iter_mut().zip(x).zip(self.scales()) {
            *o = -f.g1(v / lam) / lam;
        }
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::gradient_fd_error;
    use super::*;
    use crate::spectrum::sample_reference;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn product_target_is_trivial() {
        let t = TargetModel::product(Spectrum::power_law(1.0, 4).unwrap(), ReferenceDensity::Gaussian);
        assert_eq!(t.phi(&[1.0, -2.0, 3.0, 0.5]), 0.0);
        let mut g = vec![1.0; 4];
        t.grad_phi(&[1.0, -2.0, 3.0, 0.5], &mut g).unwrap();
        assert_eq!(g, vec![0.0; 4]);
        assert_eq!(t.label(), "product");
        assert_eq!(t.kappa(), 1.0);
    }

    #[test]
    fn bounded_perturbation_properties() {
        let spectrum = Spectrum::power_law(0.5, 10).unwrap();
        let t = TargetModel::bounded_perturbation(spectrum, ReferenceDensity::Gaussian, 2.5).unwrap();
        assert_eq!(t.phi(&[0.0; 10]), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100_000 {
            let x: Vec<f64> = (0..10).map(|_| rng.random_range(-20.0..20.0)).collect();
            assert!(t.phi(&x).abs() <= 2.5);
        }
        for _ in 0..50 {
            let x = sample_reference(t.spectrum(), ReferenceDensity::Gaussian, &mut rng);
            assert!(gradient_fd_error(&t, &x) < 1e-5);
        }
        assert!(TargetModel::bounded_perturbation(
            Spectrum::power_law(0.5, 3).unwrap(),
            ReferenceDensity::Gaussian,
            0.0
        )
        .is_err());
    }

    #[test]
    fn whitened_target_agrees_with_original() {
        let spectrum = Spectrum::power_law(1.0, 6).unwrap();
        let t = TargetModel::bounded_perturbation(spectrum, ReferenceDensity::Gaussian, 1.0).unwrap();
        let w = t.whitened().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = sample_reference(t.spectrum(), ReferenceDensity::Gaussian, &mut rng);
        let u: Vec<f64> = x.iter().zip(t.scales()).map(|(x, l)| x / l).collect();
        assert!((t.phi(&x) - w.phi(&u)).abs() < 1e-14);
        assert!(gradient_fd_error(&w, &u) < 1e-5);
        assert!(w.scales().iter().all(|&s| s == 1.0));
    }

    #[test]
    fn log_reference_density_is_normalized_product() {
        let spectrum = Spectrum::power_law(1.0, 2).unwrap();
        let t = TargetModel::product(spectrum, ReferenceDensity::Gaussian);
        // N(0,1) × N(0,1/4) at (0, 0): -log(2π) + log 2
        let expected = -(2.0 * std::f64::consts::PI).ln() + 2f64.ln();
        assert!((t.log_reference_density(&[0.0, 0.0]) - expected).abs() < 1e-14);
    }
}
