//! Limiting-scaling predictions: the constants K^RWM, K^SLA, the limiting variance
//! factors T_p, the acceptance curves a(l) and their optimal step constants.
//!
//! The limiting log acceptance ratio is N(-v/2, v) with
//! v = l²·K^RWM·T₂ for RWM and v = l⁶·K^SLA·T₆ for SLA, so a(l) = 2Φ(-√v/2).

use crate::density::ReferenceDensity;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::special::{log_normal_cdf, normal_cdf};
use crate::spectrum::Spectrum;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Rwm,
    Sla,
}

impl Algorithm {
    /// Step-size penalty I: σ² ∝ n^{-(2κ+I)}.
    pub fn index(self) -> f64 {
        match self {
            Self::Rwm => 1.0,
            Self::Sla => 1.0 / 3.0,
        }
    }

    /// Power p of the limiting factor T_p entering the variance.
    pub fn power(self) -> i32 {
        match self {
            Self::Rwm => 2,
            Self::Sla => 6,
        }
    }

    pub fn k_constant(self, f: ReferenceDensity) -> Result<f64> {
        match self {
            Self::Rwm => k_rwm(f),
            Self::Sla => k_sla(f),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rwm => "rwm",
            Self::Sla => "sla",
        })
    }
}

/// Everything needed to predict the limiting acceptance and efficiency of one kernel class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingLaw {
    pub algorithm: Algorithm,
    pub index: f64,
    pub k: f64,
    /// T₂ for RWM, T₆ for SLA.
    pub t_limit: f64,
    pub kappa: f64,
}

impl ScalingLaw {
    pub fn new(algorithm: Algorithm, k: f64, t_limit: f64, kappa: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) || !(t_limit > 0.0 && t_limit.is_finite()) {
            return Err(Error::Domain(format!("K and T must be positive, got K = {k}, T = {t_limit}")));
        }
        if !(kappa >= 0.0) {
            return Err(Error::Domain(format!("decay exponent must be >= 0, got {kappa}")));
        }
        Ok(Self { algorithm, index: algorithm.index(), k, t_limit, kappa })
    }

    /// The law for reference density `f` and a spectrum family.
    pub fn for_family(algorithm: Algorithm, f: ReferenceDensity, family: &SpectrumFamily) -> Result<Self> {
        let t = limit_factor(family, algorithm.power())?;
        Self::new(algorithm, algorithm.k_constant(f)?, t, family.kappa())
    }

    /// Critical step exponent ρ = 2κ + I.
    pub fn rho(&self) -> f64 {
        2.0 * self.kappa + self.index
    }

    /// Limiting variance of the log acceptance ratio at step constant l.
    pub fn variance(&self, l: f64) -> f64 {
        l.powi(self.algorithm.power()) * self.k * self.t_limit
    }

    /// The limiting-variance factor in the reciprocal convention (1 + 2κ for a
    /// power-law RWM spectrum).
    pub fn tau_reciprocal(&self) -> f64 {
        1.0 / self.t_limit
    }

    /// Limiting squared jump distance normalized by n^{-ρ}: l²a(l).
    pub fn sjd_coefficient(&self, l: f64) -> f64 {
        l * l * a_theoretical(self, l)
    }
}

/// K^RWM = E_f[g′(X)²].
pub fn k_rwm(f: ReferenceDensity) -> Result<f64> {
    if f.is_gaussian() {
        return Ok(1.0);
    }
    f.expect(|u| f.g1(u).powi(2))
}

/// E_f[g″(X)], equal to K^RWM by integration by parts.
pub fn k_rwm_by_parts(f: ReferenceDensity) -> Result<f64> {
    f.expect(|u| f.g2(u))
}

/// K^SLA = E_f[3g″(X)³ + 5g‴(X)²]/48.
pub fn k_sla(f: ReferenceDensity) -> Result<f64> {
    if f.is_gaussian() {
        return Ok(1.0 / 16.0);
    }
    let k = f.expect(|u| 3.0 * f.g2(u).powi(3) + 5.0 * f.g3(u).powi(2))? / 48.0;
    if !(k > 0.0) {
        return Err(Error::Numeric(format!("K^SLA must be positive, got {k}")));
    }
    Ok(k)
}

/// A family of spectra indexed by a size parameter, for the n → ∞ limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpectrumFamily {
    PowerLaw {
        kappa: f64,
    },
    BridgeSpectral {
        beta: f64,
        horizon: f64,
        d: usize,
    },
    BridgeFd {
        beta: f64,
        horizon: f64,
        d: usize,
    },
    NsPrior {
        alpha: f64,
    },
    /// Whitened coordinates: all scales 1.
    Unit,
}

impl SpectrumFamily {
    pub fn kappa(&self) -> f64 {
        match *self {
            Self::PowerLaw { kappa } => kappa,
            Self::BridgeSpectral { .. } | Self::BridgeFd { .. } => 1.0,
            Self::NsPrior { alpha } => alpha / 2.0,
            Self::Unit => 0.0,
        }
    }

    /// Member with size parameter `m`: n = m for power laws, m modes (n = d·m) for
    /// bridges, Fourier cutoff m (n = 4m(m+1)) for the Navier–Stokes prior.
    pub fn member(&self, m: usize) -> Result<Spectrum> {
        match *self {
            Self::PowerLaw { kappa } => Spectrum::power_law(kappa, m),
            Self::BridgeSpectral { beta, horizon, d } => Spectrum::bridge_spectral(beta, horizon, d, m),
            Self::BridgeFd { beta, horizon, d } => Spectrum::bridge_fd(beta, horizon, d, m),
            Self::NsPrior { alpha } => Spectrum::ns_prior(alpha, m),
            Self::Unit => Spectrum::unit(m),
        }
    }

    /// Size parameters used for extrapolation, chosen so n runs over 2¹⁰ … 2¹⁶
    /// (roughly, for the prior).
    fn extrapolation_grid(&self) -> Vec<usize> {
        match *self {
            Self::NsPrior { .. } => (4..=7).map(|k| 1usize << k).collect(),
            Self::BridgeSpectral { d, .. } | Self::BridgeFd { d, .. } => {
                (10..=16).map(|k| ((1usize << k) / d).max(1)).collect()
            }
            _ => (10..=16).map(|k| 1usize << k).collect(),
        }
    }

    /// T_p in closed form, where known.
    pub fn closed_form(&self, p: i32) -> Option<f64> {
        let pf = p as f64;
        match *self {
            Self::PowerLaw { kappa } => Some(1.0 / (pf * kappa + 1.0)),
            Self::Unit => Some(1.0),
            Self::BridgeSpectral { beta, horizon, d } => {
                // λ = √(2/β)T/(π m): T_p = (β/2)^{p/2} π^p / ((p+1) T^p d^p)
                Some((beta / 2.0).powf(pf / 2.0) * PI.powf(pf) / ((pf + 1.0) * (horizon * d as f64).powf(pf)))
            }
            Self::BridgeFd { beta, horizon, d } => {
                // (2/π)∫₀^{π/2} sin^p = (p-1)!!/p!!
                let wallis = match p {
                    2 => 0.5,
                    6 => 5.0 / 16.0,
                    _ => return None,
                };
                Some((2.0 * beta).powf(pf / 2.0) * wallis / (horizon * d as f64).powf(pf))
            }
            Self::NsPrior { alpha } => Some(ns_prior_limit_factor(alpha, p)),
        }
    }
}

/// π^{pα}∬_{[0,1]²}(x² + y²)^{pα/2} dx dy by 256² tensor Gauss–Legendre.
pub fn ns_prior_limit_factor(alpha: f64, p: i32) -> f64 {
    let (nodes, weights) = gauss_legendre(256);
    let e = p as f64 * alpha / 2.0;
    let mut total = 0.0;
    for (x, wx) in nodes.iter().zip(&weights) {
        let x = 0.5 * (x + 1.0);
        for (y, wy) in nodes.iter().zip(&weights) {
            let y = 0.5 * (y + 1.0);
            total += wx * wy * (x * x + y * y).powf(e);
        }
    }
    PI.powf(p as f64 * alpha) * 0.25 * total
}

/// Result of extrapolating n^{-(pκ+1)} Σλ^{-p} to n = ∞.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: f64,
    /// (n, finite-n value) along the grid.
    pub partials: Vec<(usize, f64)>,
    /// |difference| between the last two Richardson estimates.
    pub spread: f64,
}

/// Richardson extrapolation assuming an O(1/n) leading error, one step per
/// consecutive pair of grid points. Fails if the last two estimates disagree by
/// more than 1e-3 relative.
pub fn limit_factor_extrapolated(family: &SpectrumFamily, p: i32) -> Result<LimitEstimate> {
    check_power(p)?;
    let partials = family
        .extrapolation_grid()
        .into_iter()
        .map(|m| {
            let s = family.member(m)?;
            Ok((s.n(), s.partial_limit_factor(p)))
        })
        .collect::<Result<Vec<_>>>()?;
    let richardson: Vec<f64> = partials
        .windows(2)
        .map(|w| {
            let ratio = w[1].0 as f64 / w[0].0 as f64;
            (ratio * w[1].1 - w[0].1) / (ratio - 1.0)
        })
        .collect();
    let k = richardson.len();
    let value = richardson[k - 1];
    let spread = (richardson[k - 1] - richardson[k - 2]).abs();
    if !value.is_finite() || spread > 1e-3 * value.abs() {
        return Err(Error::Numeric(format!(
            "limit factor T_{p} did not converge for {family:?}: partial values {partials:?}, \
             extrapolations {richardson:?}"
        )));
    }
    Ok(LimitEstimate { value, partials, spread })
}

/// T_p for a spectrum family: closed form when known, extrapolation otherwise.
pub fn limit_factor(family: &SpectrumFamily, p: i32) -> Result<f64> {
    check_power(p)?;
    match family.closed_form(p) {
        Some(v) => Ok(v),
        None => Ok(limit_factor_extrapolated(family, p)?.value),
    }
}

fn check_power(p: i32) -> Result<()> {
    if p != 2 && p != 6 {
        return Err(Error::Domain(format!("limit factor power must be 2 or 6, got {p}")));
    }
    Ok(())
}

/// a(l) = 2Φ(-√v/2) with v the law's limiting variance.
pub fn a_theoretical(law: &ScalingLaw, l: f64) -> f64 {
    2.0 * normal_cdf(-0.5 * law.variance(l).sqrt())
}

/// E[1 ∧ e^X] for X ~ N(μ, σ²): Φ(μ/σ) + e^{μ+σ²/2}Φ(-σ - μ/σ).
pub fn gaussian_expected_min(mu: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return mu.exp().min(1.0);
    }
    let second = (mu + 0.5 * sigma * sigma + log_normal_cdf(-sigma - mu / sigma)).exp();
    (normal_cdf(mu / sigma) + second).min(1.0)
}

/// Maximizer of l²a(l) and the acceptance there.
pub fn optimal_l(law: &ScalingLaw) -> Result<(f64, f64)> {
    // With w = l(K·T)^{1/q}, l²a(l) ∝ w²·2Φ(-w^{q/2}/2): solve once in w.
    let q = law.algorithm.power();
    let scale = (law.k * law.t_limit).powf(1.0 / q as f64);
    let h = |w: f64| w * w * 2.0 * normal_cdf(-0.5 * w.powf(q as f64 / 2.0));
    // coarse log-grid scan first: h underflows to a flat zero far to the right
    let grid: Vec<f64> = (0..=200).map(|k| 1e-3 * (2e4f64).powf(k as f64 / 200.0)).collect();
    let best = (1..grid.len() - 1).max_by(|&i, &j| h(grid[i]).total_cmp(&h(grid[j]))).expect("nonempty grid");
    let w = golden_section_max(h, grid[best - 1], grid[best + 1], 1e-12)?;
    let l = w / scale;
    Ok((l, a_theoretical(law, l)))
}

fn golden_section_max<F: Fn(f64) -> f64>(h: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut hc, mut hd) = (h(c), h(d));
    while (b - a).abs() > tol * (1.0 + a.abs()) {
        if hc > hd {
            b = d;
            d = c;
            hd = hc;
            c = b - inv_phi * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + inv_phi * (b - a);
            hd = h(d);
        }
    }
    let x = 0.5 * (a + b);
    let edge = 1e-6 * (hi - lo);
    if x - lo < edge || hi - x < edge {
        return Err(Error::Numeric(format!("maximum not bracketed in [{lo}, {hi}], search ended at {x}")));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn law(algorithm: Algorithm, kt: f64) -> ScalingLaw {
        ScalingLaw::new(algorithm, kt, 1.0, 0.0).unwrap()
    }

    #[test]
    fn k_constants() {
        assert_eq!(k_rwm(ReferenceDensity::Gaussian).unwrap(), 1.0);
        assert_eq!(k_sla(ReferenceDensity::Gaussian).unwrap(), 0.0625);
        assert!((k_rwm(ReferenceDensity::Logistic).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        for f in ReferenceDensity::ALL {
            let a = f.expect(|u| f.g1(u).powi(2)).unwrap();
            let b = k_rwm_by_parts(f).unwrap();
            assert!((a - b).abs() < 1e-8, "{f}: {a} vs {b}");
            assert!(k_sla(f).unwrap() > 0.0);
        }
        let g = ReferenceDensity::Gaussian;
        let by_quadrature = g.expect(|u| 3.0 * g.g2(u).powi(3) + 5.0 * g.g3(u).powi(2)).unwrap() / 48.0;
        assert!((by_quadrature - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn k_constants_against_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let reps = 400_000;
        for f in [ReferenceDensity::Logistic, ReferenceDensity::Hyperbolic] {
            for (exact, h) in [
                (k_rwm(f).unwrap(), &(|u: f64| f.g1(u).powi(2)) as &dyn Fn(f64) -> f64),
                (k_sla(f).unwrap(), &|u: f64| (3.0 * f.g2(u).powi(3) + 5.0 * f.g3(u).powi(2)) / 48.0),
            ] {
                let draws: Vec<f64> = (0..reps).map(|_| h(f.sample(&mut rng))).collect();
                let mean = draws.iter().sum::<f64>() / reps as f64;
                let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
                let se = (var / reps as f64).sqrt();
                assert!((mean - exact).abs() < 3.0 * se + 1e-6, "{f}: MC {mean} ± {se} vs {exact}");
            }
        }
    }

    #[test]
    fn limit_factor_closed_forms() {
        assert_eq!(limit_factor(&SpectrumFamily::PowerLaw { kappa: 0.0 }, 2).unwrap(), 1.0);
        assert!((limit_factor(&SpectrumFamily::PowerLaw { kappa: 1.0 }, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let (beta, horizon, d) = (2.0, 1.0, 1);
        let sp = SpectrumFamily::BridgeSpectral { beta, horizon, d };
        assert!((limit_factor(&sp, 2).unwrap() - beta * PI * PI / 6.0).abs() < 1e-12);
        assert!((limit_factor(&sp, 6).unwrap() - beta.powi(3) * PI.powi(6) / 56.0).abs() < 1e-9);
        let fd = SpectrumFamily::BridgeFd { beta, horizon, d };
        assert!((limit_factor(&fd, 2).unwrap() - beta).abs() < 1e-12);
        assert!((limit_factor(&fd, 6).unwrap() - 2.5 * beta.powi(3)).abs() < 1e-12);
        assert!(limit_factor(&fd, 4).is_err());
    }

    #[test]
    fn extrapolation_matches_closed_forms() {
        for kappa in [0.0, 0.5, 1.0] {
            let fam = SpectrumFamily::PowerLaw { kappa };
            for p in [2, 6] {
                let est = limit_factor_extrapolated(&fam, p).unwrap();
                let exact = fam.closed_form(p).unwrap();
                assert!((est.value - exact).abs() < 1e-4, "κ={kappa} p={p}: {} vs {exact}", est.value);
                // finite-n values decrease monotonically towards the limit
                if kappa > 0.0 {
                    assert!(est.partials.windows(2).all(|w| w[1].1 <= w[0].1));
                }
            }
        }
        for fam in [
            SpectrumFamily::BridgeSpectral { beta: 2.0, horizon: 1.0, d: 2 },
            SpectrumFamily::BridgeFd { beta: 1.5, horizon: 2.0, d: 1 },
        ] {
            for p in [2, 6] {
                let est = limit_factor_extrapolated(&fam, p).unwrap().value;
                let exact = fam.closed_form(p).unwrap();
                assert!((est - exact).abs() < 1e-4 * exact, "{fam:?} p={p}: {est} vs {exact}");
            }
        }
    }

    #[test]
    fn ns_prior_limit() {
        // ∬(x²+y²) = 2/3 and ∬(x²+y²)² = 28/45
        assert!((ns_prior_limit_factor(1.0, 2) - 2.0 * PI * PI / 3.0).abs() < 1e-12);
        assert!((ns_prior_limit_factor(2.0, 2) - PI.powi(4) * 28.0 / 45.0).abs() < 1e-10);
        for alpha in [1.5, 2.0] {
            let fam = SpectrumFamily::NsPrior { alpha };
            let est = limit_factor_extrapolated(&fam, 2).unwrap().value;
            let exact = fam.closed_form(2).unwrap();
            assert!((est - exact).abs() < 1e-4 * exact, "α={alpha}: {est} vs {exact}");
        }
    }

    #[test]
    fn acceptance_curve() {
        let rwm = law(Algorithm::Rwm, 1.0);
        assert!((a_theoretical(&rwm, 1e-9) - 1.0).abs() < 1e-9);
        assert!((a_theoretical(&rwm, 2.38) - 0.2340).abs() < 1e-4);
        let mut prev = 1.0;
        for k in 1..200 {
            let a = a_theoretical(&rwm, k as f64 * 0.05);
            assert!(a < prev && a > 0.0);
            prev = a;
        }
    }

    #[test]
    fn two_routes_to_acceptance_agree() {
        for algorithm in [Algorithm::Rwm, Algorithm::Sla] {
            let law = ScalingLaw::new(algorithm, 0.7, 1.3, 0.5).unwrap();
            for l in [0.1, 0.5, 1.0, 2.0, 3.5] {
                let v = law.variance(l);
                let a = gaussian_expected_min(-v / 2.0, v.sqrt());
                assert!((a - a_theoretical(&law, l)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn optimal_acceptance_rates() {
        let (l, a) = optimal_l(&law(Algorithm::Rwm, 1.0)).unwrap();
        assert!((a - 0.234).abs() < 1e-3);
        assert!((l - 2.38).abs() < 5e-3);
        let (l, a) = optimal_l(&law(Algorithm::Sla, 1.0 / 16.0)).unwrap();
        assert!((a - 0.574).abs() < 1e-3);
        assert!((l - 1.6503).abs() < 1e-3);
        for kt in [1e-2, 1.0, 10.0, 1e3] {
            assert!((optimal_l(&law(Algorithm::Rwm, kt)).unwrap().1 - 0.234).abs() < 1e-3);
            assert!((optimal_l(&law(Algorithm::Sla, kt)).unwrap().1 - 0.574).abs() < 1e-3);
        }
        let base = optimal_l(&law(Algorithm::Rwm, 1.0)).unwrap().0;
        let scaled = optimal_l(&law(Algorithm::Rwm, 9.0)).unwrap().0;
        assert!((scaled - base / 3.0).abs() < 1e-8);
    }

    #[test]
    fn expected_min_examples() {
        assert_eq!(gaussian_expected_min(0.0, 0.0), 1.0);
        assert_eq!(gaussian_expected_min(-1.0, 0.0), (-1f64).exp());
        assert!((gaussian_expected_min(-2.0, 2.0) - 2.0 * normal_cdf(-1.0)).abs() < 1e-14);
        assert!((gaussian_expected_min(-2.0, 2.0) - 0.31731).abs() < 1e-5);
    }

    #[test]
    fn expected_min_against_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let reps = 200_000;
        for &mu in &[-3.0, -0.5, 0.0, 1.0] {
            for &sigma in &[0.1, 0.5, 1.0, 2.0, 4.0] {
                let dist: Normal<f64> = Normal::new(mu, sigma).unwrap();
                let draws: Vec<f64> = (0..reps).map(|_| dist.sample(&mut rng).exp().min(1.0)).collect();
                let mean = draws.iter().sum::<f64>() / reps as f64;
                let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
                let se = (var / reps as f64).sqrt();
                let exact = gaussian_expected_min(mu, sigma);
                assert!((mean - exact).abs() < 4.0 * se + 1e-12, "μ={mu} σ={sigma}");
            }
        }
    }

    #[test]
    fn tau_conventions() {
        let l = ScalingLaw::for_family(
            Algorithm::Rwm,
            ReferenceDensity::Gaussian,
            &SpectrumFamily::PowerLaw { kappa: 1.0 },
        )
        .unwrap();
        assert!((l.tau_reciprocal() - 3.0).abs() < 1e-12);
        assert_eq!(l.rho(), 3.0);
    }
}
