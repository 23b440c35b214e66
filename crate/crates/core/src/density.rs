//! Scalar reference densities f = exp{-g} with analytic derivatives of g.

use crate::error::Result;
use crate::quadrature::integrate;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

/// Number of grid points in the inverse-CDF sampling table.
pub const CDF_TABLE_POINTS: usize = 1 << 14;

/// A smooth, normalized scalar density f(u) = exp{-g(u)} with finite moments of all
/// orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceDensity {
    /// Standard normal: g(u) = u²/2 + ½ log 2π.
    Gaussian,
    /// Standard logistic: g(u) = u + 2 log(1 + e^{-u}).
    Logistic,
    /// Symmetric hyperbolic ("smoothed Laplace"): g(u) = √(1+u²) + log Z.
    Hyperbolic,
}

impl ReferenceDensity {
    pub const ALL: [ReferenceDensity; 3] =
        [ReferenceDensity::Gaussian, ReferenceDensity::Logistic, ReferenceDensity::Hyperbolic];

    #[inline]
    pub fn g(self, u: f64) -> f64 {
        match self {
            Self::Gaussian => 0.5 * u * u + 0.5 * (2.0 * PI).ln(),
            Self::Logistic => {
                let a = u.abs();
                a + 2.0 * (-a).exp().ln_1p()
            }
            Self::Hyperbolic => (1.0 + u * u).sqrt() + hyperbolic_log_normalizer(),
        }
    }

    #[inline]
    pub fn g1(self, u: f64) -> f64 {
        match self {
            Self::Gaussian => u,
            Self::Logistic => (0.5 * u).tanh(),
            Self::Hyperbolic => u / (1.0 + u * u).sqrt(),
        }
    }

    #[inline]
    pub fn g2(self, u: f64) -> f64 {
        match self {
            Self::Gaussian => 1.0,
            Self::Logistic => {
                let t = (0.5 * u).tanh();
                0.5 * (1.0 - t * t)
            }
            Self::Hyperbolic => (1.0 + u * u).powf(-1.5),
        }
    }

    #[inline]
    pub fn g3(self, u: f64) -> f64 {
        match self {
            Self::Gaussian => 0.0,
            Self::Logistic => {
                let t = (0.5 * u).tanh();
                -0.5 * (1.0 - t * t) * t
            }
            Self::Hyperbolic => -3.0 * u * (1.0 + u * u).powf(-2.5),
        }
    }

    #[inline]
    pub fn pdf(self, u: f64) -> f64 {
        (-self.g(u)).exp()
    }

    pub fn is_gaussian(self) -> bool {
        matches!(self, Self::Gaussian)
    }

    /// Half-width of the interval carrying all but a negligible amount of mass
    /// (tail mass below 1e-40 even against polynomial integrands).
    fn support_half_width(self) -> f64 {
        match self {
            Self::Gaussian => 40.0,
            Self::Logistic | Self::Hyperbolic => 200.0,
        }
    }

    /// E_f[h(X)] by adaptive Gauss–Kronrod quadrature.
    pub fn expect<H: Fn(f64) -> f64>(self, h: H) -> Result<f64> {
        let l = self.support_half_width();
        let integrand = |u: f64| h(u) * self.pdf(u);
        // Split at ±10 so the adaptive scheme does not waste work on the tails.
        let mut total = 0.0;
        for (a, b) in [(-l, -10.0), (-10.0, 10.0), (10.0, l)] {
            total += integrate(integrand, a, b, 1e-14, 1e-13)?;
        }
        Ok(total)
    }

    /// Draw ξ ~ f. The Gaussian uses the ziggurat sampler; other densities go
    /// through an inverse-CDF lookup table.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian => rng.sample(StandardNormal),
            _ => self.cdf_table().invert(rng.random::<f64>()),
        }
    }

    fn cdf_table(self) -> &'static CdfTable {
        static LOGISTIC: OnceLock<CdfTable> = OnceLock::new();
        static HYPERBOLIC: OnceLock<CdfTable> = OnceLock::new();
        static GAUSSIAN: OnceLock<CdfTable> = OnceLock::new();
        let cell = match self {
            Self::Gaussian => &GAUSSIAN,
            Self::Logistic => &LOGISTIC,
            Self::Hyperbolic => &HYPERBOLIC,
        };
        cell.get_or_init(|| CdfTable::build(self, 40.0))
    }

    /// Inverse-CDF transform through the lookup table. Exposed for testing the
    /// table against closed-form quantiles.
    pub fn table_quantile(self, p: f64) -> f64 {
        self.cdf_table().invert(p)
    }
}

fn hyperbolic_log_normalizer() -> f64 {
    static LOG_Z: OnceLock<f64> = OnceLock::new();
    *LOG_Z.get_or_init(|| {
        let f = |u: f64| (-(1.0 + u * u).sqrt()).exp();
        let z: f64 = [(-200.0, -10.0), (-10.0, 10.0), (10.0, 200.0)]
            .iter()
            .map(|&(a, b)| integrate(f, a, b, 1e-15, 1e-14).expect("hyperbolic normalizer"))
            .sum();
        z.ln()
    })
}

/// Tabulated CDF on a uniform grid, inverted by bisection and linear interpolation.
#[derive(Debug)]
struct CdfTable {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl CdfTable {
    fn build(f: ReferenceDensity, half_width: f64) -> Self {
        let m = CDF_TABLE_POINTS;
        let h = 2.0 * half_width / (m - 1) as f64;
        let grid: Vec<f64> = (0..m).map(|j| -half_width + j as f64 * h).collect();
        let mut cdf = Vec::with_capacity(m);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in grid.windows(2) {
            acc += integrate(|u| f.pdf(u), w[0], w[1], 1e-17, 1e-12).unwrap_or(0.0);
            cdf.push(acc);
        }
        // Renormalize away the truncated tail mass.
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        Self { grid, cdf }
    }

    fn invert(&self, p: f64) -> f64 {
        let j = self.cdf.partition_point(|&c| c < p).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let (u0, u1) = (self.grid[j - 1], self.grid[j]);
        if c1 > c0 {
            u0 + (p - c0) / (c1 - c0) * (u1 - u0)
        } else {
            u0
        }
    }
}

impl fmt::Display for ReferenceDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "gaussian",
            Self::Logistic => "logistic",
            Self::Hyperbolic => "hyperbolic",
        })
    }
}

impl FromStr for ReferenceDensity {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "logistic" => Ok(Self::Logistic),
            "hyperbolic" => Ok(Self::Hyperbolic),
            other => Err(crate::Error::Configuration(format!(
                "unknown reference density '{other}' (expected gaussian, logistic or hyperbolic)"
            ))),
        }
    }
}
