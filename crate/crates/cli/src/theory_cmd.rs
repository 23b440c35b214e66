//! The `theory` table: constants K and T_p, critical exponents, optimal step
//! constants and samples of the acceptance curves for one target family.

use clap::{Args, ValueEnum};
use scaling_lab::theory::{a_theoretical, k_rwm, k_sla, limit_factor, optimal_l, SpectrumFamily};
use scaling_lab::{Algorithm, ReferenceDensity, ScalingLaw};
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Product,
    BoundedPerturbation,
    BridgeSpectral,
    BridgeFd,
    NsPrior,
}

#[derive(Debug, Clone, Args)]
pub struct TheoryArgs {
    /// Target family.
    #[arg(long, value_enum)]
    pub target: Family,
    /// Scale decay exponent (product and bounded-perturbation families).
    #[arg(long, default_value_t = 0.0)]
    pub kappa: f64,
    /// Reference density f (gaussian, logistic, hyperbolic).
    #[arg(long = "f", default_value = "gaussian")]
    pub density: ReferenceDensity,
    /// Inverse temperature of a bridge.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Time horizon of a bridge.
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    /// Path dimension of a bridge.
    #[arg(long)]
    pub d: Option<usize>,
    /// Regularity exponent of the NS prior.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Step constants at which to sample a(l); defaults to multiples of l*.
    #[arg(long = "l", value_delimiter = ',')]
    pub l_values: Vec<f64>,
}

const FACTORS: [f64; 8] = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0];

fn required<T: Copy>(v: Option<T>, flag: &str, family: &str) -> Result<T, String> {
    v.ok_or_else(|| format!("--{flag} is required for --target {family}"))
}

impl TheoryArgs {
    fn spectrum_family(&self) -> Result<(SpectrumFamily, String), String> {
        let bridge = |name: &str| -> Result<(f64, f64, usize), String> {
            Ok((required(self.beta, "beta", name)?, required(self.horizon, "T", name)?, required(self.d, "d", name)?))
        };
        Ok(match self.target {
            Family::Product | Family::BoundedPerturbation => {
                (SpectrumFamily::PowerLaw { kappa: self.kappa }, format!("kappa = {}", self.kappa))
            }
            Family::BridgeSpectral => {
                let (beta, horizon, d) = bridge("bridge-spectral")?;
                (SpectrumFamily::BridgeSpectral { beta, horizon, d }, format!("beta = {beta}, T = {horizon}, d = {d}"))
            }
            Family::BridgeFd => {
                let (beta, horizon, d) = bridge("bridge-fd")?;
                (SpectrumFamily::BridgeFd { beta, horizon, d }, format!("beta = {beta}, T = {horizon}, d = {d}"))
            }
            Family::NsPrior => {
                let alpha = required(self.alpha, "alpha", "ns-prior")?;
                (SpectrumFamily::NsPrior { alpha }, format!("alpha = {alpha}"))
            }
        })
    }

    fn density(&self) -> Result<ReferenceDensity, String> {
        match self.target {
            Family::Product | Family::BoundedPerturbation => Ok(self.density),
            _ if self.density == ReferenceDensity::Gaussian => Ok(self.density),
            _ => Err(format!("--target {} is Gaussian; --f {} does not apply", self.name(), self.density)),
        }
    }

    fn name(&self) -> String {
        self.target.to_possible_value().expect("not skipped").get_name().to_string()
    }
}

/// Renders the table, or an error message for the caller to print.
pub fn render(args: &TheoryArgs) -> Result<String, String> {
    let (family, params) = args.spectrum_family()?;
    let f = args.density()?;
    let err = |e: scaling_lab::Error| e.to_string();
    let krwm = k_rwm(f).map_err(err)?;
    let ksla = k_sla(f).map_err(err)?;
    let t2 = limit_factor(&family, 2).map_err(err)?;
    let t6 = limit_factor(&family, 6).map_err(err)?;

    let mut s = String::new();
    let w = &mut s;
    writeln!(w, "target   {} ({params}), f = {f}", args.name()).unwrap();
    writeln!(w, "kappa    {}", family.kappa()).unwrap();
    writeln!(w, "K^RWM    {krwm:.6}").unwrap();
    writeln!(w, "K^SLA    {ksla:.6}").unwrap();
    writeln!(w, "T_2      {t2:.6}").unwrap();
    writeln!(w, "T_6      {t6:.6}").unwrap();
    writeln!(w).unwrap();

    let mut laws = Vec::new();
    for algorithm in [Algorithm::Rwm, Algorithm::Sla] {
        let law = ScalingLaw::for_family(algorithm, f, &family).map_err(err)?;
        let (l_star, a_star) = optimal_l(&law).map_err(err)?;
        writeln!(
            w,
            "{:<4} rho = {:.6}  l_star = {l_star:.6}  a_star = {a_star:.6}  l*^2 a* = {:.6}",
            algorithm.to_string().to_uppercase(),
            law.rho(),
            law.sjd_coefficient(l_star)
        )
        .unwrap();
        laws.push((algorithm, law, l_star));
    }

    for (algorithm, law, l_star) in &laws {
        let name = algorithm.to_string().to_uppercase();
        writeln!(w, "\na(l), {name}\n{:>10} {:>10} {:>12}", "l", "a(l)", "l^2 a(l)").unwrap();
        let ls: Vec<f64> =
            if args.l_values.is_empty() { FACTORS.iter().map(|c| c * l_star).collect() } else { args.l_values.clone() };
        for l in ls {
            let a = a_theoretical(law, l);
            writeln!(w, "{l:>10.4} {a:>10.6} {:>12.6}", l * l * a).unwrap();
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(target: Family) -> TheoryArgs {
        TheoryArgs {
            target,
            kappa: 0.0,
            density: ReferenceDensity::Gaussian,
            beta: None,
            horizon: None,
            d: None,
            alpha: None,
            l_values: vec![],
        }
    }

    #[test]
    fn product_table_lists_known_constants() {
        let t = render(&args(Family::Product)).unwrap();
        assert!(t.contains("K^RWM    1.000000"), "{t}");
        assert!(t.contains("K^SLA    0.062500"), "{t}");
        assert!(t.contains("a_star = 0.2338"), "{t}");
        assert!(t.contains("a_star = 0.574"), "{t}");
    }

    #[test]
    fn bridge_needs_its_parameters() {
        let e = render(&args(Family::BridgeSpectral)).unwrap_err();
        assert!(e.contains("--beta"), "{e}");
        let mut a = args(Family::BridgeSpectral);
        a.beta = Some(2.0);
        a.horizon = Some(1.0);
        a.d = Some(1);
        assert!(render(&a).unwrap().contains("T_2      3.289868"));
    }

    #[test]
    fn custom_l_values_are_used() {
        let mut a = args(Family::Product);
        a.l_values = vec![1.0, 2.0];
        let t = render(&a).unwrap();
        assert!(t.contains("    1.0000 "));
        assert!(t.contains("    2.0000 "));
    }

    #[test]
    fn non_gaussian_f_rejected_for_bridges() {
        let mut a = args(Family::NsPrior);
        a.alpha = Some(2.0);
        a.density = ReferenceDensity::Logistic;
        assert!(render(&a).is_err());
    }
}
