//! The scaling sweep: a grid of (n, ρ, l, kernel) points, each run as independent
//! replicate chains and compared with the limiting predictions.

use super::observers::{
    lag1_from_sjd, AcceptanceEstimate, AcceptanceObserver, SjdEstimate, SjdObserver, TraceObserver,
};
use crate::density::ReferenceDensity;
use crate::error::{Error, Result};
use crate::samplers::{run_chain, InitialState, ProposalKind, StepSize};
use crate::seeding::{replicate_rng, row_seed};
use crate::targets::{
    bridge_target_fd, bridge_target_spectral, ns_prior_target, BridgeModel, NsPriorModel, Potential, TargetModel,
};
use crate::theory::{a_theoretical, optimal_l, Algorithm, ScalingLaw, SpectrumFamily};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

fn gaussian() -> ReferenceDensity {
    ReferenceDensity::Gaussian
}

/// Target families a sweep can instantiate at any grid size n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum TargetFamily {
    Product {
        kappa: f64,
        #[serde(default = "gaussian")]
        density: ReferenceDensity,
    },
    BoundedPerturbation {
        kappa: f64,
        bound: f64,
        #[serde(default = "gaussian")]
        density: ReferenceDensity,
    },
    /// n = d·N coordinates.
    BridgeSpectral {
        potential: Potential,
        beta: f64,
        #[serde(rename = "T")]
        horizon: f64,
        d: usize,
    },
    BridgeFd {
        potential: Potential,
        beta: f64,
        #[serde(rename = "T")]
        horizon: f64,
        d: usize,
    },
    /// n = 4N(N+1) coordinates. `observations` defaults to zeros.
    NsPrior {
        alpha: f64,
        obs: Vec<usize>,
        #[serde(default)]
        observations: Vec<f64>,
        sigma_obs: f64,
    },
}

impl TargetFamily {
    pub fn density(&self) -> ReferenceDensity {
        match self {
            Self::Product { density, .. } | Self::BoundedPerturbation { density, .. } => *density,
            _ => ReferenceDensity::Gaussian,
        }
    }

    pub fn spectrum_family(&self) -> SpectrumFamily {
        match *self {
            Self::Product { kappa, .. } | Self::BoundedPerturbation { kappa, .. } => SpectrumFamily::PowerLaw { kappa },
            Self::BridgeSpectral { beta, horizon, d, .. } => SpectrumFamily::BridgeSpectral { beta, horizon, d },
            Self::BridgeFd { beta, horizon, d, .. } => SpectrumFamily::BridgeFd { beta, horizon, d },
            Self::NsPrior { alpha, .. } => SpectrumFamily::NsPrior { alpha },
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, Self::Product { .. })
    }

    /// The member of the family with `n` coordinates.
    pub fn build(&self, n: usize) -> Result<TargetModel> {
        use crate::spectrum::Spectrum;
        match self {
            Self::Product { kappa, density } => Ok(TargetModel::product(Spectrum::power_law(*kappa, n)?, *density)),
            Self::BoundedPerturbation { kappa, bound, density } => {
                TargetModel::bounded_perturbation(Spectrum::power_law(*kappa, n)?, *density, *bound)
            }
            Self::BridgeSpectral { potential, beta, horizon, d } | Self::BridgeFd { potential, beta, horizon, d } => {
                if *d == 0 || !n.is_multiple_of(*d) {
                    return Err(Error::Configuration(format!(
                        "bridge with d = {d} needs n divisible by d, got n = {n}"
                    )));
                }
                let model = BridgeModel::new(*potential, *beta, *horizon, *d, n / d)?;
                if matches!(self, Self::BridgeSpectral { .. }) {
                    bridge_target_spectral(&model)
                } else {
                    bridge_target_fd(&model)
                }
            }
            Self::NsPrior { alpha, obs, observations, sigma_obs } => {
                let cutoff = ns_cutoff(n).ok_or_else(|| {
                    Error::Configuration(format!("ns-prior needs n = 4N(N+1) for some N >= 1, got n = {n}"))
                })?;
                let observations =
                    if observations.is_empty() { vec![0.0; 2 * obs.len()] } else { observations.clone() };
                ns_prior_target(&NsPriorModel {
                    alpha: *alpha,
                    cutoff,
                    obs_modes: obs.clone(),
                    observations,
                    sigma_obs: *sigma_obs,
                })
            }
        }
    }
}

fn ns_cutoff(n: usize) -> Option<usize> {
    let mut c = 1;
    while 4 * c * (c + 1) < n {
        c += 1;
    }
    (4 * c * (c + 1) == n).then_some(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimalKeyword {
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalKeyword {
    Critical,
}

/// A step constant l, or "optimal" for the maximizer of l²a(l).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepConstant {
    Value(f64),
    Keyword(OptimalKeyword),
}

/// A step exponent ρ, or "critical" for ρ = 2κ + I of each kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepExponent {
    Value(f64),
    Keyword(CriticalKeyword),
}

pub const DEFAULT_REPLICATES: usize = 8;
pub const DEFAULT_I_STAR: usize = 1;
pub const DEFAULT_TOLERANCE: f64 = 0.02;
pub const DEFAULT_SJD_TOLERANCE: f64 = 0.15;
pub const DEFAULT_DEGENERATE_HIGH: f64 = 0.95;
pub const DEFAULT_DEGENERATE_LOW: f64 = 0.01;

fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}
fn default_i_star() -> usize {
    DEFAULT_I_STAR
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}
fn default_sjd_tolerance() -> f64 {
    DEFAULT_SJD_TOLERANCE
}
fn default_high() -> f64 {
    DEFAULT_DEGENERATE_HIGH
}
fn default_low() -> f64 {
    DEFAULT_DEGENERATE_LOW
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub target: TargetFamily,
    pub kernels: Vec<ProposalKind>,
    pub n_grid: Vec<usize>,
    pub rho_grid: Vec<StepExponent>,
    pub l_grid: Vec<StepConstant>,
    /// Total steps per chain, burn-in included.
    pub iterations: usize,
    /// Defaults to 20% of the run for product targets and max(10⁴, 20%) otherwise,
    /// never more than half the run.
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub master_seed: u64,
    /// Tracked coordinate, 1-based.
    #[serde(default = "default_i_star")]
    pub i_star: usize,
    /// Absolute slack added to 3 SE when comparing acceptance with theory.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Relative slack added to 3 SE when comparing the SJD with theory.
    #[serde(default = "default_sjd_tolerance")]
    pub sjd_tolerance: f64,
    /// Acceptance must exceed this at the largest n when ρ > 2κ + I.
    #[serde(default = "default_high")]
    pub degenerate_high: f64,
    /// Acceptance must stay below this at the largest n when 2κ < ρ < 2κ + I.
    #[serde(default = "default_low")]
    pub degenerate_low: f64,
}

impl SweepConfig {
    pub fn effective_burn_in(&self) -> usize {
        match self.burn_in {
            Some(b) => b,
            None if self.target.is_product() => self.iterations / 5,
            None => (self.iterations / 5).max(10_000).min(self.iterations / 2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Configuration(m));
        if self.kernels.is_empty() {
            return fail("kernels must be nonempty".into());
        }
        if self.n_grid.is_empty() || self.rho_grid.is_empty() || self.l_grid.is_empty() {
            return fail("n_grid, rho_grid and l_grid must be nonempty".into());
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n == 0) {
            return fail(format!("n_grid entries must be positive, got {n}"));
        }
        for r in &self.rho_grid {
            if let StepExponent::Value(v) = r {
                if !(*v > 0.0 && v.is_finite()) {
                    return fail(format!("rho_grid entries must be positive, got {v}"));
                }
            }
        }
        for l in &self.l_grid {
            if let StepConstant::Value(v) = l {
                if !(*v > 0.0 && v.is_finite()) {
                    return fail(format!("l_grid entries must be positive, got {v}"));
                }
            }
        }
        if self.iterations == 0 || self.effective_burn_in() >= self.iterations {
            return fail(format!(
                "iterations ({}) must exceed burn_in ({})",
                self.iterations,
                self.effective_burn_in()
            ));
        }
        if self.replicates == 0 {
            return fail("replicates must be >= 1".into());
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| self.i_star == 0 || self.i_star > n) {
            return fail(format!("i_star = {} outside 1..={n}", self.i_star));
        }
        if !(self.tolerance >= 0.0) || !(self.sjd_tolerance >= 0.0) {
            return fail("tolerances must be >= 0".into());
        }
        Ok(())
    }
}

/// How a grid row relates to the critical exponent ρ = 2κ + I.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Critical,
    /// ρ > 2κ + I: acceptance → 1.
    Small,
    /// 2κ < ρ < 2κ + I: acceptance → 0.
    Large,
    /// ρ ≤ 2κ or no theory for the kernel.
    Unclassified,
}

/// The limiting law behind a kernel on a target family, if one is known.
pub fn law_for(kernel: ProposalKind, target: &TargetFamily) -> Result<Option<ScalingLaw>> {
    let (algorithm, family) = match kernel {
        ProposalKind::Rwm => (Algorithm::Rwm, target.spectrum_family()),
        ProposalKind::Sla => (Algorithm::Sla, target.spectrum_family()),
        ProposalKind::Prwm => (Algorithm::Rwm, SpectrumFamily::Unit),
        ProposalKind::Psla => (Algorithm::Sla, SpectrumFamily::Unit),
        ProposalKind::Mala | ProposalKind::ThetaSla(_) => return Ok(None),
    };
    ScalingLaw::for_family(algorithm, target.density(), &family).map(Some)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Position in grid order (n, ρ, l, kernel; kernel fastest).
    pub index: usize,
    pub n: usize,
    pub rho: f64,
    pub l: f64,
    pub kernel: ProposalKind,
    pub regime: Regime,
    pub acceptance: AcceptanceEstimate,
    pub sjd: SjdEstimate,
    pub accept_theory: Option<f64>,
    /// l²a(l)·n^{-ρ}, compared against the normalized SJD for preconditioned kernels
    /// and the raw SJD otherwise.
    pub sjd_theory: Option<f64>,
    /// 1 − S/(2·Var) at the tracked coordinate.
    pub lag1_corr: f64,
    /// Empirical lag-1 autocorrelation of the tracked coordinate.
    pub trace_lag1: f64,
    pub flags: Vec<String>,
    pub seed: u64,
    pub wall_ms: f64,
}

impl SweepRow {
    /// The SJD that `sjd_theory` predicts.
    pub fn sjd_compared(&self) -> (f64, f64) {
        if self.kernel.is_preconditioned() {
            (self.sjd.s_n_normalized, self.sjd.normalized_std_error)
        } else {
            (self.sjd.s_n, self.sjd.std_error)
        }
    }

    pub fn flag_label(&self) -> String {
        if self.flags.is_empty() {
            "ok".into()
        } else {
            self.flags.join("+")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn any_flagged(&self) -> bool {
        self.rows.iter().any(|r| !r.flags.is_empty())
    }
}

struct RowPlan {
    index: usize,
    target: usize,
    n: usize,
    rho: f64,
    l: f64,
    kernel: ProposalKind,
    law: Option<ScalingLaw>,
    regime: Regime,
    seed: u64,
}

struct ReplicateOutcome {
    acceptance: AcceptanceObserver,
    sjd: SjdObserver,
    trace: TraceObserver,
    millis: f64,
}

fn plan_rows(config: &SweepConfig) -> Result<Vec<RowPlan>> {
    let mut laws = Vec::with_capacity(config.kernels.len());
    for &k in &config.kernels {
        laws.push(law_for(k, &config.target)?);
    }
    let mut rows = Vec::new();
    for (t, &n) in config.n_grid.iter().enumerate() {
        for rho_spec in &config.rho_grid {
            for l_spec in &config.l_grid {
                for (&kernel, law) in config.kernels.iter().zip(&laws) {
                    let need_law = || {
                        law.ok_or_else(|| {
                            Error::Configuration(format!(
                                "kernel {kernel} has no limiting law, so 'critical'/'optimal' are undefined"
                            ))
                        })
                    };
                    let rho = match rho_spec {
                        StepExponent::Value(v) => *v,
                        StepExponent::Keyword(_) => need_law()?.rho(),
                    };
                    let l = match l_spec {
                        StepConstant::Value(v) => *v,
                        StepConstant::Keyword(_) => optimal_l(&need_law()?)?.0,
                    };
                    let regime = match law {
                        None => Regime::Unclassified,
                        Some(law) => {
                            let crit = law.rho();
                            if (rho - crit).abs() <= 1e-9 * crit {
                                Regime::Critical
                            } else if rho > crit {
                                Regime::Small
                            } else if rho > 2.0 * law.kappa {
                                Regime::Large
                            } else {
                                Regime::Unclassified
                            }
                        }
                    };
                    let index = rows.len();
                    rows.push(RowPlan {
                        index,
                        target: t,
                        n,
                        rho,
                        l,
                        kernel,
                        law: *law,
                        regime,
                        seed: row_seed(config.master_seed, index as u64),
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn run_replicate(
    config: &SweepConfig,
    target: &TargetModel,
    row: &RowPlan,
    replicate: usize,
) -> Result<ReplicateOutcome> {
    let start = Instant::now();
    let step = StepSize::new(row.l, row.rho, row.n)?;
    let i_star = config.i_star;
    let mut acceptance = AcceptanceObserver::new();
    let mut sjd = SjdObserver::new(i_star, target.scales()[i_star - 1]);
    let mut trace = TraceObserver::new(i_star);
    let mut rng = replicate_rng(row.seed, replicate as u64);
    run_chain(
        row.kernel,
        target,
        step,
        config.iterations,
        config.effective_burn_in(),
        InitialState::ReferenceDraw,
        &mut rng,
        &mut [&mut acceptance, &mut sjd, &mut trace],
    )?;
    Ok(ReplicateOutcome { acceptance, sjd, trace, millis: start.elapsed().as_secs_f64() * 1e3 })
}

fn assemble_row(config: &SweepConfig, plan: &RowPlan, reps: Vec<ReplicateOutcome>, n_max: usize) -> SweepRow {
    let mut it = reps.into_iter();
    let mut acc = it.next().expect("replicates >= 1");
    let mut wall = acc.millis;
    for r in it {
        acc.acceptance.merge(&r.acceptance);
        acc.sjd.merge(&r.sjd);
        acc.trace.merge(&r.trace);
        wall += r.millis;
    }
    let acceptance = acc.acceptance.estimate();
    let sjd = acc.sjd.estimate();
    let (accept_theory, sjd_theory) = match (plan.regime, plan.law) {
        (Regime::Critical, Some(law)) => {
            let a = a_theoretical(&law, plan.l);
            (Some(a), Some(plan.l * plan.l * a * (plan.n as f64).powf(-plan.rho)))
        }
        (Regime::Small, _) => (Some(1.0), None),
        (Regime::Large, _) => (Some(0.0), None),
        _ => (None, None),
    };
    let mut row = SweepRow {
        index: plan.index,
        n: plan.n,
        rho: plan.rho,
        l: plan.l,
        kernel: plan.kernel,
        regime: plan.regime,
        acceptance,
        sjd,
        accept_theory,
        sjd_theory,
        lag1_corr: lag1_from_sjd(sjd.s_n, acc.trace.variance()),
        trace_lag1: acc.trace.lag1_autocorrelation(),
        flags: Vec::new(),
        seed: plan.seed,
        wall_ms: wall,
    };
    row.flags = flags_for(config, &row, n_max);
    row
}

fn se_or_zero(se: f64) -> f64 {
    if se.is_finite() {
        se
    } else {
        0.0
    }
}

fn flags_for(config: &SweepConfig, row: &SweepRow, n_max: usize) -> Vec<String> {
    let mut flags = Vec::new();
    let mean = row.acceptance.mean;
    match row.regime {
        Regime::Critical => {
            let a = row.accept_theory.expect("critical rows carry a theory value");
            if (mean - a).abs() > 3.0 * se_or_zero(row.acceptance.std_error) + config.tolerance {
                flags.push("accept".to_string());
            }
            let th = row.sjd_theory.expect("critical rows carry an sjd prediction");
            let (s, se) = row.sjd_compared();
            if (s - th).abs() > 3.0 * se_or_zero(se) + config.sjd_tolerance * th {
                flags.push("sjd".to_string());
            }
        }
        Regime::Small if row.n == n_max && !(mean > config.degenerate_high) => {
            flags.push("degenerate-high".to_string());
        }
        Regime::Large if row.n == n_max && !(mean < config.degenerate_low) => {
            flags.push("degenerate-low".to_string());
        }
        _ => {}
    }
    flags
}

/// Runs the sweep on the current rayon pool. Rows come back in grid order and do
/// not depend on the number of worker threads.
pub fn scaling_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let plans = plan_rows(config)?;
    let targets = config.n_grid.iter().map(|&n| config.target.build(n)).collect::<Result<Vec<_>>>()?;
    for plan in &plans {
        crate::samplers::check_kernel(plan.kernel, &targets[plan.target])?;
    }
    let tasks: Vec<(usize, usize)> =
        (0..plans.len()).flat_map(|r| (0..config.replicates).map(move |k| (r, k))).collect();
    let outcomes = tasks
        .par_iter()
        .map(|&(r, k)| run_replicate(config, &targets[plans[r].target], &plans[r], k))
        .collect::<Result<Vec<_>>>()?;
    let n_max = *config.n_grid.iter().max().expect("validated nonempty");
    let mut outcomes = outcomes.into_iter();
    let rows = plans
        .iter()
        .map(|plan| {
            let reps: Vec<_> = outcomes.by_ref().take(config.replicates).collect();
            assemble_row(config, plan, reps, n_max)
        })
        .collect();
    Ok(SweepResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SweepConfig {
        SweepConfig {
            target: TargetFamily::Product { kappa: 0.0, density: ReferenceDensity::Gaussian },
            kernels: vec![ProposalKind::Rwm, ProposalKind::Sla],
            n_grid: vec![16, 32],
            rho_grid: vec![StepExponent::Keyword(CriticalKeyword::Critical)],
            l_grid: vec![StepConstant::Keyword(OptimalKeyword::Optimal), StepConstant::Value(1.0)],
            iterations: 2000,
            burn_in: None,
            replicates: 2,
            master_seed: 7,
            i_star: 1,
            tolerance: 0.02,
            sjd_tolerance: 0.15,
            degenerate_high: 0.95,
            degenerate_low: 0.01,
        }
    }

    #[test]
    fn cardinality_and_order() {
        let c = small_config();
        let res = scaling_sweep(&c).unwrap();
        assert_eq!(res.rows.len(), 2 * 2 * 2);
        assert!(res.rows.iter().enumerate().all(|(i, r)| r.index == i));
        assert_eq!(res.rows[0].kernel, ProposalKind::Rwm);
        assert_eq!(res.rows[1].kernel, ProposalKind::Sla);
        assert_eq!(res.rows[0].rho, 1.0);
        assert!((res.rows[1].rho - 1.0 / 3.0).abs() < 1e-15);
        assert!((res.rows[0].l - 2.3812).abs() < 1e-3);
        assert!(res.rows.iter().all(|r| r.regime == Regime::Critical));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let c = small_config();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let strip = |mut r: SweepResult| {
            for row in &mut r.rows {
                row.wall_ms = 0.0;
            }
            r
        };
        let a = strip(one.install(|| scaling_sweep(&c)).unwrap());
        let b = strip(three.install(|| scaling_sweep(&c)).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn config_errors() {
        let mut c = small_config();
        c.burn_in = Some(2000);
        assert!(matches!(scaling_sweep(&c), Err(Error::Configuration(_))));
        let mut c = small_config();
        c.kernels = vec![ProposalKind::Mala];
        assert!(matches!(scaling_sweep(&c), Err(Error::Configuration(_))));
        let mut c = small_config();
        c.i_star = 17;
        assert!(scaling_sweep(&c).is_err());
        let mut c = small_config();
        c.target = TargetFamily::NsPrior { alpha: 2.0, obs: vec![1], observations: vec![], sigma_obs: 1.0 };
        c.n_grid = vec![25];
        assert!(matches!(scaling_sweep(&c), Err(Error::Configuration(_))));
    }

    #[test]
    fn ns_cutoff_inversion() {
        assert_eq!(ns_cutoff(8), Some(1));
        assert_eq!(ns_cutoff(24), Some(2));
        assert_eq!(ns_cutoff(25), None);
        assert_eq!(ns_cutoff(4 * 30 * 31), Some(30));
    }

    #[test]
    fn default_burn_in() {
        let mut c = small_config();
        assert_eq!(c.effective_burn_in(), 400);
        c.target = TargetFamily::BoundedPerturbation { kappa: 0.0, bound: 1.0, density: ReferenceDensity::Gaussian };
        assert_eq!(c.effective_burn_in(), 1000);
        c.iterations = 100_000;
        assert_eq!(c.effective_burn_in(), 20_000);
    }
}
