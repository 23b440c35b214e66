//! Fast invariant suite: sampler exponents against the direct density ratio,
//! antisymmetry, θ = ½ exactness, preconditioning equivalence, the spiral
//! bijection, the Gaussian expected-min identity, the K^RWM identity and the
//! power-law fit.

use crate::density::ReferenceDensity;
use crate::diagnostics::fit_power_law;
use crate::samplers::{
    direct_log_ratio_oracle, exponent_with_delta_sign, log_accept_ratio, propose, Chain, Endpoint, ProposalKind,
    StepSize,
};
use crate::spectrum::{sample_reference, Spectrum};
use crate::targets::spiral::{spiral_order, spiral_order_inverse, truncated_half_lattice};
use crate::targets::TargetModel;
use crate::theory::{gaussian_expected_min, k_rwm, k_rwm_by_parts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

/// A deliberate corruption used to check that the suite catches real bugs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// Flip the sign of the Langevin correction terms in the SLA exponent.
    SlaDeltaSign,
}

impl FromStr for Fault {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "sla-delta-sign" => Ok(Self::SlaDeltaSign),
            other => Err(crate::Error::Configuration(format!("unknown fault '{other}' (known: sla-delta-sign)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationOptions {
    pub seed: u64,
    /// Random instances per kernel in the oracle checks.
    pub oracle_instances: usize,
    /// Monte Carlo draws per grid point in the expected-min check.
    pub expected_min_draws: usize,
    pub fault: Option<Fault>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { seed: 20_240_601, oracle_instances: 10_000, expected_min_draws: 1_000_000, fault: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub millis: f64,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status}  {:<34} {} ({:.0} ms)", self.name, self.detail, self.millis)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const KERNELS: [ProposalKind; 6] = [
    ProposalKind::Rwm,
    ProposalKind::Sla,
    ProposalKind::Mala,
    ProposalKind::Prwm,
    ProposalKind::Psla,
    ProposalKind::ThetaSla(0.3),
];

fn kernel_slug(kind: ProposalKind) -> &'static str {
    match kind {
        ProposalKind::Rwm => "rwm",
        ProposalKind::Sla => "sla",
        ProposalKind::Mala => "mala",
        ProposalKind::Prwm => "p-rwm",
        ProposalKind::Psla => "p-sla",
        ProposalKind::ThetaSla(_) => "theta-sla",
    }
}

/// A random small instance: target, current state x, proposal y and step.
pub struct Instance {
    pub target: TargetModel,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub step: StepSize,
}

/// n ≤ 20, κ ∈ [0, 1.5], random density (Gaussian where the kernel needs it),
/// φ ≡ 0 or a bounded perturbation, σ between 0.01 and 2 times the smallest scale.
pub fn random_instance<R: Rng>(kind: ProposalKind, rng: &mut R) -> Instance {
    let n = rng.random_range(1..=20);
    let kappa = rng.random_range(0.0..1.5);
    let spectrum = Spectrum::power_law(kappa, n).expect("valid power law");
    let density = match kind {
        ProposalKind::Psla | ProposalKind::ThetaSla(_) => ReferenceDensity::Gaussian,
        _ => ReferenceDensity::ALL[rng.random_range(0..3)],
    };
    let target = if rng.random_bool(0.5) {
        TargetModel::product(spectrum, density)
    } else {
        TargetModel::bounded_perturbation(spectrum, density, rng.random_range(0.1..3.0)).expect("positive bound")
    };
    let lam_min = target.scales()[n - 1];
    let sigma = lam_min * 10f64.powf(rng.random_range(-2.0..0.3));
    let step = StepSize::from_sigma(sigma, 1.0, n).expect("valid step");
    let x = sample_reference(target.spectrum(), density, rng);
    let y = propose(kind, &x, &target, &step, rng).expect("kernel preconditions hold");
    Instance { target, x, y, step }
}

fn fast_exponent(kind: ProposalKind, inst: &Instance, delta_sign: f64) -> f64 {
    let t = &inst.target;
    let grad = |x: &[f64]| {
        let mut g = vec![0.0; x.len()];
        if kind == ProposalKind::Mala {
            t.grad_phi(x, &mut g).expect("gradient available");
        }
        g
    };
    let (gx, gy) = (grad(&inst.x), grad(&inst.y));
    exponent_with_delta_sign(
        kind,
        Endpoint { x: &inst.x, phi: t.phi(&inst.x), grad: &gx },
        Endpoint { x: &inst.y, phi: t.phi(&inst.y), grad: &gy },
        t,
        &inst.step,
        delta_sign,
    )
}

fn timed(name: impl Into<String>, f: impl FnOnce() -> (bool, String)) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = f();
    CheckResult { name: name.into(), passed, detail, millis: start.elapsed().as_secs_f64() * 1e3 }
}

fn oracle_equivalence(kind: ProposalKind, opts: &ValidationOptions) -> CheckResult {
    let name = format!("{}-oracle-equivalence", kernel_slug(kind));
    timed(name, || {
        let delta_sign = match (opts.fault, kind) {
            (Some(Fault::SlaDeltaSign), ProposalKind::Sla) => -1.0,
            _ => 1.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x0a11);
        rng.set_stream(KERNELS.iter().position(|&k| k == kind).unwrap_or(99) as u64);
        let mut worst = 0.0f64;
        for _ in 0..opts.oracle_instances {
            let inst = random_instance(kind, &mut rng);
            let fast = fast_exponent(kind, &inst, delta_sign);
            let oracle =
                direct_log_ratio_oracle(kind, &inst.x, &inst.y, &inst.target, &inst.step).expect("valid instance");
            let err = (fast - oracle).abs();
            worst = if err.is_nan() { f64::INFINITY } else { worst.max(err) };
        }
        (worst < 1e-10, format!("max |fast - oracle| = {worst:.2e} over {} instances", opts.oracle_instances))
    })
}

fn antisymmetry(opts: &ValidationOptions) -> CheckResult {
    timed("log-ratio-antisymmetry", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xa5);
        let mut worst = 0.0f64;
        let per_kernel = (opts.oracle_instances / 5).max(1);
        for kind in KERNELS {
            for _ in 0..per_kernel {
                let inst = random_instance(kind, &mut rng);
                let fwd = log_accept_ratio(kind, &inst.x, &inst.y, &inst.target, &inst.step).expect("valid");
                let bwd = log_accept_ratio(kind, &inst.y, &inst.x, &inst.target, &inst.step).expect("valid");
                worst = worst.max((fwd + bwd).abs());
            }
        }
        (worst < 1e-10, format!("max |r(x,y) + r(y,x)| = {worst:.2e}"))
    })
}

fn theta_half_exactness(opts: &ValidationOptions) -> CheckResult {
    timed("theta-half-gaussian-exactness", || {
        let n = 256;
        let target = TargetModel::product(Spectrum::power_law(1.0, n).expect("valid"), ReferenceDensity::Gaussian);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7e7a);
        let mut worst = 0.0f64;
        let mut rejections = 0;
        for sigma in [0.01, 0.1, 1.0, 10.0] {
            let step = StepSize::from_sigma(sigma, 1.0, n).expect("valid");
            let x0 = sample_reference(target.spectrum(), target.density(), &mut rng);
            let mut chain = Chain::new(ProposalKind::ThetaSla(0.5), &target, step, x0).expect("valid");
            for _ in 0..200 {
                let o = chain.step(&mut rng);
                worst = worst.max(o.log_ratio.abs());
                rejections += usize::from(!o.accepted);
            }
        }
        (worst < 1e-9 && rejections == 0, format!("max |log ratio| = {worst:.2e}, rejections = {rejections}"))
    })
}

fn preconditioning_equivalence(opts: &ValidationOptions) -> CheckResult {
    timed("p-rwm-whitened-equivalence", || {
        let n = 50;
        let target = TargetModel::bounded_perturbation(
            Spectrum::power_law(1.0, n).expect("valid"),
            ReferenceDensity::Logistic,
            1.0,
        )
        .expect("valid");
        let whitened = target.whitened().expect("valid");
        let step = StepSize::new(2.0, 1.0, n).expect("valid");
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e);
        let x0 = sample_reference(target.spectrum(), target.density(), &mut rng);
        let u0: Vec<f64> = x0.iter().zip(target.scales()).map(|(x, l)| x / l).collect();
        let mut a = Chain::new(ProposalKind::Prwm, &target, step, x0).expect("valid");
        let mut b = Chain::new(ProposalKind::Rwm, &whitened, step, u0).expect("valid");
        let mut ra = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9f);
        let mut rb = ra.clone();
        let mut worst = 0.0f64;
        let mut mismatched = 0;
        for _ in 0..2000 {
            let acc_a = a.step(&mut ra).accepted;
            let acc_b = b.step(&mut rb).accepted;
            mismatched += usize::from(acc_a != acc_b);
            for ((x, u), l) in a.state().iter().zip(b.state()).zip(target.scales()) {
                worst = worst.max((x / l - u).abs());
            }
        }
        (mismatched == 0 && worst < 1e-12, format!("decision mismatches = {mismatched}, max |Λ⁻¹x - u| = {worst:.2e}"))
    })
}

fn spiral_bijection() -> CheckResult {
    timed("spiral-bijection", || {
        let examples = spiral_order((2, 0)) == Ok(5) && spiral_order((2, 2)) == Ok(7);
        let mut bad = Vec::new();
        for cutoff in 1..=50usize {
            let size = 2 * cutoff * (cutoff + 1);
            let image: HashSet<usize> =
                truncated_half_lattice(cutoff).iter().filter_map(|&k| spiral_order(k).ok()).collect();
            let onto = image.len() == size && image.iter().all(|&i| (1..=size).contains(&i));
            let inverse = (1..=size).all(|i| spiral_order(spiral_order_inverse(i)) == Ok(i));
            if !(onto && inverse) {
                bad.push(cutoff);
            }
        }
        (examples && bad.is_empty(), format!("examples ok = {examples}, failing cutoffs = {bad:?}"))
    })
}

fn expected_min_identity(opts: &ValidationOptions) -> CheckResult {
    timed("expected-min-closed-form", || {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xb2);
        let draws = opts.expected_min_draws;
        let mut worst_z = 0.0f64;
        for mu in [-4.0, -1.0, -0.25, 0.0, 0.5] {
            for sigma in [0.2, 0.7, 1.5, 3.0] {
                let dist: Normal<f64> = Normal::new(mu, sigma).expect("valid");
                let (mut s, mut s2) = (0.0, 0.0);
                for _ in 0..draws {
                    let v: f64 = dist.sample(&mut rng);
                    let v = v.exp().min(1.0);
                    s += v;
                    s2 += v * v;
                }
                let m = s / draws as f64;
                let se = ((s2 / draws as f64 - m * m).max(0.0) / draws as f64).sqrt();
                let z = (m - gaussian_expected_min(mu, sigma)).abs() / se.max(1e-300);
                worst_z = worst_z.max(z);
            }
        }
        (worst_z < 4.0, format!("max |MC - closed form|/SE = {worst_z:.2} on a 20-point grid"))
    })
}

fn k_rwm_identity() -> CheckResult {
    timed("k-rwm-integration-by-parts", || {
        let mut worst = 0.0f64;
        let mut detail = Vec::new();
        for f in ReferenceDensity::ALL {
            match (k_rwm(f), k_rwm_by_parts(f)) {
                (Ok(a), Ok(b)) => {
                    worst = worst.max((a - b).abs());
                    detail.push(format!("{f}: {a:.10}"));
                }
                (a, b) => {
                    worst = f64::INFINITY;
                    detail.push(format!("{f}: {a:?} / {b:?}"));
                }
            }
        }
        (worst < 1e-8, format!("max |E g'^2 - E g''| = {worst:.2e}; {}", detail.join(", ")))
    })
}

fn power_law_fit(opts: &ValidationOptions) -> CheckResult {
    timed("power-law-fit", || {
        let exact: Vec<(f64, f64)> = (6..=12).map(|k| (2f64.powi(k), 7.0 * 2f64.powi(k).powi(-3))).collect();
        let fit = fit_power_law(&exact);
        let exact_ok = fit.as_ref().is_ok_and(|f| {
            (f.slope + 3.0).abs() < 1e-12
                && (f.intercept - 7f64.ln()).abs() < 1e-12
                && (f.r_squared - 1.0).abs() < 1e-12
        });
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xf1);
        let noisy: Vec<(f64, f64)> =
            exact.iter().map(|&(n, v)| (n, v * (1.0 + rng.random_range(-0.01..0.01)))).collect();
        let noisy_ok = fit_power_law(&noisy).is_ok_and(|f| (f.slope + 3.0).abs() < 0.01);
        let rank_ok = fit_power_law(&[(4.0, 1.0), (4.0, 2.0), (4.0, 3.0)]).is_err();
        (exact_ok && noisy_ok && rank_ok, format!("exact = {exact_ok}, noisy = {noisy_ok}, rank check = {rank_ok}"))
    })
}

/// Runs every check. Each failure is reported by name rather than aborting the run.
pub fn run_validation(opts: &ValidationOptions) -> ValidationReport {
    let mut checks: Vec<CheckResult> = KERNELS.iter().map(|&k| oracle_equivalence(k, opts)).collect();
    checks.push(antisymmetry(opts));
    checks.push(theta_half_exactness(opts));
    checks.push(preconditioning_equivalence(opts));
    checks.push(spiral_bijection());
    checks.push(expected_min_identity(opts));
    checks.push(k_rwm_identity());
    checks.push(power_law_fit(opts));
    ValidationReport { checks }
}
