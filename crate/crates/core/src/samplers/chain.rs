//! The Metropolis–Hastings chain and the streaming run loop.

use super::kernels::{check_kernel, exponent, propose_into, Endpoint};
use super::{ProposalKind, StepSize};
use crate::error::{Error, Result};
use crate::spectrum::sample_reference;
use crate::targets::TargetModel;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// One transition x → x′. Borrowed from the chain's buffers; valid until the next step.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome<'a> {
    /// The state before the step.
    pub previous: &'a [f64],
    pub proposal: &'a [f64],
    /// φₙ(x) − φₙ(y) + Rₙ(x, y)
    pub log_ratio: f64,
    pub accepted: bool,
    pub scales: &'a [f64],
}

impl<'a> StepOutcome<'a> {
    /// The state after the step.
    pub fn state(&self) -> &'a [f64] {
        if self.accepted {
            self.proposal
        } else {
            self.previous
        }
    }

    /// min(1, e^r)
    pub fn accept_probability(&self) -> f64 {
        if self.log_ratio >= 0.0 {
            1.0
        } else {
            self.log_ratio.exp()
        }
    }

    /// (x′ᵢ − xᵢ)²
    pub fn jump_sq(&self, i: usize) -> f64 {
        if self.accepted {
            (self.proposal[i] - self.previous[i]).powi(2)
        } else {
            0.0
        }
    }

    /// ((x′ᵢ − xᵢ)/λᵢ)²
    pub fn norm_jump_sq(&self, i: usize) -> f64 {
        self.jump_sq(i) / (self.scales[i] * self.scales[i])
    }

    pub fn total_jump_sq(&self) -> f64 {
        (0..self.previous.len()).map(|i| self.jump_sq(i)).sum()
    }
}

/// Streaming consumer of post-burn-in transitions.
pub trait Observer {
    fn observe(&mut self, outcome: &StepOutcome<'_>);

    /// Named scalar summaries for the chain report.
    fn summary(&self) -> Vec<(String, f64)> {
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub enum InitialState {
    /// A draw from the reference law π̃ₙ.
    #[default]
    ReferenceDraw,
    Zero,
    Given(Vec<f64>),
}

/// 20% of the run.
pub fn default_burn_in(iterations: usize) -> usize {
    iterations / 5
}

/// A Metropolis–Hastings chain holding its current state, a proposal buffer and the
/// cached φₙ (and ∇φₙ for MALA) at the current state.
#[derive(Debug, Clone)]
pub struct Chain<'t> {
    kind: ProposalKind,
    target: &'t TargetModel,
    step: StepSize,
    state: Vec<f64>,
    proposal: Vec<f64>,
    phi_state: f64,
    phi_proposal: f64,
    grad_state: Vec<f64>,
    grad_proposal: Vec<f64>,
}

impl<'t> Chain<'t> {
    pub fn new(kind: ProposalKind, target: &'t TargetModel, step: StepSize, x0: Vec<f64>) -> Result<Self> {
        check_kernel(kind, target)?;
        target.check_dimension(&x0)?;
        if step.n() != target.n() {
            return Err(Error::DimensionMismatch { expected: target.n(), found: step.n() });
        }
        let n = x0.len();
        let phi_state = target.phi(&x0);
        let (grad_state, grad_proposal) = if kind.needs_gradient() {
            let mut g = vec![0.0; n];
            target.grad_phi(&x0, &mut g)?;
            (g, vec![0.0; n])
        } else {
            (Vec::new(), Vec::new())
        };
        if !phi_state.is_finite() {
            return Err(Error::Numeric(format!("phi is not finite at the initial state ({phi_state})")));
        }
        Ok(Self {
            kind,
            target,
            step,
            state: x0,
            proposal: vec![0.0; n],
            phi_state,
            phi_proposal: 0.0,
            grad_state,
            grad_proposal,
        })
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn phi(&self) -> f64 {
        self.phi_state
    }

    pub fn kind(&self) -> ProposalKind {
        self.kind
    }

    pub fn step_size(&self) -> StepSize {
        self.step
    }

    /// Propose, evaluate φₙ once on the proposal, accept iff log U ≤ r.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StepOutcome<'_> {
        let target = self.target;
        propose_into(self.kind, &self.state, target, &self.step, &self.grad_state, rng, &mut self.proposal);
        self.phi_proposal = if target.functional().is_zero() { 0.0 } else { target.phi(&self.proposal) };
        if self.kind.needs_gradient() {
            // a failing gradient makes the proposal unusable; reject it
            if target.grad_phi(&self.proposal, &mut self.grad_proposal).is_err() {
                self.phi_proposal = f64::INFINITY;
            }
        }
        let log_ratio = if self.phi_proposal.is_finite() {
            exponent(
                self.kind,
                Endpoint { x: &self.state, phi: self.phi_state, grad: &self.grad_state },
                Endpoint { x: &self.proposal, phi: self.phi_proposal, grad: &self.grad_proposal },
                target,
                &self.step,
            )
        } else {
            f64::NEG_INFINITY
        };
        let u: f64 = rng.random();
        let accepted = !log_ratio.is_nan() && u.ln() <= log_ratio;
        if accepted {
            std::mem::swap(&mut self.state, &mut self.proposal);
            std::mem::swap(&mut self.phi_state, &mut self.phi_proposal);
            std::mem::swap(&mut self.grad_state, &mut self.grad_proposal);
            StepOutcome {
                previous: &self.proposal,
                proposal: &self.state,
                log_ratio,
                accepted,
                scales: target.scales(),
            }
        } else {
            StepOutcome {
                previous: &self.state,
                proposal: &self.proposal,
                log_ratio,
                accepted,
                scales: target.scales(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub kind: ProposalKind,
    pub iterations: usize,
    pub burn_in: usize,
    pub retained: usize,
    pub accepted_total: usize,
    pub accepted_retained: usize,
    pub final_state: Vec<f64>,
    pub final_phi: f64,
    /// One entry per observer, in the order given.
    pub summaries: Vec<Vec<(String, f64)>>,
}

impl ChainReport {
    /// Fraction of retained steps that were accepted.
    pub fn acceptance_rate(&self) -> f64 {
        if self.retained == 0 {
            f64::NAN
        } else {
            self.accepted_retained as f64 / self.retained as f64
        }
    }
}

/// Runs `iterations` steps in total and feeds the last `iterations − burn_in` to the
/// observers.
#[allow(clippy::too_many_arguments)]
pub fn run_chain<R: Rng + ?Sized>(
    kind: ProposalKind,
    target: &TargetModel,
    step: StepSize,
    iterations: usize,
    burn_in: usize,
    init: InitialState,
    rng: &mut R,
    observers: &mut [&mut dyn Observer],
) -> Result<ChainReport> {
    if burn_in > iterations {
        return Err(Error::Configuration(format!(
            "burn-in ({burn_in}) exceeds the number of iterations ({iterations})"
        )));
    }
    check_kernel(kind, target)?;
    let x0 = match init {
        InitialState::ReferenceDraw => sample_reference(target.spectrum(), target.density(), rng),
        InitialState::Zero => vec![0.0; target.n()],
        InitialState::Given(x) => x,
    };
    let mut chain = Chain::new(kind, target, step, x0)?;
    let mut accepted_total = 0;
    let mut accepted_retained = 0;
    for it in 0..iterations {
        let outcome = chain.step(rng);
        if outcome.accepted {
            accepted_total += 1;
        }
        if it >= burn_in {
            if outcome.accepted {
                accepted_retained += 1;
            }
            for obs in observers.iter_mut() {
                obs.observe(&outcome);
            }
        }
    }
    Ok(ChainReport {
        kind,
        iterations,
        burn_in,
        retained: iterations - burn_in,
        accepted_total,
        accepted_retained,
        final_phi: chain.phi(),
        final_state: chain.state,
        summaries: observers.iter().map(|o| o.summary()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::ReferenceDensity;
    use crate::spectrum::Spectrum;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[derive(Default)]
    struct Moments {
        count: usize,
        sum: Vec<f64>,
        sum_sq: Vec<f64>,
    }

    impl Observer for Moments {
        fn observe(&mut self, outcome: &StepOutcome<'_>) {
            let x = outcome.state();
            if self.sum.is_empty() {
                self.sum = vec![0.0; x.len()];
                self.sum_sq = vec![0.0; x.len()];
            }
            self.count += 1;
            for (i, &v) in x.iter().enumerate() {
                self.sum[i] += v;
                self.sum_sq[i] += v * v;
            }
        }

        fn summary(&self) -> Vec<(String, f64)> {
            vec![("count".into(), self.count as f64)]
        }
    }

    fn product(kappa: f64, n: usize) -> TargetModel {
        TargetModel::product(Spectrum::power_law(kappa, n).unwrap(), ReferenceDensity::Gaussian)
    }

    #[test]
    fn empty_window() {
        let t = product(0.0, 10);
        let step = StepSize::new(1.0, 1.0, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut m = Moments::default();
        let r = run_chain(ProposalKind::Rwm, &t, step, 50, 50, InitialState::Zero, &mut rng, &mut [&mut m]).unwrap();
        assert_eq!(r.retained, 0);
        assert_eq!(m.count, 0);
        assert!(run_chain(ProposalKind::Rwm, &t, step, 5, 6, InitialState::Zero, &mut rng, &mut []).is_err());
    }

    #[test]
    fn reproducible() {
        let t =
            TargetModel::bounded_perturbation(Spectrum::power_law(1.0, 20).unwrap(), ReferenceDensity::Gaussian, 1.0)
                .unwrap();
        let step = StepSize::new(1.0, 3.0, 20).unwrap();
        for kind in [ProposalKind::Rwm, ProposalKind::Sla, ProposalKind::Mala, ProposalKind::ThetaSla(0.5)] {
            let run = |seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                run_chain(kind, &t, step, 100, 0, InitialState::ReferenceDraw, &mut rng, &mut []).unwrap()
            };
            assert_eq!(run(3), run(3));
            assert_ne!(run(3).final_state, run(4).final_state);
        }
    }

    #[test]
    fn huge_ratio_always_accepts() {
        // far in the tail the SLA drift makes r ≈ (σ²/8)(x² − y²) ≫ 1
        let t = product(0.0, 1);
        let step = StepSize::from_sigma(0.1, 1.0, 1).unwrap();
        let mut chain = Chain::new(ProposalKind::Sla, &t, step, vec![1e4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let o = chain.step(&mut rng);
            assert!(o.log_ratio > 1.0);
            assert!(o.accepted);
        }
    }

    #[test]
    fn rejected_steps_have_zero_jump() {
        let t = product(0.0, 50);
        let step = StepSize::new(6.0, 1.0, 50).unwrap();
        let mut chain = Chain::new(ProposalKind::Rwm, &t, step, vec![0.5; 50]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut rejected = 0;
        for _ in 0..200 {
            let o = chain.step(&mut rng);
            if !o.accepted {
                rejected += 1;
                assert_eq!(o.total_jump_sq(), 0.0);
                assert_eq!(o.state(), o.previous);
            } else {
                assert_eq!(o.state(), o.proposal);
            }
        }
        assert!(rejected > 0);
    }

    #[test]
    fn stationarity_small_step() {
        // tiny l mixes slowly, so use many independent short chains started in stationarity
        let n = 100;
        let t = product(0.0, n);
        let step = StepSize::new(0.5, 1.0, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut m = Moments::default();
        for _ in 0..200 {
            run_chain(ProposalKind::Rwm, &t, step, 400, 100, InitialState::ReferenceDraw, &mut rng, &mut [&mut m])
                .unwrap();
        }
        // pooled variance over coordinates, SE from the 200 independent blocks is
        // conservative at ~ sqrt(2/(200·n)) per block mean; use 5 SE on the average
        let total = (m.count * n) as f64;
        let var = m.sum_sq.iter().sum::<f64>() / total - (m.sum.iter().sum::<f64>() / total).powi(2);
        let se = (2.0 / (200.0 * n as f64)).sqrt();
        assert!((var - 1.0).abs() < 5.0 * se, "variance {var}");
    }
}
