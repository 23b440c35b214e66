//! Chain observers for acceptance, squared jump distance and a single-coordinate trace.

use super::batch::BatchMeans;
use crate::samplers::{Observer, StepOutcome};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceEstimate {
    /// Mean of min(1, e^r).
    pub mean: f64,
    pub std_error: f64,
    /// Mean of the accept indicator.
    pub indicator_mean: f64,
    pub indicator_std_error: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceObserver {
    conditional: BatchMeans,
    indicator: BatchMeans,
}

impl AcceptanceObserver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn estimate(&self) -> AcceptanceEstimate {
        AcceptanceEstimate {
            mean: self.conditional.mean(),
            std_error: self.conditional.std_error(),
            indicator_mean: self.indicator.mean(),
            indicator_std_error: self.indicator.std_error(),
            count: self.conditional.count(),
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.conditional.merge(&other.conditional);
        self.indicator.merge(&other.indicator);
    }

    pub fn push(&mut self, log_ratio: f64, accepted: bool) {
        let p = if log_ratio >= 0.0 { 1.0 } else { log_ratio.exp() };
        self.conditional.push(p);
        self.indicator.push(if accepted { 1.0 } else { 0.0 });
    }
}

impl Observer for AcceptanceObserver {
    fn observe(&mut self, outcome: &StepOutcome<'_>) {
        self.push(outcome.log_ratio, outcome.accepted);
    }

    fn summary(&self) -> Vec<(String, f64)> {
        let e = self.estimate();
        vec![
            ("accept_mean".into(), e.mean),
            ("accept_se".into(), e.std_error),
            ("accept_indicator".into(), e.indicator_mean),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SjdEstimate {
    /// Mean of (x′ᵢ − xᵢ)² at i = i*.
    pub s_n: f64,
    pub std_error: f64,
    /// Mean of ((x′ᵢ − xᵢ)/λᵢ)² at i = i*.
    pub s_n_normalized: f64,
    pub normalized_std_error: f64,
    /// 1-based.
    pub i_star: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SjdObserver {
    coordinate: usize,
    lambda: f64,
    raw: BatchMeans,
    normalized: BatchMeans,
}

impl SjdObserver {
    /// Tracks coordinate `i_star` (1-based) whose reference scale is `lambda_i_star`.
    pub fn new(i_star: usize, lambda_i_star: f64) -> Self {
        assert!(i_star >= 1, "i_star is 1-based");
        Self { coordinate: i_star - 1, lambda: lambda_i_star, raw: BatchMeans::new(), normalized: BatchMeans::new() }
    }

    pub fn push(&mut self, jump: f64) {
        let sq = jump * jump;
        self.raw.push(sq);
        self.normalized.push(sq / (self.lambda * self.lambda));
    }

    pub fn estimate(&self) -> SjdEstimate {
        SjdEstimate {
            s_n: self.raw.mean(),
            std_error: self.raw.std_error(),
            s_n_normalized: self.normalized.mean(),
            normalized_std_error: self.normalized.std_error(),
            i_star: self.coordinate + 1,
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.raw.merge(&other.raw);
        self.normalized.merge(&other.normalized);
    }
}

impl Observer for SjdObserver {
    fn observe(&mut self, outcome: &StepOutcome<'_>) {
        let i = self.coordinate;
        let jump = if outcome.accepted { outcome.proposal[i] - outcome.previous[i] } else { 0.0 };
        self.push(jump);
    }

    fn summary(&self) -> Vec<(String, f64)> {
        let e = self.estimate();
        vec![("sjd".into(), e.s_n), ("sjd_norm".into(), e.s_n_normalized)]
    }
}

/// Streaming mean, variance and lag-1 autocorrelation of one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceObserver {
    coordinate: usize,
    count: usize,
    sum: f64,
    sum_sq: f64,
    /// Σ x_t x_{t-1}, Σ x_t and Σ x_{t-1} over consecutive pairs.
    cross: f64,
    pair_count: usize,
    pair_sum_cur: f64,
    pair_sum_prev: f64,
    last: Option<f64>,
}

impl TraceObserver {
    /// Tracks coordinate `i_star` (1-based).
    pub fn new(i_star: usize) -> Self {
        assert!(i_star >= 1, "i_star is 1-based");
        Self {
            coordinate: i_star - 1,
            count: 0,
            sum: 0.0,
            sum_sq: 0.0,
            cross: 0.0,
            pair_count: 0,
            pair_sum_cur: 0.0,
            pair_sum_prev: 0.0,
            last: None,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
        if let Some(prev) = self.last {
            self.cross += x * prev;
            self.pair_count += 1;
            self.pair_sum_cur += x;
            self.pair_sum_prev += prev;
        }
        self.last = Some(x);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (self.sum_sq / self.count as f64 - m * m).max(0.0)
    }

    /// Empirical lag-1 autocorrelation.
    pub fn lag1_autocorrelation(&self) -> f64 {
        if self.pair_count == 0 {
            return f64::NAN;
        }
        let m = self.mean();
        let k = self.pair_count as f64;
        let cov = (self.cross - m * (self.pair_sum_cur + self.pair_sum_prev)) / k + m * m;
        (cov / self.variance()).clamp(-1.0, 1.0)
    }

    /// Pools another independent trace. Pair statistics stay within each run.
    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.cross += other.cross;
        self.pair_count += other.pair_count;
        self.pair_sum_cur += other.pair_sum_cur;
        self.pair_sum_prev += other.pair_sum_prev;
        self.last = None;
    }
}

impl Observer for TraceObserver {
    fn observe(&mut self, outcome: &StepOutcome<'_>) {
        self.push(outcome.state()[self.coordinate]);
    }

    fn summary(&self) -> Vec<(String, f64)> {
        vec![
            ("trace_mean".into(), self.mean()),
            ("trace_var".into(), self.variance()),
            ("trace_lag1".into(), self.lag1_autocorrelation()),
        ]
    }
}

/// 1 − S/(2·Var), clipped to [−1, 1].
pub fn lag1_from_sjd(s_n: f64, variance: f64) -> f64 {
    (1.0 - s_n / (2.0 * variance)).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::ReferenceDensity;
    use crate::samplers::{run_chain, InitialState, ProposalKind, StepSize};
    use crate::spectrum::Spectrum;
    use crate::targets::TargetModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn acceptance_trivial_cases() {
        let mut o = AcceptanceObserver::new();
        for _ in 0..100 {
            o.push(0.0, true);
        }
        let e = o.estimate();
        assert_eq!((e.mean, e.std_error, e.count), (1.0, 0.0, 100));
        let mut o = AcceptanceObserver::new();
        for k in 0..100 {
            if k % 2 == 0 {
                o.push(0.0, true);
            } else {
                o.push(f64::NEG_INFINITY, false);
            }
        }
        assert_eq!(o.estimate().mean, 0.5);
    }

    #[test]
    fn sjd_all_rejected() {
        let mut o = SjdObserver::new(1, 2.0);
        for _ in 0..50 {
            o.push(0.0);
        }
        assert_eq!(o.estimate().s_n, 0.0);
    }

    #[test]
    fn forced_accept_sjd_is_sigma_squared() {
        // θ-SLA at θ = ½ on a Gaussian product accepts every step; with λ large its
        // jumps are ≈ σZ
        let n = 4;
        let t = TargetModel::product(Spectrum::power_law(0.0, n).unwrap(), ReferenceDensity::Gaussian);
        let step = StepSize::from_sigma(0.01, 1.0, n).unwrap();
        let mut sjd = SjdObserver::new(1, 1.0);
        let mut acc = AcceptanceObserver::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        run_chain(
            ProposalKind::ThetaSla(0.5),
            &t,
            step,
            50_000,
            0,
            InitialState::ReferenceDraw,
            &mut rng,
            &mut [&mut sjd, &mut acc],
        )
        .unwrap();
        assert_eq!(acc.estimate().indicator_mean, 1.0);
        let e = sjd.estimate();
        let expected = 1e-4;
        assert!((e.s_n - expected).abs() < 3.0 * e.std_error + 1e-7, "{} ± {}", e.s_n, e.std_error);
    }

    #[test]
    fn lag1_identity_on_product_target() {
        let n = 100;
        let t = TargetModel::product(Spectrum::power_law(0.0, n).unwrap(), ReferenceDensity::Gaussian);
        let step = StepSize::new(2.38, 1.0, n).unwrap();
        let mut sjd = SjdObserver::new(1, 1.0);
        let mut trace = TraceObserver::new(1);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        run_chain(
            ProposalKind::Rwm,
            &t,
            step,
            120_000,
            20_000,
            InitialState::ReferenceDraw,
            &mut rng,
            &mut [&mut sjd, &mut trace],
        )
        .unwrap();
        let e = sjd.estimate();
        let predicted = 1.0 - e.s_n_normalized / 2.0;
        let empirical = trace.lag1_autocorrelation();
        assert!(
            (predicted - empirical).abs() < 3.0 * e.normalized_std_error / 2.0 + 0.01,
            "{predicted} vs {empirical}"
        );
        assert!((-1.0..=1.0).contains(&lag1_from_sjd(e.s_n, trace.variance())));
    }
}
