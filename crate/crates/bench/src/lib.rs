//! Fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scaling_lab::targets::{bridge_target_spectral, ns_prior_target};
use scaling_lab::{sample_reference, BridgeModel, NsPriorModel, Potential, ReferenceDensity, Spectrum, TargetModel};

pub fn product(kappa: f64, n: usize) -> TargetModel {
    TargetModel::product(Spectrum::power_law(kappa, n).unwrap(), ReferenceDensity::Gaussian)
}

pub fn double_well_bridge(modes: usize) -> TargetModel {
    bridge_target_spectral(&BridgeModel {
        potential: Potential::DoubleWell,
        beta: 1.0,
        horizon: 1.0,
        dim: 1,
        modes,
        quadrature_points: 4 * modes,
    })
    .unwrap()
}

/// NS prior with α = 2 and cutoff N (n = 4N(N+1)), four observed modes.
pub fn ns_prior(cutoff: usize) -> TargetModel {
    ns_prior_target(&NsPriorModel {
        alpha: 2.0,
        cutoff,
        obs_modes: vec![1, 2, 3, 4],
        observations: vec![0.0; 8],
        sigma_obs: 0.5,
    })
    .unwrap()
}

pub fn reference_point(target: &TargetModel, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_reference(target.spectrum(), target.density(), &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_expected_dimensions() {
        assert_eq!(product(0.0, 10).n(), 10);
        assert_eq!(double_well_bridge(16).n(), 16);
        assert_eq!(ns_prior(3).n(), 48);
        let t = ns_prior(3);
        assert!(t.phi(&reference_point(&t, 1)).is_finite());
    }
}
