//! Shared fixtures for the criterion benchmarks.

use sizeclust_core::{fit_posterior, simulate_dataset, Assignment, SamplerConfig, SimConfig, SimTruth, SurveyData};

/// A simulated survey with its truth, from the default simulation settings.
pub fn survey(seed: u64) -> (SurveyData, SimTruth) {
    simulate_dataset(&SimConfig { seed, ..SimConfig::default() }).expect("default simulation is valid")
}

/// Posterior `z` draws for [`survey`], from a short fit.
pub fn draws(seed: u64, kept: usize) -> Vec<Assignment> {
    let (data, truth) = survey(seed);
    let prior = truth.informed_prior(0.5, 0.0, seed).expect("valid prior");
    let cfg = SamplerConfig { chains: 2, burn_in: 200, kept, seed, ..SamplerConfig::default() };
    let (samples, _) = fit_posterior(&data, &prior, &cfg).expect("fit succeeds");
    samples.z_assignments()
}
