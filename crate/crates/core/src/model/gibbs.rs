//! Data-augmented Gibbs sampler for the categorical mixture.
//!
//! Each response cell `(n, q)` gets a latent cluster indicator `c_nq`. Given
//! the indicators, `theta_n` and every `phi_kq` have Dirichlet full
//! conditionals; given `theta` and `phi`, each indicator is categorical with
//! weights `theta_nk * phi_{k,q,x_nq}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dirichlet::sample_dirichlet, sample_unnormalized, split_rhat};
use super::{Diagnostics, PosteriorSamples, PriorSpec, SurveyData};
use crate::composition::lexicographic_permutations;
use crate::error::{config, domain, Result};

/// Label permutations are only searched for the switching check up to this K.
const MAX_SWITCH_CHECK_K: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub chains: usize,
    pub burn_in: usize,
    pub kept: usize,
    pub seed: u64,
    pub rhat_threshold: f64,
    pub compute_rhat: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { chains: 4, burn_in: 1000, kept: 1000, seed: 1, rhat_threshold: 1.01, compute_rhat: true }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(config("sampler needs at least one chain"));
        }
        if self.kept == 0 {
            return Err(config("sampler needs at least one kept draw per chain"));
        }
        if self.compute_rhat {
            if self.chains < 2 {
                return Err(config("R-hat needs at least 2 chains; set compute_rhat = false"));
            }
            if self.kept < 4 {
                return Err(config("R-hat needs at least 4 kept draws per chain"));
            }
        }
        Ok(())
    }

    /// Random stream of chain `c`; distinct chains get distinct streams.
    pub fn chain_rng(&self, c: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(c as u64);
        rng
    }
}

/// Current `(theta, phi)` of a chain, same layouts as [`PosteriorSamples`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl ChainState {
    /// Draws `theta` and `phi` from their priors.
    pub fn from_prior(prior: &PriorSpec, rng: &mut ChaCha8Rng) -> Self {
        let k = prior.k;
        let mut theta = vec![0.0; prior.n * k];
        for (n, row) in theta.chunks_exact_mut(k).enumerate() {
            sample_dirichlet(prior.alpha_row(n), row, rng);
        }
        let mut phi = vec![0.0; k * prior.layout.width()];
        for c in 0..k {
            for q in 0..prior.layout.questions() {
                let range = prior.layout.slice(c, q);
                sample_dirichlet(&prior.beta[range.clone()], &mut phi[range], rng);
            }
        }
        Self { theta, phi }
    }
}

/// One Markov chain over `(c, theta, phi)`.
pub struct GibbsChain<'a> {
    data: &'a SurveyData,
    prior: &'a PriorSpec,
    state: ChainState,
    rng: ChaCha8Rng,
    theta_conc: Vec<f64>,
    phi_conc: Vec<f64>,
    weights: Vec<f64>,
}

impl<'a> GibbsChain<'a> {
    /// Starts from a prior draw made with `rng`.
    pub fn new(data: &'a SurveyData, prior: &'a PriorSpec, mut rng: ChaCha8Rng) -> Result<Self> {
        prior.validate()?;
        prior.check_data(data)?;
        let state = ChainState::from_prior(prior, &mut rng);
        Self::from_state(data, prior, state, rng)
    }

    pub fn from_state(data: &'a SurveyData, prior: &'a PriorSpec, state: ChainState, rng: ChaCha8Rng) -> Result<Self> {
        prior.check_data(data)?;
        if state.theta.len() != prior.alpha.len() || state.phi.len() != prior.beta.len() {
            return Err(domain("chain state dimensions do not match the prior"));
        }
        Ok(Self {
            data,
            prior,
            state,
            rng,
            theta_conc: vec![0.0; prior.alpha.len()],
            phi_conc: vec![0.0; prior.beta.len()],
            weights: vec![0.0; prior.k],
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    /// One full sweep: indicators, then `theta`, then `phi`.
    pub fn sweep(&mut self) {
        let k = self.prior.k;
        let layout = self.data.layout();
        let width = layout.width();
        self.theta_conc.copy_from_slice(&self.prior.alpha);
        self.phi_conc.copy_from_slice(&self.prior.beta);

        for n in 0..self.data.respondents() {
            let theta_n = &self.state.theta[n * k..(n + 1) * k];
            for (q, &x) in self.data.row(n).iter().enumerate() {
                let col = layout.offset(q) + x;
                let mut total = 0.0;
                for (c, w) in self.weights.iter_mut().enumerate() {
                    *w = theta_n[c] * self.state.phi[c * width + col];
                    total += *w;
                }
                let c = sample_unnormalized(&self.weights, total, &mut self.rng);
                self.theta_conc[n * k + c] += 1.0;
                self.phi_conc[c * width + col] += 1.0;
            }
        }

        for (conc, row) in self.theta_conc.chunks_exact(k).zip(self.state.theta.chunks_exact_mut(k)) {
            sample_dirichlet(conc, row, &mut self.rng);
        }
        for c in 0..k {
            for q in 0..layout.questions() {
                let range = layout.slice(c, q);
                sample_dirichlet(&self.phi_conc[range.clone()], &mut self.state.phi[range], &mut self.rng);
            }
        }
    }

    /// Runs `burn_in` sweeps, then records `kept` draws of `(theta, phi, z)`
    /// into `out` with `z_n ~ Categorical(theta_n)`.
    pub fn run_into(&mut self, burn_in: usize, kept: usize, out: &mut ChainDraws) {
        for _ in 0..burn_in {
            self.sweep();
        }
        let k = self.prior.k;
        for _ in 0..kept {
            self.sweep();
            out.theta.extend_from_slice(&self.state.theta);
            out.phi.extend_from_slice(&self.state.phi);
            for row in self.state.theta.chunks_exact(k) {
                out.z.push(sample_unnormalized(row, row.iter().sum(), &mut self.rng));
            }
        }
    }

    pub fn run(&mut self, burn_in: usize, kept: usize) -> ChainDraws {
        let mut out = ChainDraws::default();
        self.run_into(burn_in, kept, &mut out);
        out
    }
}

/// Kept draws of a single chain.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainDraws {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub z: Vec<usize>,
}

/// Runs `cfg.chains` independent Gibbs chains, concatenates their kept
/// draws and computes split R-hat for every `theta` and `phi` coordinate.
pub fn fit_posterior(
    data: &SurveyData,
    prior: &PriorSpec,
    cfg: &SamplerConfig,
) -> Result<(PosteriorSamples, Diagnostics)> {
    prior.validate()?;
    prior.check_data(data)?;
    cfg.validate()?;

    let per_chain: Vec<ChainDraws> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| {
            let mut chain = GibbsChain::new(data, prior, cfg.chain_rng(c))?;
            Ok(chain.run(cfg.burn_in, cfg.kept))
        })
        .collect::<Result<_>>()?;

    let mut samples = PosteriorSamples {
        n: prior.n,
        k: prior.k,
        layout: prior.layout.clone(),
        theta: Vec::with_capacity(cfg.chains * cfg.kept * prior.alpha.len()),
        phi: Vec::with_capacity(cfg.chains * cfg.kept * prior.beta.len()),
        z: Vec::with_capacity(cfg.chains * cfg.kept * prior.n),
        chain_id: Vec::with_capacity(cfg.chains * cfg.kept),
    };
    for (c, draws) in per_chain.into_iter().enumerate() {
        samples.theta.extend(draws.theta);
        samples.phi.extend(draws.phi);
        samples.z.extend(draws.z);
        samples.chain_id.extend(std::iter::repeat_n(c, cfg.kept));
    }
    let diagnostics = diagnose(&samples, cfg)?;
    Ok((samples, diagnostics))
}

fn diagnose(samples: &PosteriorSamples, cfg: &SamplerConfig) -> Result<Diagnostics> {
    let mut diagnostics = Diagnostics {
        rhat: Vec::new(),
        max_rhat: None,
        rhat_threshold: cfg.rhat_threshold,
        label_switching: None,
        ess_note: None,
    };
    if !cfg.compute_rhat {
        return Ok(diagnostics);
    }
    let (n, k, layout) = (samples.n, samples.k, &samples.layout);
    let theta_width = n * k;
    let phi_width = k * layout.width();
    let traces = |values: &[f64], width: usize, coord: usize| -> Vec<Vec<f64>> {
        (0..cfg.chains).map(|c| samples.chain_range(c).map(|t| values[t * width + coord]).collect()).collect()
    };

    let mut rhat = Vec::with_capacity(theta_width + phi_width);
    for i in 0..n {
        for c in 0..k {
            let r = split_rhat(&traces(&samples.theta, theta_width, i * k + c))?;
            rhat.push((format!("theta[{},{}]", i + 1, c + 1), r));
        }
    }
    for c in 0..k {
        for q in 0..layout.questions() {
            for v in 0..layout.alphabet()[q] {
                let coord = c * layout.width() + layout.offset(q) + v;
                let r = split_rhat(&traces(&samples.phi, phi_width, coord))?;
                rhat.push((format!("phi[{},{},{}]", c + 1, q + 1, v + 1), r));
            }
        }
    }
    let max = rhat.iter().map(|(_, r)| *r).fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        diagnostics.ess_note = Some("some coordinates have zero within-chain variance but differ across chains".into());
    }
    diagnostics.rhat = rhat;
    diagnostics.max_rhat = Some(max);
    diagnostics.label_switching = label_switching_check(samples, cfg.chains);
    Ok(diagnostics)
}

/// Compares each chain's posterior-mean `theta` with chain 1 and reports
/// chains whose means align better after permuting cluster labels.
fn label_switching_check(samples: &PosteriorSamples, chains: usize) -> Option<String> {
    let (n, k) = (samples.n, samples.k);
    if k > MAX_SWITCH_CHECK_K || chains < 2 {
        return None;
    }
    let chain_mean = |c: usize| {
        let range = samples.chain_range(c);
        let len = range.len() as f64;
        let mut mean = vec![0.0; n * k];
        for t in range {
            for (m, v) in mean.iter_mut().zip(samples.theta_draw(t)) {
                *m += v / len;
            }
        }
        mean
    };
    let reference = chain_mean(0);
    let mut switched = Vec::new();
    for c in 1..chains {
        let mean = chain_mean(c);
        let cost = |perm: &[usize]| -> f64 {
            (0..n).map(|i| (0..k).map(|j| (mean[i * k + perm[j]] - reference[i * k + j]).powi(2)).sum::<f64>()).sum()
        };
        let identity: Vec<usize> = (0..k).collect();
        let base = cost(&identity);
        let best = lexicographic_permutations(k).map(|p| cost(&p)).fold(f64::INFINITY, f64::min);
        if best < 0.5 * base {
            switched.push(c + 1);
        }
    }
    if switched.is_empty() {
        None
    } else {
        Some(format!(
            "chains {switched:?} agree with chain 1 only after permuting cluster labels; \
             theta may not be identified and label identification is unreliable"
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::log_likelihood;

    fn small_data() -> SurveyData {
        SurveyData::from_one_based(
            vec![vec![1, 2, 3], vec![1, 1, 3], vec![2, 2, 1], vec![2, 1, 1], vec![1, 2, 2]],
            vec![2, 2, 3],
        )
        .unwrap()
    }

    #[test]
    fn identical_seeds_give_identical_chains() {
        let data = small_data();
        let prior = PriorSpec::default_for(&data, 2).unwrap();
        let cfg = SamplerConfig::default();
        let a = GibbsChain::new(&data, &prior, cfg.chain_rng(0)).unwrap().run(20, 50);
        let b = GibbsChain::new(&data, &prior, cfg.chain_rng(0)).unwrap().run(20, 50);
        assert_eq!(a, b);
        let c = GibbsChain::new(&data, &prior, cfg.chain_rng(1)).unwrap().run(20, 50);
        assert_ne!(a, c);
    }

    #[test]
    fn draws_stay_inside_the_simplex() {
        let data = small_data();
        let prior = PriorSpec::symmetric(&data, 3, 0.3, 0.5).unwrap();
        let cfg = SamplerConfig { chains: 2, burn_in: 50, kept: 100, ..Default::default() };
        let (samples, diag) = fit_posterior(&data, &prior, &cfg).unwrap();
        assert_eq!(samples.num_draws(), 200);
        for t in 0..samples.num_draws() {
            for row in samples.theta_draw(t).chunks(3) {
                assert!(row.iter().all(|&p| p > 0.0 && p < 1.0));
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            let phi = samples.phi_draw(t);
            for c in 0..3 {
                for q in 0..3 {
                    let s = &phi[samples.layout.slice(c, q)];
                    assert!(s.iter().all(|&p| p > 0.0 && p < 1.0));
                    assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                }
            }
            assert!(samples.z_draw(t).iter().all(|&z| z < 3));
            assert!(log_likelihood(&data, 3, samples.theta_draw(t), phi).unwrap().is_finite());
        }
        assert_eq!(diag.rhat.len(), 5 * 3 + 3 * 7);
        assert_eq!(diag.rhat[0].0, "theta[1,1]");
        assert_eq!(diag.rhat.last().unwrap().0, "phi[3,3,3]");
    }

    #[test]
    fn fit_is_deterministic_in_the_seed() {
        let data = small_data();
        let prior = PriorSpec::default_for(&data, 2).unwrap();
        let cfg = SamplerConfig { burn_in: 10, kept: 20, ..Default::default() };
        let a = fit_posterior(&data, &prior, &cfg).unwrap();
        let b = fit_posterior(&data, &prior, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_errors() {
        let data = small_data();
        let prior = PriorSpec::default_for(&data, 2).unwrap();
        let cfg = SamplerConfig { chains: 1, ..Default::default() };
        assert!(matches!(fit_posterior(&data, &prior, &cfg), Err(crate::Error::Config(_))));
        let cfg = SamplerConfig { chains: 1, compute_rhat: false, burn_in: 5, kept: 5, ..Default::default() };
        let (_, diag) = fit_posterior(&data, &prior, &cfg).unwrap();
        assert!(diag.max_rhat.is_none());
        assert!(!diag.converged());

        let other = SurveyData::from_one_based(vec![vec![1, 1, 1]], vec![2, 2, 3]).unwrap();
        assert!(fit_posterior(&other, &prior, &SamplerConfig::default()).is_err());
    }
}
