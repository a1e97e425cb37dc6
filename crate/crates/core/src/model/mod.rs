//! Bayesian categorical mixture model for survey responses.
//!
//! Respondent `n` has mixture weights `theta_n` over `K` clusters; cluster
//! `k` answers question `q` according to the profile `phi_kq` over the
//! question's `V_q` options. Both carry Dirichlet priors. Posterior draws of
//! the hard assignment `z_n ~ Categorical(theta_n)` feed the decision step.

mod dirichlet;
mod gibbs;
mod rhat;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::error::{domain, Result};

pub use dirichlet::sample_dirichlet;
pub use gibbs::{fit_posterior, ChainState, GibbsChain, SamplerConfig};
pub use rhat::split_rhat;

/// Tolerance for simplex sums on user-supplied probability vectors.
const SIMPLEX_TOL: f64 = 1e-9;

/// Offsets of each question's options inside a flattened `K x sum(V_q)`
/// profile array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileLayout {
    alphabet: Vec<usize>,
    offsets: Vec<usize>,
    width: usize,
}

impl ProfileLayout {
    pub fn new(alphabet: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(alphabet.len());
        let mut width = 0;
        for &v in &alphabet {
            offsets.push(width);
            width += v;
        }
        Self { alphabet, offsets, width }
    }

    pub fn alphabet(&self) -> &[usize] {
        &self.alphabet
    }

    pub fn questions(&self) -> usize {
        self.alphabet.len()
    }

    /// Total number of options across questions.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn offset(&self, q: usize) -> usize {
        self.offsets[q]
    }

    /// Range of a `(cluster, question)` slice in a `K x width` array.
    pub fn slice(&self, k: usize, q: usize) -> std::ops::Range<usize> {
        let start = k * self.width + self.offsets[q];
        start..start + self.alphabet[q]
    }
}

/// `N x Q` matrix of categorical responses, stored zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyData {
    n: usize,
    layout: ProfileLayout,
    responses: Vec<usize>,
}

impl SurveyData {
    /// `rows[n][q]` must lie in `0..alphabet[q]`.
    pub fn new(rows: Vec<Vec<usize>>, alphabet: Vec<usize>) -> Result<Self> {
        if rows.is_empty() {
            return Err(domain("survey data needs at least one respondent"));
        }
        if alphabet.is_empty() {
            return Err(domain("survey data needs at least one question"));
        }
        if let Some(q) = alphabet.iter().position(|&v| v < 2) {
            return Err(domain(format!("question {} has fewer than 2 options", q + 1)));
        }
        let q_count = alphabet.len();
        let mut responses = Vec::with_capacity(rows.len() * q_count);
        for (n, row) in rows.iter().enumerate() {
            if row.len() != q_count {
                return Err(domain(format!(
                    "respondent {} answers {} questions, expected {q_count}",
                    n + 1,
                    row.len()
                )));
            }
            for (q, &x) in row.iter().enumerate() {
                if x >= alphabet[q] {
                    return Err(domain(format!(
                        "respondent {}, question {}: response {} outside 1..={}",
                        n + 1,
                        q + 1,
                        x + 1,
                        alphabet[q]
                    )));
                }
            }
            responses.extend_from_slice(row);
        }
        Ok(Self { n: rows.len(), layout: ProfileLayout::new(alphabet), responses })
    }

    /// Builds the matrix from one-based response codes.
    pub fn from_one_based(rows: Vec<Vec<usize>>, alphabet: Vec<usize>) -> Result<Self> {
        let mut zero = Vec::with_capacity(rows.len());
        for (n, row) in rows.into_iter().enumerate() {
            if let Some(q) = row.iter().position(|&x| x == 0) {
                return Err(domain(format!("respondent {}, question {}: response 0", n + 1, q + 1)));
            }
            zero.push(row.into_iter().map(|x| x - 1).collect());
        }
        Self::new(zero, alphabet)
    }

    pub fn respondents(&self) -> usize {
        self.n
    }

    pub fn questions(&self) -> usize {
        self.layout.questions()
    }

    pub fn alphabet(&self) -> &[usize] {
        self.layout.alphabet()
    }

    pub fn layout(&self) -> &ProfileLayout {
        &self.layout
    }

    /// Zero-based response of respondent `n` to question `q`.
    pub fn get(&self, n: usize, q: usize) -> usize {
        self.responses[n * self.questions() + q]
    }

    pub fn row(&self, n: usize) -> &[usize] {
        let q = self.questions();
        &self.responses[n * q..(n + 1) * q]
    }
}

/// Dirichlet hyper-parameters: `alpha` is `N x K` (row-major), `beta` is a
/// flattened `K x sum(V_q)` array following [`ProfileLayout`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub n: usize,
    pub k: usize,
    pub layout: ProfileLayout,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Default per-respondent concentration.
pub const DEFAULT_ALPHA: f64 = 0.5;
/// Default per-option concentration.
pub const DEFAULT_BETA: f64 = 1.0;

impl PriorSpec {
    pub fn new(n: usize, k: usize, layout: ProfileLayout, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let prior = Self { n, k, layout, alpha, beta };
        prior.validate()?;
        Ok(prior)
    }

    /// Same concentration for every respondent and every option.
    pub fn symmetric(data: &SurveyData, k: usize, alpha: f64, beta: f64) -> Result<Self> {
        let layout = data.layout().clone();
        let n = data.respondents();
        Self::new(n, k, layout.clone(), vec![alpha; n * k], vec![beta; k * layout.width()])
    }

    /// `alpha_n = (0.5, ..., 0.5)` and `beta_kq = (1, ..., 1)`.
    pub fn default_for(data: &SurveyData, k: usize) -> Result<Self> {
        Self::symmetric(data, k, DEFAULT_ALPHA, DEFAULT_BETA)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(domain("prior needs at least one cluster"));
        }
        if self.alpha.len() != self.n * self.k {
            return Err(domain(format!("alpha has {} entries, expected N*K = {}", self.alpha.len(), self.n * self.k)));
        }
        if self.beta.len() != self.k * self.layout.width() {
            return Err(domain(format!(
                "beta has {} entries, expected K*sum(V) = {}",
                self.beta.len(),
                self.k * self.layout.width()
            )));
        }
        if let Some(v) = self.alpha.iter().chain(&self.beta).find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(domain(format!("prior concentrations must be positive and finite, got {v}")));
        }
        Ok(())
    }

    pub(crate) fn check_data(&self, data: &SurveyData) -> Result<()> {
        if data.respondents() != self.n || data.layout() != &self.layout {
            return Err(domain("prior dimensions do not match the survey data"));
        }
        Ok(())
    }

    pub fn alpha_row(&self, n: usize) -> &[f64] {
        &self.alpha[n * self.k..(n + 1) * self.k]
    }

    pub fn beta_slice(&self, k: usize, q: usize) -> &[f64] {
        &self.beta[self.layout.slice(k, q)]
    }
}

/// Kept posterior draws from all chains, concatenated chain by chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSamples {
    pub n: usize,
    pub k: usize,
    pub layout: ProfileLayout,
    /// `T x N x K`.
    pub theta: Vec<f64>,
    /// `T x K x sum(V_q)`.
    pub phi: Vec<f64>,
    /// `T x N`, zero-based labels.
    pub z: Vec<usize>,
    pub chain_id: Vec<usize>,
}

impl PosteriorSamples {
    pub fn num_draws(&self) -> usize {
        self.chain_id.len()
    }

    pub fn num_chains(&self) -> usize {
        self.chain_id.iter().max().map_or(0, |&c| c + 1)
    }

    /// `theta` of draw `t`, `N x K` row-major.
    pub fn theta_draw(&self, t: usize) -> &[f64] {
        let s = self.n * self.k;
        &self.theta[t * s..(t + 1) * s]
    }

    pub fn theta_row(&self, t: usize, n: usize) -> &[f64] {
        let start = (t * self.n + n) * self.k;
        &self.theta[start..start + self.k]
    }

    pub fn phi_draw(&self, t: usize) -> &[f64] {
        let s = self.k * self.layout.width();
        &self.phi[t * s..(t + 1) * s]
    }

    pub fn z_draw(&self, t: usize) -> &[usize] {
        &self.z[t * self.n..(t + 1) * self.n]
    }

    /// Every kept `z` draw as an assignment over `K` labels.
    pub fn z_assignments(&self) -> Vec<Assignment> {
        (0..self.num_draws()).map(|t| Assignment::new_unchecked(self.z_draw(t).to_vec(), self.k)).collect()
    }

    /// Posterior mean of `theta`, `N x K` row-major.
    pub fn theta_mean(&self) -> Vec<f64> {
        column_means(&self.theta, self.n * self.k, self.num_draws())
    }

    pub fn phi_mean(&self) -> Vec<f64> {
        column_means(&self.phi, self.k * self.layout.width(), self.num_draws())
    }

    /// Draws of chain `c` only, as `(start, end)` indices.
    pub fn chain_range(&self, c: usize) -> std::ops::Range<usize> {
        let start = self.chain_id.iter().position(|&x| x == c).unwrap_or(0);
        let end = self.chain_id.iter().rposition(|&x| x == c).map_or(start, |e| e + 1);
        start..end
    }
}

fn column_means(values: &[f64], width: usize, rows: usize) -> Vec<f64> {
    let mut mean = vec![0.0; width];
    for row in values.chunks_exact(width) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= rows as f64);
    mean
}

/// Convergence summary for a posterior fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Split R-hat per coordinate, in `theta` then `phi` order. Names are
    /// one-based: `theta[n,k]`, `phi[k,q,v]`.
    pub rhat: Vec<(String, f64)>,
    pub max_rhat: Option<f64>,
    pub rhat_threshold: f64,
    /// Set when per-chain posterior means of `theta` line up better under a
    /// non-identity label permutation than under the identity.
    pub label_switching: Option<String>,
    pub ess_note: Option<String>,
}

impl Diagnostics {
    pub fn converged(&self) -> bool {
        self.max_rhat.is_some_and(|r| r < self.rhat_threshold)
    }
}

/// `sum_n sum_q log(sum_k phi_{k,q,x_nq} theta_nk)`.
///
/// `theta` is `N x K` row-major and `phi` a flattened `K x sum(V_q)` array.
pub fn log_likelihood(data: &SurveyData, k: usize, theta: &[f64], phi: &[f64]) -> Result<f64> {
    let layout = data.layout();
    if theta.len() != data.respondents() * k || phi.len() != k * layout.width() {
        return Err(domain("parameter dimensions do not match the survey data"));
    }
    let mut ll = 0.0;
    for n in 0..data.respondents() {
        let theta_n = &theta[n * k..(n + 1) * k];
        for q in 0..data.questions() {
            let col = layout.offset(q) + data.get(n, q);
            let p: f64 = (0..k).map(|c| phi[c * layout.width() + col] * theta_n[c]).sum();
            ll += p.ln();
        }
    }
    Ok(ll)
}

/// Draws a zero-based label from `Categorical(theta_row)`.
pub fn sample_z<R: Rng + ?Sized>(theta_row: &[f64], rng: &mut R) -> Result<usize> {
    if theta_row.is_empty() {
        return Err(domain("empty probability vector"));
    }
    if theta_row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(domain("probabilities must be finite and >= 0"));
    }
    let sum: f64 = theta_row.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(domain(format!("probabilities sum to {sum}, not 1")));
    }
    Ok(sample_unnormalized(theta_row, sum, rng))
}

/// Categorical draw from non-negative weights with known positive total.
pub(crate) fn sample_unnormalized<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    // Rounding left u just above the accumulated total.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}
