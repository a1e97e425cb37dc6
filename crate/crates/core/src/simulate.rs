//! Synthetic survey data with planted clusters, and scores against the
//! planted truth.
//!
//! Generation follows the mixture model cell by cell: respondent weights
//! `theta_n` concentrate on the planted cluster, each cluster profile
//! `phi_kq` concentrates on a cluster-specific option, and every response
//! first draws its generating cluster from `theta_n`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::error::{domain, Result};
use crate::information::vi_loss;
use crate::model::{sample_dirichlet, sample_unnormalized, PriorSpec, ProfileLayout, SurveyData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Planted cluster sizes; their sum is `N` and their count is `K`.
    pub group_sizes: Vec<usize>,
    pub questions: usize,
    /// Options per question; a single value applies to every question.
    pub options: Vec<usize>,
    /// Dirichlet mass on the planted cluster (1 on the others).
    pub theta_concentration: f64,
    /// Dirichlet mass on each cluster's modal option (1 on the others).
    pub phi_concentration: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            group_sizes: vec![7, 7, 6],
            questions: 10,
            options: vec![3],
            theta_concentration: 8.0,
            phi_concentration: 4.0,
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn respondents(&self) -> usize {
        self.group_sizes.iter().sum()
    }

    pub fn clusters(&self) -> usize {
        self.group_sizes.len()
    }

    pub fn alphabet(&self) -> Vec<usize> {
        if self.options.len() == 1 {
            vec![self.options[0]; self.questions]
        } else {
            self.options.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.group_sizes.len() < 2 {
            return Err(domain("simulation needs at least 2 clusters"));
        }
        if self.group_sizes.contains(&0) {
            return Err(domain("planted group sizes must be positive"));
        }
        if self.questions == 0 {
            return Err(domain("simulation needs at least one question"));
        }
        if self.options.len() != 1 && self.options.len() != self.questions {
            return Err(domain("options must have one entry or one per question"));
        }
        if self.options.iter().any(|&v| v < 2) {
            return Err(domain("every question needs at least 2 options"));
        }
        for (name, c) in
            [("theta_concentration", self.theta_concentration), ("phi_concentration", self.phi_concentration)]
        {
            if !(c > 0.0 && c.is_finite()) {
                return Err(domain(format!("{name} must be positive and finite, got {c}")));
            }
        }
        Ok(())
    }
}

/// Planted parameters of a simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTruth {
    pub z_true: Assignment,
    /// `N x K` row-major.
    pub theta_true: Vec<f64>,
    /// `K x sum(V_q)`.
    pub phi_true: Vec<f64>,
    /// Dirichlet parameters `phi_true` was drawn from, same layout.
    pub phi_hyper: Vec<f64>,
    /// Generating cluster of every response cell, `N x Q`.
    pub cell_clusters: Vec<usize>,
    pub layout: ProfileLayout,
}

impl SimTruth {
    /// Prior whose `beta` is the generating `phi` hyper-parameters plus
    /// `Uniform(0, noise)` per entry, with symmetric `alpha`.
    pub fn informed_prior(&self, alpha: f64, noise: f64, seed: u64) -> Result<PriorSpec> {
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(domain(format!("prior noise must be finite and >= 0, got {noise}")));
        }
        let n = self.z_true.len();
        let k = self.z_true.k();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let beta =
            self.phi_hyper.iter().map(|&b| if noise > 0.0 { b + rng.random::<f64>() * noise } else { b }).collect();
        PriorSpec::new(n, k, self.layout.clone(), vec![alpha; n * k], beta)
    }
}

/// Generates a dataset and its planted truth; deterministic in `cfg.seed`.
pub fn simulate_dataset(cfg: &SimConfig) -> Result<(SurveyData, SimTruth)> {
    cfg.validate()?;
    let (n, k) = (cfg.respondents(), cfg.clusters());
    let alphabet = cfg.alphabet();
    let layout = ProfileLayout::new(alphabet.clone());
    let width = layout.width();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let z: Vec<usize> =
        cfg.group_sizes.iter().enumerate().flat_map(|(c, &size)| std::iter::repeat_n(c, size)).collect();

    // Modal options: a fresh cluster order per question, so clusters get
    // distinct modes whenever K <= V_q and still differ across questions
    // otherwise.
    let mut phi_hyper = vec![1.0; k * width];
    let mut order: Vec<usize> = (0..k).collect();
    for (q, &v) in alphabet.iter().enumerate() {
        order.shuffle(&mut rng);
        for (pos, &c) in order.iter().enumerate() {
            phi_hyper[c * width + layout.offset(q) + pos % v] = cfg.phi_concentration;
        }
    }
    let mut phi = vec![0.0; k * width];
    for c in 0..k {
        for q in 0..alphabet.len() {
            let range = layout.slice(c, q);
            sample_dirichlet(&phi_hyper[range.clone()], &mut phi[range], &mut rng);
        }
    }

    let mut theta = vec![0.0; n * k];
    let mut conc = vec![1.0; k];
    for (i, row) in theta.chunks_exact_mut(k).enumerate() {
        conc.iter_mut().for_each(|a| *a = 1.0);
        conc[z[i]] = cfg.theta_concentration;
        sample_dirichlet(&conc, row, &mut rng);
    }

    let mut rows = Vec::with_capacity(n);
    let mut cells = Vec::with_capacity(n * alphabet.len());
    for i in 0..n {
        let theta_i = &theta[i * k..(i + 1) * k];
        let row: Vec<usize> = (0..alphabet.len())
            .map(|q| {
                let c = sample_unnormalized(theta_i, theta_i.iter().sum(), &mut rng);
                cells.push(c);
                let profile = &phi[layout.slice(c, q)];
                sample_unnormalized(profile, profile.iter().sum(), &mut rng)
            })
            .collect();
        rows.push(row);
    }

    let data = SurveyData::new(rows, alphabet)?;
    let truth = SimTruth {
        z_true: Assignment::new(z, k)?,
        theta_true: theta,
        phi_true: phi,
        phi_hyper,
        cell_clusters: cells,
        layout,
    };
    Ok((data, truth))
}

/// Fraction of observations whose label equals the true label.
pub fn accuracy(a: &Assignment, z_true: &Assignment) -> Result<f64> {
    if a.len() != z_true.len() {
        return Err(domain(format!("assignments have different lengths ({} vs {})", a.len(), z_true.len())));
    }
    let hits = a.labels().iter().zip(z_true.labels()).filter(|(x, y)| x == y).count();
    Ok(hits as f64 / a.len() as f64)
}

/// Variation of Information between an action and the planted truth.
pub fn vi_from_truth(a: &Assignment, z_true: &Assignment) -> Result<f64> {
    vi_loss(a, z_true)
}
