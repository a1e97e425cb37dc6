//! Re-identifies the labels of a Bayes action against the labelling of an
//! identified `theta` posterior.

use crate::assignment::Assignment;
use crate::composition::{check_permutation_k, lexicographic_permutations, LabelPermutation};
use crate::error::{domain, Result};

/// `s[i][j] = sum_t sum_n log theta^(t)_{nj} * 1{a_n = i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    k: usize,
    s: Vec<f64>,
}

impl ScoreMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.s[i * self.k + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.s.chunks(self.k).map(<[f64]>::to_vec).collect()
    }

    /// Posterior support of mapping action label `i` to `sigma(i)`.
    pub fn support(&self, sigma: &[usize]) -> f64 {
        sigma.iter().enumerate().map(|(i, &j)| self.get(i, j)).sum()
    }
}

/// Builds the score matrix from `theta` draws laid out `T x N x K`.
pub fn build_score_matrix(a_hat: &Assignment, theta: &[f64], k: usize) -> Result<ScoreMatrix> {
    let n = a_hat.len();
    let per_draw = n * k;
    if k == 0 || theta.is_empty() || theta.len() % per_draw != 0 {
        return Err(domain(format!("theta has {} values, not a positive multiple of N*K = {per_draw}", theta.len())));
    }
    if let Some(&l) = a_hat.labels().iter().find(|&&l| l >= k) {
        return Err(domain(format!("action label {} exceeds the {k} posterior clusters", l + 1)));
    }
    let mut s = vec![0.0; k * k];
    for draw in theta.chunks_exact(per_draw) {
        for (row, &i) in draw.chunks_exact(k).zip(a_hat.labels()) {
            for (j, &p) in row.iter().enumerate() {
                if p.is_nan() || p <= 0.0 {
                    return Err(domain("theta draws must be strictly positive to score labels"));
                }
                s[i * k + j] += p.ln();
            }
        }
    }
    Ok(ScoreMatrix { k, s })
}

/// Finds the label permutation with the largest posterior support and
/// applies it to `a_hat`.
///
/// Returns the relabelled action (over `k` labels) and `sigma`, where action
/// label `i` becomes posterior label `sigma(i)`. Ties go to the
/// lexicographically smallest `sigma`.
pub fn identify_labels(a_hat: &Assignment, theta: &[f64], k: usize) -> Result<(Assignment, LabelPermutation)> {
    check_permutation_k(k)?;
    let scores = build_score_matrix(a_hat, theta, k)?;
    let mut best = f64::NEG_INFINITY;
    let mut best_sigma = Vec::new();
    for sigma in lexicographic_permutations(k) {
        let v = scores.support(&sigma);
        if v > best {
            best = v;
            best_sigma = sigma;
        }
    }
    let sigma = LabelPermutation::new(best_sigma)?;
    let relabelled = a_hat.labels().iter().map(|&l| sigma.apply(l)).collect();
    Ok((Assignment::new(relabelled, k)?, sigma))
}
