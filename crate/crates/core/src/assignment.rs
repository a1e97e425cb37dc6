use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A hard cluster assignment of `N` observations into `k` admissible labels.
///
/// Labels are stored zero-based (`0..k`). Text formats and reports use the
/// one-based convention; see [`Assignment::from_one_based`] and
/// [`Assignment::to_one_based`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    labels: Vec<usize>,
    k: usize,
}

impl Assignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(domain("assignment must contain at least one observation"));
        }
        if k == 0 {
            return Err(domain("number of labels must be at least 1"));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(domain(format!("label {} of observation {} is outside 1..={k}", l + 1, i + 1)));
        }
        Ok(Self { labels, k })
    }

    /// Builds an assignment from one-based labels in `1..=k`.
    pub fn from_one_based(labels: &[usize], k: usize) -> Result<Self> {
        if let Some(i) = labels.iter().position(|&l| l == 0) {
            return Err(domain(format!("label 0 of observation {} is outside 1..={k}", i + 1)));
        }
        Self::new(labels.iter().map(|&l| l - 1).collect(), k)
    }

    pub(crate) fn new_unchecked(labels: Vec<usize>, k: usize) -> Self {
        debug_assert!(labels.iter().all(|&l| l < k));
        Self { labels, k }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|&l| l + 1).collect()
    }

    /// Number of admissible labels.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Per-label counts, length `k`.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Same assignment with a larger label alphabet.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(self.labels.clone(), k)
    }

    /// Relabels every observation through `mapping` (`mapping[old] = new`).
    pub fn relabel(&self, mapping: &[usize]) -> Result<Self> {
        if mapping.len() < self.k {
            return Err(domain("label mapping shorter than the label alphabet"));
        }
        let k = mapping.iter().copied().max().map_or(self.k, |m| (m + 1).max(self.k));
        Self::new(self.labels.iter().map(|&l| mapping[l]).collect(), k)
    }
}
