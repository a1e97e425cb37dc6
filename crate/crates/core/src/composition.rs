//! Compositional-data primitives: closure of an assignment into relative
//! group sizes, the pseudo-count closure, and the Aitchison distance.

use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::error::{config, domain, Result};

/// Largest label count for which permutations are enumerated exhaustively.
pub const MAX_PERMUTATION_K: usize = 10;

/// A vector of non-negative parts, one per cluster label.
///
/// Parts need not sum to one: the Aitchison distance is invariant to
/// positive rescaling, so raw target counts such as `(7, 7, 6)` are valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Composition(Vec<f64>);

impl Composition {
    pub fn new(parts: Vec<f64>) -> Result<Self> {
        if parts.is_empty() {
            return Err(domain("composition must have at least one part"));
        }
        if let Some(p) = parts.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(domain(format!("composition parts must be finite and >= 0, got {p}")));
        }
        Ok(Self(parts))
    }

    /// The balanced composition `(1/k, ..., 1/k)`.
    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn parts(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&p| p > 0.0)
    }

    /// True when every part is equal, i.e. the composition is fixed by
    /// every label permutation.
    pub fn is_uniform(&self) -> bool {
        self.0.iter().all(|&p| p == self.0[0])
    }

    /// `(parts[sigma(0)], ..., parts[sigma(K-1)])`.
    pub fn permuted(&self, sigma: &LabelPermutation) -> Result<Self> {
        if sigma.len() != self.len() {
            return Err(domain("permutation length differs from composition length"));
        }
        Ok(Self(sigma.mapping().iter().map(|&j| self.0[j]).collect()))
    }

    /// Logs of the parts relative to the largest part, so rescaling by a
    /// power of two leaves distances bitwise unchanged.
    fn logs(&self) -> Result<Vec<f64>> {
        if let Some(&p) = self.0.iter().find(|&&p| p.is_nan() || p <= 0.0) {
            return Err(domain(format!(
                "Aitchison distance needs strictly positive parts, got {p}; \
                 use a pseudo-count closure with delta > 0"
            )));
        }
        let top = self.0.iter().copied().fold(f64::MIN_POSITIVE, f64::max);
        Ok(self
            .0
            .iter()
            .map(|&p| {
                let r = p / top;
                if r >= f64::MIN_POSITIVE {
                    r.ln()
                } else {
                    p.ln() - top.ln()
                }
            })
            .collect())
    }
}

impl AsRef<[f64]> for Composition {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A bijection on the label set `0..K`, stored as `mapping[i] = sigma(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelPermutation(Vec<usize>);

impl LabelPermutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &j in &mapping {
            if j >= mapping.len() || seen[j] {
                return Err(domain(format!("{mapping:?} is not a permutation")));
            }
            seen[j] = true;
        }
        Ok(Self(mapping))
    }

    pub fn identity(k: usize) -> Self {
        Self((0..k).collect())
    }

    pub fn mapping(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn apply(&self, label: usize) -> usize {
        self.0[label]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Self(inv)
    }

    /// One-based image list, as written in reports.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&j| j + 1).collect()
    }
}

/// Iterates every permutation of `0..k` in lexicographic order, starting
/// from the identity.
pub fn lexicographic_permutations(k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next: Option<Vec<usize>> = Some((0..k).collect());
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut p = current.clone();
        if next_permutation(&mut p) {
            next = Some(p);
        }
        Some(current)
    })
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

pub(crate) fn check_permutation_k(k: usize) -> Result<()> {
    if k > MAX_PERMUTATION_K {
        return Err(config(format!(
            "exhaustive permutation search over {k} labels ({k}! candidates) is not supported; \
             at most {MAX_PERMUTATION_K} labels"
        )));
    }
    Ok(())
}

/// Relative group sizes `count_k / N` of an assignment over `k` labels.
pub fn closure(a: &Assignment, k: usize) -> Result<Composition> {
    closure_pseudo(a, k, 0.0)
}

/// Pseudo-count closure `(count_k + delta) / (N (1 + delta))`.
///
/// The denominator is kept exactly in this form, so the parts sum to
/// `(N + K delta) / (N + N delta)` rather than one when `K != N`. Every
/// consumer goes through the Aitchison distance, which ignores the scale.
pub fn closure_pseudo(a: &Assignment, k: usize, delta: f64) -> Result<Composition> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(domain(format!("pseudo-count delta must be finite and >= 0, got {delta}")));
    }
    if a.is_empty() {
        return Err(domain("cannot close an empty assignment"));
    }
    if let Some(&l) = a.labels().iter().find(|&&l| l >= k) {
        return Err(domain(format!("label {} is outside 1..={k}", l + 1)));
    }
    let mut counts = vec![0usize; k];
    for &l in a.labels() {
        counts[l] += 1;
    }
    Ok(closure_from_counts(&counts, a.len(), delta))
}

pub(crate) fn closure_from_counts(counts: &[usize], n: usize, delta: f64) -> Composition {
    let denom = n as f64 * (1.0 + delta);
    Composition(counts.iter().map(|&c| (c as f64 + delta) / denom).collect())
}

/// Aitchison distance between two strictly positive compositions.
pub fn aitchison_distance(x: &Composition, y: &Composition) -> Result<f64> {
    if x.len() != y.len() {
        return Err(domain(format!("compositions have different lengths ({} vs {})", x.len(), y.len())));
    }
    Ok(centered_gap(&x.logs()?, &y.logs()?, None))
}

/// Minimum of `d_A(eta_sigma, c)` over all label permutations `sigma`.
///
/// Returns the distance together with the lexicographically smallest
/// permutation attaining it.
pub fn min_perm_aitchison(eta: &Composition, c: &Composition) -> Result<(f64, LabelPermutation)> {
    if eta.len() != c.len() {
        return Err(domain(format!("compositions have different lengths ({} vs {})", eta.len(), c.len())));
    }
    check_permutation_k(eta.len())?;
    let log_eta = eta.logs()?;
    let log_c = c.logs()?;
    if eta.is_uniform() {
        let d = centered_gap(&log_eta, &log_c, None);
        return Ok((d, LabelPermutation::identity(eta.len())));
    }
    let mut best = f64::INFINITY;
    let mut best_sigma = None;
    for sigma in lexicographic_permutations(eta.len()) {
        let d = centered_gap(&log_eta, &log_c, Some(&sigma));
        if d < best {
            best = d;
            best_sigma = Some(sigma);
        }
    }
    let sigma = best_sigma.expect("at least one permutation");
    Ok((best, LabelPermutation(sigma)))
}

/// `sqrt(sum_i (u_i - mean(u))^2)` with `u_i = lx[sigma(i)] - ly[i]`.
///
/// Equal to the double-sum form `sqrt(1/(2D) sum_ij (u_i - u_j)^2)`.
pub(crate) fn centered_gap(lx: &[f64], ly: &[f64], sigma: Option<&[usize]>) -> f64 {
    let d = ly.len();
    let u = |i: usize| match sigma {
        Some(s) => lx[s[i]] - ly[i],
        None => lx[i] - ly[i],
    };
    let mean = (0..d).map(u).sum::<f64>() / d as f64;
    (0..d).map(|i| (u(i) - mean).powi(2)).sum::<f64>().sqrt()
}
