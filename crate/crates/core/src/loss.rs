//! Size-constrained loss functions and their Monte-Carlo expectation over
//! posterior assignment draws.
//!
//! The loss of an action `a` against a draw `z` is
//! `VI(a, z) + lambda * d_A(eta, C(a, delta))` in the label-sensitive mode
//! and `VI(a, z) + lambda * min_sigma d_A(eta_sigma, C(a, delta))` in the
//! label-invariant mode.

use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::composition::{
    aitchison_distance, centered_gap, check_permutation_k, closure_from_counts, lexicographic_permutations,
    min_perm_aitchison, Composition,
};
use crate::error::{domain, Result};
use crate::information::{vi_loss, xlog2x};

pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LossMode {
    /// Target sizes are tied to specific labels.
    #[default]
    Sensitive,
    /// Target sizes hold up to a permutation of the labels.
    Invariant,
}

impl std::str::FromStr for LossMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sensitive" => Ok(Self::Sensitive),
            "invariant" => Ok(Self::Invariant),
            other => Err(domain(format!("unknown loss mode `{other}` (sensitive|invariant)"))),
        }
    }
}

impl std::fmt::Display for LossMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Sensitive => "sensitive",
            Self::Invariant => "invariant",
        })
    }
}

/// Loss configuration.
///
/// `eta` has `K_target <= k` parts; candidate actions use labels
/// `0..K_target`, while posterior draws use `0..k`. A shorter `eta` merges
/// model clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub mode: LossMode,
    pub eta: Composition,
    pub lambda: f64,
    pub delta: f64,
    pub k: usize,
}

impl LossSpec {
    pub fn new(mode: LossMode, eta: Composition, lambda: f64, delta: f64, k: usize) -> Result<Self> {
        let spec = Self { mode, eta, lambda, delta, k };
        spec.validate()?;
        Ok(spec)
    }

    /// Balanced target over `k` clusters with the default `lambda` and `delta`.
    pub fn balanced(k: usize) -> Result<Self> {
        Self::new(LossMode::Sensitive, Composition::uniform(k)?, DEFAULT_LAMBDA, DEFAULT_DELTA, k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(domain(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(domain(format!("delta must lie in [0, 1], got {}", self.delta)));
        }
        if !self.eta.is_strictly_positive() {
            return Err(domain("target composition eta must be strictly positive"));
        }
        if self.k == 0 {
            return Err(domain("number of model clusters must be at least 1"));
        }
        if self.eta.len() > self.k {
            return Err(domain(format!("eta has {} parts but the model has only {} clusters", self.eta.len(), self.k)));
        }
        if self.mode == LossMode::Invariant && self.lambda > 0.0 {
            check_permutation_k(self.eta.len())?;
        }
        Ok(())
    }

    /// Number of labels available to candidate actions.
    pub fn k_target(&self) -> usize {
        self.eta.len()
    }

    /// True when the loss does not depend on how action labels are named.
    pub fn is_label_invariant(&self) -> bool {
        self.mode == LossMode::Invariant || self.lambda == 0.0 || self.eta.is_uniform()
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }

    pub fn with_mode(&self, mode: LossMode) -> Self {
        Self { mode, ..self.clone() }
    }
}

fn check_action(a: &Assignment, spec: &LossSpec) -> Result<()> {
    let kt = spec.k_target();
    if let Some(&l) = a.labels().iter().find(|&&l| l >= kt) {
        return Err(domain(format!("action label {} exceeds the {kt} target groups", l + 1)));
    }
    Ok(())
}

fn check_draw(z: &Assignment, n: usize, spec: &LossSpec) -> Result<()> {
    if z.len() != n {
        return Err(domain(format!("draw has {} observations, action has {n}", z.len())));
    }
    if let Some(&l) = z.labels().iter().find(|&&l| l >= spec.k) {
        return Err(domain(format!("draw label {} exceeds the {} model clusters", l + 1, spec.k)));
    }
    Ok(())
}

fn pseudo_closure_checked(a: &Assignment, spec: &LossSpec) -> Result<Composition> {
    let mut counts = vec![0usize; spec.k_target()];
    for &l in a.labels() {
        counts[l] += 1;
    }
    if spec.delta == 0.0 && counts.contains(&0) {
        return Err(domain("an action leaves a target group empty with delta = 0; use a pseudo-count delta > 0"));
    }
    Ok(closure_from_counts(&counts, a.len(), spec.delta))
}

/// `d_A(eta, C(a, delta))`, ignoring `lambda`.
pub fn size_term_sensitive(a: &Assignment, spec: &LossSpec) -> Result<f64> {
    check_action(a, spec)?;
    aitchison_distance(&spec.eta, &pseudo_closure_checked(a, spec)?)
}

/// `min_sigma d_A(eta_sigma, C(a, delta))`, ignoring `lambda`.
pub fn size_term_invariant(a: &Assignment, spec: &LossSpec) -> Result<f64> {
    check_action(a, spec)?;
    Ok(min_perm_aitchison(&spec.eta, &pseudo_closure_checked(a, spec)?)?.0)
}

/// The size penalty selected by `spec.mode`, ignoring `lambda`.
pub fn size_term(a: &Assignment, spec: &LossSpec) -> Result<f64> {
    match spec.mode {
        LossMode::Sensitive => size_term_sensitive(a, spec),
        LossMode::Invariant => size_term_invariant(a, spec),
    }
}

/// Label-sensitive loss. `spec.mode` is ignored.
pub fn loss_sensitive(a: &Assignment, z: &Assignment, spec: &LossSpec) -> Result<f64> {
    check_action(a, spec)?;
    check_draw(z, a.len(), spec)?;
    let vi = vi_loss(a, z)?;
    if spec.lambda == 0.0 {
        return Ok(vi);
    }
    Ok(vi + spec.lambda * size_term_sensitive(a, spec)?)
}

/// Label-invariant loss. `spec.mode` is ignored.
pub fn loss_invariant(a: &Assignment, z: &Assignment, spec: &LossSpec) -> Result<f64> {
    check_action(a, spec)?;
    check_draw(z, a.len(), spec)?;
    let vi = vi_loss(a, z)?;
    if spec.lambda == 0.0 {
        return Ok(vi);
    }
    Ok(vi + spec.lambda * size_term_invariant(a, spec)?)
}

/// The loss selected by `spec.mode`.
pub fn loss(a: &Assignment, z: &Assignment, spec: &LossSpec) -> Result<f64> {
    match spec.mode {
        LossMode::Sensitive => loss_sensitive(a, z, spec),
        LossMode::Invariant => loss_invariant(a, z, spec),
    }
}

/// Plain Monte-Carlo average of the loss over posterior draws.
///
/// The size term depends only on `a`, so it is evaluated once and added to
/// the mean VI.
pub fn expected_loss(a: &Assignment, zs: &[Assignment], spec: &LossSpec) -> Result<f64> {
    if zs.is_empty() {
        return Err(domain("expected loss needs at least one posterior draw"));
    }
    check_action(a, spec)?;
    let mut vi_sum = 0.0;
    for z in zs {
        check_draw(z, a.len(), spec)?;
        vi_sum += vi_loss(a, z)?;
    }
    let mean_vi = vi_sum / zs.len() as f64;
    if spec.lambda == 0.0 {
        return Ok(mean_vi);
    }
    Ok(mean_vi + spec.lambda * size_term(a, spec)?)
}

/// Precomputed expected-loss evaluator for repeated calls on one set of
/// draws, as needed by the assignment search.
///
/// Uses `VI = (S_a + S_z - 2 S_az) / N` with `S = sum n log2 n` and a lookup
/// table for `n log2 n`, so an evaluation costs `O(T N)` integer updates.
#[derive(Debug, Clone)]
pub struct ExpectedLoss {
    pub(crate) n: usize,
    pub(crate) t: usize,
    pub(crate) k_action: usize,
    pub(crate) k_draw: usize,
    /// Draw-major labels, `draws[t * n + i]`.
    pub(crate) draws: Vec<u16>,
    pub(crate) mean_s_z: f64,
    pub(crate) xlogx: Vec<f64>,
    lambda: f64,
    delta: f64,
    log_eta: Vec<f64>,
    /// Permutations searched by the invariant size term (empty: identity only).
    perms: Vec<Vec<usize>>,
    spec: LossSpec,
}

impl ExpectedLoss {
    pub fn new(zs: &[Assignment], spec: &LossSpec) -> Result<Self> {
        spec.validate()?;
        let first = zs.first().ok_or_else(|| domain("expected loss needs at least one posterior draw"))?;
        let n = first.len();
        if spec.k > u16::MAX as usize {
            return Err(domain("too many clusters"));
        }
        let mut draws = Vec::with_capacity(zs.len() * n);
        let mut s_z_sum = 0.0;
        let xlogx: Vec<f64> = (0..=n).map(xlog2x).collect();
        for z in zs {
            check_draw(z, n, spec)?;
            draws.extend(z.labels().iter().map(|&l| l as u16));
            s_z_sum += z.counts().iter().map(|&c| xlogx[c]).sum::<f64>();
        }
        let perms = if spec.mode == LossMode::Invariant && !spec.eta.is_uniform() && spec.lambda > 0.0 {
            lexicographic_permutations(spec.k_target()).collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            n,
            t: zs.len(),
            k_action: spec.k_target(),
            k_draw: spec.k,
            draws,
            mean_s_z: s_z_sum / zs.len() as f64,
            xlogx,
            lambda: spec.lambda,
            delta: spec.delta,
            log_eta: spec.eta.parts().iter().map(|p| p.ln()).collect(),
            perms,
            spec: spec.clone(),
        })
    }

    pub fn spec(&self) -> &LossSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_draws(&self) -> usize {
        self.t
    }

    /// Labels available to actions.
    pub fn k_action(&self) -> usize {
        self.k_action
    }

    pub fn draw(&self, t: usize) -> &[u16] {
        &self.draws[t * self.n..(t + 1) * self.n]
    }

    /// Expected loss of an action given as zero-based labels.
    ///
    /// Labels must lie in `0..k_action()`; this is checked in debug builds.
    pub fn evaluate<L: Copy + Into<usize>>(&self, labels: &[L]) -> Result<f64> {
        debug_assert_eq!(labels.len(), self.n);
        let mut row_counts = vec![0usize; self.k_action];
        for &l in labels {
            row_counts[l.into()] += 1;
        }
        let mean_s_az = self.mean_joint_sum(labels);
        let s_a: f64 = row_counts.iter().map(|&c| self.xlogx[c]).sum();
        let mean_vi = ((s_a + self.mean_s_z - 2.0 * mean_s_az) / self.n as f64).max(0.0);
        Ok(mean_vi + self.size_penalty(&row_counts)?)
    }

    /// Mean over draws of `sum_gh n_gh log2 n_gh`.
    fn mean_joint_sum<L: Copy + Into<usize>>(&self, labels: &[L]) -> f64 {
        let kz = self.k_draw;
        let mut table = vec![0u32; self.k_action * kz];
        let rows: Vec<usize> = labels.iter().map(|&l| l.into() * kz).collect();
        let mut total = 0.0;
        for draw in self.draws.chunks_exact(self.n) {
            table.iter_mut().for_each(|c| *c = 0);
            for (&r, &h) in rows.iter().zip(draw) {
                table[r + h as usize] += 1;
            }
            total += table.iter().map(|&c| self.xlogx[c as usize]).sum::<f64>();
        }
        total / self.t as f64
    }

    /// `lambda` times the size term, from the action's group counts.
    pub fn size_penalty(&self, counts: &[usize]) -> Result<f64> {
        if self.lambda == 0.0 {
            return Ok(0.0);
        }
        if self.delta == 0.0 && counts.contains(&0) {
            return Err(domain("an action leaves a target group empty with delta = 0; use a pseudo-count delta > 0"));
        }
        let c = closure_from_counts(counts, self.n, self.delta);
        let log_c: Vec<f64> = c.parts().iter().map(|p| p.ln()).collect();
        let d = if self.perms.is_empty() {
            centered_gap(&self.log_eta, &log_c, None)
        } else {
            self.perms.iter().map(|s| centered_gap(&self.log_eta, &log_c, Some(s))).fold(f64::INFINITY, f64::min)
        };
        Ok(self.lambda * d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(l: &[usize], k: usize) -> Assignment {
        Assignment::from_one_based(l, k).unwrap()
    }

    fn spec(mode: LossMode, eta: &[f64], lambda: f64, delta: f64, k: usize) -> LossSpec {
        LossSpec::new(mode, Composition::new(eta.to_vec()).unwrap(), lambda, delta, k).unwrap()
    }

    #[test]
    fn sensitive_examples() {
        let s = spec(LossMode::Sensitive, &[0.5, 0.5], 1.0, 0.0, 2);
        assert_eq!(loss_sensitive(&a(&[1, 2], 2), &a(&[1, 2], 2), &s).unwrap(), 0.0);
        let v = loss_sensitive(&a(&[1, 1, 2, 2], 2), &a(&[1, 2, 1, 2], 2), &s).unwrap();
        assert_eq!(v, 2.0);

        let s0 = spec(LossMode::Sensitive, &[0.2, 0.8], 0.0, 0.1, 2);
        let x = a(&[1, 1, 2, 1, 1], 2);
        let z = a(&[2, 1, 2, 2, 1], 2);
        assert_eq!(loss_sensitive(&x, &z, &s0).unwrap(), vi_loss(&x, &z).unwrap());
    }

    #[test]
    fn invariant_examples() {
        let s = spec(LossMode::Invariant, &[0.75, 0.25], 1.0, 0.0, 2);
        let x = a(&[2, 2, 2, 1], 2);
        assert!(loss_invariant(&x, &x, &s).unwrap().abs() < 1e-12);
        // The sensitive form pays for the mismatch.
        assert!(loss_sensitive(&x, &x, &s).unwrap() > 1.0);
    }

    #[test]
    fn zero_delta_with_empty_group_is_an_error() {
        let s = spec(LossMode::Sensitive, &[0.5, 0.5], 1.0, 0.0, 2);
        let x = a(&[1, 1, 1], 2);
        let err = loss_sensitive(&x, &x, &s).unwrap_err();
        assert!(err.to_string().contains("delta > 0"));
        // lambda = 0 removes the size term entirely.
        let s = s.with_lambda(0.0);
        assert_eq!(loss_sensitive(&x, &x, &s).unwrap(), 0.0);
    }

    #[test]
    fn merged_targets_reject_excess_labels() {
        let s = spec(LossMode::Sensitive, &[0.5, 0.5], 1.0, 0.1, 3);
        let z = a(&[1, 2, 3], 3);
        assert!(loss_sensitive(&a(&[1, 2, 3], 3), &z, &s).is_err());
        assert!(loss_sensitive(&a(&[1, 2, 2], 3), &z, &s).is_ok());
    }

    #[test]
    fn spec_validation() {
        let eta = Composition::uniform(2).unwrap();
        assert!(LossSpec::new(LossMode::Sensitive, eta.clone(), -1.0, 0.1, 2).is_err());
        assert!(LossSpec::new(LossMode::Sensitive, eta.clone(), 1.0, 1.5, 2).is_err());
        assert!(LossSpec::new(LossMode::Sensitive, eta.clone(), 1.0, 0.1, 1).is_err());
        let zero = Composition::new(vec![0.0, 1.0]).unwrap();
        assert!(LossSpec::new(LossMode::Sensitive, zero, 1.0, 0.1, 2).is_err());
        let big = Composition::new((1..=11).map(f64::from).collect()).unwrap();
        assert!(matches!(LossSpec::new(LossMode::Invariant, big, 1.0, 0.1, 11), Err(crate::Error::Config(_))));
    }

    #[test]
    fn expected_loss_examples() {
        let s = spec(LossMode::Sensitive, &[0.5, 0.5], 0.0, 0.1, 2);
        let x = a(&[1, 1, 2, 2], 2);
        let zs = [a(&[1, 1, 2, 2], 2), a(&[1, 2, 1, 2], 2)];
        assert_eq!(expected_loss(&x, &zs, &s).unwrap(), 1.0);
        assert_eq!(expected_loss(&x, &zs[1..], &s).unwrap(), loss_sensitive(&x, &zs[1], &s).unwrap());
        assert!(expected_loss(&x, &[], &s).is_err());

        let s = spec(LossMode::Sensitive, &[0.3, 0.7], 1.0, 0.1, 2);
        let z = a(&[1, 2, 2, 1], 2);
        let zs = vec![z.clone(); 5];
        let single = loss_sensitive(&x, &z, &s).unwrap();
        assert!((expected_loss(&x, &zs, &s).unwrap() - single).abs() < 1e-15);
    }

    #[test]
    fn fast_evaluator_matches_reference() {
        let s = spec(LossMode::Invariant, &[0.2, 0.5, 0.3], 1.3, 0.1, 3);
        let zs = [a(&[1, 2, 3, 3, 1, 2], 3), a(&[3, 3, 1, 2, 2, 2], 3), a(&[1, 1, 1, 2, 2, 3], 3)];
        let eval = ExpectedLoss::new(&zs, &s).unwrap();
        for labels in [[1, 1, 2, 2, 3, 3], [1, 1, 1, 1, 1, 1], [3, 2, 1, 3, 2, 1]] {
            let x = a(&labels, 3);
            let slow = expected_loss(&x, &zs, &s).unwrap();
            let fast = eval.evaluate(x.labels()).unwrap();
            assert!((slow - fast).abs() < 1e-12, "{slow} vs {fast}");
        }
    }
}
