use crate::assignment::Assignment;
use crate::error::{config, Result};
use crate::loss::{ExpectedLoss, LossSpec};

use super::{improves, objective};

/// Largest search space the exhaustive oracle will enumerate.
pub const MAX_BRUTE_FORCE: u64 = 1_000_000;

/// Exhaustive minimizer over all `K_target^N` actions.
///
/// Ties (within rounding noise) go to the lexicographically smallest action.
pub fn brute_force_assignment(zs: &[Assignment], spec: &LossSpec) -> Result<(Assignment, f64)> {
    brute_force_with(&objective(zs, spec)?)
}

pub fn brute_force_with(objective: &ExpectedLoss) -> Result<(Assignment, f64)> {
    let (n, k) = (objective.n(), objective.k_action());
    let space = (k as u64).checked_pow(n as u32).filter(|&s| s <= MAX_BRUTE_FORCE);
    if space.is_none() {
        return Err(config(format!("exhaustive search over {k}^{n} actions exceeds the limit of {MAX_BRUTE_FORCE}")));
    }
    let mut labels = vec![0usize; n];
    let mut best_labels = labels.clone();
    let mut best = objective.evaluate(&labels)?;
    // Odometer with the first coordinate most significant: lexicographic order.
    'outer: loop {
        let mut i = n;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
        }
        let value = objective.evaluate(&labels)?;
        if improves(value, best) {
            best = value;
            best_labels.copy_from_slice(&labels);
        }
    }
    Ok((Assignment::new_unchecked(best_labels, k), best))
}
