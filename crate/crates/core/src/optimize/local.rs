use crate::assignment::Assignment;
use crate::error::{domain, Result};
use crate::loss::{ExpectedLoss, LossSpec};

use super::{improves, objective};

/// Best-improvement descent over single-coordinate label changes.
///
/// Stops when no single change lowers the expected loss, so the result is
/// 1-swap locally optimal and never worse than the start.
pub fn local_search(a0: &Assignment, zs: &[Assignment], spec: &LossSpec) -> Result<Assignment> {
    let objective = objective(zs, spec)?;
    let (labels, _) = local_search_with(&objective, a0.labels())?;
    Ok(Assignment::new_unchecked(labels, spec.k_target()))
}

/// Runs the descent from `start` and returns the final labels with their
/// expected loss.
pub fn local_search_with(objective: &ExpectedLoss, start: &[usize]) -> Result<(Vec<usize>, f64)> {
    if start.len() != objective.n() {
        return Err(domain(format!("start has {} observations, draws have {}", start.len(), objective.n())));
    }
    if let Some(&l) = start.iter().find(|&&l| l >= objective.k_action()) {
        return Err(domain(format!("start label {} exceeds the target groups", l + 1)));
    }
    let mut state = DescentState::new(objective, start.to_vec());
    let mut value = objective.evaluate(&state.labels)?;
    while let Some((i, to)) = state.best_move()? {
        let from = state.labels[i];
        state.apply(i, to);
        let next = objective.evaluate(&state.labels)?;
        if !improves(next, value) {
            state.apply(i, from);
            break;
        }
        value = next;
    }
    Ok((state.labels, value))
}

/// Per-draw contingency tables kept in sync with the current labels so a
/// move's effect costs `O(T)` instead of `O(T N)`.
struct DescentState<'a> {
    objective: &'a ExpectedLoss,
    labels: Vec<usize>,
    row_counts: Vec<usize>,
    /// `tables[(t * K_a + g) * K_z + h]`.
    tables: Vec<u32>,
}

impl<'a> DescentState<'a> {
    fn new(objective: &'a ExpectedLoss, labels: Vec<usize>) -> Self {
        let (ka, kz) = (objective.k_action, objective.k_draw);
        let mut tables = vec![0u32; objective.t * ka * kz];
        for t in 0..objective.t {
            let table = &mut tables[t * ka * kz..(t + 1) * ka * kz];
            for (&g, &h) in labels.iter().zip(objective.draw(t)) {
                table[g * kz + h as usize] += 1;
            }
        }
        let mut row_counts = vec![0; ka];
        for &g in &labels {
            row_counts[g] += 1;
        }
        Self { objective, labels, row_counts, tables }
    }

    fn apply(&mut self, i: usize, to: usize) {
        let from = self.labels[i];
        if from == to {
            return;
        }
        let (ka, kz) = (self.objective.k_action, self.objective.k_draw);
        for t in 0..self.objective.t {
            let h = self.objective.draws[t * self.objective.n + i] as usize;
            let base = t * ka * kz;
            self.tables[base + from * kz + h] -= 1;
            self.tables[base + to * kz + h] += 1;
        }
        self.row_counts[from] -= 1;
        self.row_counts[to] += 1;
        self.labels[i] = to;
    }

    /// Change in the objective from moving observation `i` to label `to`.
    fn delta(&self, i: usize, to: usize, current_penalty: f64, counts: &mut [usize]) -> Result<f64> {
        let obj = self.objective;
        let from = self.labels[i];
        let (ka, kz) = (obj.k_action, obj.k_draw);
        let f = &obj.xlogx;
        let mut d_joint = 0.0;
        for t in 0..obj.t {
            let h = obj.draws[t * obj.n + i] as usize;
            let base = t * ka * kz;
            let n_from = self.tables[base + from * kz + h] as usize;
            let n_to = self.tables[base + to * kz + h] as usize;
            d_joint += f[n_from - 1] - f[n_from] + f[n_to + 1] - f[n_to];
        }
        let (r_from, r_to) = (self.row_counts[from], self.row_counts[to]);
        let d_rows = f[r_from - 1] - f[r_from] + f[r_to + 1] - f[r_to];
        let d_vi = (d_rows - 2.0 * d_joint / obj.t as f64) / obj.n as f64;

        counts.copy_from_slice(&self.row_counts);
        counts[from] -= 1;
        counts[to] += 1;
        let d_size = match obj.size_penalty(counts) {
            Ok(p) => p - current_penalty,
            // Emptying a group is infeasible when delta = 0.
            Err(_) => f64::INFINITY,
        };
        Ok(d_vi + d_size)
    }

    fn best_move(&self) -> Result<Option<(usize, usize)>> {
        let current_penalty = self.objective.size_penalty(&self.row_counts)?;
        let mut counts = vec![0; self.objective.k_action];
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.labels.len() {
            for to in 0..self.objective.k_action {
                if to == self.labels[i] {
                    continue;
                }
                let d = self.delta(i, to, current_penalty, &mut counts)?;
                if d < 0.0 && best.is_none_or(|(_, _, b)| d < b) {
                    best = Some((i, to, d));
                }
            }
        }
        Ok(best.map(|(i, to, _)| (i, to)))
    }
}
