//! Entropies of assignments and the Variation of Information between two
//! partitions. All quantities are in bits.

use crate::assignment::Assignment;
use crate::error::{domain, Result};

/// Cross-tabulation of two assignments of the same observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    counts: Vec<usize>,
    row_sums: Vec<usize>,
    col_sums: Vec<usize>,
    total: usize,
}

impl ContingencyTable {
    pub fn get(&self, g: usize, h: usize) -> usize {
        self.counts[g * self.cols + h]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_sums(&self) -> &[usize] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[usize] {
        &self.col_sums
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Row-major cell counts.
    pub fn cells(&self) -> &[usize] {
        &self.counts
    }

    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        self.counts.chunks(self.cols).map(<[usize]>::to_vec).collect()
    }
}

fn check_lengths(a: &Assignment, z: &Assignment) -> Result<()> {
    if a.len() != z.len() {
        return Err(domain(format!("assignments have different lengths ({} vs {})", a.len(), z.len())));
    }
    Ok(())
}

/// `counts[g][h] = #{i : a_i = g, z_i = h}` over the declared label sets.
pub fn contingency(a: &Assignment, z: &Assignment) -> Result<ContingencyTable> {
    check_lengths(a, z)?;
    let (rows, cols) = (a.k(), z.k());
    let mut counts = vec![0; rows * cols];
    for (&g, &h) in a.labels().iter().zip(z.labels()) {
        counts[g * cols + h] += 1;
    }
    Ok(ContingencyTable { rows, cols, counts, row_sums: a.counts(), col_sums: z.counts(), total: a.len() })
}

/// `sum n log2 n` over counts, summed in ascending count order so that equal
/// multisets of counts give bit-identical results.
fn sum_xlog2x(counts: impl Iterator<Item = usize>) -> f64 {
    let mut nonzero: Vec<usize> = counts.filter(|&c| c > 1).collect();
    nonzero.sort_unstable();
    nonzero.iter().map(|&c| xlog2x(c)).sum()
}

#[inline]
pub(crate) fn xlog2x(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        let x = n as f64;
        x * x.log2()
    }
}

fn entropy_from_counts(counts: impl Iterator<Item = usize>, n: usize) -> f64 {
    let nf = n as f64;
    (nf.log2() - sum_xlog2x(counts) / nf).max(0.0)
}

/// Shannon entropy of the group sizes of `a`.
pub fn entropy(a: &Assignment) -> f64 {
    entropy_from_counts(a.counts().into_iter(), a.len())
}

/// Entropy of the joint labelling `(a_i, z_i)`.
pub fn joint_entropy(a: &Assignment, z: &Assignment) -> Result<f64> {
    let table = contingency(a, z)?;
    Ok(entropy_from_counts(table.counts.iter().copied(), table.total))
}

/// Variation of Information `2 H(a, z) - H(a) - H(z)`.
///
/// Computed as `(S_a + S_z - 2 S_az) / N` with `S = sum n log2 n`, which is
/// algebraically identical and cancels the `log2 N` terms exactly.
pub fn vi_loss(a: &Assignment, z: &Assignment) -> Result<f64> {
    let table = contingency(a, z)?;
    Ok(vi_from_table(&table))
}

pub(crate) fn vi_from_table(table: &ContingencyTable) -> f64 {
    let s_a = sum_xlog2x(table.row_sums.iter().copied());
    let s_z = sum_xlog2x(table.col_sums.iter().copied());
    let s_az = sum_xlog2x(table.counts.iter().copied());
    ((s_a + s_z - 2.0 * s_az) / table.total as f64).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(l: &[usize]) -> Assignment {
        let k = *l.iter().max().unwrap();
        Assignment::from_one_based(l, k).unwrap()
    }

    #[test]
    fn contingency_examples() {
        let t = contingency(&a(&[1, 1, 2, 2]), &a(&[1, 2, 1, 2])).unwrap();
        assert_eq!(t.to_rows(), vec![vec![1, 1], vec![1, 1]]);
        assert_eq!(t.row_sums(), &[2, 2]);
        assert_eq!(t.total(), 4);

        let t = contingency(&a(&[1, 1, 2]), &a(&[1, 1, 2])).unwrap();
        assert_eq!(t.to_rows(), vec![vec![2, 0], vec![0, 1]]);

        let t = contingency(&a(&[1, 1, 1]), &a(&[1, 2, 3])).unwrap();
        assert_eq!(t.to_rows(), vec![vec![1, 1, 1]]);

        assert!(contingency(&a(&[1, 2]), &a(&[1, 2, 1])).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&a(&[1, 1, 1, 1])), 0.0);
        assert_eq!(entropy(&a(&[1, 1, 2, 2])), 1.0);
        assert_eq!(entropy(&a(&[1, 2, 3, 4])), 2.0);
    }

    #[test]
    fn joint_entropy_examples() {
        let x = a(&[1, 2, 2, 3, 1, 1]);
        assert_eq!(joint_entropy(&x, &x).unwrap(), entropy(&x));
        assert_eq!(joint_entropy(&a(&[1, 1, 2, 2]), &a(&[1, 2, 1, 2])).unwrap(), 2.0);
        assert_eq!(joint_entropy(&a(&[1, 1, 1, 1]), &a(&[1, 2, 1, 2])).unwrap(), 1.0);
    }

    #[test]
    fn vi_examples() {
        let x = a(&[1, 3, 2, 2, 1]);
        assert_eq!(vi_loss(&x, &x).unwrap(), 0.0);
        assert_eq!(vi_loss(&a(&[1, 1, 2, 2]), &a(&[2, 2, 1, 1])).unwrap(), 0.0);
        assert_eq!(vi_loss(&a(&[1, 1, 2, 2]), &a(&[1, 2, 1, 2])).unwrap(), 2.0);
    }

    #[test]
    fn declared_k_does_not_change_entropy() {
        let x = Assignment::from_one_based(&[1, 1, 2], 2).unwrap();
        let wide = x.with_k(5).unwrap();
        assert_eq!(entropy(&x), entropy(&wide));
        let z = Assignment::from_one_based(&[1, 2, 2], 3).unwrap();
        assert_eq!(vi_loss(&x, &z).unwrap(), vi_loss(&wide, &z).unwrap());
    }
}
