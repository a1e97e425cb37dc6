use crate::error::{domain, Result};

/// Split-chain potential scale reduction factor.
///
/// Each chain is trimmed to the shortest length and cut into two halves
/// (dropping the middle draw when the length is odd), then the classic
/// between/within variance ratio is computed over the `2m` half-chains.
/// Chains with zero within-chain variance give `1.0` when all half-chain
/// means agree and `+inf` otherwise.
pub fn split_rhat<C: AsRef<[f64]>>(chains: &[C]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(domain("split R-hat needs at least 2 chains"));
    }
    let len = chains.iter().map(|c| c.as_ref().len()).min().unwrap_or(0);
    if len < 4 {
        return Err(domain(format!("split R-hat needs at least 4 draws per chain, got {len}")));
    }
    let half = len / 2;
    let mut halves: Vec<&[f64]> = Vec::with_capacity(2 * chains.len());
    for c in chains {
        let c = &c.as_ref()[..len];
        halves.push(&c[..half]);
        halves.push(&c[len - half..]);
    }
    let m = halves.len() as f64;
    let n = half as f64;
    let means: Vec<f64> = halves.iter().map(|h| h.iter().sum::<f64>() / n).collect();
    let grand = means.iter().sum::<f64>() / m;
    let between = n / (m - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let within = halves
        .iter()
        .zip(&means)
        .map(|(h, mu)| h.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0))
        .sum::<f64>()
        / m;
    if within <= 0.0 {
        return Ok(if between <= 0.0 { 1.0 } else { f64::INFINITY });
    }
    let var_plus = (n - 1.0) / n * within + between / n;
    Ok((var_plus / within).sqrt())
}
