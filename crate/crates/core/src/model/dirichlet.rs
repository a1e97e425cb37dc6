use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01};

/// Draws from `Dirichlet(concentration)` into `out`.
///
/// Gamma variates are generated in log space (with the `U^(1/a)` boost for
/// shapes below one) so small concentrations do not underflow to zero.
/// Every output part is strictly positive.
pub fn sample_dirichlet<R: Rng + ?Sized>(concentration: &[f64], out: &mut [f64], rng: &mut R) {
    debug_assert_eq!(concentration.len(), out.len());
    let mut max = f64::NEG_INFINITY;
    for (o, &a) in out.iter_mut().zip(concentration) {
        let lg = log_gamma_variate(a, rng);
        max = max.max(lg);
        *o = lg;
    }
    let mut sum = 0.0;
    for o in out.iter_mut() {
        *o = (*o - max).exp().max(f64::MIN_POSITIVE);
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

fn log_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g: f64 = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
        g.ln()
    } else {
        let g: f64 = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
        let u: f64 = Open01.sample(rng);
        g.ln() + u.ln() / shape
    }
}
