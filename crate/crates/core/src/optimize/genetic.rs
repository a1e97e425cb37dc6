//! Genetic search over label vectors.
//!
//! Individuals are label vectors; children come from binary tournaments,
//! uniform crossover and per-coordinate resampling. The best individual is
//! always carried over, so the incumbent never gets worse.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assignment::Assignment;
use crate::error::{domain, Result};
use crate::loss::{ExpectedLoss, LossSpec};

use super::{improves, local_search_with, objective, OptimizerConfig};

/// Cached evaluations beyond this count are discarded wholesale.
const CACHE_LIMIT: usize = 500_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub assignment: Assignment,
    pub value: f64,
    pub generations: usize,
    /// Expected loss of every member of the last population.
    pub final_population: Vec<f64>,
}

/// Minimizes the expected loss over actions with the genetic search.
pub fn optimize_assignment(zs: &[Assignment], spec: &LossSpec, cfg: &OptimizerConfig) -> Result<(Assignment, f64)> {
    let report = optimize_with(&objective(zs, spec)?, cfg)?;
    Ok((report.assignment, report.value))
}

pub fn optimize_with(objective: &ExpectedLoss, cfg: &OptimizerConfig) -> Result<SearchReport> {
    cfg.validate()?;
    if objective.k_action() > u8::MAX as usize {
        return Err(domain("genetic search supports at most 255 target groups"));
    }
    Search::new(objective, cfg).run()
}

type Genome = Vec<u8>;

struct Search<'a> {
    objective: &'a ExpectedLoss,
    cfg: &'a OptimizerConfig,
    rng: ChaCha8Rng,
    cache: HashMap<Genome, f64>,
}

impl<'a> Search<'a> {
    fn new(objective: &'a ExpectedLoss, cfg: &'a OptimizerConfig) -> Self {
        Self { objective, cfg, rng: ChaCha8Rng::seed_from_u64(cfg.seed), cache: HashMap::new() }
    }

    fn initial_population(&mut self) -> Vec<Genome> {
        let (n, ka) = (self.objective.n(), self.objective.k_action());
        let size = self.cfg.population_size;
        let t = self.objective.num_draws();
        let seeded = t.min(size);
        let mut population = Vec::with_capacity(size);
        for i in 0..seeded {
            let draw = self.objective.draw(i * t / seeded);
            let genome = draw
                .iter()
                .map(|&h| {
                    let h = h as usize;
                    if h < ka {
                        h as u8
                    } else {
                        self.rng.random_range(0..ka) as u8
                    }
                })
                .collect();
            population.push(genome);
        }
        while population.len() < size {
            population.push((0..n).map(|_| self.rng.random_range(0..ka) as u8).collect());
        }
        population
    }

    fn evaluate_all(&mut self, population: &[Genome]) -> Result<Vec<f64>> {
        if self.cache.len() > CACHE_LIMIT {
            self.cache.clear();
        }
        let mut pending: Vec<&Genome> = population.iter().filter(|g| !self.cache.contains_key(*g)).collect();
        pending.sort_unstable();
        pending.dedup();
        let objective = self.objective;
        let values: Vec<f64> = pending.par_iter().map(|g| objective.evaluate(g)).collect::<Result<_>>()?;
        for (g, v) in pending.into_iter().zip(values) {
            self.cache.insert(g.clone(), v);
        }
        Ok(population.iter().map(|g| self.cache[g]).collect())
    }

    fn polish(&mut self, genome: &Genome) -> Result<(Genome, f64)> {
        let start: Vec<usize> = genome.iter().map(|&l| l as usize).collect();
        let (labels, value) = local_search_with(self.objective, &start)?;
        let polished: Genome = labels.into_iter().map(|l| l as u8).collect();
        self.cache.insert(polished.clone(), value);
        Ok((polished, value))
    }

    fn tournament<'p>(&mut self, population: &'p [Genome], values: &[f64]) -> &'p Genome {
        let i = self.rng.random_range(0..population.len());
        let j = self.rng.random_range(0..population.len());
        if values[j] < values[i] {
            &population[j]
        } else {
            &population[i]
        }
    }

    fn child(&mut self, population: &[Genome], values: &[f64]) -> Genome {
        let ka = self.objective.k_action();
        let p1 = self.tournament(population, values);
        let mut child = if self.rng.random::<f64>() < self.cfg.crossover_rate {
            let p2 = self.tournament(population, values);
            p1.iter().zip(p2).map(|(&a, &b)| if self.rng.random::<bool>() { a } else { b }).collect()
        } else {
            p1.clone()
        };
        for gene in child.iter_mut() {
            if self.rng.random::<f64>() < self.cfg.mutation_rate {
                *gene = self.rng.random_range(0..ka) as u8;
            }
        }
        child
    }

    fn run(mut self) -> Result<SearchReport> {
        let mut population = self.initial_population();
        let mut values = self.evaluate_all(&population)?;
        let (mut best, mut best_value) = argmin(&population, &values);
        if self.cfg.local_search {
            (best, best_value) = self.polish(&best)?;
        }

        let mut stall = 0;
        let mut generations = 0;
        while generations < self.cfg.max_generations && stall < self.cfg.wait_generations {
            generations += 1;
            let mut next = Vec::with_capacity(population.len());
            next.push(best.clone());
            while next.len() < population.len() {
                let child = self.child(&population, &values);
                next.push(child);
            }
            population = next;
            values = self.evaluate_all(&population)?;

            let (gen_best, gen_value) = argmin(&population, &values);
            if improves(gen_value, best_value) {
                (best, best_value) = (gen_best, gen_value);
                if self.cfg.local_search {
                    (best, best_value) = self.polish(&best)?;
                    population[0] = best.clone();
                    values[0] = best_value;
                }
                stall = 0;
            } else {
                stall += 1;
            }
        }

        let labels = best.iter().map(|&l| l as usize).collect();
        Ok(SearchReport {
            assignment: Assignment::new_unchecked(labels, self.objective.k_action()),
            value: best_value,
            generations,
            final_population: values,
        })
    }
}

/// Lowest value, ties to the lexicographically smallest genome.
fn argmin(population: &[Genome], values: &[f64]) -> (Genome, f64) {
    let mut best = 0;
    for i in 1..population.len() {
        if values[i] < values[best] || (values[i] == values[best] && population[i] < population[best]) {
            best = i;
        }
    }
    (population[best].clone(), values[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::Composition;
    use crate::information::vi_loss;
    use crate::loss::{expected_loss, LossMode};
    use crate::optimize::brute_force_assignment;

    fn small_cfg(seed: u64) -> OptimizerConfig {
        OptimizerConfig { population_size: 60, wait_generations: 10, seed, ..Default::default() }
    }

    #[test]
    fn identical_draws_recover_the_partition() {
        let z = Assignment::from_one_based(&[2, 2, 1, 3, 3, 1, 2], 3).unwrap();
        let zs = vec![z.clone(); 5];
        let spec = LossSpec::balanced(3).unwrap().with_lambda(0.0);
        let (best, value) = optimize_assignment(&zs, &spec, &small_cfg(3)).unwrap();
        assert_eq!(value, 0.0);
        assert_eq!(vi_loss(&best, &z).unwrap(), 0.0);
    }

    #[test]
    fn matching_sizes_leave_only_the_size_term() {
        let z = Assignment::from_one_based(&[1, 2, 3, 3, 1, 2, 1, 3], 3).unwrap();
        let zs = vec![z.clone(); 4];
        let eta = Composition::new(vec![3.0, 2.0, 3.0]).unwrap();
        let spec = LossSpec::new(LossMode::Sensitive, eta, 1.0, 0.1, 3).unwrap();
        let (best, value) = optimize_assignment(&zs, &spec, &small_cfg(8)).unwrap();
        let (oracle, oracle_value) = brute_force_assignment(&zs, &spec).unwrap();
        assert_eq!(vi_loss(&best, &z).unwrap(), 0.0);
        assert_eq!(vi_loss(&oracle, &z).unwrap(), 0.0);
        let size_only = crate::loss::size_term(&z, &spec).unwrap();
        assert!((value - size_only).abs() < 1e-12);
        assert!((value - oracle_value).abs() < 1e-12);
    }

    #[test]
    fn elitism_bounds_the_final_population() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let zs: Vec<_> =
            (0..15).map(|_| Assignment::new((0..9).map(|_| rng.random_range(0..3)).collect(), 3).unwrap()).collect();
        let spec = LossSpec::balanced(3).unwrap();
        let obj = ExpectedLoss::new(&zs, &spec).unwrap();
        let report = optimize_with(&obj, &small_cfg(5)).unwrap();
        assert!(report.final_population.iter().all(|&v| report.value <= v));
        let direct = expected_loss(&report.assignment, &zs, &spec).unwrap();
        assert!((direct - report.value).abs() < 1e-12);
        assert_eq!(report, optimize_with(&obj, &small_cfg(5)).unwrap());
    }

    #[test]
    fn config_validation() {
        let bad = OptimizerConfig { population_size: 1, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig { mutation_rate: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let spec = LossSpec::balanced(2).unwrap();
        assert!(optimize_assignment(&[], &spec, &OptimizerConfig::default()).is_err());
    }
}
