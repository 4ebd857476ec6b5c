//! Steady State Tournament (SST) evolutionary back-end.
//!
//! Real-valued genomes of joint angles, minimized against a caller-supplied
//! fitness function. One generation is `pop_size` tournament replacements, so
//! a generation always costs `pop_size` fitness evaluations and the default
//! budget of 300 generations on a population of 10 tops out at 3010
//! evaluations including initialization.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One candidate solution: a vector of joint angles in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genes: Vec<f64>,
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(genes: Vec<f64>) -> Self {
        Individual {
            genes,
            fitness: None,
        }
    }
}

/// SST parameters. Serialized into reports so runs are auditable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub pop_size: usize,
    pub tournament_size: usize,
    pub mutation_prob: f64,
    /// Gene bounds in degrees (the joint limits).
    pub bounds: (f64, f64),
    /// Maximum number of termination checks (generations).
    pub tc: u32,
    /// Maximum consecutive checks without fitness improvement.
    pub tcf: u32,
    /// Fitness at or below this counts as converged.
    pub fitness_epsilon: f64,
    pub seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            pop_size: 10,
            tournament_size: 3,
            mutation_prob: 0.6,
            bounds: (-15.0, 100.0),
            tc: 300,
            tcf: 75,
            fitness_epsilon: 1e-6,
            seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds;
        if self.pop_size < 2 {
            return Err(Error::Config(format!(
                "pop_size must be >= 2, got {}",
                self.pop_size
            )));
        }
        if self.tournament_size < 2 || self.tournament_size > self.pop_size {
            return Err(Error::Config(format!(
                "tournament_size must be in [2, pop_size], got {}",
                self.tournament_size
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(Error::Config(format!(
                "mutation_prob must be in [0, 1], got {}",
                self.mutation_prob
            )));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("bounds ({lo}, {hi}) must be finite with lo < hi")));
        }
        if self.tc < 1 || self.tcf < 1 {
            return Err(Error::Config(format!(
                "tc and tcf must be >= 1, got tc={}, tcf={}",
                self.tc, self.tcf
            )));
        }
        if self.fitness_epsilon < 0.0 {
            return Err(Error::Config("fitness_epsilon must be >= 0".into()));
        }
        Ok(())
    }
}

/// Scales the generation budgets for strategies that wrap evolution in an
/// outer loop of `divisor` rounds: tc' = max(1, tc/divisor), same for tcf.
pub fn scale_budget(cfg: &EvolutionConfig, divisor: u32) -> Result<EvolutionConfig> {
    if divisor < 1 {
        return Err(Error::InvalidArgument(format!(
            "budget divisor must be >= 1, got {divisor}"
        )));
    }
    let mut scaled = cfg.clone();
    scaled.tc = (cfg.tc / divisor).max(1);
    scaled.tcf = (cfg.tcf / divisor).max(1);
    Ok(scaled)
}

/// Why an evolution loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    Budget,
    Stalled,
}

/// Progress counters fed to [`check_termination`].
#[derive(Debug, Clone, PartialEq)]
pub struct TerminationState {
    pub generations_done: u32,
    pub generations_without_improvement: u32,
    pub best_fitness: f64,
}

impl TerminationState {
    pub fn new(best_fitness: f64) -> Self {
        TerminationState {
            generations_done: 0,
            generations_without_improvement: 0,
            best_fitness,
        }
    }

    /// Records one finished generation. The stagnation counter resets only on
    /// strict improvement.
    pub fn record_generation(&mut self, best_fitness: f64) {
        self.generations_done += 1;
        if best_fitness < self.best_fitness {
            self.best_fitness = best_fitness;
            self.generations_without_improvement = 0;
        } else {
            self.generations_without_improvement += 1;
        }
    }
}

/// Stop on convergence, exhausted generation budget, or stagnation.
pub fn check_termination(state: &TerminationState, cfg: &EvolutionConfig) -> Option<StopReason> {
    if state.best_fitness <= cfg.fitness_epsilon {
        Some(StopReason::Converged)
    } else if state.generations_done >= cfg.tc {
        Some(StopReason::Budget)
    } else if state.generations_without_improvement >= cfg.tcf {
        Some(StopReason::Stalled)
    } else {
        None
    }
}

/// Fitness functions minimize; failures carry run context upward.
pub type FitnessFn<'a> = dyn FnMut(&[f64]) -> Result<f64> + 'a;

/// A fixed-size population with its own seeded generator and evaluation
/// accounting.
#[derive(Debug, Clone)]
pub struct Population {
    individuals: Vec<Individual>,
    rng: ChaCha8Rng,
    eval_count: u64,
}

impl Population {
    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    /// Number of fitness-function invocations so far.
    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    pub fn size(&self) -> usize {
        self.individuals.len()
    }

    /// Best (lowest-fitness) evaluated individual.
    pub fn best(&self) -> Option<&Individual> {
        self.individuals
            .iter()
            .filter(|i| i.fitness.is_some())
            .min_by(|a, b| a.fitness.partial_cmp(&b.fitness).unwrap())
    }

    pub fn best_fitness(&self) -> Option<f64> {
        self.best().and_then(|i| i.fitness)
    }

    fn eval(&mut self, genes: &[f64], fitness: &mut FitnessFn) -> Result<f64> {
        self.eval_count += 1;
        let f = fitness(genes).map_err(|e| Error::Fitness {
            context: format!("evaluation {}", self.eval_count),
            source: Box::new(e),
        })?;
        if !f.is_finite() || f < 0.0 {
            return Err(Error::Fitness {
                context: format!("evaluation {}", self.eval_count),
                source: Box::new(Error::InvalidArgument(format!(
                    "fitness must be finite and nonnegative, got {f}"
                ))),
            });
        }
        Ok(f)
    }

    /// (Re-)evaluates every individual; costs exactly `pop_size` evaluations.
    pub fn evaluate_all(&mut self, fitness: &mut FitnessFn) -> Result<()> {
        for k in 0..self.individuals.len() {
            let genes = self.individuals[k].genes.clone();
            let f = self.eval(&genes, fitness)?;
            self.individuals[k].fitness = Some(f);
        }
        Ok(())
    }
}

/// Uniformly random population within bounds. Supply a fitness function to
/// evaluate it on the spot (eval_count becomes pop_size).
pub fn initialize_population(
    cfg: &EvolutionConfig,
    genome_len: usize,
    seed: u64,
    fitness: Option<&mut FitnessFn>,
) -> Result<Population> {
    cfg.validate()?;
    if genome_len < 1 {
        return Err(Error::InvalidArgument(
            "genome length must be >= 1".into(),
        ));
    }
    let (lo, hi) = cfg.bounds;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let individuals = (0..cfg.pop_size)
        .map(|_| Individual::new((0..genome_len).map(|_| rng.gen_range(lo..=hi)).collect()))
        .collect();
    let mut pop = Population {
        individuals,
        rng,
        eval_count: 0,
    };
    if let Some(f) = fitness {
        pop.evaluate_all(f)?;
    }
    Ok(pop)
}

fn clamp(v: f64, bounds: (f64, f64)) -> f64 {
    v.clamp(bounds.0, bounds.1)
}

/// BLX-style per-gene blend: child_g = a_g + u * (b_g - a_g) with u drawn
/// uniformly from [-0.5, 1.5] per gene, clamped to bounds.
pub fn crossover<R: Rng>(
    a: &Individual,
    b: &Individual,
    bounds: (f64, f64),
    rng: &mut R,
) -> Result<Individual> {
    if a.genes.len() != b.genes.len() {
        return Err(Error::DimensionMismatch {
            context: "crossover genomes",
            expected: a.genes.len(),
            actual: b.genes.len(),
        });
    }
    let genes = a
        .genes
        .iter()
        .zip(&b.genes)
        .map(|(&ga, &gb)| {
            let u = rng.gen_range(-0.5..=1.5);
            clamp(blend(ga, gb, u), bounds)
        })
        .collect();
    Ok(Individual::new(genes))
}

pub(crate) fn blend(a: f64, b: f64, u: f64) -> f64 {
    a + u * (b - a)
}

/// With probability `mutation_prob`, mutates the individual; otherwise
/// identity.
///
/// A mutating individual draws one of three moves: a coarse single-gene
/// Gaussian step (sigma 10% of range, probability 0.45), a fine single-gene
/// step (sigma 1%, probability 0.45), or a whole-genome uniform reset
/// (probability 0.10). The fine scale is what lets a converged population
/// tune amplitudes (e.g. hold a target contact force); the reset keeps a
/// collapsed population from being permanently trapped at poses that no
/// single-joint move can escape.
pub fn mutate<R: Rng>(ind: &Individual, cfg: &EvolutionConfig, rng: &mut R) -> Individual {
    let mut out = Individual::new(ind.genes.clone());
    if cfg.mutation_prob > 0.0 && rng.gen_range(0.0..1.0) < cfg.mutation_prob {
        let (lo, hi) = cfg.bounds;
        let roll: f64 = rng.gen_range(0.0..1.0);
        if roll < 0.10 {
            for g in &mut out.genes {
                *g = rng.gen_range(lo..=hi);
            }
        } else {
            let scale = if roll < 0.55 { 0.1 } else { 0.01 };
            let sigma = scale * (hi - lo);
            let idx = rng.gen_range(0..out.genes.len());
            let noise = Normal::new(0.0, sigma).expect("valid sigma").sample(rng);
            out.genes[idx] = clamp(out.genes[idx] + noise, cfg.bounds);
        }
    }
    out
}

/// Draws `k` distinct indices in [0, size) by rejection.
fn sample_distinct<R: Rng>(rng: &mut R, size: usize, k: usize) -> Vec<usize> {
    let mut picked = Vec::with_capacity(k);
    while picked.len() < k {
        let idx = rng.gen_range(0..size);
        if !picked.contains(&idx) {
            picked.push(idx);
        }
    }
    picked
}

/// One generation: `pop_size` times, sample a tournament, replace its worst
/// member with a mutated crossover of its two best, and evaluate the child.
pub fn run_generation(
    pop: &mut Population,
    cfg: &EvolutionConfig,
    fitness: &mut FitnessFn,
) -> Result<()> {
    for _ in 0..cfg.pop_size {
        let mut picked = sample_distinct(&mut pop.rng, pop.individuals.len(), cfg.tournament_size);
        // Stable sort on fitness alone: ties keep the random sampling order,
        // so equally-fit variants still become parents and get replaced
        // without positional bias (plateau landscapes need that churn).
        picked.sort_by(|&a, &b| {
            let fa = pop.individuals[a].fitness.expect("population evaluated");
            let fb = pop.individuals[b].fitness.expect("population evaluated");
            fa.partial_cmp(&fb).unwrap()
        });
        let best = picked[0];
        let second = picked[1];
        let worst = *picked.last().unwrap();
        let child = crossover(
            &pop.individuals[best],
            &pop.individuals[second],
            cfg.bounds,
            &mut pop.rng,
        )?;
        let mut child = mutate(&child, cfg, &mut pop.rng);
        let f = pop.eval(&child.genes.clone(), fitness)?;
        child.fitness = Some(f);
        pop.individuals[worst] = child;
    }
    Ok(())
}

/// Outcome of an evolution loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SstOutcome {
    pub reason: StopReason,
    pub generations: u32,
}

/// Runs generations on an already-evaluated population until a termination
/// condition fires. `generations_spent` credits evaluation passes already
/// charged against this budget (e.g. a re-evaluation pass).
pub fn run_until_termination(
    pop: &mut Population,
    cfg: &EvolutionConfig,
    generations_spent: u32,
    fitness: &mut FitnessFn,
) -> Result<SstOutcome> {
    let best = pop
        .best_fitness()
        .ok_or_else(|| Error::InvalidArgument("population not evaluated".into()))?;
    let mut state = TerminationState::new(best);
    state.generations_done = generations_spent;
    loop {
        if let Some(reason) = check_termination(&state, cfg) {
            return Ok(SstOutcome {
                reason,
                generations: state.generations_done,
            });
        }
        run_generation(pop, cfg, fitness)?;
        state.record_generation(pop.best_fitness().unwrap());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng as _;

    fn sphere(genes: &[f64]) -> Result<f64> {
        Ok(genes.iter().map(|g| g * g).sum())
    }

    #[test]
    fn initialization_respects_bounds_and_seed() {
        let cfg = EvolutionConfig::default();
        let pop = initialize_population(&cfg, 5, 42, None).unwrap();
        assert_eq!(pop.size(), 10);
        for ind in pop.individuals() {
            assert!(ind.genes.iter().all(|&g| (-15.0..=100.0).contains(&g)));
            assert!(ind.fitness.is_none());
        }
        let again = initialize_population(&cfg, 5, 42, None).unwrap();
        for (a, b) in pop.individuals().iter().zip(again.individuals()) {
            assert_eq!(a.genes, b.genes);
        }
    }

    #[test]
    fn initialization_with_fitness_counts_evals() {
        let cfg = EvolutionConfig::default();
        let mut f = |g: &[f64]| sphere(g);
        let pop = initialize_population(&cfg, 3, 7, Some(&mut f)).unwrap();
        assert_eq!(pop.eval_count(), 10);
        assert!(pop.individuals().iter().all(|i| i.fitness.is_some()));
    }

    #[test]
    fn initialization_rejects_bad_inputs() {
        let cfg = EvolutionConfig::default();
        assert!(initialize_population(&cfg, 0, 1, None).is_err());
        let degenerate = EvolutionConfig {
            bounds: (5.0, 5.0),
            ..Default::default()
        };
        assert!(initialize_population(&degenerate, 3, 1, None).is_err());
    }

    #[test]
    fn crossover_of_equal_parents_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Individual::new(vec![1.0, 2.0, 3.0]);
        let child = crossover(&a, &a, (-15.0, 100.0), &mut rng).unwrap();
        assert_eq!(child.genes, a.genes);
    }

    #[test]
    fn blend_midpoint() {
        assert_eq!(blend(0.0, 10.0, 0.5), 5.0);
    }

    #[test]
    fn crossover_rejects_length_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Individual::new(vec![1.0, 2.0]);
        let b = Individual::new(vec![1.0]);
        assert!(crossover(&a, &b, (-15.0, 100.0), &mut rng).is_err());
    }

    #[test]
    fn crossover_stays_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let bounds = (-15.0, 100.0);
        let a = Individual::new(vec![-15.0, 100.0, 0.0]);
        let b = Individual::new(vec![100.0, -15.0, 100.0]);
        for _ in 0..10_000 {
            let child = crossover(&a, &b, bounds, &mut rng).unwrap();
            assert!(child
                .genes
                .iter()
                .all(|&g| (bounds.0..=bounds.1).contains(&g)));
        }
    }

    #[test]
    fn mutate_zero_probability_is_identity() {
        let cfg = EvolutionConfig {
            mutation_prob: 0.0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ind = Individual::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(mutate(&ind, &cfg, &mut rng).genes, ind.genes);
    }

    #[test]
    fn mutate_certain_probability_step_shapes() {
        let cfg = EvolutionConfig {
            mutation_prob: 1.0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ind = Individual::new(vec![10.0, 20.0, 30.0, 40.0]);
        let mut resets = 0;
        let trials = 2000;
        for _ in 0..trials {
            let out = mutate(&ind, &cfg, &mut rng);
            let changed = out
                .genes
                .iter()
                .zip(&ind.genes)
                .filter(|(a, b)| a != b)
                .count();
            // Gaussian branch touches one gene; the reset branch rewrites
            // the genome.
            if changed > 1 {
                resets += 1;
                assert_eq!(changed, 4);
            }
        }
        let reset_rate = resets as f64 / trials as f64;
        assert!((reset_rate - 0.10).abs() < 0.03, "reset rate {reset_rate}");
    }

    #[test]
    fn mutate_frequency_matches_probability() {
        let cfg = EvolutionConfig::default(); // 0.6
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ind = Individual::new(vec![10.0, 20.0, 30.0]);
        let trials = 10_000;
        let mut mutated = 0;
        for _ in 0..trials {
            if mutate(&ind, &cfg, &mut rng).genes != ind.genes {
                mutated += 1;
            }
        }
        let freq = mutated as f64 / trials as f64;
        assert!((freq - 0.6).abs() < 0.02, "observed frequency {freq}");
    }

    #[test]
    fn generation_costs_pop_size_evals_and_never_worsens_best() {
        let cfg = EvolutionConfig::default();
        let mut f = |g: &[f64]| sphere(g);
        let mut pop = initialize_population(&cfg, 4, 11, Some(&mut f)).unwrap();
        let mut best = pop.best_fitness().unwrap();
        for gen in 0..20 {
            let before = pop.eval_count();
            run_generation(&mut pop, &cfg, &mut |g| sphere(g)).unwrap();
            assert_eq!(pop.eval_count() - before, 10, "generation {gen}");
            let now = pop.best_fitness().unwrap();
            assert!(now <= best, "best fitness worsened at generation {gen}");
            best = now;
        }
    }

    #[test]
    fn generations_are_deterministic_for_equal_seeds() {
        let cfg = EvolutionConfig::default();
        let run = |seed| {
            let mut pop =
                initialize_population(&cfg, 4, seed, Some(&mut |g: &[f64]| sphere(g))).unwrap();
            for _ in 0..5 {
                run_generation(&mut pop, &cfg, &mut |g| sphere(g)).unwrap();
            }
            pop.individuals().to_vec()
        };
        assert_eq!(run(77), run(77));
        assert_ne!(run(77), run(78));
    }

    #[test]
    fn termination_reasons() {
        let cfg = EvolutionConfig::default();
        let mut state = TerminationState::new(0.0);
        assert_eq!(check_termination(&state, &cfg), Some(StopReason::Converged));

        state = TerminationState::new(1.0);
        state.generations_done = 300;
        assert_eq!(check_termination(&state, &cfg), Some(StopReason::Budget));

        state = TerminationState::new(1.0);
        state.generations_without_improvement = 75;
        assert_eq!(check_termination(&state, &cfg), Some(StopReason::Stalled));

        state = TerminationState::new(1.0);
        state.generations_done = 299;
        state.generations_without_improvement = 74;
        assert_eq!(check_termination(&state, &cfg), None);
    }

    #[test]
    fn stagnation_resets_on_strict_improvement() {
        let mut state = TerminationState::new(10.0);
        state.record_generation(10.0);
        state.record_generation(10.0);
        assert_eq!(state.generations_without_improvement, 2);
        state.record_generation(9.5);
        assert_eq!(state.generations_without_improvement, 0);
        assert_eq!(state.best_fitness, 9.5);
        assert_eq!(state.generations_done, 3);
    }

    #[test]
    fn budget_scaling() {
        let cfg = EvolutionConfig::default();
        let by_n = scale_budget(&cfg, 13).unwrap();
        assert_eq!((by_n.tc, by_n.tcf), (23, 5));
        let by_otc = scale_budget(&cfg, 50).unwrap();
        assert_eq!((by_otc.tc, by_otc.tcf), (6, 1));
        let same = scale_budget(&cfg, 1).unwrap();
        assert_eq!((same.tc, same.tcf), (300, 75));
        assert!(scale_budget(&cfg, 0).is_err());
    }

    #[test]
    fn full_budget_eval_arithmetic() {
        // tcf > tc so stalling cannot fire: the loop must run exactly tc
        // generations, costing pop_size*(tc+1) evaluations with the
        // initialization pass.
        let cfg = EvolutionConfig {
            tc: 20,
            tcf: 75,
            ..Default::default()
        };
        // A fitness with no reachable epsilon: strictly positive everywhere.
        let mut f = |g: &[f64]| Ok(1.0 + g.iter().map(|v| v * v).sum::<f64>());
        let mut pop = initialize_population(&cfg, 3, 2, Some(&mut f)).unwrap();
        let outcome = run_until_termination(&mut pop, &cfg, 0, &mut f).unwrap();
        assert_eq!(outcome.reason, StopReason::Budget);
        assert_eq!(pop.eval_count(), 10 + 20 * 10);
    }

    proptest! {
        #[test]
        fn operators_preserve_bounds(
            seed in 0u64..500,
            genome_len in 1usize..8,
            rounds in 1usize..30,
        ) {
            let cfg = EvolutionConfig::default();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (lo, hi) = cfg.bounds;
            let mut a = Individual::new(
                (0..genome_len).map(|_| rng.gen_range(lo..=hi)).collect(),
            );
            let b = Individual::new(
                (0..genome_len).map(|_| rng.gen_range(lo..=hi)).collect(),
            );
            for _ in 0..rounds {
                a = mutate(&crossover(&a, &b, cfg.bounds, &mut rng)?, &cfg, &mut rng);
                prop_assert!(a.genes.iter().all(|&g| (lo..=hi).contains(&g)));
            }
        }
    }
}
