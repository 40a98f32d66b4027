//! Steady-state genetic algorithm over scenario chromosomes.
//!
//! Each generation breeds a single offspring from two tournament winners and
//! overwrites the current worst member with it. Fitness is `TC / max(FR, 0.01)`
//! estimated by replicated simulation.

pub mod operators;

use std::collections::HashMap;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{
    bounds_for_scenario, decode_chromosome, Chromosome, DecisionBounds, NetworkConfig, Scenario,
};
use crate::sim::{run_replication, SimError, SimResult};
use crate::stats::{run_until_precise_with, PrecisionPolicy, StatsError};

pub use operators::{
    crossover, init_population, linear_crossover, mutate, random_genes, replace_worst,
    tournament_select, uniform_crossover_m,
};

/// Fill rates below this value are raised to it before dividing.
pub const FILL_RATE_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaParams {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_probability: f64,
    pub mutation_probability: f64,
    pub tournament_size: usize,
    pub gaussian_sigma: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population_size: 100,
            generations: 1000,
            crossover_probability: 1.0,
            mutation_probability: 0.2,
            tournament_size: 3,
            gaussian_sigma: 10.0,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<(), SsgaError> {
        let bad = |m: &'static str| Err(SsgaError::Params(m));
        if self.population_size < 2 {
            return bad("population_size must be >= 2");
        }
        if self.generations < 1 {
            return bad("generations must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return bad("mutation_probability must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.crossover_probability) {
            return bad("crossover_probability must lie in [0, 1]");
        }
        if self.tournament_size < 2 {
            return bad("tournament_size must be >= 2");
        }
        if !(self.gaussian_sigma >= 0.0) {
            return bad("gaussian_sigma must be >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    /// `TC / max(FR, 0.01)`.
    pub f: f64,
    pub total_cost: f64,
    /// Mean fill rate as measured (before the floor).
    pub fill_rate: f64,
    pub replicates: usize,
    pub precise: bool,
}

impl FitnessRecord {
    pub fn new(total_cost: f64, fill_rate: f64, replicates: usize, precise: bool) -> Self {
        Self {
            f: total_cost / fill_rate.max(FILL_RATE_FLOOR),
            total_cost,
            fill_rate,
            replicates,
            precise,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SsgaError {
    #[error("invalid GA parameters: {0}")]
    Params(&'static str),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Gene(#[from] crate::model::GeneError),
}

/// Something that scores a chromosome. `seeds` supplies replication seeds.
pub trait Objective {
    fn evaluate(&self, genes: &[i64], seeds: &mut ChaCha8Rng) -> Result<FitnessRecord, SsgaError>;
}

/// Wraps a deterministic function of the genes.
pub struct FnObjective<F>(pub F);

impl<F> Objective for FnObjective<F>
where
    F: Fn(&[i64]) -> FitnessRecord,
{
    fn evaluate(&self, genes: &[i64], _: &mut ChaCha8Rng) -> Result<FitnessRecord, SsgaError> {
        Ok((self.0)(genes))
    }
}

/// Replicated simulation of the decoded policy until the total cost
/// estimate is precise.
pub struct SimObjective<'a> {
    pub config: &'a NetworkConfig,
    pub scenario: Scenario,
    pub precision: PrecisionPolicy,
    pub horizon: f64,
}

impl SimObjective<'_> {
    pub fn replicate(
        &self,
        genes: &[i64],
        seeds: &mut ChaCha8Rng,
    ) -> Result<(FitnessRecord, Vec<SimResult>), SsgaError> {
        let policy = decode_chromosome(genes, self.scenario, self.config.retailer_count())?;
        let (summary, runs) = run_until_precise_with(
            |seed| run_replication(self.config, &policy, self.scenario, seed, self.horizon),
            |r| r.as_ref().map_or(f64::NAN, |r| r.total_cost),
            seeds,
            &self.precision,
        )?;
        let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
        let fr = runs.iter().map(|r| r.fill_rate).sum::<f64>() / runs.len() as f64;
        Ok((
            FitnessRecord::new(summary.mean, fr, summary.n, summary.precise),
            runs,
        ))
    }
}

impl Objective for SimObjective<'_> {
    fn evaluate(&self, genes: &[i64], seeds: &mut ChaCha8Rng) -> Result<FitnessRecord, SsgaError> {
        self.replicate(genes, seeds).map(|(f, _)| f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub generation: usize,
    /// Best fitness found so far.
    pub best_f: f64,
    /// Highest fitness in the current population.
    pub worst_f: f64,
    /// Highest minus lowest fitness in the current population.
    pub spread: f64,
}

pub fn write_convergence_csv<W: Write>(log: &[GenerationLog], mut out: W) -> io::Result<()> {
    writeln!(out, "generation,best_F,worst_F,spread")?;
    for g in log {
        writeln!(
            out,
            "{},{},{},{}",
            g.generation, g.best_f, g.worst_f, g.spread
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub members: Vec<Chromosome>,
    pub global_best: Chromosome,
}

impl Population {
    fn extremes(&self) -> (f64, f64) {
        self.members
            .iter()
            .map(Chromosome::f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| {
                (lo.min(f), hi.max(f))
            })
    }

    fn log(&self, generation: usize) -> GenerationLog {
        let (lo, hi) = self.extremes();
        GenerationLog {
            generation,
            best_f: self.global_best.f(),
            worst_f: hi,
            spread: hi - lo,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsgaOutcome {
    pub best: Chromosome,
    pub log: Vec<GenerationLog>,
    pub population: Vec<Chromosome>,
    /// Objective calls; cached chromosomes are not re-evaluated.
    pub evaluations: usize,
    pub imprecise_evaluations: usize,
}

impl SsgaOutcome {
    pub fn best_fitness(&self) -> FitnessRecord {
        self.best.fitness.expect("best is evaluated")
    }
}

struct Evaluator<'o, O: Objective> {
    objective: &'o O,
    seeds: ChaCha8Rng,
    cache: HashMap<Vec<i64>, FitnessRecord>,
    evaluations: usize,
    imprecise: usize,
}

impl<O: Objective> Evaluator<'_, O> {
    fn score(&mut self, c: &mut Chromosome) -> Result<(), SsgaError> {
        if let Some(hit) = self.cache.get(&c.genes) {
            c.fitness = Some(*hit);
            return Ok(());
        }
        let rec = self.objective.evaluate(&c.genes, &mut self.seeds)?;
        self.evaluations += 1;
        if !rec.precise {
            self.imprecise += 1;
        }
        self.cache.insert(c.genes.clone(), rec);
        c.fitness = Some(rec);
        Ok(())
    }
}

/// Runs the GA over `bounds` with an arbitrary objective.
pub fn run_ssga_with<O: Objective>(
    bounds: &DecisionBounds,
    objective: &O,
    params: &GaParams,
    seed: u64,
) -> Result<SsgaOutcome, SsgaError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    seeds.set_stream(1);
    let mut eval = Evaluator {
        objective,
        seeds,
        cache: HashMap::new(),
        evaluations: 0,
        imprecise: 0,
    };

    let mut members = init_population(bounds, params.population_size, &mut rng);
    for c in &mut members {
        eval.score(c)?;
    }
    let global_best = members
        .iter()
        .min_by(|a, b| a.f().total_cmp(&b.f()))
        .cloned()
        .expect("population_size >= 2");
    let mut pop = Population {
        members,
        global_best,
    };
    let mut log = Vec::with_capacity(params.generations + 1);
    log.push(pop.log(0));

    for g in 1..=params.generations {
        // Tiny populations hold tournaments over everyone.
        let k = params.tournament_size.min(pop.members.len());
        let i1 = tournament_select(&pop.members, k, &mut rng).expect("validated k");
        let i2 = tournament_select(&pop.members, k, &mut rng).expect("validated k");
        let (p1, p2) = (&pop.members[i1].genes, &pop.members[i2].genes);
        let mut genes = if rng.random::<f64>() < params.crossover_probability {
            crossover(p1, p2, bounds, &mut rng)
        } else {
            p1.clone()
        };
        mutate(
            &mut genes,
            params.mutation_probability,
            params.gaussian_sigma,
            bounds,
            &mut rng,
        );
        debug_assert!(
            bounds.contains(&genes),
            "offspring out of bounds: {genes:?}"
        );
        let mut child = Chromosome::new(genes);
        eval.score(&mut child)?;
        if child.f() < pop.global_best.f() {
            pop.global_best = child.clone();
        }
        replace_worst(&mut pop.members, child);
        log.push(pop.log(g));
    }

    Ok(SsgaOutcome {
        best: pop.global_best,
        log,
        population: pop.members,
        evaluations: eval.evaluations,
        imprecise_evaluations: eval.imprecise,
    })
}

/// Optimizes one scenario's policy by simulation.
pub fn run_ssga(
    scenario: Scenario,
    config: &NetworkConfig,
    params: &GaParams,
    precision: &PrecisionPolicy,
    seed: u64,
) -> Result<SsgaOutcome, SsgaError> {
    let bounds = bounds_for_scenario(scenario, config);
    let objective = SimObjective {
        config,
        scenario,
        precision: *precision,
        horizon: config.horizon_days,
    };
    run_ssga_with(&bounds, &objective, params, seed)
}
