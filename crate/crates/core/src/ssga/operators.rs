//! Breeding and selection operators on integer chromosomes.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::model::{Chromosome, DecisionBounds, GeneKind, VarBound};

/// Uniform draw from each variable's `lower + k * step` grid.
pub fn random_genes<R: Rng + ?Sized>(bounds: &DecisionBounds, rng: &mut R) -> Vec<i64> {
    bounds
        .vars
        .iter()
        .map(|v| v.grid_value(rng.random_range(0..v.grid_len())))
        .collect()
}

pub fn init_population<R: Rng + ?Sized>(
    bounds: &DecisionBounds,
    size: usize,
    rng: &mut R,
) -> Vec<Chromosome> {
    (0..size)
        .map(|_| Chromosome::new(random_genes(bounds, rng)))
        .collect()
}

/// `round(v1 * alpha + v2 * (1 - alpha))`, clamped to the variable's range.
pub fn linear_crossover(v1: i64, v2: i64, alpha: f64, bound: &VarBound) -> i64 {
    let blended = (v1 as f64 * alpha + v2 as f64 * (1.0 - alpha)).round() as i64;
    bound.clamp(blended)
}

/// Parent 1's value when `alpha > 0.5`, otherwise parent 2's.
pub fn uniform_pick(m1: i64, m2: i64, alpha: f64) -> i64 {
    if alpha > 0.5 {
        m1
    } else {
        m2
    }
}

/// Per-gene uniform crossover over threshold values.
pub fn uniform_crossover_m<R: Rng + ?Sized>(m1: &[i64], m2: &[i64], rng: &mut R) -> Vec<i64> {
    m1.iter()
        .zip(m2)
        .map(|(&a, &b)| uniform_pick(a, b, rng.random::<f64>()))
        .collect()
}

/// One offspring: linear crossover on `r`, `Q` and `S` genes (fresh `alpha`
/// per gene), uniform crossover on `M` genes.
pub fn crossover<R: Rng + ?Sized>(
    p1: &[i64],
    p2: &[i64],
    bounds: &DecisionBounds,
    rng: &mut R,
) -> Vec<i64> {
    bounds
        .vars
        .iter()
        .zip(p1.iter().zip(p2))
        .map(|(b, (&a, &c))| {
            let alpha = rng.random::<f64>();
            match b.kind {
                GeneKind::Threshold => uniform_pick(a, c, alpha),
                GeneKind::Inventory | GeneKind::Interval => linear_crossover(a, c, alpha, b),
            }
        })
        .collect()
}

pub fn mutate_gene<R: Rng + ?Sized>(value: i64, bound: &VarBound, sigma: f64, rng: &mut R) -> i64 {
    let moved = match bound.kind {
        GeneKind::Inventory => {
            let noise = Normal::new(0.0, sigma)
                .map(|n| n.sample(rng))
                .unwrap_or(0.0);
            value + noise.round() as i64
        }
        GeneKind::Interval => value + if rng.random_bool(0.5) { 1 } else { -1 },
        GeneKind::Threshold => {
            value
                + if rng.random_bool(0.5) {
                    bound.step
                } else {
                    -bound.step
                }
        }
    };
    bound.clamp(moved)
}

/// Mutates each gene independently with probability `pm`.
pub fn mutate<R: Rng + ?Sized>(
    genes: &mut [i64],
    pm: f64,
    sigma: f64,
    bounds: &DecisionBounds,
    rng: &mut R,
) {
    for (g, b) in genes.iter_mut().zip(&bounds.vars) {
        if rng.random::<f64>() < pm {
            *g = mutate_gene(*g, b, sigma, rng);
        }
    }
}

/// Index of the lowest-F member among `k` distinct random members; ties go
/// to the lower index.
pub fn tournament_select<R: Rng + ?Sized>(
    population: &[Chromosome],
    k: usize,
    rng: &mut R,
) -> Option<usize> {
    if population.len() < k || k == 0 {
        return None;
    }
    index::sample(rng, population.len(), k)
        .into_iter()
        .min_by(|&a, &b| {
            population[a]
                .f()
                .total_cmp(&population[b].f())
                .then(a.cmp(&b))
        })
}

/// Overwrites the highest-F member (first one on ties); returns its index.
pub fn replace_worst(population: &mut [Chromosome], offspring: Chromosome) -> usize {
    let worst = population
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.f().total_cmp(&b.f()).then(j.cmp(i)))
        .map(|(i, _)| i)
        .expect("non-empty population");
    population[worst] = offspring;
    worst
}
