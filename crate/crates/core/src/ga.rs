//! Real-coded genetic algorithm over microphone positions and directivity.
//!
//! Genomes are kept feasible at all times: positions sorted ascending inside
//! `[0, L]` with gaps of at least `d_c`, directivity inside `[0, 1]`. Every
//! random draw comes from a ChaCha substream keyed by
//! `(seed, purpose, generation, index)`, so a run is reproducible from its
//! seed and a checkpointed state resumes bit-identically.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::array::{ArrayConfig, ArrayLimits, FEASIBILITY_TOLERANCE};
use crate::beamformer::DesignSettings;
use crate::error::{Error, Result};
use crate::idp::IdpSpec;
use crate::metrics::{overall_error, DesignGrid};
use crate::par;

/// BLX-α expansion factor.
pub const BLEND_ALPHA: f64 = 0.5;
/// Position mutation standard deviation as a fraction of the aperture.
pub const POSITION_SIGMA: f64 = 0.1;
/// Directivity mutation standard deviation.
pub const DIRECTIVITY_SIGMA: f64 = 0.1;
/// Fitness assigned to genomes whose objective failed.
pub const PENALTY_FITNESS: f64 = 1e300;

const STREAM_INIT: u64 = 0x494e_4954;
const STREAM_VARIATION: u64 = 0x5641_5259;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub tournament_size: usize,
    pub elite_count: usize,
    pub seed: u64,
}

impl Default for GaParams {
    /// Population 400, 120 generations, crossover 0.8, mutation 0.05.
    fn default() -> Self {
        GaParams {
            population_size: 400,
            generations: 120,
            crossover_prob: 0.8,
            mutation_prob: 0.05,
            tournament_size: 3,
            elite_count: 2,
            seed: 0,
        }
    }
}

impl GaParams {
    /// Population 60 for 40 generations; otherwise the defaults.
    pub fn desk() -> Self {
        GaParams {
            population_size: 60,
            generations: 40,
            ..GaParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if self.population_size < 4 {
            return bad(format!(
                "population_size must be at least 4, got {}",
                self.population_size
            ));
        }
        if self.generations == 0 {
            return bad("generations must be at least 1".into());
        }
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.tournament_size < 2 {
            return bad(format!(
                "tournament_size must be at least 2, got {}",
                self.tournament_size
            ));
        }
        if self.elite_count == 0 || self.elite_count > self.population_size {
            return bad(format!(
                "elite_count must lie in [1, population_size], got {}",
                self.elite_count
            ));
        }
        Ok(())
    }
}

/// Everything the objective needs besides the genome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationProblem {
    pub elements: usize,
    pub limits: ArrayLimits,
    pub spec: IdpSpec,
    pub grid: DesignGrid,
    pub settings: DesignSettings,
}

impl OptimizationProblem {
    pub fn validate(&self) -> Result<()> {
        self.limits.check_capacity(self.elements)?;
        let required = 2 * self.settings.truncation + 2;
        if self.elements < required {
            return Err(Error::UnderDetermined {
                elements: self.elements,
                truncation: self.settings.truncation,
                required,
            });
        }
        if self.settings.truncation < self.spec.order() {
            return Err(Error::TruncationTooSmall {
                truncation: self.settings.truncation,
                order: self.spec.order(),
            });
        }
        self.grid
            .check_resolution(self.spec.order(), self.settings.truncation)
    }

    /// Broadband, all-steering approximation error of `cfg`.
    pub fn objective(&self, cfg: &ArrayConfig) -> Result<f64> {
        overall_error(cfg, &self.spec, &self.grid, &self.settings)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: ArrayConfig,
    /// Overall error; `None` until evaluated.
    pub fitness: Option<f64>,
}

impl Individual {
    fn new(genome: ArrayConfig) -> Self {
        Individual {
            genome,
            fitness: None,
        }
    }

    fn key(&self) -> Vec<u64> {
        self.genome
            .positions()
            .iter()
            .chain(self.genome.directivity())
            .map(|v| v.to_bits())
            .collect()
    }

    fn score(&self) -> f64 {
        self.fitness.unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaRunState {
    /// Index of the current population.
    pub generation: usize,
    pub population: Vec<Individual>,
    pub best: Option<Individual>,
    /// Root of every random substream.
    pub rng_state: u64,
    pub history: Vec<GenerationStats>,
    #[serde(skip)]
    cache: BTreeMap<Vec<u64>, f64>,
}

fn substream(seed: u64, purpose: u64, generation: u64, index: u64) -> ChaCha8Rng {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    let mut h = splitmix(seed);
    for word in [purpose, generation, index] {
        h = splitmix(h ^ word);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Sorts positions (carrying directivity along), clamps directivity into
/// `[0, 1]` and pushes positions apart to the minimum spacing: a
/// left-to-right sweep, then a right-to-left sweep if the first overflowed
/// the aperture. Requires `(M − 1)·d_c ≤ L`.
pub fn repair(positions: &[f64], directivity: &[f64], limits: &ArrayLimits) -> ArrayConfig {
    let mut genes: Vec<(f64, f64)> = positions
        .iter()
        .zip(directivity)
        .map(|(&x, &a)| {
            let x = if x.is_nan() { 0.0 } else { x };
            let a = if a.is_nan() { 0.5 } else { a.clamp(0.0, 1.0) };
            (x, a)
        })
        .collect();
    genes.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (d, l) = (limits.min_spacing, limits.aperture);
    let n = genes.len();
    for i in 0..n {
        let mut x = genes[i].0.clamp(0.0, l);
        if i > 0 && x < genes[i - 1].0 + d - FEASIBILITY_TOLERANCE {
            x = genes[i - 1].0 + d;
        }
        genes[i].0 = x;
    }
    if n > 0 && genes[n - 1].0 > l {
        genes[n - 1].0 = l;
        for i in (0..n - 1).rev() {
            if genes[i].0 > genes[i + 1].0 - d + FEASIBILITY_TOLERANCE {
                genes[i].0 = (genes[i + 1].0 - d).max(0.0);
            }
        }
    }
    let (x, a): (Vec<f64>, Vec<f64>) = genes.into_iter().unzip();
    ArrayConfig::new(x, a).expect("repaired genome is valid")
}

/// Draws `elements` positions uniformly from the feasible sorted region and
/// directivities uniformly from `[0, 1]`.
fn random_genome(rng: &mut ChaCha8Rng, elements: usize, limits: &ArrayLimits) -> ArrayConfig {
    let slack = (limits.aperture - (elements - 1) as f64 * limits.min_spacing).max(0.0);
    let mut offsets: Vec<f64> = (0..elements).map(|_| rng.gen::<f64>() * slack).collect();
    offsets.sort_by(f64::total_cmp);
    let positions: Vec<f64> = offsets
        .iter()
        .enumerate()
        .map(|(i, u)| u + i as f64 * limits.min_spacing)
        .collect();
    let directivity: Vec<f64> = (0..elements).map(|_| rng.gen::<f64>()).collect();
    repair(&positions, &directivity, limits)
}

/// Generation 0: `N_p` feasible random genomes.
pub fn init_population(
    params: &GaParams,
    elements: usize,
    limits: &ArrayLimits,
) -> Result<GaRunState> {
    params.validate()?;
    limits.check_capacity(elements)?;
    let population = (0..params.population_size)
        .map(|i| {
            let mut rng = substream(params.seed, STREAM_INIT, 0, i as u64);
            Individual::new(random_genome(&mut rng, elements, limits))
        })
        .collect();
    Ok(GaRunState {
        generation: 0,
        population,
        best: None,
        rng_state: params.seed,
        history: Vec::new(),
        cache: BTreeMap::new(),
    })
}

impl GaRunState {
    /// Assigns fitness to every unevaluated individual and updates `best`.
    /// Objective failures are logged and scored [`PENALTY_FITNESS`].
    pub fn evaluate<F>(&mut self, objective: F)
    where
        F: Fn(&ArrayConfig) -> Result<f64> + Sync + Send,
    {
        let mut pending: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        for (i, ind) in self.population.iter_mut().enumerate() {
            if ind.fitness.is_some() {
                continue;
            }
            let key = ind.key();
            match self.cache.get(&key) {
                Some(&f) => ind.fitness = Some(f),
                None => {
                    pending.entry(key).or_insert(i);
                }
            }
        }
        let jobs: Vec<(Vec<u64>, usize)> = pending.into_iter().collect();
        let population = &self.population;
        let results = par::map(&jobs, |(_, i)| objective(&population[*i].genome));
        for ((key, i), result) in jobs.into_iter().zip(results) {
            let f = match result {
                Ok(f) if f.is_finite() => f,
                Ok(f) => {
                    log::warn!("individual {i}: non-finite objective {f}; penalized");
                    PENALTY_FITNESS
                }
                Err(e) => {
                    log::warn!("individual {i}: {e}; penalized");
                    PENALTY_FITNESS
                }
            };
            self.cache.insert(key, f);
        }
        for ind in self.population.iter_mut() {
            if ind.fitness.is_none() {
                ind.fitness = self.cache.get(&ind.key()).copied();
            }
        }
        let leader = self
            .population
            .iter()
            .min_by(|p, q| p.score().total_cmp(&q.score()))
            .expect("population is non-empty");
        if self
            .best
            .as_ref()
            .map_or(true, |b| leader.score() < b.score())
        {
            self.best = Some(leader.clone());
        }
    }

    /// Appends best/mean/median fitness of the current, evaluated population.
    pub fn record(&mut self) {
        let mut scores: Vec<f64> = self.population.iter().map(Individual::score).collect();
        scores.sort_by(f64::total_cmp);
        let n = scores.len();
        let median = if n % 2 == 1 {
            scores[n / 2]
        } else {
            0.5 * (scores[n / 2 - 1] + scores[n / 2])
        };
        self.history.push(GenerationStats {
            generation: self.generation,
            best: scores[0],
            mean: scores.iter().sum::<f64>() / n as f64,
            median,
        });
    }

    fn tournament(&self, rng: &mut ChaCha8Rng, size: usize) -> usize {
        let n = self.population.len();
        let mut winner = rng.gen_range(0..n);
        for _ in 1..size {
            let challenger = rng.gen_range(0..n);
            if self.population[challenger].score() < self.population[winner].score() {
                winner = challenger;
            }
        }
        winner
    }

    /// Elitism, tournament selection, BLX-α crossover, Gaussian mutation and
    /// repair. Produces the next generation's population.
    pub fn step(&mut self, params: &GaParams, limits: &ArrayLimits) {
        let n = self.population.len();
        let mut ranked: Vec<usize> = (0..n).collect();
        ranked.sort_by(|&i, &j| {
            self.population[i]
                .score()
                .total_cmp(&self.population[j].score())
                .then(i.cmp(&j))
        });
        let mut next: Vec<Individual> = ranked
            .iter()
            .take(params.elite_count)
            .map(|&i| self.population[i].clone())
            .collect();

        let elements = self.population[0].genome.len();
        let position_noise =
            Normal::new(0.0, POSITION_SIGMA * limits.aperture).expect("positive sigma");
        let directivity_noise = Normal::new(0.0, DIRECTIVITY_SIGMA).expect("positive sigma");
        let mut pair = 0u64;
        while next.len() < params.population_size {
            let mut rng = substream(
                self.rng_state,
                STREAM_VARIATION,
                self.generation as u64,
                pair,
            );
            pair += 1;
            let p1 = self.tournament(&mut rng, params.tournament_size);
            let p2 = self.tournament(&mut rng, params.tournament_size);
            let mut c1 = genes(&self.population[p1].genome);
            let mut c2 = genes(&self.population[p2].genome);
            if rng.gen::<f64>() < params.crossover_prob {
                for (g1, g2) in c1.iter_mut().zip(c2.iter_mut()) {
                    let (lo, hi) = if *g1 <= *g2 { (*g1, *g2) } else { (*g2, *g1) };
                    let spread = BLEND_ALPHA * (hi - lo);
                    let (a, b) = (lo - spread, hi + spread);
                    *g1 = a + rng.gen::<f64>() * (b - a);
                    *g2 = a + rng.gen::<f64>() * (b - a);
                }
            }
            for child in [&mut c1, &mut c2] {
                for (k, g) in child.iter_mut().enumerate() {
                    if rng.gen::<f64>() < params.mutation_prob {
                        *g += if k < elements {
                            position_noise.sample(&mut rng)
                        } else {
                            directivity_noise.sample(&mut rng)
                        };
                    }
                }
            }
            for child in [c1, c2] {
                if next.len() < params.population_size {
                    let (x, a) = child.split_at(elements);
                    next.push(Individual::new(repair(x, a, limits)));
                }
            }
        }
        self.population = next;
        self.generation += 1;
    }

    /// Replaces the tail of the population with the given genomes.
    pub fn inject(&mut self, genomes: &[ArrayConfig], limits: &ArrayLimits) -> Result<()> {
        if genomes.len() > self.population.len() {
            return Err(Error::InvalidConfig(format!(
                "{} injected genomes exceed the population size {}",
                genomes.len(),
                self.population.len()
            )));
        }
        let elements = self.population[0].genome.len();
        let n = self.population.len();
        for (k, g) in genomes.iter().enumerate() {
            if g.len() != elements {
                return Err(Error::InvalidConfig(format!(
                    "injected genome has {} elements, problem has {elements}",
                    g.len()
                )));
            }
            limits.check(g)?;
            let mut order: Vec<usize> = (0..g.len()).collect();
            order.sort_by(|&i, &j| g.positions()[i].total_cmp(&g.positions()[j]));
            let sorted = ArrayConfig::new(
                order.iter().map(|&i| g.positions()[i]).collect(),
                order.iter().map(|&i| g.directivity()[i]).collect(),
            )?;
            self.population[n - 1 - k] = Individual::new(sorted);
        }
        Ok(())
    }
}

fn genes(cfg: &ArrayConfig) -> Vec<f64> {
    cfg.positions()
        .iter()
        .chain(cfg.directivity())
        .copied()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaOutcome {
    pub best: ArrayConfig,
    pub fitness: f64,
    pub history: Vec<GenerationStats>,
}

/// Drives the generation loop one step at a time so callers can checkpoint.
pub struct Optimizer<'p> {
    params: GaParams,
    problem: &'p OptimizationProblem,
    state: GaRunState,
}

impl<'p> Optimizer<'p> {
    /// Fresh run; `injected` genomes replace the tail of generation 0.
    pub fn new(
        params: GaParams,
        problem: &'p OptimizationProblem,
        injected: &[ArrayConfig],
    ) -> Result<Self> {
        problem.validate()?;
        let mut state = init_population(&params, problem.elements, &problem.limits)?;
        state.inject(injected, &problem.limits)?;
        Ok(Optimizer {
            params,
            problem,
            state,
        })
    }

    /// Continues from a saved state.
    pub fn resume(
        params: GaParams,
        problem: &'p OptimizationProblem,
        state: GaRunState,
    ) -> Result<Self> {
        params.validate()?;
        problem.validate()?;
        if state.population.len() != params.population_size {
            return Err(Error::InvalidConfig(format!(
                "saved population has {} individuals, parameters ask for {}",
                state.population.len(),
                params.population_size
            )));
        }
        if state.rng_state != params.seed {
            return Err(Error::InvalidConfig(format!(
                "saved run used seed {}, parameters ask for {}",
                state.rng_state, params.seed
            )));
        }
        for ind in &state.population {
            if ind.genome.len() != problem.elements {
                return Err(Error::InvalidConfig(
                    "saved genome size does not match the problem".into(),
                ));
            }
            problem.limits.check(&ind.genome)?;
        }
        Ok(Optimizer {
            params,
            problem,
            state,
        })
    }

    pub fn state(&self) -> &GaRunState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.history.len() >= self.params.generations
    }

    /// Evaluates and records the current generation, then breeds the next
    /// one unless this was the last.
    pub fn advance(&mut self) {
        if self.is_done() {
            return;
        }
        let problem = self.problem;
        self.state.evaluate(|cfg| problem.objective(cfg));
        self.state.record();
        if !self.is_done() {
            self.state.step(&self.params, &problem.limits);
        }
    }

    pub fn run(mut self) -> GaOutcome {
        while !self.is_done() {
            self.advance();
        }
        self.outcome()
    }

    pub fn outcome(&self) -> GaOutcome {
        let best = self
            .state
            .best
            .clone()
            .expect("at least one generation evaluated");
        GaOutcome {
            fitness: best.score(),
            best: best.genome,
            history: self.state.history.clone(),
        }
    }
}

/// Runs the full loop and returns the best configuration found.
pub fn optimize(
    params: GaParams,
    problem: &OptimizationProblem,
    injected: &[ArrayConfig],
) -> Result<GaOutcome> {
    Ok(Optimizer::new(params, problem, injected)?.run())
}
