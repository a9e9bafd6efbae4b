use std::ops::Range;

use rand::Rng;

use super::population::{AgentType, PerType, PopulationCounts};
use crate::error::{Error, Result};
use crate::model::{GameParams, SimplexPoint};
use crate::rng::{Phase, PhaseStreams};
use crate::scalar::Scalar;

/// Runs `work` over contiguous slices of `0..len` on up to `workers` threads
/// and returns the partial results in slice order.
fn fan_out<R, F>(len: u64, workers: usize, work: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<u64>) -> R + Sync,
{
    let workers = (workers.max(1) as u64).min(len.max(1));
    if workers == 1 {
        return vec![work(0..len)];
    }
    let chunk = len.div_ceil(workers);
    let bounds: Vec<Range<u64>> = (0..workers)
        .map(|w| (w * chunk).min(len)..((w + 1) * chunk).min(len))
        .collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = bounds
            .into_iter()
            .map(|range| {
                let work = &work;
                scope.spawn(move || work(range))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// Cheater eggs per nest for the current generation, indexed by nest owner.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NestRegistry {
    eggs: Vec<u32>,
}

impl NestRegistry {
    pub fn empty(nests: u64) -> Self {
        NestRegistry { eggs: vec![0; nests as usize] }
    }

    /// Builds a registry from explicit nest choices, one per cheater.
    pub fn from_choices(nests: u64, choices: &[u64]) -> Result<Self> {
        let mut registry = Self::empty(nests);
        for &target in choices {
            registry.record(target)?;
        }
        Ok(registry)
    }

    fn record(&mut self, nest: u64) -> Result<()> {
        let slot = self
            .eggs
            .get_mut(nest as usize)
            .ok_or_else(|| Error::domain(format!("nest {nest} does not exist")))?;
        *slot += 1;
        Ok(())
    }

    pub fn eggs_in(&self, owner: u64) -> u32 {
        self.eggs.get(owner as usize).copied().unwrap_or(0)
    }

    pub fn nests(&self) -> u64 {
        self.eggs.len() as u64
    }

    pub fn total(&self) -> u64 {
        self.eggs.iter().map(|&k| k as u64).sum()
    }

    /// Cheater eggs sitting in nests owned by agents in `owners`.
    pub fn total_in(&self, owners: Range<u64>) -> u64 {
        self.eggs[owners.start as usize..owners.end as usize]
            .iter()
            .map(|&k| k as u64)
            .sum()
    }

    pub fn clear(&mut self) {
        self.eggs.clear();
    }

    pub fn is_cleared(&self) -> bool {
        self.eggs.iter().all(|&k| k == 0)
    }
}

/// Utility accounting for one generation, before reproduction.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    pub counts: PopulationCounts,
    pub total_utility: PerType<T>,
    /// `None` for types with no agents.
    pub mean_utility: PerType<Option<T>>,
    /// Hatched eggs, attributed to the type of the bird that laid them.
    pub eggs_hatched: PerType<u64>,
    pub eggs_laid: u64,
    pub eggs_discarded: u64,
}

/// Identify, sit and hatch, then tally utilities.
///
/// Sitter nests hatch every egg they hold; identifier nests hatch only the
/// owner's egg. A cheater earns `h` iff its egg landed in a sitter nest.
pub fn account<T: Scalar>(counts: &PopulationCounts, params: &GameParams<T>, registry: &NestRegistry) -> Outcome<T> {
    let n = counts.per_type();
    let sitter_nests = 0..n.sitter;
    let identifier_nests = n.sitter..counts.nests();
    let parasitized = registry.total_in(sitter_nests);
    let discarded = registry.total_in(identifier_nests);

    let h = params.hatch_reward();
    let e = params.sitting_cost();
    let identifier_each = params.identifier_payoff();

    let eggs_sat_by_sitters = n.sitter + parasitized;
    let total_utility = PerType::new(
        h * T::from_count(n.sitter) - e * T::from_count(eggs_sat_by_sitters),
        identifier_each * T::from_count(n.identifier),
        h * T::from_count(parasitized),
    );
    let mean_utility = PerType::new(
        (n.sitter > 0).then(|| total_utility.sitter / T::from_count(n.sitter)),
        (n.identifier > 0).then_some(identifier_each),
        (n.cheater > 0).then(|| total_utility.cheater / T::from_count(n.cheater)),
    );
    Outcome {
        counts: *counts,
        total_utility,
        mean_utility,
        eggs_hatched: PerType::new(n.sitter, n.identifier, parasitized),
        eggs_laid: counts.nests() + registry.total(),
        eggs_discarded: discarded,
    }
}

/// Utility-proportional resampling of a generation of the same size.
///
/// Weights are the per-type totals clamped at zero. With all weights zero the
/// counts carry over. Each offspring then switches, with probability
/// `mutation_rate`, to one of the other two types. Offspring `k` draws from
/// its own `(seed, generation, k)` streams.
pub fn reproduce<T: Scalar>(
    totals: &PerType<T>,
    pre: &PopulationCounts,
    mutation_rate: f64,
    seed: u64,
    generation: u64,
    workers: usize,
) -> PopulationCounts {
    let weights = totals.map(|w| {
        let w = w.to_f64().unwrap_or(0.0);
        if w > 0.0 {
            w
        } else {
            0.0
        }
    });
    let sum = weights.sitter + weights.identifier + weights.cheater;
    if sum <= 0.0 {
        return *pre;
    }
    let cumulative = [
        weights.sitter,
        weights.sitter + weights.identifier,
        sum,
    ];
    let pick = |u: f64| -> usize {
        let target = u * sum;
        let mut last = 0;
        for k in 0..3 {
            let w = weights[AgentType::from_index(k)];
            if w > 0.0 {
                last = k;
                if target < cumulative[k] {
                    return k;
                }
            }
        }
        last
    };
    let birth = PhaseStreams::new(seed, generation, Phase::Reproduce);
    let mutation = PhaseStreams::new(seed, generation, Phase::Mutate);
    let partials = fan_out(pre.total(), workers, |range| {
        let mut tally = [0u64; 3];
        for k in range {
            let mut kind = pick(birth.agent(k).random::<f64>());
            if mutation_rate > 0.0 {
                let mut rng = mutation.agent(k);
                if rng.random::<f64>() < mutation_rate {
                    kind = (kind + 1 + rng.random_range(0..2usize)) % 3;
                }
            }
            tally[kind] += 1;
        }
        tally
    });
    let tally = partials.iter().fold([0u64; 3], |acc, t| [acc[0] + t[0], acc[1] + t[1], acc[2] + t[2]]);
    PopulationCounts::from_per_type(PerType::new(tally[0], tally[1], tally[2]))
}

/// Everything that happened in one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationReport<T> {
    pub generation: u64,
    pub pre_counts: PopulationCounts,
    pub post_counts: PopulationCounts,
    pub total_utility: PerType<T>,
    pub mean_utility: PerType<Option<T>>,
    pub eggs_hatched: PerType<u64>,
    pub eggs_laid: u64,
    pub eggs_discarded: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord<T> {
    /// Index of the generation that produced `proportions`, starting at 1.
    pub generation: u64,
    pub proportions: SimplexPoint<T>,
    pub report: GenerationReport<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelState<T> {
    counts: PopulationCounts,
    params: GameParams<T>,
    mutation_rate: f64,
    seed: u64,
    generation: u64,
    nest_registry: NestRegistry,
}

pub fn init_model<T: Scalar>(
    counts: PopulationCounts,
    params: GameParams<T>,
    mutation_rate: f64,
    seed: u64,
) -> Result<ModelState<T>> {
    ModelState::new(counts, params, mutation_rate, seed)
}

impl<T: Scalar> ModelState<T> {
    pub fn new(counts: PopulationCounts, params: GameParams<T>, mutation_rate: f64, seed: u64) -> Result<Self> {
        if counts.total() == 0 {
            return Err(Error::domain("population must contain at least one agent"));
        }
        if !(0.0..=1.0).contains(&mutation_rate) {
            return Err(Error::domain(format!("mutation rate {mutation_rate} outside [0, 1]")));
        }
        Ok(ModelState {
            counts,
            params,
            mutation_rate,
            seed,
            generation: 0,
            nest_registry: NestRegistry::default(),
        })
    }

    pub fn counts(&self) -> &PopulationCounts {
        &self.counts
    }

    pub fn params(&self) -> &GameParams<T> {
        &self.params
    }

    pub fn mutation_rate(&self) -> f64 {
        self.mutation_rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn nest_registry(&self) -> &NestRegistry {
        &self.nest_registry
    }

    pub fn proportions(&self) -> SimplexPoint<T> {
        self.counts.proportions()
    }

    /// Every cheater picks a nest uniformly at random.
    ///
    /// Lay-intents are computed per cheater from its own stream and merged in
    /// ascending agent order. Without nests, cheaters lay nothing.
    pub fn lay_cheater_eggs(&self, workers: usize) -> NestRegistry {
        let nests = self.counts.nests();
        let mut registry = NestRegistry::empty(nests);
        if nests == 0 {
            return registry;
        }
        let first_cheater = nests;
        let streams = PhaseStreams::new(self.seed, self.generation, Phase::Cheat);
        let intents = fan_out(self.counts.cheaters(), workers, |range| {
            range
                .map(|k| streams.agent(first_cheater + k).random_range(0..nests))
                .collect::<Vec<u64>>()
        });
        for target in intents.into_iter().flatten() {
            registry.record(target).expect("intent targets an existing nest");
        }
        registry
    }

    /// One generation of play: laying through utility tallies, no reproduction.
    pub fn play(&self, workers: usize) -> Outcome<T> {
        let registry = self.lay_cheater_eggs(workers);
        account(&self.counts, &self.params, &registry)
    }

    /// One full generation on a single worker.
    pub fn step(&self) -> (ModelState<T>, GenerationReport<T>) {
        self.parallel_step(1)
    }

    /// One full generation with agent actions spread over `workers` threads.
    /// The result is identical for every worker count.
    pub fn parallel_step(&self, workers: usize) -> (ModelState<T>, GenerationReport<T>) {
        let outcome = self.play(workers);
        let post = reproduce(
            &outcome.total_utility,
            &self.counts,
            self.mutation_rate,
            self.seed,
            self.generation,
            workers,
        );
        let report = GenerationReport {
            generation: self.generation,
            pre_counts: self.counts,
            post_counts: post,
            total_utility: outcome.total_utility,
            mean_utility: outcome.mean_utility,
            eggs_hatched: outcome.eggs_hatched,
            eggs_laid: outcome.eggs_laid,
            eggs_discarded: outcome.eggs_discarded,
        };
        let next = ModelState {
            counts: post,
            params: self.params,
            mutation_rate: self.mutation_rate,
            seed: self.seed,
            generation: self.generation + 1,
            nest_registry: NestRegistry::default(),
        };
        (next, report)
    }

    /// Runs `generations` steps and records the proportions after each.
    pub fn run(&self, generations: u64) -> (ModelState<T>, Vec<GenerationRecord<T>>) {
        self.run_parallel(generations, 1)
    }

    pub fn run_parallel(&self, generations: u64, workers: usize) -> (ModelState<T>, Vec<GenerationRecord<T>>) {
        let mut state = self.clone();
        let mut records = Vec::with_capacity(generations as usize);
        for _ in 0..generations {
            let (next, report) = state.parallel_step(workers);
            records.push(GenerationRecord {
                generation: next.generation,
                proportions: next.proportions(),
                report,
            });
            state = next;
        }
        (state, records)
    }
}
