//! Real-valued genetic algorithm over binary32 genes.
//!
//! One chromosome holds every synaptic weight of the network as a raw
//! [`GeneBits`] word. Crossover and mutation act per gene on the bits left
//! open by the [`ProtectionPolicy`], selection is fitness proportionate on
//! `1 / (1 + sse)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{decode_gene, encode_gene, CodecError, GeneBits, ProtectionPolicy};
use crate::error::{Error, Result};
use crate::mlp::{sse_slice, weight_count, Pattern, Topology, WeightVector};

/// The generator every run draws from. Seeded from [`GaConfig::rng_seed`].
pub type GaRng = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chromosome {
    genes: Vec<GeneBits>,
}

impl Chromosome {
    pub fn new(genes: Vec<GeneBits>) -> Self {
        Chromosome { genes }
    }

    pub fn from_weights(weights: &[f32]) -> Result<Self> {
        let genes = weights
            .iter()
            .map(|&w| encode_gene(w))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Chromosome { genes })
    }

    pub fn genes(&self) -> &[GeneBits] {
        &self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// Decodes into `buf`, reusing its allocation.
    pub fn decode_into(&self, buf: &mut Vec<f64>) -> Result<()> {
        buf.clear();
        for &g in &self.genes {
            buf.push(f64::from(decode_gene(g)?));
        }
        Ok(())
    }

    pub fn decode(&self) -> Result<Vec<f64>> {
        let mut buf = Vec::with_capacity(self.genes.len());
        self.decode_into(&mut buf)?;
        Ok(buf)
    }

    pub fn to_weight_vector(&self, topology: &Topology) -> Result<WeightVector> {
        WeightVector::new(topology, self.decode()?)
    }

    pub fn hex_genes(&self) -> Vec<String> {
        self.genes.iter().map(|g| g.to_string()).collect()
    }
}

/// Closed interval initial weights are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitRange {
    pub low: f64,
    pub high: f64,
}

impl InitRange {
    pub fn new(low: f64, high: f64) -> Self {
        InitRange { low, high }
    }

    pub fn symmetric(half_width: f64) -> Self {
        InitRange {
            low: -half_width,
            high: half_width,
        }
    }
}

impl fmt::Display for InitRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.low, self.high)
    }
}

impl FromStr for InitRange {
    type Err = Error;

    /// Parses `a:b`, or a bare `h` as the symmetric range `-h:h`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("bad range {s:?}, expected a:b"));
        match s.split_once(':') {
            Some((a, b)) => Ok(InitRange::new(
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            )),
            None => Ok(InitRange::symmetric(s.trim().parse().map_err(|_| bad())?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub init_range: InitRange,
    pub protection: ProtectionPolicy,
    pub target_sse: f64,
    pub elite_count: usize,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 100,
            max_generations: 1000,
            crossover_prob: 0.8,
            mutation_prob: 0.02,
            init_range: InitRange::symmetric(1.5),
            protection: ProtectionPolicy::THREE,
            target_sse: 0.01,
            elite_count: 1,
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.population_size < 2 {
            return fail(format!("population size {} < 2", self.population_size));
        }
        if self.max_generations == 0 {
            return fail("generation budget must be at least 1".into());
        }
        for (name, p) in [
            ("crossover", self.crossover_prob),
            ("mutation", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} probability {p} outside [0, 1]"));
            }
        }
        let InitRange { low, high } = self.init_range;
        if !(low.is_finite() && high.is_finite()) || low >= high {
            return fail(format!("init range {} must satisfy a < b", self.init_range));
        }
        // Operators can only stay NaN-free if the protected bits of every
        // initial gene already rule out an all-ones exponent.
        let limit = self.protection.max_safe_magnitude();
        if low.abs().max(high.abs()) >= limit {
            return fail(format!(
                "init range {} reaches magnitude {limit}; {} protected bits cannot keep genes finite there",
                self.init_range,
                self.protection.protected_msb_count()
            ));
        }
        if !(self.target_sse.is_finite() && self.target_sse >= 0.0) {
            return fail(format!("target sse {} must be >= 0", self.target_sse));
        }
        if self.elite_count >= self.population_size {
            return fail(format!(
                "elite count {} must be below population size {}",
                self.elite_count, self.population_size
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    TargetReached,
    GenerationBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingResult {
    pub best_chromosome: Chromosome,
    pub best_sse: f64,
    /// Best-of-generation SSE, starting with the initial population.
    pub sse_history: Vec<f64>,
    pub generations_run: usize,
    pub terminated_by: Termination,
    /// Number of chromosome fitness evaluations performed.
    pub evaluations: u64,
}

pub fn init_population(cfg: &GaConfig, n_genes: usize, rng: &mut GaRng) -> Result<Vec<Chromosome>> {
    cfg.validate()?;
    let low = cfg.init_range.low as f32;
    let high = cfg.init_range.high as f32;
    (0..cfg.population_size)
        .map(|_| {
            let genes = (0..n_genes)
                .map(|_| encode_gene(rng.gen_range(low..=high)))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(Chromosome::new(genes))
        })
        .collect()
}

/// Maps an SSE (lower is better) onto a positive score (higher is better).
pub fn selection_score(sse: f64) -> f64 {
    1.0 / (1.0 + sse)
}

/// Roulette wheel over a fixed set of scores.
///
/// Indices are sorted by descending score (ties keep original order) and
/// the accumulated normalized scores are precomputed, so each draw is a
/// binary search.
#[derive(Debug, Clone)]
pub struct FpsWheel {
    order: Vec<usize>,
    cumulative: Vec<f64>,
}

impl FpsWheel {
    pub fn new(scores: &[f64]) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::Contract("selection needs at least one score".into()));
        }
        if let Some(i) = scores.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Contract(format!(
                "score {i} = {} is not positive",
                scores[i]
            )));
        }
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let total: f64 = scores.iter().sum();
        let mut acc = 0.0;
        let cumulative = order
            .iter()
            .map(|&i| {
                acc += scores[i] / total;
                acc
            })
            .collect();
        Ok(FpsWheel { order, cumulative })
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let r: f64 = rng.gen();
        let slot = self.cumulative.partition_point(|&c| c <= r);
        // rounding can leave the last accumulated value a hair under 1
        self.order[slot.min(self.order.len() - 1)]
    }
}

pub fn fps_select<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> Result<usize> {
    Ok(FpsWheel::new(scores)?.select(rng))
}

fn ensure_finite(g: GeneBits) -> Result<GeneBits> {
    if g.is_finite() {
        Ok(g)
    } else {
        Err(Error::Codec(CodecError::NonFiniteGene(g)))
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "{name} probability {p} outside [0, 1]"
        )))
    }
}

/// Composite single-point crossover.
///
/// Each gene position independently crosses with probability `p_c`: a cut
/// index `j` is drawn from the mutable bits and bits `0..=j` are exchanged
/// between the two children.
pub fn crossover<R: Rng + ?Sized>(
    pa: &Chromosome,
    pb: &Chromosome,
    p_c: f64,
    policy: ProtectionPolicy,
    rng: &mut R,
) -> Result<(Chromosome, Chromosome)> {
    if pa.len() != pb.len() {
        return Err(Error::Contract(format!(
            "parents differ in length ({} vs {})",
            pa.len(),
            pb.len()
        )));
    }
    check_probability("crossover", p_c)?;
    let width = policy.mutable_bit_count();
    let mut ca = Vec::with_capacity(pa.len());
    let mut cb = Vec::with_capacity(pb.len());
    for (&ga, &gb) in pa.genes.iter().zip(&pb.genes) {
        if rng.gen::<f64>() < p_c {
            let cut = rng.gen_range(0..width);
            let low_mask = (1u32 << (cut + 1)) - 1;
            let (a, b) = (ga.bits(), gb.bits());
            ca.push(ensure_finite(GeneBits::from_bits(
                (a & !low_mask) | (b & low_mask),
            ))?);
            cb.push(ensure_finite(GeneBits::from_bits(
                (b & !low_mask) | (a & low_mask),
            ))?);
        } else {
            ca.push(ga);
            cb.push(gb);
        }
    }
    Ok((Chromosome::new(ca), Chromosome::new(cb)))
}

/// Composite single-point mutation: each gene flips one uniformly chosen
/// mutable bit with probability `p_m`.
pub fn mutate<R: Rng + ?Sized>(
    c: &Chromosome,
    p_m: f64,
    policy: ProtectionPolicy,
    rng: &mut R,
) -> Result<Chromosome> {
    check_probability("mutation", p_m)?;
    let width = policy.mutable_bit_count();
    let genes = c
        .genes
        .iter()
        .map(|&g| {
            if rng.gen::<f64>() < p_m {
                ensure_finite(g.with_bit_flipped(rng.gen_range(0..width)))
            } else {
                Ok(g)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Chromosome::new(genes))
}

/// Fitness of every chromosome, in population order.
fn evaluate(
    topology: &Topology,
    population: &[Chromosome],
    patterns: &[Pattern],
    buf: &mut Vec<f64>,
) -> Result<Vec<f64>> {
    population
        .iter()
        .map(|c| {
            c.decode_into(buf)?;
            sse_slice(topology, buf, patterns)
        })
        .collect()
}

/// Runs the generational loop until the target SSE is met or the
/// generation budget is spent.
pub fn evolve(cfg: &GaConfig, topology: &Topology, patterns: &[Pattern]) -> Result<TrainingResult> {
    cfg.validate()?;
    if patterns.is_empty() {
        return Err(Error::Contract(
            "training needs at least one pattern".into(),
        ));
    }
    let n_genes = weight_count(topology);
    let m = cfg.population_size;
    let mut rng = GaRng::seed_from_u64(cfg.rng_seed);
    let mut population = init_population(cfg, n_genes, &mut rng)?;
    let mut buf = Vec::with_capacity(n_genes);

    let mut history = Vec::with_capacity(cfg.max_generations + 1);
    let mut best: Option<(f64, Chromosome)> = None;
    let mut evaluations = 0u64;
    let mut generation = 0usize;

    let terminated_by = loop {
        debug_assert_eq!(population.len(), m);
        debug_assert!(population
            .iter()
            .all(|c| c.genes.iter().all(|g| g.is_finite())));

        let fitness = evaluate(topology, &population, patterns, &mut buf)?;
        evaluations += m as u64;

        // lowest sse first, ties by population index
        let mut ranked: Vec<usize> = (0..m).collect();
        ranked.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
        let gen_best = fitness[ranked[0]];
        history.push(gen_best);
        if best.as_ref().is_none_or(|(s, _)| gen_best < *s) {
            best = Some((gen_best, population[ranked[0]].clone()));
        }
        if generation.is_multiple_of(100) {
            log::debug!("generation {generation}: best sse {gen_best:.6}");
        }

        if gen_best <= cfg.target_sse {
            break Termination::TargetReached;
        }
        if generation == cfg.max_generations {
            break Termination::GenerationBudget;
        }

        let scores: Vec<f64> = fitness.iter().map(|&s| selection_score(s)).collect();
        let wheel = FpsWheel::new(&scores)?;
        let mut next: Vec<Chromosome> = ranked[..cfg.elite_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        while next.len() < m {
            let pa = &population[wheel.select(&mut rng)];
            let pb = &population[wheel.select(&mut rng)];
            let (ca, cb) = crossover(pa, pb, cfg.crossover_prob, cfg.protection, &mut rng)?;
            let ca = mutate(&ca, cfg.mutation_prob, cfg.protection, &mut rng)?;
            let cb = mutate(&cb, cfg.mutation_prob, cfg.protection, &mut rng)?;
            next.push(ca);
            if next.len() < m {
                next.push(cb);
            }
        }
        population = next;
        generation += 1;
    };

    let (best_sse, best_chromosome) =
        best.ok_or_else(|| Error::Internal("no generation was evaluated".into()))?;
    Ok(TrainingResult {
        best_chromosome,
        best_sse,
        sse_history: history,
        generations_run: generation,
        terminated_by,
        evaluations,
    })
}
