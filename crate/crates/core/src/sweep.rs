//! One-parameter sweeps: every value is trained `repetitions` times with
//! consecutive seeds and the final SSEs are summarized per value.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{evolve, GaConfig, InitRange};
use crate::mlp::{Pattern, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweptParameter {
    HiddenNodes,
    PopulationSize,
    Generations,
    CrossoverProb,
    MutationProb,
    /// Half-width `h` of the symmetric initial range `[-h, h]`.
    InitRange,
}

impl SweptParameter {
    pub const ALL: [SweptParameter; 6] = [
        SweptParameter::HiddenNodes,
        SweptParameter::PopulationSize,
        SweptParameter::Generations,
        SweptParameter::CrossoverProb,
        SweptParameter::MutationProb,
        SweptParameter::InitRange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweptParameter::HiddenNodes => "hidden",
            SweptParameter::PopulationSize => "pop",
            SweptParameter::Generations => "gens",
            SweptParameter::CrossoverProb => "pc",
            SweptParameter::MutationProb => "pm",
            SweptParameter::InitRange => "range",
        }
    }

    /// Value grid of the reference experiment for this parameter.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweptParameter::HiddenNodes => (2..=10).map(f64::from).collect(),
            SweptParameter::PopulationSize => (1..=10).map(|k| f64::from(k * 10)).collect(),
            SweptParameter::Generations => (1..=10).map(|k| f64::from(k * 100)).collect(),
            SweptParameter::CrossoverProb => vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            SweptParameter::MutationProb => vec![0.01, 0.02, 0.03, 0.04, 0.05],
            SweptParameter::InitRange => vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
        }
    }

    /// Fixed settings used while this parameter was varied.
    ///
    /// Population 100, 1000 generations, 5-3-5 and [-1.5, 1.5] throughout;
    /// crossover 0.7 and mutation 0.05 for the structure, population and
    /// generation experiments, crossover 0.8 afterwards. Runs spend their
    /// whole budget (target SSE 0) so the final SSE is measured at `t`.
    pub fn baseline(self) -> (GaConfig, Topology) {
        let (crossover_prob, mutation_prob) = match self {
            SweptParameter::HiddenNodes
            | SweptParameter::PopulationSize
            | SweptParameter::Generations => (0.7, 0.05),
            SweptParameter::CrossoverProb => (0.8, 0.05),
            SweptParameter::MutationProb => (0.8, 0.02),
            SweptParameter::InitRange => (0.8, 0.02),
        };
        let cfg = GaConfig {
            crossover_prob,
            mutation_prob,
            target_sse: 0.0,
            ..GaConfig::default()
        };
        (cfg, Topology::gas(3).expect("5-3-5 is valid"))
    }

    /// Writes `value` into the config or topology. Both are left untouched
    /// when the resulting setup is invalid.
    pub fn apply(
        self,
        value: f64,
        cfg_out: &mut GaConfig,
        topology_out: &mut Topology,
    ) -> Result<()> {
        let mut cfg = cfg_out.clone();
        let mut topology = topology_out.clone();
        let as_count = |v: f64| -> Result<usize> {
            if v.fract() == 0.0 && v >= 1.0 && v <= usize::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidConfig(format!(
                    "{} needs a positive integer, got {v}",
                    self.name()
                )))
            }
        };
        match self {
            SweptParameter::HiddenNodes => {
                let mut sizes = topology.layer_sizes().to_vec();
                if sizes.len() != 3 {
                    return Err(Error::InvalidConfig(format!(
                        "hidden-node sweep needs a 3-layer topology, got {topology}"
                    )));
                }
                sizes[1] = as_count(value)?;
                topology = Topology::new(sizes)?;
            }
            SweptParameter::PopulationSize => cfg.population_size = as_count(value)?,
            SweptParameter::Generations => cfg.max_generations = as_count(value)?,
            SweptParameter::CrossoverProb => cfg.crossover_prob = value,
            SweptParameter::MutationProb => cfg.mutation_prob = value,
            SweptParameter::InitRange => {
                if value.is_nan() || value <= 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "range half-width must be positive, got {value}"
                    )));
                }
                cfg.init_range = InitRange::symmetric(value);
            }
        }
        cfg.validate()?;
        *cfg_out = cfg;
        *topology_out = topology;
        Ok(())
    }
}

impl fmt::Display for SweptParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweptParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown sweep parameter {s:?} (expected one of hidden, pop, gens, pc, pm, range)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweptParameter,
    pub values: Vec<f64>,
    pub baseline: GaConfig,
    pub topology: Topology,
    pub repetitions: usize,
    pub seed_base: u64,
}

impl SweepSpec {
    /// The reference setup for `parameter`: its value grid, its baseline,
    /// ten repetitions.
    pub fn reference(parameter: SweptParameter, seed_base: u64) -> Self {
        let (baseline, topology) = parameter.baseline();
        SweepSpec {
            parameter,
            values: parameter.default_values(),
            baseline,
            topology,
            repetitions: 10,
            seed_base,
        }
    }

    /// Config and topology for one swept value, seed not yet applied.
    pub fn configure(&self, value: f64) -> Result<(GaConfig, Topology)> {
        let mut cfg = self.baseline.clone();
        let mut topology = self.topology.clone();
        self.parameter.apply(value, &mut cfg, &mut topology)?;
        Ok((cfg, topology))
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidConfig(
                "sweep needs at least one value".into(),
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig(
                "sweep needs at least one repetition".into(),
            ));
        }
        for &v in &self.values {
            self.configure(v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub mean_sse: f64,
    /// Population standard deviation over the repetitions.
    pub std_sse: f64,
    pub min_sse: f64,
    pub max_sse: f64,
    pub repetitions: usize,
}

impl SweepRow {
    pub fn from_runs(value: f64, sses: &[f64]) -> Self {
        let n = sses.len() as f64;
        let mean = sses.iter().sum::<f64>() / n;
        let var = sses.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        SweepRow {
            value,
            mean_sse: mean,
            std_sse: var.sqrt(),
            min_sse: sses.iter().copied().fold(f64::INFINITY, f64::min),
            max_sse: sses.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            repetitions: sses.len(),
        }
    }
}

/// Runs every (value, seed) pair, repetitions in parallel. Rows come back in
/// value order; the first failing run in (value, seed) order aborts.
pub fn run_sweep(spec: &SweepSpec, patterns: &[Pattern]) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let jobs: Vec<(usize, u64)> = (0..spec.values.len())
        .flat_map(|v| (0..spec.repetitions as u64).map(move |r| (v, spec.seed_base + r)))
        .collect();
    let outcomes: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(v, seed)| {
            let value = spec.values[v];
            let (mut cfg, topology) = spec.configure(value)?;
            cfg.rng_seed = seed;
            evolve(&cfg, &topology, patterns)
                .map(|res| res.best_sse)
                .map_err(|e| Error::Run {
                    value,
                    seed,
                    source: Box::new(e),
                })
        })
        .collect();
    let finals = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(spec
        .values
        .iter()
        .zip(finals.chunks(spec.repetitions))
        .map(|(&value, sses)| SweepRow::from_runs(value, sses))
        .collect())
}

pub const SWEEP_HEADER: [&str; 7] = [
    "parameter",
    "value",
    "mean_sse",
    "std_sse",
    "min_sse",
    "max_sse",
    "repetitions",
];

pub fn write_sweep_csv<W: Write>(
    writer: W,
    parameter: SweptParameter,
    rows: &[SweepRow],
) -> Result<()> {
    let err = |e: csv::Error| Error::Data(format!("csv write failed: {e}"));
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(SWEEP_HEADER).map_err(err)?;
    for r in rows {
        wtr.write_record([
            parameter.name().to_string(),
            r.value.to_string(),
            r.mean_sse.to_string(),
            r.std_sse.to_string(),
            r.min_sse.to_string(),
            r.max_sse.to_string(),
            r.repetitions.to_string(),
        ])
        .map_err(err)?;
    }
    wtr.flush()
        .map_err(|e| Error::Data(format!("csv write failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_patterns, Dataset};

    fn small(parameter: SweptParameter, values: Vec<f64>, reps: usize) -> SweepSpec {
        let mut spec = SweepSpec::reference(parameter, 100);
        spec.values = values;
        spec.repetitions = reps;
        spec.baseline.population_size = 12;
        spec.baseline.max_generations = 15;
        spec
    }

    #[test]
    fn parameter_names_round_trip() {
        for p in SweptParameter::ALL {
            assert_eq!(p.name().parse::<SweptParameter>().unwrap(), p);
        }
        assert!("nope".parse::<SweptParameter>().is_err());
    }

    #[test]
    fn baselines_follow_published_settings() {
        let (cfg, t) = SweptParameter::HiddenNodes.baseline();
        assert_eq!((cfg.crossover_prob, cfg.mutation_prob), (0.7, 0.05));
        assert_eq!((cfg.population_size, cfg.max_generations), (100, 1000));
        assert_eq!(t.to_string(), "5-3-5");
        let (cfg, _) = SweptParameter::MutationProb.baseline();
        assert_eq!(cfg.crossover_prob, 0.8);
    }

    #[test]
    fn apply_rejects_illegal_values() {
        let (mut cfg, mut t) = SweptParameter::PopulationSize.baseline();
        assert!(SweptParameter::PopulationSize
            .apply(10.5, &mut cfg, &mut t)
            .is_err());
        assert!(SweptParameter::CrossoverProb
            .apply(1.5, &mut cfg, &mut t)
            .is_err());
        assert!(SweptParameter::HiddenNodes
            .apply(0.0, &mut cfg, &mut t)
            .is_err());
        assert!(SweptParameter::InitRange
            .apply(-1.0, &mut cfg, &mut t)
            .is_err());
        SweptParameter::HiddenNodes
            .apply(4.0, &mut cfg, &mut t)
            .unwrap();
        assert_eq!(t.to_string(), "5-4-5");
    }

    #[test]
    fn degenerate_sweep_has_zero_spread() {
        let patterns = build_patterns(&Dataset::bundled()).unwrap();
        let rows = run_sweep(
            &small(SweptParameter::PopulationSize, vec![12.0], 1),
            &patterns,
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].std_sse, 0.0);
        assert_eq!(rows[0].min_sse, rows[0].max_sse);
        assert_eq!(rows[0].repetitions, 1);
    }

    #[test]
    fn rows_match_individual_runs() {
        let patterns = build_patterns(&Dataset::bundled()).unwrap();
        let spec = small(SweptParameter::HiddenNodes, vec![2.0, 3.0], 3);
        let rows = run_sweep(&spec, &patterns).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            let (cfg, t) = spec.configure(row.value).unwrap();
            let finals: Vec<f64> = (0..3)
                .map(|r| {
                    let cfg = GaConfig {
                        rng_seed: 100 + r,
                        ..cfg.clone()
                    };
                    evolve(&cfg, &t, &patterns).unwrap().best_sse
                })
                .collect();
            assert_eq!(*row, SweepRow::from_runs(row.value, &finals));
        }
        assert_eq!(rows, run_sweep(&spec, &patterns).unwrap());
    }

    #[test]
    fn empty_or_invalid_spec_rejected() {
        let patterns = build_patterns(&Dataset::bundled()).unwrap();
        assert!(run_sweep(&small(SweptParameter::MutationProb, vec![], 1), &patterns).is_err());
        assert!(run_sweep(
            &small(SweptParameter::MutationProb, vec![0.02], 0),
            &patterns
        )
        .is_err());
        assert!(run_sweep(
            &small(SweptParameter::MutationProb, vec![2.0], 1),
            &patterns
        )
        .is_err());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        let rows = [SweepRow::from_runs(3.0, &[0.1, 0.3])];
        write_sweep_csv(&mut buf, SweptParameter::HiddenNodes, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("hidden,3,0.2,"));
    }
}
