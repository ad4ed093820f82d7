//! Wall-time scaling of full training runs over a grid of generation
//! budgets and population sizes.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{evolve, GaConfig};
use crate::mlp::{weight_count, Pattern, Topology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub generations: usize,
    pub population: usize,
    pub genes: usize,
    /// Fastest of the timed repeats, in seconds.
    pub wall_time_s: f64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchGrid {
    pub generations: Vec<usize>,
    pub populations: Vec<usize>,
    /// Timed runs per cell; the minimum is kept.
    pub repeats: usize,
}

impl Default for BenchGrid {
    fn default() -> Self {
        BenchGrid {
            generations: vec![250, 500, 1000],
            populations: vec![25, 50, 100],
            repeats: 3,
        }
    }
}

/// Times every (t, m) cell serially. The target SSE is forced to 0 so each
/// run spends its whole budget.
pub fn run_bench(
    grid: &BenchGrid,
    base: &GaConfig,
    topology: &Topology,
    patterns: &[Pattern],
) -> Result<Vec<BenchRecord>> {
    if grid.generations.is_empty() || grid.populations.is_empty() || grid.repeats == 0 {
        return Err(Error::InvalidConfig(
            "bench grid needs generations, populations and at least one repeat".into(),
        ));
    }
    let mut records = Vec::new();
    for &t in &grid.generations {
        for &m in &grid.populations {
            let cfg = GaConfig {
                max_generations: t,
                population_size: m,
                elite_count: base.elite_count.min(m - 1),
                target_sse: 0.0,
                ..base.clone()
            };
            let mut best = f64::INFINITY;
            let mut evaluations = 0;
            for _ in 0..grid.repeats {
                let start = Instant::now();
                let res = evolve(&cfg, topology, patterns).map_err(|e| Error::Run {
                    value: (t * m) as f64,
                    seed: cfg.rng_seed,
                    source: Box::new(e),
                })?;
                best = best.min(start.elapsed().as_secs_f64());
                evaluations = res.evaluations;
            }
            log::info!("bench t={t} m={m}: {best:.4}s, {evaluations} evaluations");
            records.push(BenchRecord {
                generations: t,
                population: m,
                genes: weight_count(topology),
                wall_time_s: best,
                evaluations,
            });
        }
    }
    Ok(records)
}

/// Least-squares slope of ln(wall time) against ln(t * m).
pub fn loglog_slope(records: &[BenchRecord]) -> Result<f64> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.wall_time_s > 0.0)
        .map(|r| {
            (
                ((r.generations * r.population) as f64).ln(),
                r.wall_time_s.ln(),
            )
        })
        .collect();
    if points.len() < 2 {
        return Err(Error::Data(
            "need at least two timed cells to fit a slope".into(),
        ));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Data("all cells share the same t * m".into()));
    }
    Ok(sxy / sxx)
}

pub const BENCH_HEADER: [&str; 5] = ["t", "m", "n", "wall_time_s", "evaluations"];

pub fn write_bench_csv<W: Write>(writer: W, records: &[BenchRecord]) -> Result<()> {
    let err = |e: csv::Error| Error::Data(format!("csv write failed: {e}"));
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(BENCH_HEADER).map_err(err)?;
    for r in records {
        wtr.write_record([
            r.generations.to_string(),
            r.population.to_string(),
            r.genes.to_string(),
            r.wall_time_s.to_string(),
            r.evaluations.to_string(),
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

    #[test]
    fn evaluation_counts_double() {
        let patterns = build_patterns(&Dataset::bundled()).unwrap();
        let grid = BenchGrid {
            generations: vec![10, 20],
            populations: vec![6, 12],
            repeats: 1,
        };
        let recs = run_bench(
            &grid,
            &GaConfig::default(),
            &Topology::gas(3).unwrap(),
            &patterns,
        )
        .unwrap();
        assert_eq!(recs.len(), 4);
        for r in &recs {
            assert_eq!(r.evaluations, ((r.generations + 1) * r.population) as u64);
            assert_eq!(r.genes, 38);
        }
        // t doubled at fixed m, then m doubled at fixed t (initial evaluation aside)
        let work = |r: &BenchRecord| r.evaluations - r.population as u64;
        assert_eq!(work(&recs[2]), 2 * work(&recs[0]));
        assert_eq!(work(&recs[1]), 2 * work(&recs[0]));
    }

    #[test]
    fn slope_of_exact_power_law() {
        let recs: Vec<BenchRecord> = [(100, 10), (200, 10), (100, 40), (400, 40)]
            .iter()
            .map(|&(t, m)| BenchRecord {
                generations: t,
                population: m,
                genes: 38,
                wall_time_s: 1e-6 * ((t * m) as f64).powf(1.3),
                evaluations: 0,
            })
            .collect();
        assert!((loglog_slope(&recs).unwrap() - 1.3).abs() < 1e-9);
        assert!(loglog_slope(&recs[..1]).is_err());
    }

    #[test]
    fn empty_grid_rejected() {
        let grid = BenchGrid {
            generations: vec![],
            ..Default::default()
        };
        assert!(run_bench(&grid, &GaConfig::default(), &Topology::gas(3).unwrap(), &[]).is_err());
    }
}
