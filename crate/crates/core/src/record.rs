//! JSON document written by `train` and read back by `predict`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codec::GeneBits;
use crate::data::NormalizationContext;
use crate::error::{Error, Result};
use crate::ga::{Chromosome, GaConfig, Termination, TrainingResult};
use crate::mlp::{Topology, WeightVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub topology: Topology,
    pub config: GaConfig,
    pub normalization: Option<NormalizationContext>,
    pub terminated_by: Termination,
    pub generations_run: usize,
    pub evaluations: u64,
    pub best_sse: f64,
    /// SSE of the best chromosome on held-out patterns, when a split was used.
    pub test_sse: Option<f64>,
    pub sse_history: Vec<f64>,
    pub best_weights: Vec<f64>,
    /// The same weights as 8-digit uppercase hex binary32 words.
    pub best_genes_hex: Vec<String>,
}

impl TrainingRecord {
    pub fn new(
        topology: Topology,
        config: GaConfig,
        normalization: Option<NormalizationContext>,
        result: &TrainingResult,
    ) -> Result<Self> {
        Ok(TrainingRecord {
            best_weights: result.best_chromosome.decode()?,
            best_genes_hex: result.best_chromosome.hex_genes(),
            topology,
            config,
            normalization,
            terminated_by: result.terminated_by,
            generations_run: result.generations_run,
            evaluations: result.evaluations,
            best_sse: result.best_sse,
            test_sse: None,
            sse_history: result.sse_history.clone(),
        })
    }

    /// Weights rebuilt from the hex genes, cross-checked against the decimal list.
    pub fn weight_vector(&self) -> Result<WeightVector> {
        let genes = self
            .best_genes_hex
            .iter()
            .enumerate()
            .map(|(i, h)| {
                h.parse::<GeneBits>().map_err(|e| Error::Parse {
                    row: i + 1,
                    message: format!("gene {h:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let weights = Chromosome::new(genes).decode()?;
        if weights != self.best_weights {
            return Err(Error::Data(
                "best_weights disagree with best_genes_hex".into(),
            ));
        }
        WeightVector::new(&self.topology, weights)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| Error::Internal(format!("serializing training record: {e}")))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse {
            row: e.line(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ga::evolve;
    use crate::mlp::Pattern;

    #[test]
    fn json_round_trip() {
        let t = Topology::new(vec![2, 2, 1]).unwrap();
        let cfg = GaConfig {
            population_size: 8,
            max_generations: 5,
            rng_seed: 3,
            ..Default::default()
        };
        let patterns = [Pattern::new(vec![0.2, 0.4], vec![0.3])];
        let res = evolve(&cfg, &t, &patterns).unwrap();
        let rec = TrainingRecord::new(t.clone(), cfg, None, &res).unwrap();
        let back = TrainingRecord::from_json(&rec.to_json().unwrap()).unwrap();
        assert_eq!(back, rec);
        assert_eq!(
            back.weight_vector().unwrap().as_slice(),
            rec.best_weights.as_slice()
        );
        assert_eq!(rec.best_genes_hex[0].len(), 8);

        let mut tampered = rec.clone();
        tampered.best_weights[0] += 1.0;
        assert!(tampered.weight_vector().is_err());
    }
}
