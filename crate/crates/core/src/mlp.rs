//! Fixed-topology feedforward network with logistic activations.
//!
//! Weights are stored flat, layer by layer. Inside a layer each destination
//! neuron owns a contiguous group of `fan_in + 1` entries: one per source
//! neuron in order, then its bias (weight on a constant 1 input).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Topology {
    layer_sizes: Vec<usize>,
}

impl Topology {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "topology needs at least 2 layers, got {}",
                layer_sizes.len()
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidConfig(
                "every layer needs at least one neuron".into(),
            ));
        }
        Ok(Topology { layer_sizes })
    }

    /// The 5-H-5 shape used for the five-gas sensor array.
    pub fn gas(hidden: usize) -> Result<Self> {
        Self::new(vec![5, hidden, 5])
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn outputs(&self) -> usize {
        *self.layer_sizes.last().expect("at least two layers")
    }

    pub fn weight_count(&self) -> usize {
        weight_count(self)
    }
}

impl TryFrom<Vec<usize>> for Topology {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Topology::new(v)
    }
}

impl From<Topology> for Vec<usize> {
    fn from(t: Topology) -> Self {
        t.layer_sizes
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.layer_sizes.iter().map(|n| n.to_string()).collect();
        f.write_str(&parts.join("-"))
    }
}

impl FromStr for Topology {
    type Err = Error;

    /// Parses `5-3-5`.
    fn from_str(s: &str) -> Result<Self> {
        let sizes = s
            .split('-')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidConfig(format!("bad topology {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Topology::new(sizes)
    }
}

/// Total synaptic weights including one bias per non-input neuron.
pub fn weight_count(t: &Topology) -> usize {
    t.layer_sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(topology: &Topology, weights: Vec<f64>) -> Result<Self> {
        let expected = weight_count(topology);
        if weights.len() != expected {
            return Err(Error::Contract(format!(
                "topology {topology} needs {expected} weights, got {}",
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::Contract(format!("weight {i} is not finite")));
        }
        Ok(WeightVector(weights))
    }

    pub fn zeros(topology: &Topology) -> Self {
        WeightVector(vec![0.0; weight_count(topology)])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// One CSV line, shortest decimal that round-trips each value.
    pub fn to_csv_line(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|w| w.to_string()).collect();
        parts.join(",")
    }

    pub fn from_csv_line(topology: &Topology, line: &str) -> Result<Self> {
        let weights = line
            .trim()
            .split(',')
            .enumerate()
            .map(|(i, field)| {
                field.trim().parse::<f64>().map_err(|e| Error::Parse {
                    row: 1,
                    message: format!("weight {i}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        WeightVector::new(topology, weights)
    }
}

/// One supervised training pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

impl Pattern {
    pub fn new(input: Vec<f64>, target: Vec<f64>) -> Self {
        Pattern { input, target }
    }
}

#[inline]
pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn check_weights(t: &Topology, w: &[f64]) -> Result<()> {
    let n = weight_count(t);
    if w.len() != n {
        return Err(Error::Contract(format!(
            "topology {t} needs {n} weights, got {}",
            w.len()
        )));
    }
    Ok(())
}

/// Forward pass on a raw weight slice. Used by the GA hot loop, which keeps
/// decoded weights in a reusable buffer instead of building a [`WeightVector`].
pub fn forward_slice(t: &Topology, w: &[f64], input: &[f64]) -> Result<Vec<f64>> {
    check_weights(t, w)?;
    if input.len() != t.inputs() {
        return Err(Error::Contract(format!(
            "expected {} inputs, got {}",
            t.inputs(),
            input.len()
        )));
    }
    Ok(forward_unchecked(t, w, input))
}

fn forward_unchecked(t: &Topology, w: &[f64], input: &[f64]) -> Vec<f64> {
    let mut current = input.to_vec();
    let mut offset = 0;
    for pair in t.layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let next: Vec<f64> = (0..fan_out)
            .map(|_| {
                let group = &w[offset..offset + fan_in + 1];
                offset += fan_in + 1;
                let net = group[..fan_in]
                    .iter()
                    .zip(&current)
                    .map(|(wi, xi)| wi * xi)
                    .sum::<f64>()
                    + group[fan_in];
                logistic(net)
            })
            .collect();
        current = next;
    }
    current
}

pub fn forward(t: &Topology, w: &WeightVector, input: &[f64]) -> Result<Vec<f64>> {
    forward_slice(t, w.as_slice(), input)
}

/// Half the summed squared residual over every pattern and output node.
pub fn sse_slice(t: &Topology, w: &[f64], patterns: &[Pattern]) -> Result<f64> {
    if patterns.is_empty() {
        return Err(Error::Contract("sse needs at least one pattern".into()));
    }
    check_weights(t, w)?;
    let mut total = 0.0;
    for (p, pattern) in patterns.iter().enumerate() {
        if pattern.input.len() != t.inputs() || pattern.target.len() != t.outputs() {
            return Err(Error::Contract(format!(
                "pattern {p} has shape {}->{}, topology is {t}",
                pattern.input.len(),
                pattern.target.len()
            )));
        }
        let out = forward_unchecked(t, w, &pattern.input);
        total += out
            .iter()
            .zip(&pattern.target)
            .map(|(o, target)| (o - target) * (o - target))
            .sum::<f64>();
    }
    Ok(0.5 * total)
}

pub fn sse(t: &Topology, w: &WeightVector, patterns: &[Pattern]) -> Result<f64> {
    sse_slice(t, w.as_slice(), patterns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent per-neuron loop with explicit index arithmetic.
    fn oracle_forward(sizes: &[usize], w: &[f64], input: &[f64]) -> Vec<f64> {
        let mut act = input.to_vec();
        let mut base = 0usize;
        for l in 1..sizes.len() {
            let fan_in = sizes[l - 1];
            let mut out = vec![0.0; sizes[l]];
            for (j, o) in out.iter_mut().enumerate() {
                let start = base + j * (fan_in + 1);
                let mut net = w[start + fan_in];
                for i in 0..fan_in {
                    net += w[start + i] * act[i];
                }
                *o = 1.0 / (1.0 + f64::exp(-net));
            }
            base += (fan_in + 1) * sizes[l];
            act = out;
        }
        act
    }

    #[test]
    fn weight_counts() {
        assert_eq!(weight_count(&Topology::new(vec![5, 3, 5]).unwrap()), 38);
        assert_eq!(weight_count(&Topology::new(vec![5, 4, 5]).unwrap()), 49);
        assert_eq!(weight_count(&Topology::new(vec![2, 2]).unwrap()), 6);
    }

    #[test]
    fn topology_validation_and_parsing() {
        assert!(Topology::new(vec![5]).is_err());
        assert!(Topology::new(vec![5, 0, 5]).is_err());
        let t: Topology = "5-3-5".parse().unwrap();
        assert_eq!(t.layer_sizes(), &[5, 3, 5]);
        assert_eq!(t.to_string(), "5-3-5");
        assert!("5-x-5".parse::<Topology>().is_err());
    }

    #[test]
    fn zero_weights_give_half() {
        let t = Topology::gas(3).unwrap();
        let out = forward(&t, &WeightVector::zeros(&t), &[0.3, 0.1, 0.9, 0.0, 1.0]).unwrap();
        assert_eq!(out, vec![0.5; 5]);

        let single = Topology::new(vec![1, 1]).unwrap();
        let w = WeightVector::new(&single, vec![0.0, 0.0]).unwrap();
        assert_eq!(forward(&single, &w, &[1.0]).unwrap(), vec![0.5]);
    }

    #[test]
    fn forward_matches_oracle_on_table2_sample1() {
        let t = Topology::gas(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w: Vec<f64> = (0..38).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let input = [0.1699, 0.2762, 0.2346, 0.0854, 0.3524];
        let lib = forward_slice(&t, &w, &input).unwrap();
        let oracle = oracle_forward(&[5, 3, 5], &w, &input);
        for (a, b) in lib.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-12);
            assert!(*a > 0.0 && *a < 1.0);
        }
    }

    #[test]
    fn forward_matches_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let sizes = vec![
                rng.gen_range(1..=5),
                rng.gen_range(1..=4),
                rng.gen_range(1..=5),
            ];
            let t = Topology::new(sizes.clone()).unwrap();
            let w: Vec<f64> = (0..t.weight_count())
                .map(|_| rng.gen_range(-3.0..3.0))
                .collect();
            let x: Vec<f64> = (0..sizes[0]).map(|_| rng.gen()).collect();
            let lib = forward_slice(&t, &w, &x).unwrap();
            let oracle = oracle_forward(&sizes, &w, &x);
            for (a, b) in lib.iter().zip(&oracle) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_contract_error() {
        let t = Topology::gas(3).unwrap();
        assert!(matches!(
            forward(&t, &WeightVector::zeros(&t), &[0.0; 4]),
            Err(Error::Contract(_))
        ));
        assert!(WeightVector::new(&t, vec![0.0; 37]).is_err());
        assert!(WeightVector::new(&t, vec![f64::NAN; 38]).is_err());
    }

    #[test]
    fn sse_basic_values() {
        let t = Topology::new(vec![1, 1]).unwrap();
        // large bias drives the output to 1.0 in f64
        let w = WeightVector::new(&t, vec![0.0, 800.0]).unwrap();
        let p = [Pattern::new(vec![0.0], vec![0.0])];
        assert_eq!(sse(&t, &w, &p).unwrap(), 0.5);

        let zero = WeightVector::zeros(&t);
        let exact = [Pattern::new(vec![0.7], vec![0.5])];
        assert_eq!(sse(&t, &zero, &exact).unwrap(), 0.0);

        assert!(matches!(sse(&t, &zero, &[]), Err(Error::Contract(_))));
    }

    #[test]
    fn sse_is_smooth_in_each_weight() {
        let t = Topology::gas(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w: Vec<f64> = (0..38).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let patterns: Vec<Pattern> = (0..10)
            .map(|_| {
                Pattern::new(
                    (0..5).map(|_| rng.gen()).collect(),
                    (0..5).map(|_| rng.gen()).collect(),
                )
            })
            .collect();
        let base = sse_slice(&t, &w, &patterns).unwrap();
        for k in 0..w.len() {
            let slope = |eps: f64| {
                let mut moved = w.clone();
                moved[k] += eps;
                (sse_slice(&t, &moved, &patterns).unwrap() - base) / eps
            };
            let (a, b) = (slope(1e-3), slope(1e-4));
            assert!(
                (a - b).abs() <= 1e-2 * (1.0 + a.abs()),
                "weight {k}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn csv_line_round_trip() {
        let t = Topology::gas(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w: Vec<f64> = (0..38)
            .map(|_| f64::from(rng.gen_range(-1.5f32..1.5f32)))
            .collect();
        let wv = WeightVector::new(&t, w).unwrap();
        let back = WeightVector::from_csv_line(&t, &wv.to_csv_line()).unwrap();
        assert_eq!(back, wv);
        assert!(WeightVector::from_csv_line(&t, "1,2,3").is_err());
    }
}
