//! Sensor-array samples, global max normalization and pattern building.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::GaRng;
use crate::mlp::Pattern;

pub const GAS_COUNT: usize = 5;
pub const GAS_NAMES: [&str; GAS_COUNT] = ["NH3", "CO", "H2S", "NO2", "CH4"];

pub const RAW_HEADER: [&str; 2 * GAS_COUNT] = [
    "nh3_ppm", "co_ppm", "h2s_ppm", "no2_ppm", "ch4_ppm", "nh3_r", "co_r", "h2s_r", "no2_r",
    "ch4_r",
];
pub const NORMALIZED_HEADER: [&str; 2 * GAS_COUNT] = [
    "nh3_nc", "co_nc", "h2s_nc", "no2_nc", "ch4_nc", "nh3_nr", "co_nr", "h2s_nr", "no2_nr",
    "ch4_nr",
];

/// Bundled copies of the reference tables.
pub mod fixtures {
    pub const TABLE1_CSV: &str = include_str!("../fixtures/table1.csv");
    pub const TABLE2_EXPECTED_CSV: &str = include_str!("../fixtures/table2_expected.csv");
    pub const DETECTION_TEST_VECTOR_CSV: &str =
        include_str!("../fixtures/detection_test_vector.csv");
    pub const SAMPLE_LIMITS_CSV: &str = include_str!("../fixtures/limits.sample.csv");
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawSample {
    pub concentrations_ppm: [f64; GAS_COUNT],
    /// Sensor change ratios R_s / R_0.
    pub responses: [f64; GAS_COUNT],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationContext {
    pub c_max: f64,
    pub r_max: f64,
}

impl NormalizationContext {
    pub fn new(c_max: f64, r_max: f64) -> Result<Self> {
        if !(c_max.is_finite() && c_max > 0.0 && r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Data(format!(
                "normalization maxima must be positive, got c_max={c_max} r_max={r_max}"
            )));
        }
        Ok(NormalizationContext { c_max, r_max })
    }

    /// Global maxima over every sample and every gas.
    pub fn from_samples(samples: &[RawSample]) -> Result<Self> {
        let c_max = samples
            .iter()
            .flat_map(|s| s.concentrations_ppm)
            .fold(0.0, f64::max);
        let r_max = samples.iter().flat_map(|s| s.responses).fold(0.0, f64::max);
        Self::new(c_max, r_max)
    }
}

pub fn normalize_concentration(c: f64, ctx: &NormalizationContext) -> Result<f64> {
    if !(0.0..=ctx.c_max).contains(&c) {
        return Err(Error::Range {
            what: "concentration",
            value: c,
            max: ctx.c_max,
        });
    }
    Ok(c / ctx.c_max)
}

pub fn normalize_response(r: f64, ctx: &NormalizationContext) -> Result<f64> {
    if !(0.0..=ctx.r_max).contains(&r) {
        return Err(Error::Range {
            what: "sensor response",
            value: r,
            max: ctx.r_max,
        });
    }
    Ok(r / ctx.r_max)
}

/// Normalizes a deployment-time response, clamping anything above the
/// training maximum to 1.0. Returns the value and whether it was clamped.
pub fn normalize_response_clamped(r: f64, ctx: &NormalizationContext) -> Result<(f64, bool)> {
    if r > ctx.r_max {
        log::warn!(
            "response {r} exceeds training maximum {}; clamped to 1.0",
            ctx.r_max
        );
        return Ok((1.0, true));
    }
    normalize_response(r, ctx).map(|v| (v, false))
}

/// Network output back to ppm.
pub fn denormalize(network_output: f64, ctx: &NormalizationContext) -> f64 {
    network_output * ctx.c_max
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<RawSample>,
    context: NormalizationContext,
    gas_names: [String; GAS_COUNT],
}

impl Dataset {
    pub fn new(samples: Vec<RawSample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            let all = s.concentrations_ppm.iter().chain(&s.responses);
            if all.clone().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Data(format!(
                    "sample {} has a negative or non-finite value",
                    i + 1
                )));
            }
        }
        let context = NormalizationContext::from_samples(&samples)?;
        Ok(Dataset {
            samples,
            context,
            gas_names: GAS_NAMES.map(String::from),
        })
    }

    /// The ten-sample reference table shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_csv_reader(fixtures::TABLE1_CSV.as_bytes()).expect("bundled fixture parses")
    }

    pub fn samples(&self) -> &[RawSample] {
        &self.samples
    }

    pub fn context(&self) -> &NormalizationContext {
        &self.context
    }

    pub fn gas_names(&self) -> &[String; GAS_COUNT] {
        &self.gas_names
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Each sample normalized: concentrations first, then responses.
    pub fn normalized_rows(&self) -> Result<Vec<[f64; 2 * GAS_COUNT]>> {
        self.samples
            .iter()
            .map(|s| {
                let mut row = [0.0; 2 * GAS_COUNT];
                for i in 0..GAS_COUNT {
                    row[i] = normalize_concentration(s.concentrations_ppm[i], &self.context)?;
                    row[GAS_COUNT + i] = normalize_response(s.responses[i], &self.context)?;
                }
                Ok(row)
            })
            .collect()
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let rows = read_numeric_csv(reader, &RAW_HEADER)?;
        let samples = rows
            .into_iter()
            .map(|row| {
                let mut s = RawSample {
                    concentrations_ppm: [0.0; GAS_COUNT],
                    responses: [0.0; GAS_COUNT],
                };
                s.concentrations_ppm.copy_from_slice(&row[..GAS_COUNT]);
                s.responses.copy_from_slice(&row[GAS_COUNT..]);
                s
            })
            .collect();
        Dataset::new(samples)
    }

    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<()> {
        let rows: Vec<Vec<f64>> = self
            .samples
            .iter()
            .map(|s| {
                s.concentrations_ppm
                    .iter()
                    .chain(&s.responses)
                    .copied()
                    .collect()
            })
            .collect();
        write_numeric_csv(writer, &RAW_HEADER, &rows)
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Dataset::from_csv_reader(file)
}

pub fn save_dataset(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    d.to_csv_writer(file)
}

/// Reads a headed CSV of nonnegative numbers. Row numbers in errors count
/// the header as row 1.
pub fn read_numeric_csv<R: Read>(reader: R, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let found = rdr.headers().map_err(|e| Error::Parse {
        row: 1,
        message: e.to_string(),
    })?;
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            row: 1,
            message: format!(
                "expected header {:?}, found {:?}",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        let row = record.position().map_or(row, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(Error::Parse {
                row,
                message: format!("expected {} columns, found {}", header.len(), record.len()),
            });
        }
        let values = record
            .iter()
            .zip(header)
            .map(|(field, name)| {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    row,
                    message: format!("column {name}: {field:?} is not a number"),
                })?;
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Parse {
                        row,
                        message: format!("column {name}: {v} must be finite and nonnegative"),
                    });
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(values);
    }
    Ok(rows)
}

pub fn write_numeric_csv<W: Write>(writer: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let io = |e: csv::Error| Error::Data(format!("csv write failed: {e}"));
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(header).map_err(io)?;
    for row in rows {
        wtr.write_record(row.iter().map(|v| v.to_string()))
            .map_err(io)?;
    }
    wtr.flush()
        .map_err(|e| Error::Data(format!("csv write failed: {e}")))
}

/// One pattern per sample: normalized responses in, normalized
/// concentrations out, gas order preserved.
pub fn build_patterns(d: &Dataset) -> Result<Vec<Pattern>> {
    patterns_from_samples(d.samples(), d.context())
}

/// Same as [`build_patterns`] for samples normalized against an existing
/// context, e.g. held-out data scored with the training maxima.
pub fn patterns_from_samples(
    samples: &[RawSample],
    ctx: &NormalizationContext,
) -> Result<Vec<Pattern>> {
    samples
        .iter()
        .map(|s| {
            let input = s
                .responses
                .iter()
                .map(|&r| normalize_response(r, ctx))
                .collect::<Result<Vec<_>>>()?;
            let target = s
                .concentrations_ppm
                .iter()
                .map(|&c| normalize_concentration(c, ctx))
                .collect::<Result<Vec<_>>>()?;
            Ok(Pattern::new(input, target))
        })
        .collect()
}

/// Seeded shuffle, then the first `ceil(fraction * n)` patterns train.
pub fn split(
    patterns: &[Pattern],
    train_fraction: f64,
    rng_seed: u64,
) -> Result<(Vec<Pattern>, Vec<Pattern>)> {
    if patterns.len() < 2 {
        return Err(Error::Data(format!(
            "cannot split {} pattern(s); need at least 2",
            patterns.len()
        )));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction {train_fraction} must lie strictly between 0 and 1"
        )));
    }
    let mut order: Vec<usize> = (0..patterns.len()).collect();
    order.shuffle(&mut GaRng::seed_from_u64(rng_seed));
    let n_train = (train_fraction * patterns.len() as f64).ceil() as usize;
    let pick = |idx: &[usize]| idx.iter().map(|&i| patterns[i].clone()).collect::<Vec<_>>();
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}
