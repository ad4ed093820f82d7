//! Per-gas detection reports with safety-limit alarms.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{denormalize, NormalizationContext, GAS_NAMES};
use crate::error::{Error, Result};

/// Safety limits in ppm keyed by gas name (case-insensitive on lookup).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SafetyLimits(BTreeMap<String, f64>);

impl SafetyLimits {
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        SafetyLimits(
            pairs
                .into_iter()
                .map(|(k, v)| (k.as_ref().to_ascii_uppercase(), v))
                .collect(),
        )
    }

    pub fn get(&self, gas: &str) -> Option<f64> {
        self.0.get(&gas.to_ascii_uppercase()).copied()
    }

    /// Reads a `gas,limit_ppm` CSV. Lines starting with `#` are ignored.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::Parse {
            row: 1,
            message: e.to_string(),
        })?;
        if header.iter().ne(["gas", "limit_ppm"]) {
            return Err(Error::Parse {
                row: header.position().map_or(1, |p| p.line() as usize),
                message: "expected header gas,limit_ppm".into(),
            });
        }
        let mut limits = BTreeMap::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Parse {
                row: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let row = record.position().map_or(0, |p| p.line() as usize);
            let limit: f64 = record[1].parse().map_err(|_| Error::Parse {
                row,
                message: format!("limit {:?} is not a number", &record[1]),
            })?;
            if !(limit.is_finite() && limit >= 0.0) {
                return Err(Error::Parse {
                    row,
                    message: format!("limit {limit} must be nonnegative"),
                });
            }
            limits.insert(record[0].to_ascii_uppercase(), limit);
        }
        Ok(SafetyLimits(limits))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasReading {
    pub name: String,
    pub input: f64,
    pub normalized_output: f64,
    pub ppm: f64,
    pub safety_limit_ppm: Option<f64>,
    /// `None` when no limit is known for this gas.
    pub alarm: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub readings: Vec<GasReading>,
}

impl DetectionReport {
    /// Denormalizes each network output and flags any gas above its limit.
    pub fn new(
        inputs: &[f64],
        outputs: &[f64],
        ctx: &NormalizationContext,
        limits: Option<&SafetyLimits>,
    ) -> Result<Self> {
        if outputs.len() != GAS_NAMES.len() || inputs.len() != GAS_NAMES.len() {
            return Err(Error::Contract(format!(
                "report needs {} inputs and outputs, got {} and {}",
                GAS_NAMES.len(),
                inputs.len(),
                outputs.len()
            )));
        }
        let readings = GAS_NAMES
            .iter()
            .zip(inputs.iter().zip(outputs))
            .map(|(&name, (&input, &out))| {
                let ppm = denormalize(out, ctx);
                let safety_limit_ppm = limits.and_then(|l| l.get(name));
                GasReading {
                    name: name.to_string(),
                    input,
                    normalized_output: out,
                    ppm,
                    safety_limit_ppm,
                    alarm: safety_limit_ppm.map(|limit| ppm > limit),
                }
            })
            .collect();
        Ok(DetectionReport { readings })
    }

    pub fn any_alarm(&self) -> bool {
        self.readings.iter().any(|r| r.alarm == Some(true))
    }

    /// Fixed-width table in the layout of a test-result sheet: node, input,
    /// raw output, ppm as four zero-padded digits, then limit and alarm.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<5} {:<4} {:>10} {:>10} {:>8} {:>10} {:>6}",
            "node", "gas", "input", "output", "ppm", "limit", "alarm"
        );
        for (i, r) in self.readings.iter().enumerate() {
            let limit = r
                .safety_limit_ppm
                .map_or_else(|| "-".to_string(), |l| l.to_string());
            let alarm = match r.alarm {
                Some(true) => "YES",
                Some(false) => "no",
                None => "-",
            };
            let _ = writeln!(
                out,
                "{:<5} {:<4} {:>10.3} {:>10.3} {:>8} {:>10} {:>6}",
                i + 1,
                r.name,
                r.input,
                r.normalized_output,
                format_ppm(r.ppm),
                limit,
                alarm
            );
        }
        out
    }
}

/// Whole ppm, zero-padded to four digits (`80` → `0080`).
pub fn format_ppm(ppm: f64) -> String {
    format!("{:04.0}", ppm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> NormalizationContext {
        NormalizationContext::new(5000.0, 0.3124).unwrap()
    }

    #[test]
    fn ppm_formatting() {
        assert_eq!(format_ppm(80.0), "0080");
        assert_eq!(format_ppm(110.0), "0110");
        assert_eq!(format_ppm(4965.0), "4965");
        assert_eq!(format_ppm(0.0), "0000");
    }

    #[test]
    fn alarms_follow_limits() {
        let limits = SafetyLimits::from_pairs([("ch4", 1000.0), ("NH3", 25.0)]);
        let out = [0.016, 0.022, 0.023, 0.022, 0.993];
        let report = DetectionReport::new(&[0.5; 5], &out, &ctx(), Some(&limits)).unwrap();
        let ch4 = &report.readings[4];
        assert_eq!(ch4.ppm, 4965.0);
        assert_eq!(ch4.alarm, Some(true));
        assert_eq!(report.readings[0].alarm, Some(true)); // 80 > 25
        assert_eq!(report.readings[1].alarm, None);
        assert!(report.any_alarm());
        for r in &report.readings {
            assert_eq!(r.ppm, r.normalized_output * 5000.0);
        }
        let table = report.render_table();
        assert!(table.contains("4965"));
        assert!(table.contains("0080"));
    }

    #[test]
    fn no_limits_means_no_alarms() {
        let report = DetectionReport::new(&[0.0; 5], &[0.5; 5], &ctx(), None).unwrap();
        assert!(report
            .readings
            .iter()
            .all(|r| r.ppm == 2500.0 && r.alarm.is_none()));
        assert!(!report.any_alarm());
        assert!(DetectionReport::new(&[0.0; 4], &[0.5; 5], &ctx(), None).is_err());
    }

    #[test]
    fn sample_limits_file_parses() {
        let limits =
            SafetyLimits::from_csv_reader(crate::data::fixtures::SAMPLE_LIMITS_CSV.as_bytes())
                .unwrap();
        assert_eq!(limits.get("CH4"), Some(1000.0));
        assert_eq!(limits.get("h2s"), Some(10.0));
        assert!(SafetyLimits::from_csv_reader("gas,limit_ppm\nCO,abc\n".as_bytes()).is_err());
        assert!(SafetyLimits::from_csv_reader("name,value\n".as_bytes()).is_err());
    }
}
