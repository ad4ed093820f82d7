use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use neurogen::bench::{loglog_slope, run_bench, write_bench_csv, BenchGrid};
use neurogen::data::{normalize_response_clamped, write_numeric_csv, NORMALIZED_HEADER};
use neurogen::sweep::write_sweep_csv;
use neurogen::{
    build_patterns, evolve, forward, load_dataset, run_sweep, split, sse, Dataset, DetectionReport,
    Error, GaConfig, InitRange, NormalizationContext, ProtectionPolicy, Result, SafetyLimits,
    SweepSpec, SweptParameter, Topology, TrainingRecord, WeightVector,
};

#[derive(Debug, Parser)]
#[command(
    name = "neurogen",
    version,
    about = "Neuro-genetic gas mixture detection"
)]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a network with the genetic algorithm and write the result as JSON.
    Train(TrainArgs),
    /// Run a trained network on one sensor reading and report ppm per gas.
    Predict(PredictArgs),
    /// Sweep one GA parameter and write mean/std/min/max final SSE as CSV.
    Sweep(SweepArgs),
    /// Time full training runs over a grid of generation and population sizes.
    Bench(BenchArgs),
    /// Write the normalized form of a dataset as CSV.
    Normalize(NormalizeArgs),
}

#[derive(Debug, Args)]
struct DatasetArg {
    /// Raw sample CSV; the bundled ten-sample table is used when omitted.
    #[arg(long)]
    dataset: Option<PathBuf>,
}

impl DatasetArg {
    fn load(&self) -> Result<Dataset> {
        match &self.dataset {
            Some(path) => load_dataset(path),
            None => Ok(Dataset::bundled()),
        }
    }
}

#[derive(Debug, Args)]
struct GaArgs {
    /// JSON file mirroring the GA configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Network shape, e.g. 5-3-5.
    #[arg(long)]
    topology: Option<Topology>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    gens: Option<usize>,
    #[arg(long)]
    pc: Option<f64>,
    #[arg(long)]
    pm: Option<f64>,
    /// Initial weight range a:b.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<InitRange>,
    /// Protected most-significant bits per gene (2 or 3).
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=3))]
    protect: Option<u32>,
    #[arg(long)]
    elite: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    target_sse: Option<f64>,
}

impl GaArgs {
    /// Layers the config file and flags over `base`. Returns the config, the
    /// topology, and whether a seed was given explicitly.
    fn resolve(
        &self,
        mut base: GaConfig,
        topology: Topology,
    ) -> Result<(GaConfig, Topology, bool)> {
        let mut seeded = false;
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
            seeded = value.get("rng_seed").is_some();
            let mut merged = serde_json::to_value(&base).expect("config serializes");
            if let (Some(dst), Some(src)) = (merged.as_object_mut(), value.as_object()) {
                for (k, v) in src {
                    dst.insert(k.clone(), v.clone());
                }
            }
            base = serde_json::from_value(merged)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        }
        fn set<T>(dst: &mut T, v: Option<T>) {
            if let Some(v) = v {
                *dst = v;
            }
        }
        set(&mut base.population_size, self.pop);
        set(&mut base.max_generations, self.gens);
        set(&mut base.crossover_prob, self.pc);
        set(&mut base.mutation_prob, self.pm);
        set(&mut base.init_range, self.range);
        set(&mut base.elite_count, self.elite);
        set(&mut base.target_sse, self.target_sse);
        if let Some(p) = self.protect {
            base.protection = ProtectionPolicy::new(p)?;
        }
        if let Some(seed) = self.seed {
            base.rng_seed = seed;
            seeded = true;
        }
        let topology = self.topology.clone().unwrap_or(topology);
        Ok((base, topology, seeded))
    }
}

/// Draws a seed from entropy and prints it so the run can be replayed.
fn fresh_seed() -> u64 {
    let seed = rand::random::<u64>();
    eprintln!("seed: {seed}");
    seed
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    dataset: DatasetArg,
    #[command(flatten)]
    ga: GaArgs,
    /// Hold out part of the patterns: train on this fraction, report SSE on the rest.
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Output JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Training result JSON, or a single CSV line of weights (needs --topology).
    #[arg(long)]
    weights: PathBuf,
    /// Topology for CSV weights.
    #[arg(long, default_value = "5-3-5")]
    topology: Topology,
    #[command(flatten)]
    dataset: DatasetArg,
    /// Five normalized sensor responses, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "raw_input",
        required_unless_present = "raw_input"
    )]
    input: Vec<f64>,
    /// Five raw sensor responses (Rs/R0), normalized with the training maximum.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    raw_input: Vec<f64>,
    /// Safety limits CSV (gas,limit_ppm).
    #[arg(long)]
    limits: Option<PathBuf>,
    /// Also write the report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Parameter to sweep: hidden, pop, gens, pc, pm or range.
    #[arg(long)]
    param: SweptParameter,
    /// Values to try; the reference grid for the parameter when omitted.
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[command(flatten)]
    dataset: DatasetArg,
    #[command(flatten)]
    ga: GaArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Generation budgets to time.
    #[arg(long, value_delimiter = ',', default_values_t = [250, 500, 1000])]
    gens: Vec<usize>,
    /// Population sizes to time.
    #[arg(long, value_delimiter = ',', default_values_t = [25, 50, 100])]
    pop: Vec<usize>,
    /// Timed runs per cell (the fastest is kept).
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value = "5-3-5")]
    topology: Topology,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    dataset: DatasetArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NormalizeArgs {
    #[command(flatten)]
    dataset: DatasetArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => Ok(Box::new(File::create(p).map_err(|e| Error::Io {
            path: p.display().to_string(),
            source: e,
        })?)),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn train(args: TrainArgs) -> Result<()> {
    let dataset = args.dataset.load()?;
    let (mut cfg, topology, seeded) = args.ga.resolve(GaConfig::default(), Topology::gas(3)?)?;
    if !seeded {
        cfg.rng_seed = fresh_seed();
    }
    cfg.validate()?;
    let patterns = build_patterns(&dataset)?;
    let (train_set, test_set) = match args.train_fraction {
        Some(f) => split(&patterns, f, cfg.rng_seed)?,
        None => (patterns, Vec::new()),
    };
    let result = evolve(&cfg, &topology, &train_set)?;
    let mut record = TrainingRecord::new(topology.clone(), cfg, Some(*dataset.context()), &result)?;
    if !test_set.is_empty() {
        let weights = record.weight_vector()?;
        record.test_sse = Some(sse(&topology, &weights, &test_set)?);
    }
    eprintln!(
        "{:?} after {} generations: best sse {:.6}{}",
        record.terminated_by,
        record.generations_run,
        record.best_sse,
        record
            .test_sse
            .map_or_else(String::new, |s| format!(", held-out sse {s:.6}"))
    );
    let json = record.to_json()?;
    let mut out = output(args.out.as_deref())?;
    out.write_all(json.as_bytes())
        .map_err(|e| Error::Data(format!("writing result: {e}")))
}

fn load_weights(
    path: &Path,
    topology: &Topology,
) -> Result<(Topology, WeightVector, Option<NormalizationContext>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    if text.trim_start().starts_with('{') {
        let record = TrainingRecord::from_json(&text)?;
        let weights = record.weight_vector()?;
        Ok((record.topology, weights, record.normalization))
    } else {
        let line = text
            .lines()
            .find(|l| !l.trim().is_empty())
            .ok_or_else(|| Error::Data(format!("{} holds no weights", path.display())))?;
        Ok((
            topology.clone(),
            WeightVector::from_csv_line(topology, line)?,
            None,
        ))
    }
}

fn predict(args: PredictArgs) -> Result<()> {
    let (topology, weights, stored_ctx) = load_weights(&args.weights, &args.topology)?;
    let ctx = match stored_ctx {
        Some(ctx) if args.dataset.dataset.is_none() => ctx,
        _ => *args.dataset.load()?.context(),
    };
    let inputs: Vec<f64> = if !args.raw_input.is_empty() {
        args.raw_input
            .iter()
            .map(|&r| normalize_response_clamped(r, &ctx).map(|(v, _)| v))
            .collect::<Result<_>>()?
    } else {
        args.input
            .iter()
            .map(|&v| {
                if v > 1.0 {
                    log::warn!("input {v} above 1.0; clamped");
                    Ok(1.0)
                } else if v >= 0.0 {
                    Ok(v)
                } else {
                    Err(Error::Range {
                        what: "normalized input",
                        value: v,
                        max: 1.0,
                    })
                }
            })
            .collect::<Result<_>>()?
    };
    let limits = match &args.limits {
        Some(path) => Some(SafetyLimits::load(path)?),
        None => {
            log::warn!("no --limits file given; alarms are not evaluated");
            None
        }
    };
    let outputs = forward(&topology, &weights, &inputs)?;
    let report = DetectionReport::new(&inputs, &outputs, &ctx, limits.as_ref())?;
    print!("{}", report.render_table());
    if report.any_alarm() {
        println!("ALARM: at least one gas exceeds its safety limit");
    }
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::Internal(format!("serializing report: {e}")))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let dataset = args.dataset.load()?;
    let (baseline, topology) = args.param.baseline();
    let (baseline, topology, seeded) = args.ga.resolve(baseline, topology)?;
    let seed_base = if seeded {
        baseline.rng_seed
    } else {
        fresh_seed()
    };
    let values = if args.values.is_empty() {
        args.param.default_values()
    } else {
        args.values
    };
    let spec = SweepSpec {
        parameter: args.param,
        values,
        baseline,
        topology,
        repetitions: args.reps,
        seed_base,
    };
    let rows = run_sweep(&spec, &build_patterns(&dataset)?)?;
    write_sweep_csv(output(args.out.as_deref())?, spec.parameter, &rows)
}

fn bench(args: BenchArgs) -> Result<()> {
    let dataset = args.dataset.load()?;
    let cfg = GaConfig {
        rng_seed: args.seed.unwrap_or_else(fresh_seed),
        ..GaConfig::default()
    };
    let grid = BenchGrid {
        generations: args.gens,
        populations: args.pop,
        repeats: args.repeats,
    };
    let records = run_bench(&grid, &cfg, &args.topology, &build_patterns(&dataset)?)?;
    write_bench_csv(output(args.out.as_deref())?, &records)?;
    match loglog_slope(&records) {
        Ok(slope) => eprintln!("log-log slope of wall time vs t*m: {slope:.3}"),
        Err(e) => eprintln!("slope not available: {e}"),
    }
    Ok(())
}

fn normalize(args: NormalizeArgs) -> Result<()> {
    let dataset = args.dataset.load()?;
    let rows: Vec<Vec<f64>> = dataset
        .normalized_rows()?
        .into_iter()
        .map(|r| r.to_vec())
        .collect();
    write_numeric_csv(output(args.out.as_deref())?, &NORMALIZED_HEADER, &rows)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Sweep(a) => sweep(a),
        Command::Bench(a) => bench(a),
        Command::Normalize(a) => normalize(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
