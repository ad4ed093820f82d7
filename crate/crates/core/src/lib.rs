//! Neuro-genetic training of small feedforward networks.
//!
//! Network weights are evolved by a genetic algorithm that manipulates the
//! raw IEEE-754 binary32 bit patterns of each weight, with the sign and top
//! exponent bits protected so that offspring never decode to NaN or
//! infinity. The crate ships the five-gas sensor-array pipeline the method
//! was built for: global-max normalization, pattern building, per-gas ppm
//! reports with safety alarms, parameter sweeps and a scaling benchmark.
//!
//! ```
//! use neurogen::{build_patterns, evolve, Dataset, GaConfig, Topology};
//!
//! let patterns = build_patterns(&Dataset::bundled()).unwrap();
//! let cfg = GaConfig { population_size: 20, max_generations: 20, ..GaConfig::default() };
//! let result = evolve(&cfg, &Topology::gas(3).unwrap(), &patterns).unwrap();
//! assert!(result.best_sse >= 0.0);
//! ```

pub mod bench;
pub mod codec;
pub mod data;
pub mod error;
pub mod ga;
pub mod mlp;
pub mod record;
pub mod report;
pub mod sweep;

pub use codec::{
    decode_gene, encode_gene, mutable_bit_indices, CodecError, GeneBits, ProtectionPolicy,
};
pub use data::{
    build_patterns, denormalize, load_dataset, normalize_concentration, normalize_response,
    save_dataset, split, Dataset, NormalizationContext, RawSample, GAS_NAMES,
};
pub use error::{Error, Result};
pub use ga::{
    crossover, evolve, fps_select, init_population, mutate, selection_score, Chromosome, FpsWheel,
    GaConfig, GaRng, InitRange, Termination, TrainingResult,
};
pub use mlp::{forward, sse, weight_count, Pattern, Topology, WeightVector};
pub use record::TrainingRecord;
pub use report::{DetectionReport, SafetyLimits};
pub use sweep::{run_sweep, SweepRow, SweepSpec, SweptParameter};
