//! C ABI over `neurogen`.
//!
//! Every function returns an [`NgStatus`]. On failure the message is kept in
//! a thread-local slot readable through [`ng_last_error_message`]. Objects
//! cross the boundary as opaque handles that the caller releases with the
//! matching `*_free` function. Buffers are caller-owned: functions that fill
//! one take its capacity and always report the required length, so a call
//! with capacity 0 can be used to size the buffer.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use neurogen::{
    build_patterns, decode_gene, encode_gene, evolve, forward, CodecError, Dataset, Error,
    GaConfig, GeneBits, InitRange, ProtectionPolicy, Topology, TrainingRecord, WeightVector,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Data = 4,
    Io = 5,
    Codec = 6,
    Internal = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Plain-data mirror of the GA configuration.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NgGaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub init_low: f64,
    pub init_high: f64,
    /// 2 or 3.
    pub protected_bits: u32,
    pub target_sse: f64,
    pub elite_count: usize,
    pub rng_seed: u64,
}

impl From<&GaConfig> for NgGaConfig {
    fn from(c: &GaConfig) -> Self {
        NgGaConfig {
            population_size: c.population_size,
            max_generations: c.max_generations,
            crossover_prob: c.crossover_prob,
            mutation_prob: c.mutation_prob,
            init_low: c.init_range.low,
            init_high: c.init_range.high,
            protected_bits: c.protection.protected_msb_count(),
            target_sse: c.target_sse,
            elite_count: c.elite_count,
            rng_seed: c.rng_seed,
        }
    }
}

impl NgGaConfig {
    fn to_config(self) -> Result<GaConfig, Error> {
        Ok(GaConfig {
            population_size: self.population_size,
            max_generations: self.max_generations,
            crossover_prob: self.crossover_prob,
            mutation_prob: self.mutation_prob,
            init_range: InitRange::new(self.init_low, self.init_high),
            protection: ProtectionPolicy::new(self.protected_bits)?,
            target_sse: self.target_sse,
            elite_count: self.elite_count,
            rng_seed: self.rng_seed,
        })
    }
}

/// Opaque dataset handle.
pub struct NgDataset(Dataset);

/// Opaque handle to a finished training run.
pub struct NgTrainingResult(TrainingRecord);

/// Opaque handle to a network with fixed weights.
pub struct NgNetwork {
    topology: Topology,
    weights: WeightVector,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn fail(status: NgStatus, msg: impl Into<String>) -> NgStatus {
    set_last_error(msg.into());
    status
}

fn status_of(e: &Error) -> NgStatus {
    match e {
        Error::InvalidConfig(_) | Error::Codec(CodecError::InvalidProtection(_)) => {
            NgStatus::InvalidConfig
        }
        Error::Contract(_) => NgStatus::InvalidArgument,
        Error::Range { .. } | Error::Parse { .. } | Error::Data(_) => NgStatus::Data,
        Error::Io { .. } => NgStatus::Io,
        Error::Codec(_) => NgStatus::Codec,
        Error::Internal(_) => NgStatus::Internal,
        Error::Run { source, .. } => status_of(source),
    }
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), NgStatus>) -> NgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => NgStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(NgStatus::Panic, "panic inside neurogen"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, NgStatus>;
}

impl<T> OrStatus<T> for Result<T, Error> {
    fn or_status(self) -> Result<T, NgStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, NgStatus> {
    p.as_ref()
        .ok_or_else(|| fail(NgStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, NgStatus> {
    p.as_mut()
        .ok_or_else(|| fail(NgStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], NgStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(NgStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copies `src` into a caller buffer, always writing the needed length.
unsafe fn fill(
    src: &[f64],
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> Result<(), NgStatus> {
    *out_ptr(len_out, "len_out")? = src.len();
    if cap < src.len() {
        return Err(fail(
            NgStatus::BufferTooSmall,
            format!("buffer holds {cap} values, {} needed", src.len()),
        ));
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(fail(NgStatus::NullPointer, "buffer is null"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ng_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ng_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ng_ga_config_default(out: *mut NgGaConfig) -> NgStatus {
    guard(|| {
        *out_ptr(out, "out")? = NgGaConfig::from(&GaConfig::default());
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ng_encode_gene(value: f32, out: *mut u32) -> NgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = encode_gene(value).map_err(Error::from).or_status()?.bits();
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ng_decode_gene(bits: u32, out: *mut f32) -> NgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = decode_gene(GeneBits::from_bits(bits))
            .map_err(Error::from)
            .or_status()?;
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ng_dataset_bundled(out: *mut *mut NgDataset) -> NgStatus {
    guard(|| {
        *out_ptr(out, "out")? = boxed(NgDataset(Dataset::bundled()));
        Ok(())
    })
}

/// Loads a raw-sample CSV (concentration columns then response columns).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ng_dataset_load(
    path: *const c_char,
    out: *mut *mut NgDataset,
) -> NgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if path.is_null() {
            return Err(fail(NgStatus::NullPointer, "path is null"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(NgStatus::InvalidArgument, "path is not UTF-8"))?;
        *out = boxed(NgDataset(neurogen::load_dataset(path).or_status()?));
        Ok(())
    })
}

/// # Safety
/// `dataset` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ng_dataset_len(dataset: *const NgDataset, out: *mut usize) -> NgStatus {
    guard(|| {
        *out_ptr(out, "out")? = deref(dataset, "dataset")?.0.len();
        Ok(())
    })
}

/// # Safety
/// `dataset` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ng_dataset_free(dataset: *mut NgDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Converts a network output to ppm with the dataset's concentration maximum.
///
/// # Safety
/// `dataset` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ng_denormalize(
    dataset: *const NgDataset,
    network_output: f64,
    out: *mut f64,
) -> NgStatus {
    guard(|| {
        let ctx = deref(dataset, "dataset")?.0.context();
        *out_ptr(out, "out")? = neurogen::denormalize(network_output, ctx);
        Ok(())
    })
}

/// Trains a 5-`hidden`-5 network on every sample of `dataset`.
///
/// # Safety
/// `dataset` and `config` must be valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ng_train(
    dataset: *const NgDataset,
    hidden: usize,
    config: *const NgGaConfig,
    out: *mut *mut NgTrainingResult,
) -> NgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let data = &deref(dataset, "dataset")?.0;
        let cfg = deref(config, "config")?.to_config().or_status()?;
        let topology = Topology::gas(hidden).or_status()?;
        let patterns = build_patterns(data).or_status()?;
        let result = evolve(&cfg, &topology, &patterns).or_status()?;
        let record =
            TrainingRecord::new(topology, cfg, Some(*data.context()), &result).or_status()?;
        *out = boxed(NgTrainingResult(record));
        Ok(())
    })
}

/// # Safety
/// `result` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ng_result_best_sse(
    result: *const NgTrainingResult,
    out: *mut f64,
) -> NgStatus {
    guard(|| {
        *out_ptr(out, "out")? = deref(result, "result")?.0.best_sse;
        Ok(())
    })
}

/// Number of generations run (the SSE history has one more entry).
///
/// # Safety
/// `result` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ng_result_generations(
    result: *const NgTrainingResult,
    out: *mut usize,
) -> NgStatus {
    guard(|| {
        *out_ptr(out, "out")? = deref(result, "result")?.0.generations_run;
        Ok(())
    })
}

/// # Safety
/// `result` must be valid; `buf` must hold `cap` doubles; `len_out` valid.
#[no_mangle]
pub unsafe extern "C" fn ng_result_history(
    result: *const NgTrainingResult,
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> NgStatus {
    guard(|| fill(&deref(result, "result")?.0.sse_history, buf, cap, len_out))
}

/// # Safety
/// `result` must be valid; `buf` must hold `cap` doubles; `len_out` valid.
#[no_mangle]
pub unsafe extern "C" fn ng_result_weights(
    result: *const NgTrainingResult,
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> NgStatus {
    guard(|| fill(&deref(result, "result")?.0.best_weights, buf, cap, len_out))
}

/// Serializes the run as the same JSON document the CLI writes. Release the
/// string with [`ng_string_free`].
///
/// # Safety
/// `result` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ng_result_to_json(
    result: *const NgTrainingResult,
    out: *mut *mut c_char,
) -> NgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let json = deref(result, "result")?.0.to_json().or_status()?;
        let json =
            CString::new(json).map_err(|_| fail(NgStatus::Internal, "JSON contains a NUL byte"))?;
        *out = json.into_raw();
        Ok(())
    })
}

/// Builds a network from the best weights of a run.
///
/// # Safety
/// `result` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ng_result_network(
    result: *const NgTrainingResult,
    out: *mut *mut NgNetwork,
) -> NgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let record = &deref(result, "result")?.0;
        let weights = record.weight_vector().or_status()?;
        *out = boxed(NgNetwork {
            topology: record.topology.clone(),
            weights,
        });
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ng_result_free(result: *mut NgTrainingResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Creates a network from layer sizes and a flat weight list in the library's
/// order: layer by layer, one group per destination neuron, bias last.
///
/// # Safety
/// `layers` must hold `n_layers` values and `weights` `n_weights` values.
#[no_mangle]
pub unsafe extern "C" fn ng_network_new(
    layers: *const usize,
    n_layers: usize,
    weights: *const f64,
    n_weights: usize,
    out: *mut *mut NgNetwork,
) -> NgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let layers = slice(layers, n_layers, "layers")?;
        let weights = slice(weights, n_weights, "weights")?;
        let topology = Topology::new(layers.to_vec()).or_status()?;
        let weights = WeightVector::new(&topology, weights.to_vec()).or_status()?;
        *out = boxed(NgNetwork { topology, weights });
        Ok(())
    })
}

/// Number of weights a network with these layer sizes needs.
///
/// # Safety
/// `layers` must hold `n_layers` values and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ng_weight_count(
    layers: *const usize,
    n_layers: usize,
    out: *mut usize,
) -> NgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let topology = Topology::new(slice(layers, n_layers, "layers")?.to_vec()).or_status()?;
        *out = topology.weight_count();
        Ok(())
    })
}

/// # Safety
/// `network` must be valid; `input` holds `n_input` values; `output` has
/// room for `cap` values; `len_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ng_network_forward(
    network: *const NgNetwork,
    input: *const f64,
    n_input: usize,
    output: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> NgStatus {
    guard(|| {
        let net = deref(network, "network")?;
        let input = slice(input, n_input, "input")?;
        let result = forward(&net.topology, &net.weights, input).or_status()?;
        fill(&result, output, cap, len_out)
    })
}

/// # Safety
/// `network` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ng_network_free(network: *mut NgNetwork) {
    if !network.is_null() {
        drop(Box::from_raw(network));
    }
}
