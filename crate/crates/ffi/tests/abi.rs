use std::ffi::{CStr, CString};
use std::ptr;

use neurogen_ffi::*;

fn last_error() -> String {
    let p = ng_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn gene_round_trip() {
    let mut bits = 0u32;
    let mut back = 0f32;
    unsafe {
        assert_eq!(ng_encode_gene(1.0, &mut bits), NgStatus::Ok);
        assert_eq!(bits, 0x3F80_0000);
        assert_eq!(ng_decode_gene(0xC000_0000, &mut back), NgStatus::Ok);
        assert_eq!(back, -2.0);
        assert_eq!(ng_encode_gene(f32::NAN, &mut bits), NgStatus::Codec);
        assert_eq!(ng_decode_gene(0x7F80_0000, &mut back), NgStatus::Codec);
        assert_eq!(ng_encode_gene(1.0, ptr::null_mut()), NgStatus::NullPointer);
    }
    assert!(last_error().contains("null"));
}

#[test]
fn default_config_matches_library() {
    let mut cfg = std::mem::MaybeUninit::<NgGaConfig>::uninit();
    let cfg = unsafe {
        assert_eq!(ng_ga_config_default(cfg.as_mut_ptr()), NgStatus::Ok);
        cfg.assume_init()
    };
    assert_eq!(cfg.population_size, 100);
    assert_eq!(cfg.max_generations, 1000);
    assert_eq!(cfg.protected_bits, 3);
    assert_eq!((cfg.init_low, cfg.init_high), (-1.5, 1.5));
}

fn small_config() -> NgGaConfig {
    let mut cfg = std::mem::MaybeUninit::<NgGaConfig>::uninit();
    unsafe {
        ng_ga_config_default(cfg.as_mut_ptr());
        let mut cfg = cfg.assume_init();
        cfg.population_size = 20;
        cfg.max_generations = 15;
        cfg.target_sse = 0.0;
        cfg.rng_seed = 7;
        cfg
    }
}

#[test]
fn train_and_inspect() {
    unsafe {
        let mut data = ptr::null_mut();
        assert_eq!(ng_dataset_bundled(&mut data), NgStatus::Ok);
        let mut n = 0;
        assert_eq!(ng_dataset_len(data, &mut n), NgStatus::Ok);
        assert_eq!(n, 10);

        let cfg = small_config();
        let mut result = ptr::null_mut();
        assert_eq!(ng_train(data, 3, &cfg, &mut result), NgStatus::Ok);

        let mut gens = 0;
        ng_result_generations(result, &mut gens);
        assert_eq!(gens, 15);

        // Size query, then fill.
        let mut len = 0;
        assert_eq!(
            ng_result_history(result, ptr::null_mut(), 0, &mut len),
            NgStatus::BufferTooSmall
        );
        assert_eq!(len, 16);
        let mut history = vec![0.0; len];
        assert_eq!(
            ng_result_history(result, history.as_mut_ptr(), history.len(), &mut len),
            NgStatus::Ok
        );
        let mut best = 0.0;
        ng_result_best_sse(result, &mut best);
        assert_eq!(*history.last().unwrap(), best);

        let mut weights = vec![0.0; 38];
        assert_eq!(
            ng_result_weights(result, weights.as_mut_ptr(), 38, &mut len),
            NgStatus::Ok
        );
        assert_eq!(len, 38);
        assert!(weights.iter().all(|w| w.abs() < 2.0));

        let mut json = ptr::null_mut();
        assert_eq!(ng_result_to_json(result, &mut json), NgStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        ng_string_free(json);
        assert!(text.contains("\"best_genes_hex\""));

        // A network built from the run reproduces the reported SSE.
        let mut net = ptr::null_mut();
        assert_eq!(ng_result_network(result, &mut net), NgStatus::Ok);
        let patterns = neurogen::build_patterns(&neurogen::Dataset::bundled()).unwrap();
        let mut sse = 0.0;
        for p in &patterns {
            let mut out = [0.0; 5];
            assert_eq!(
                ng_network_forward(net, p.input.as_ptr(), 5, out.as_mut_ptr(), 5, &mut len),
                NgStatus::Ok
            );
            sse += out
                .iter()
                .zip(&p.target)
                .map(|(o, t)| (o - t).powi(2))
                .sum::<f64>();
        }
        assert!((0.5 * sse - best).abs() < 1e-12);

        ng_network_free(net);
        ng_result_free(result);
        ng_dataset_free(data);
    }
}

#[test]
fn invalid_config_reports_code_and_message() {
    let mut cfg = small_config();
    cfg.max_generations = 0;
    unsafe {
        let mut data = ptr::null_mut();
        ng_dataset_bundled(&mut data);
        let mut result = ptr::null_mut();
        assert_eq!(
            ng_train(data, 3, &cfg, &mut result),
            NgStatus::InvalidConfig
        );
        assert!(result.is_null());
        assert!(last_error().contains("generation"));
        cfg = small_config();
        cfg.protected_bits = 4;
        assert_eq!(
            ng_train(data, 3, &cfg, &mut result),
            NgStatus::InvalidConfig
        );
        ng_dataset_free(data);
    }
}

#[test]
fn network_from_raw_weights() {
    let layers = [5usize, 3, 5];
    let mut count = 0;
    unsafe {
        assert_eq!(
            ng_weight_count(layers.as_ptr(), 3, &mut count),
            NgStatus::Ok
        );
        assert_eq!(count, 38);
        let zeros = vec![0.0; count];
        let mut net = ptr::null_mut();
        assert_eq!(
            ng_network_new(layers.as_ptr(), 3, zeros.as_ptr(), 37, &mut net),
            NgStatus::InvalidArgument
        );
        assert_eq!(
            ng_network_new(layers.as_ptr(), 3, zeros.as_ptr(), 38, &mut net),
            NgStatus::Ok
        );
        let input = [0.3; 5];
        let mut out = [0.0; 5];
        let mut len = 0;
        assert_eq!(
            ng_network_forward(net, input.as_ptr(), 4, out.as_mut_ptr(), 5, &mut len),
            NgStatus::InvalidArgument
        );
        assert_eq!(
            ng_network_forward(net, input.as_ptr(), 5, out.as_mut_ptr(), 5, &mut len),
            NgStatus::Ok
        );
        assert_eq!(out, [0.5; 5]);

        let mut data = ptr::null_mut();
        ng_dataset_bundled(&mut data);
        let mut ppm = 0.0;
        ng_denormalize(data, out[0], &mut ppm);
        assert_eq!(ppm, 2500.0);
        ng_dataset_free(data);
        ng_network_free(net);
    }
}

#[test]
fn dataset_load_errors() {
    let missing = CString::new("/nonexistent/samples.csv").unwrap();
    let mut data = ptr::null_mut();
    unsafe {
        assert_eq!(ng_dataset_load(missing.as_ptr(), &mut data), NgStatus::Io);
        assert_eq!(
            ng_dataset_load(ptr::null(), &mut data),
            NgStatus::NullPointer
        );
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "a,b\n1,2\n").unwrap();
    let path = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        assert_eq!(ng_dataset_load(path.as_ptr(), &mut data), NgStatus::Data);
    }
}
