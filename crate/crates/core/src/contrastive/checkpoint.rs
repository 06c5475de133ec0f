//! Checkpoint files for [`EncoderState`].
//!
//! A checkpoint is a JSON object:
//!
//! ```text
//! {
//!   "format": "coda-augment-checkpoint",
//!   "version": 1,
//!   "architecture": {"input_dim": p, "encoder": [256, 128, 64], "head": [32, 16]},
//!   "encoding": "clr" | "raw",
//!   "library_size": 10000,
//!   "config": { ...pretraining configuration, or null... },
//!   "layers": [{"name": "encoder.0", "inputs": p, "outputs": 256,
//!               "weights": "<hex>", "bias": "<hex>"}, ...],
//!   "fingerprint": "<sha-256 hex>"
//! }
//! ```
//!
//! `weights` (row-major, `outputs x inputs`) and `bias` are the IEEE-754 bit
//! patterns of each f64 as 16 big-endian hex digits, concatenated, so loading
//! is bit-exact. `fingerprint` is [`EncoderState::fingerprint`] of the stored
//! parameters and is verified on load.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{Architecture, Dense, EncoderState, InputEncoding, Mlp};
use super::train::ContrastiveConfig;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::preprocess::LibrarySize;

pub const CHECKPOINT_FORMAT: &str = "coda-augment-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub state: EncoderState,
    pub config: Option<ContrastiveConfig>,
}

#[derive(Serialize, Deserialize)]
struct StoredLayer {
    name: String,
    inputs: usize,
    outputs: usize,
    weights: String,
    bias: String,
}

#[derive(Serialize, Deserialize)]
struct StoredCheckpoint {
    format: String,
    version: u32,
    architecture: Architecture,
    encoding: InputEncoding,
    library_size: u64,
    config: Option<ContrastiveConfig>,
    layers: Vec<StoredLayer>,
    fingerprint: String,
}

fn encode_hex(values: &[f64]) -> String {
    values.iter().map(|v| format!("{:016x}", v.to_bits())).collect()
}

fn decode_hex(text: &str, expected: usize) -> std::result::Result<Vec<f64>, String> {
    if text.len() != expected * 16 || !text.is_ascii() {
        return Err(format!("expected {expected} values, found {} hex digits", text.len()));
    }
    (0..expected)
        .map(|i| {
            u64::from_str_radix(&text[i * 16..(i + 1) * 16], 16)
                .map(f64::from_bits)
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn store_layers(prefix: &str, mlp: &Mlp) -> Vec<StoredLayer> {
    mlp.layers
        .iter()
        .enumerate()
        .map(|(i, l)| StoredLayer {
            name: format!("{prefix}.{i}"),
            inputs: l.inputs,
            outputs: l.outputs,
            weights: encode_hex(&l.weights),
            bias: encode_hex(&l.bias),
        })
        .collect()
}

/// Serialises a checkpoint to its JSON text.
pub fn checkpoint_to_string(state: &EncoderState, config: Option<&ContrastiveConfig>) -> Result<String> {
    let mut layers = store_layers("encoder", &state.encoder);
    layers.extend(store_layers("head", &state.head));
    let stored = StoredCheckpoint {
        format: CHECKPOINT_FORMAT.to_string(),
        version: CHECKPOINT_VERSION,
        architecture: state.architecture.clone(),
        encoding: state.encoding,
        library_size: state.library_size.get(),
        config: config.cloned(),
        layers,
        fingerprint: state.fingerprint(),
    };
    serde_json::to_string_pretty(&stored)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::InvalidConfig(e.to_string()))
}

pub fn save_checkpoint(path: &Path, state: &EncoderState, config: Option<&ContrastiveConfig>) -> Result<()> {
    write_atomic(path, checkpoint_to_string(state, config)?.as_bytes())
}

/// Parses checkpoint text; `origin` names the source in error messages.
pub fn checkpoint_from_str(text: &str, origin: &Path) -> Result<Checkpoint> {
    let fail = |message: String| Error::Checkpoint { path: origin.to_path_buf(), message };
    let stored: StoredCheckpoint = serde_json::from_str(text).map_err(|e| fail(e.to_string()))?;
    if stored.format != CHECKPOINT_FORMAT {
        return Err(fail(format!("unknown format {:?}", stored.format)));
    }
    if stored.version != CHECKPOINT_VERSION {
        return Err(fail(format!("unsupported version {}", stored.version)));
    }
    let arch = stored.architecture;
    arch.validate().map_err(|e| fail(e.to_string()))?;
    let library_size = LibrarySize::new(stored.library_size).map_err(|e| fail(e.to_string()))?;

    let enc_widths: Vec<usize> = std::iter::once(arch.input_dim).chain(arch.encoder.iter().copied()).collect();
    let head_widths: Vec<usize> =
        std::iter::once(arch.representation_dim()).chain(arch.head.iter().copied()).collect();
    let expected: Vec<(String, usize, usize)> = enc_widths
        .windows(2)
        .enumerate()
        .map(|(i, w)| (format!("encoder.{i}"), w[0], w[1]))
        .chain(head_widths.windows(2).enumerate().map(|(i, w)| (format!("head.{i}"), w[0], w[1])))
        .collect();
    if expected.len() != stored.layers.len() {
        return Err(fail(format!("expected {} layers, found {}", expected.len(), stored.layers.len())));
    }
    let mut dense = Vec::with_capacity(expected.len());
    for ((name, inputs, outputs), layer) in expected.into_iter().zip(&stored.layers) {
        if layer.name != name || layer.inputs != inputs || layer.outputs != outputs {
            return Err(fail(format!(
                "layer {:?} is {}x{}, expected {name:?} {outputs}x{inputs}",
                layer.name, layer.outputs, layer.inputs
            )));
        }
        let weights = decode_hex(&layer.weights, inputs * outputs).map_err(|m| fail(format!("{name}: {m}")))?;
        let bias = decode_hex(&layer.bias, outputs).map_err(|m| fail(format!("{name}: {m}")))?;
        dense.push(Dense { inputs, outputs, weights, bias });
    }
    let head_layers = dense.split_off(arch.encoder.len());
    let state = EncoderState {
        architecture: arch,
        encoding: stored.encoding,
        library_size,
        encoder: Mlp { layers: dense },
        head: Mlp { layers: head_layers },
    };
    if state.fingerprint() != stored.fingerprint {
        return Err(fail("parameter fingerprint mismatch".into()));
    }
    if !state.is_finite() {
        return Err(fail("non-finite parameter".into()));
    }
    Ok(Checkpoint { state, config: stored.config })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_str(&text, path)
}
