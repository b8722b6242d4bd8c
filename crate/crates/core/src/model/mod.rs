//! Module-style network definition (`Sequential` of `Linear` + `LIF`), TTFS
//! input encoding, INT8 quantization and export to a [`DeploymentArtifact`].
//!
//! [`DeploymentArtifact`]: crate::artifact::DeploymentArtifact

mod encode;
mod export;
mod quantize;

pub use encode::{encode_ttfs, SpikeEvent};
pub use export::{export, export_with, ExportOptions};
pub use quantize::{quantize, quantize_layer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_TIME_WINDOW: u32 = 64;
pub const DEFAULT_INTENSITY_MAX: u8 = 255;
pub const DEFAULT_NUM_CLASSES: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    Linear,
    Lif,
}

/// One stage of a sequential network. Linear weights are stored
/// `out_dim × in_dim`, row-major (one row per output neuron).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec<T> {
    pub kind: StageKind,
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<T>,
}

impl<T: Scalar> LayerSpec<T> {
    pub fn linear(in_dim: usize, out_dim: usize, weights: Vec<T>) -> Self {
        LayerSpec { kind: StageKind::Linear, in_dim, out_dim, weights }
    }

    pub fn lif(dim: usize) -> Self {
        LayerSpec { kind: StageKind::Lif, in_dim: dim, out_dim: dim, weights: Vec::new() }
    }

    /// Weight from input `i` to output `o`.
    pub fn weight(&self, o: usize, i: usize) -> T {
        self.weights[o * self.in_dim + i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeuronConfig<T> {
    /// Firing threshold per spiking neuron, training-domain units.
    pub thresholds: Vec<T>,
    pub leak_num: u32,
    pub leak_den: u32,
    pub fire_once: bool,
}

impl<T: Scalar> NeuronConfig<T> {
    /// Pure integrate-and-fire, fire-once.
    pub fn ttfs(thresholds: Vec<T>) -> Self {
        NeuronConfig { thresholds, leak_num: 1, leak_den: 1, fire_once: true }
    }

    pub fn with_leak(mut self, num: u32, den: u32) -> Self {
        self.leak_num = num;
        self.leak_den = den;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderConfig {
    pub time_window: u32,
    pub intensity_max: u8,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig { time_window: DEFAULT_TIME_WINDOW, intensity_max: DEFAULT_INTENSITY_MAX }
    }
}

impl EncoderConfig {
    pub fn with_time_window(time_window: u32) -> Self {
        EncoderConfig { time_window, ..Self::default() }
    }
}

/// A validated `[Linear, LIF]` network plus the metadata export needs.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec<T> {
    pub stages: Vec<LayerSpec<T>>,
    pub neuron_config: NeuronConfig<T>,
    pub encoder: EncoderConfig,
    /// Class groups carved out of the output stage at export.
    pub num_classes: u32,
}

impl<T: Scalar> NetworkSpec<T> {
    pub fn linear(&self) -> &LayerSpec<T> {
        &self.stages[0]
    }

    pub fn in_dim(&self) -> usize {
        self.stages[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.stages[self.stages.len() - 1].out_dim
    }

    pub fn with_num_classes(mut self, num_classes: u32) -> Self {
        self.num_classes = num_classes;
        self
    }

    pub fn total_neurons(&self) -> usize {
        self.in_dim() + self.out_dim()
    }
}

/// Validates the stage chain and parameters and assembles a [`NetworkSpec`]
/// with the default ten class groups.
pub fn build_sequential<T: Scalar>(
    stages: Vec<LayerSpec<T>>,
    cfg: NeuronConfig<T>,
    enc: EncoderConfig,
) -> Result<NetworkSpec<T>> {
    let err = |msg: String| Err(Error::Construction(msg));

    if stages.is_empty() {
        return err("network has no stages".into());
    }
    for (i, pair) in stages.windows(2).enumerate() {
        if pair[0].out_dim != pair[1].in_dim {
            return err(format!(
                "stage {i} outputs {} but stage {} expects {}",
                pair[0].out_dim,
                i + 1,
                pair[1].in_dim
            ));
        }
    }
    for (i, s) in stages.iter().enumerate() {
        match s.kind {
            StageKind::Linear if s.weights.len() != s.in_dim * s.out_dim => {
                return err(format!(
                    "linear stage {i}: {} weights for a {}x{} matrix",
                    s.weights.len(),
                    s.out_dim,
                    s.in_dim
                ))
            }
            StageKind::Lif if s.in_dim != s.out_dim => {
                return err(format!("LIF stage {i} maps {} to {}", s.in_dim, s.out_dim))
            }
            _ => {}
        }
        if s.in_dim == 0 || s.out_dim == 0 {
            return err(format!("stage {i} has a zero dimension"));
        }
    }
    if stages.last().map(|s| s.kind) != Some(StageKind::Lif) {
        return err("TTFS output must be a spiking (LIF) stage".into());
    }
    let kinds: Vec<StageKind> = stages.iter().map(|s| s.kind).collect();
    if kinds != [StageKind::Linear, StageKind::Lif] {
        return err(format!("only a single linear stage followed by one LIF stage is deployable, got {kinds:?}"));
    }

    let out_dim = stages[1].out_dim;
    if cfg.thresholds.len() != out_dim {
        return err(format!("{} thresholds for {} spiking neurons", cfg.thresholds.len(), out_dim));
    }
    if let Some(i) = cfg.thresholds.iter().position(|&t| !(t.is_finite() && t > T::zero())) {
        return err(format!("threshold {i} must be finite and positive"));
    }
    if cfg.leak_den == 0 || cfg.leak_num > cfg.leak_den {
        return err(format!("leak {}/{} must satisfy num <= den, den > 0", cfg.leak_num, cfg.leak_den));
    }
    if !cfg.fire_once {
        return err("TTFS mode requires fire-once neurons".into());
    }
    if enc.time_window < 2 {
        return err(format!("time window {} must be at least 2", enc.time_window));
    }
    if enc.intensity_max == 0 {
        return err("intensity_max must be positive".into());
    }

    Ok(NetworkSpec { stages, neuron_config: cfg, encoder: enc, num_classes: DEFAULT_NUM_CLASSES })
}
