//! Single-artifact deployment path for time-to-first-spike (TTFS) spiking
//! classifiers.
//!
//! A network is defined with [`model`], quantized and exported into one
//! [`DeploymentArtifact`] (`.snna` file), and that same artifact is executed by
//! two independent runtimes:
//!
//! * [`reference`] — a dense, discrete-time integer simulation (the software
//!   reference) plus FP32/INT8 dense grouped-neuron baselines;
//! * [`accel`] — a deterministic event-driven model of a 16×128 core-group
//!   accelerator with an event router, connectivity-table lookup, grouped TTFS
//!   decoder and cycle counters.
//!
//! [`harness`] wires both into the measurement protocol: prediction-level
//! equivalence checking, scope-separated latency reports, spike-drop
//! robustness sweeps and repeatability runs.
//!
//! Real-valued math (training, quantization, dense baselines, latency
//! arithmetic) is generic over [`Scalar`]; the aliases below pin the common
//! choices.

pub mod accel;
pub mod artifact;
pub mod error;
pub mod harness;
pub mod model;
pub mod reference;
pub mod scalar;

pub use artifact::{
    artifact_digest, read_artifact, validate_artifact, write_artifact, ArtifactHeader,
    ConnectivityTable, DecodeMetadata, DeploymentArtifact, QuantizedWeights, ThresholdVector,
    ValidationLevel, ValidationReport,
};
pub use error::{Error, Result};
pub use model::{EncoderConfig, LayerSpec, NetworkSpec, NeuronConfig, SpikeEvent};
pub use reference::InferenceResult;
pub use scalar::Scalar;

/// Network definition in single precision, the deployed training domain.
pub type NetworkSpecF32 = model::NetworkSpec<f32>;
/// Network definition in double precision.
pub type NetworkSpecF64 = model::NetworkSpec<f64>;
/// Layer definition in single precision.
pub type LayerSpecF32 = model::LayerSpec<f32>;
/// Layer definition in double precision.
pub type LayerSpecF64 = model::LayerSpec<f64>;
/// Neuron parameters in single precision.
pub type NeuronConfigF32 = model::NeuronConfig<f32>;
/// Neuron parameters in double precision.
pub type NeuronConfigF64 = model::NeuronConfig<f64>;
