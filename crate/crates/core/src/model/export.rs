use super::{quantize, NetworkSpec};
use crate::artifact::{
    validate_artifact, ArtifactFlags, ArtifactHeader, ConnectivityTable, DecodeMetadata, DeploymentArtifact,
    LayerDescriptor, LayerKind, ValidationLevel, ValidationReport, Violation, DEFAULT_CLOCK_HZ, ENCODABLE_NEURONS,
    ENCODABLE_SYNAPSES, FORMAT_VERSION, MAGIC,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExportOptions {
    pub clock_hz: u32,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions { clock_hz: DEFAULT_CLOCK_HZ }
    }
}

/// Quantizes `net` and packs it into a sealed artifact with the default clock.
pub fn export<T: Scalar>(net: &NetworkSpec<T>) -> Result<DeploymentArtifact> {
    export_with(net, ExportOptions::default())
}

/// Like [`export`] with an explicit clock. The executable flag is set exactly
/// when the result also validates at executable level.
pub fn export_with<T: Scalar>(net: &NetworkSpec<T>, opts: ExportOptions) -> Result<DeploymentArtifact> {
    let inputs = net.in_dim();
    let outputs = net.out_dim();
    let num_classes = net.num_classes as usize;
    if num_classes == 0 || !outputs.is_multiple_of(num_classes) {
        return Err(Error::Construction(format!(
            "{outputs} output neurons cannot be split into {num_classes} equal class groups"
        )));
    }

    // Gate capacity before packing so oversized nets never reach the u16 fields.
    let total = inputs + outputs;
    let nonzero = net.linear().weights.iter().filter(|w| **w != T::zero()).count();
    let mut early = Vec::new();
    if total > ENCODABLE_NEURONS as usize {
        early.push(Violation::TooManyNeurons { declared: total.min(u32::MAX as usize) as u32, limit: ENCODABLE_NEURONS });
    }
    if nonzero > ENCODABLE_SYNAPSES {
        early.push(Violation::TooManySynapses { count: nonzero, limit: ENCODABLE_SYNAPSES });
    }
    if !early.is_empty() {
        return Err(Error::Validation(ValidationReport { level: ValidationLevel::Encodable, violations: early }));
    }

    let (weights, thresholds) = quantize(net)?;
    let connectivity = ConnectivityTable::from_dense(&weights, inputs as u32);
    let cfg = &net.neuron_config;
    let layers = vec![
        LayerDescriptor {
            kind: LayerKind::Linear,
            in_dim: inputs as u32,
            out_dim: outputs as u32,
            leak_num: 1,
            leak_den: 1,
            fire_once: false,
        },
        LayerDescriptor {
            kind: LayerKind::Lif,
            in_dim: outputs as u32,
            out_dim: outputs as u32,
            leak_num: cfg.leak_num,
            leak_den: cfg.leak_den,
            fire_once: cfg.fire_once,
        },
    ];
    let mut artifact = DeploymentArtifact {
        header: ArtifactHeader {
            magic: MAGIC,
            version: FORMAT_VERSION,
            flags: ArtifactFlags::ENCODABLE.with(ArtifactFlags::EXECUTABLE),
            input_count: inputs as u32,
            output_count: outputs as u32,
            total_neurons: total as u32,
            time_window: net.encoder.time_window,
            clock_hz: opts.clock_hz,
        },
        layers,
        weights,
        thresholds,
        connectivity,
        decode: DecodeMetadata {
            num_classes: num_classes as u32,
            group_size: (outputs / num_classes) as u32,
            output_base: inputs as u32,
        },
        digest: [0; 32],
    }
    .seal();

    if !validate_artifact(&artifact, ValidationLevel::Executable).is_valid() {
        artifact.header.flags = ArtifactFlags::ENCODABLE;
        artifact = artifact.seal();
    }
    let report = validate_artifact(&artifact, ValidationLevel::Encodable);
    if !report.is_valid() {
        return Err(Error::Validation(report));
    }
    Ok(artifact)
}
