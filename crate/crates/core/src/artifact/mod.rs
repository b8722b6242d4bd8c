//! The deployment artifact: one immutable bundle of quantized weights,
//! thresholds, connectivity descriptors and grouped decode metadata, consumed
//! unchanged by every runtime.

mod format;
mod validate;

use std::ops::Range;

use sha2::{Digest, Sha256};

pub use format::{read_artifact, write_artifact, CHUNK_ORDER};
pub use validate::{validate_artifact, ValidationLevel, ValidationReport, Violation};

/// File magic, first four payload bytes of the `HDRR` chunk.
pub const MAGIC: [u8; 4] = *b"SNNA";
pub const FORMAT_VERSION: u16 = 1;
pub const DEFAULT_CLOCK_HZ: u32 = 80_000_000;
pub const FILE_EXTENSION: &str = "snna";

/// Neurons directly addressable by the event-processing fabric (16 groups of 128).
pub const EXECUTABLE_NEURONS: u32 = 2_048;
/// Neuron capacity of the encodable (storage) format.
pub const ENCODABLE_NEURONS: u32 = 4_890;
/// Packed-synapse capacity of the encodable format.
pub const ENCODABLE_SYNAPSES: usize = 843_776;
/// Exclusive upper bound on time steps expressible in a 13-bit packet field.
pub const MAX_EXECUTABLE_TIME_WINDOW: u32 = 1 << 13;

pub type DigestBytes = [u8; 32];

/// SHA-256 of `bytes`.
pub fn artifact_digest(bytes: &[u8]) -> DigestBytes {
    Sha256::digest(bytes).into()
}

pub fn digest_hex(digest: &DigestBytes) -> String {
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ArtifactFlags(pub u16);

impl ArtifactFlags {
    pub const ENCODABLE: ArtifactFlags = ArtifactFlags(0b01);
    pub const EXECUTABLE: ArtifactFlags = ArtifactFlags(0b10);
    pub const KNOWN_BITS: u16 = 0b11;

    pub fn contains(self, other: ArtifactFlags) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn with(self, other: ArtifactFlags) -> ArtifactFlags {
        ArtifactFlags(self.0 | other.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactHeader {
    pub magic: [u8; 4],
    pub version: u16,
    pub flags: ArtifactFlags,
    pub input_count: u32,
    pub output_count: u32,
    pub total_neurons: u32,
    /// Simulation window in time steps.
    pub time_window: u32,
    pub clock_hz: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Linear,
    Lif,
}

impl LayerKind {
    pub(crate) fn code(self) -> u8 {
        match self {
            LayerKind::Linear => 0,
            LayerKind::Lif => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(LayerKind::Linear),
            1 => Some(LayerKind::Lif),
            _ => None,
        }
    }
}

/// One stage of the exported graph. Leak and fire-once are meaningful for
/// LIF stages only and are written as (1, 1, false) for linear stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerDescriptor {
    pub kind: LayerKind,
    pub in_dim: u32,
    pub out_dim: u32,
    pub leak_num: u32,
    pub leak_den: u32,
    pub fire_once: bool,
}

/// INT8 weights, source-major: `values[source * cols + target]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedWeights {
    pub values: Vec<i8>,
    /// Real-domain units per integer step.
    pub scale: f32,
    pub rows: u32,
    pub cols: u32,
}

impl QuantizedWeights {
    pub fn row(&self, source: usize) -> &[i8] {
        let cols = self.cols as usize;
        &self.values[source * cols..(source + 1) * cols]
    }

    pub fn get(&self, source: usize, target: usize) -> i8 {
        self.values[source * self.cols as usize + target]
    }
}

/// Integer firing thresholds, one per non-input neuron, accumulator units.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ThresholdVector {
    pub values: Vec<i32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceDescriptor {
    pub offset: u32,
    pub count: u16,
}

impl SourceDescriptor {
    pub fn range(&self) -> Range<usize> {
        self.offset as usize..self.offset as usize + self.count as usize
    }
}

/// One packed synapse. `target` is a global neuron id, i.e. `group << 7 | lane`
/// for addresses inside the executable fabric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Synapse {
    pub target: u16,
    pub weight: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConnectivityTable {
    /// One record per input (source) neuron.
    pub descriptors: Vec<SourceDescriptor>,
    pub synapses: Vec<Synapse>,
}

impl ConnectivityTable {
    /// Packs every non-zero weight, sources in order, targets ascending.
    pub fn from_dense(weights: &QuantizedWeights, target_base: u32) -> Self {
        let mut descriptors = Vec::with_capacity(weights.rows as usize);
        let mut synapses = Vec::new();
        for source in 0..weights.rows as usize {
            let offset = synapses.len() as u32;
            for (col, &w) in weights.row(source).iter().enumerate() {
                if w != 0 {
                    synapses.push(Synapse { target: (target_base as usize + col) as u16, weight: w });
                }
            }
            let count = (synapses.len() as u32 - offset) as u16;
            descriptors.push(SourceDescriptor { offset, count });
        }
        ConnectivityTable { descriptors, synapses }
    }

    pub fn outgoing(&self, source: usize) -> &[Synapse] {
        self.descriptors
            .get(source)
            .map(|d| &self.synapses[d.range()])
            .unwrap_or(&[])
    }

    /// True when the packed synapses encode exactly the non-zero entries of
    /// `weights` (targets offset by `target_base`).
    pub fn matches_dense(&self, weights: &QuantizedWeights, target_base: u32) -> bool {
        if self.descriptors.len() != weights.rows as usize {
            return false;
        }
        (0..weights.rows as usize).all(|source| {
            let mut expected = vec![0i16; weights.cols as usize];
            for syn in self.outgoing(source) {
                let Some(col) = (syn.target as u32).checked_sub(target_base) else {
                    return false;
                };
                match expected.get_mut(col as usize) {
                    Some(slot) => *slot += syn.weight as i16,
                    None => return false,
                }
            }
            expected
                .iter()
                .zip(weights.row(source))
                .all(|(&e, &w)| e == w as i16)
        })
    }
}

/// Grouped TTFS readout: class `c` owns output neurons
/// `[output_base + c * group_size, output_base + (c + 1) * group_size)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeMetadata {
    pub num_classes: u32,
    pub group_size: u32,
    pub output_base: u32,
}

impl DecodeMetadata {
    pub fn class_range(&self, class: u32) -> Range<u32> {
        let start = self.output_base + class * self.group_size;
        start..start + self.group_size
    }

    pub fn class_of(&self, neuron: u32) -> Option<u32> {
        let rel = neuron.checked_sub(self.output_base)?;
        let class = rel / self.group_size.max(1);
        (class < self.num_classes).then_some(class)
    }

    pub fn output_count(&self) -> u32 {
        self.num_classes * self.group_size
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentArtifact {
    pub header: ArtifactHeader,
    pub layers: Vec<LayerDescriptor>,
    pub weights: QuantizedWeights,
    pub thresholds: ThresholdVector,
    pub connectivity: ConnectivityTable,
    pub decode: DecodeMetadata,
    pub digest: DigestBytes,
}

impl DeploymentArtifact {
    /// Canonical serialization of every chunk preceding `DIGE`.
    pub fn body_bytes(&self) -> Vec<u8> {
        format::encode_body(self)
    }

    pub fn computed_digest(&self) -> DigestBytes {
        artifact_digest(&self.body_bytes())
    }

    /// Recomputes and stores the digest; call after any field edit.
    pub fn seal(mut self) -> Self {
        self.digest = self.computed_digest();
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        format::encode_with_digest(self, &self.digest)
    }

    /// The LIF stage carrying leak parameters, if present.
    pub fn lif_stage(&self) -> Option<&LayerDescriptor> {
        self.layers.iter().find(|l| l.kind == LayerKind::Lif)
    }

    /// `(leak_num, leak_den)`; pure integrate-and-fire when no LIF stage exists.
    pub fn leak(&self) -> (u32, u32) {
        self.lif_stage().map(|l| (l.leak_num, l.leak_den)).unwrap_or((1, 1))
    }

    pub fn input_count(&self) -> usize {
        self.header.input_count as usize
    }

    pub fn output_count(&self) -> usize {
        self.header.output_count as usize
    }

    pub fn time_window(&self) -> u32 {
        self.header.time_window
    }

    /// Threshold of the non-input neuron with global id `neuron`.
    pub fn threshold_of(&self, neuron: u32) -> Option<i32> {
        let idx = neuron.checked_sub(self.header.input_count)?;
        self.thresholds.values.get(idx as usize).copied()
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// Hand-built artifact with `inputs` sources feeding `classes * group`
    /// outputs through the given dense source-major weights.
    pub fn artifact_from_parts(
        inputs: u32,
        classes: u32,
        group: u32,
        weights: Vec<i8>,
        thresholds: Vec<i32>,
        time_window: u32,
    ) -> DeploymentArtifact {
        let outputs = classes * group;
        let total = inputs + outputs;
        let weights = QuantizedWeights { values: weights, scale: 1.0, rows: inputs, cols: outputs };
        let connectivity = ConnectivityTable::from_dense(&weights, inputs);
        let mut flags = ArtifactFlags::ENCODABLE;
        if total <= EXECUTABLE_NEURONS {
            flags = flags.with(ArtifactFlags::EXECUTABLE);
        }
        DeploymentArtifact {
            header: ArtifactHeader {
                magic: MAGIC,
                version: FORMAT_VERSION,
                flags,
                input_count: inputs,
                output_count: outputs,
                total_neurons: total,
                time_window,
                clock_hz: DEFAULT_CLOCK_HZ,
            },
            layers: vec![
                LayerDescriptor {
                    kind: LayerKind::Linear,
                    in_dim: inputs,
                    out_dim: outputs,
                    leak_num: 1,
                    leak_den: 1,
                    fire_once: false,
                },
                LayerDescriptor {
                    kind: LayerKind::Lif,
                    in_dim: outputs,
                    out_dim: outputs,
                    leak_num: 1,
                    leak_den: 1,
                    fire_once: true,
                },
            ],
            weights,
            thresholds: ThresholdVector { values: thresholds },
            connectivity,
            decode: DecodeMetadata { num_classes: classes, group_size: group, output_base: inputs },
            digest: [0; 32],
        }
        .seal()
    }
}
