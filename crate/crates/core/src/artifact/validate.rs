use std::fmt;

use super::{
    ArtifactFlags, DeploymentArtifact, LayerKind, ENCODABLE_NEURONS, ENCODABLE_SYNAPSES, EXECUTABLE_NEURONS,
    FORMAT_VERSION, MAGIC, MAX_EXECUTABLE_TIME_WINDOW,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationLevel {
    /// Storable in the artifact format (4,890 neurons, 843,776 synapses).
    Encodable,
    /// Runnable on the 16×128 fabric (2,048 neurons, 13-bit time steps).
    Executable,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    BadMagic([u8; 4]),
    UnsupportedVersion(u16),
    UnknownFlags(u16),
    MissingFlag(&'static str),
    ZeroTimeWindow,
    ZeroClock,
    NeuronCountMismatch { declared: u32, inputs: u32, outputs: u32 },
    TooManyNeurons { declared: u32, limit: u32 },
    TooManySynapses { count: usize, limit: usize },
    TimeWindowTooLong { window: u32, limit: u32 },
    LayerChain(String),
    BadLeak { num: u32, den: u32 },
    FireOnceRequired,
    WeightShape { rows: u32, cols: u32, len: usize, expected_rows: u32, expected_cols: u32 },
    WeightOutOfRange { index: usize, value: i8 },
    BadScale(f32),
    ThresholdCount { found: usize, expected: u32 },
    NonPositiveThreshold { neuron: u32, value: i32 },
    DescriptorCount { found: usize, expected: u32 },
    DescriptorOutOfBounds { source: usize, end: usize, synapses: usize },
    DescriptorOverlap { source: usize },
    TargetOutOfRange { synapse: usize, target: u16 },
    TargetNotMapped { synapse: usize, target: u16, limit: u32 },
    SynapseWeightOutOfRange { synapse: usize, value: i8 },
    DecodePartition(String),
    StaleDigest,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            BadMagic(m) => write!(f, "magic {m:02x?} is not \"SNNA\""),
            UnsupportedVersion(v) => write!(f, "version {v} is not {FORMAT_VERSION}"),
            UnknownFlags(bits) => write!(f, "unknown flag bits {bits:#06x}"),
            MissingFlag(name) => write!(f, "{name} flag not set"),
            ZeroTimeWindow => write!(f, "time window must be at least 1"),
            ZeroClock => write!(f, "clock_hz must be positive"),
            NeuronCountMismatch { declared, inputs, outputs } => {
                write!(f, "total_neurons {declared} != inputs {inputs} + outputs {outputs}")
            }
            TooManyNeurons { declared, limit } => write!(f, "{declared} neurons exceed limit {limit}"),
            TooManySynapses { count, limit } => write!(f, "{count} synapses exceed limit {limit}"),
            TimeWindowTooLong { window, limit } => write!(f, "time window {window} exceeds {limit} steps"),
            LayerChain(msg) => write!(f, "layer chain: {msg}"),
            BadLeak { num, den } => write!(f, "leak {num}/{den} must satisfy num <= den, den > 0"),
            FireOnceRequired => write!(f, "LIF stage must be fire-once in TTFS mode"),
            WeightShape { rows, cols, len, expected_rows, expected_cols } => write!(
                f,
                "weight block {rows}x{cols} with {len} values, expected {expected_rows}x{expected_cols}"
            ),
            WeightOutOfRange { index, value } => write!(f, "weight[{index}] = {value} outside [-127, 127]"),
            BadScale(s) => write!(f, "weight scale {s} must be finite and positive"),
            ThresholdCount { found, expected } => write!(f, "{found} thresholds, expected {expected}"),
            NonPositiveThreshold { neuron, value } => write!(f, "threshold of neuron {neuron} is {value}"),
            DescriptorCount { found, expected } => write!(f, "{found} source descriptors, expected {expected}"),
            DescriptorOutOfBounds { source, end, synapses } => {
                write!(f, "descriptor of source {source} ends at {end} past {synapses} synapses")
            }
            DescriptorOverlap { source } => write!(f, "descriptor of source {source} overlaps another range"),
            TargetOutOfRange { synapse, target } => {
                write!(f, "synapse {synapse} targets {target}, not a non-input neuron")
            }
            TargetNotMapped { synapse, target, limit } => {
                write!(f, "synapse {synapse} targets {target}, outside the {limit}-neuron fabric")
            }
            SynapseWeightOutOfRange { synapse, value } => {
                write!(f, "synapse {synapse} weight {value} outside [-127, 127]")
            }
            DecodePartition(msg) => write!(f, "decode metadata: {msg}"),
            StaleDigest => write!(f, "stored digest does not match the serialized body"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub level: ValidationLevel,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} level:", self.level)?;
        if self.violations.is_empty() {
            return write!(f, " ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            write!(f, "{}{v}", if i == 0 { " " } else { "; " })?;
        }
        Ok(())
    }
}

/// Lists every invariant `artifact` violates at `level`. The dense weight
/// block and the packed synapses are checked independently; their agreement is
/// an exporter guarantee (see [`super::ConnectivityTable::matches_dense`]).
pub fn validate_artifact(artifact: &DeploymentArtifact, level: ValidationLevel) -> ValidationReport {
    let mut v = Vec::new();
    let h = &artifact.header;
    let executable = level == ValidationLevel::Executable;

    if h.magic != MAGIC {
        v.push(Violation::BadMagic(h.magic));
    }
    if h.version != FORMAT_VERSION {
        v.push(Violation::UnsupportedVersion(h.version));
    }
    if h.flags.0 & !ArtifactFlags::KNOWN_BITS != 0 {
        v.push(Violation::UnknownFlags(h.flags.0));
    }
    if !h.flags.contains(ArtifactFlags::ENCODABLE) {
        v.push(Violation::MissingFlag("encodable"));
    }
    if executable && !h.flags.contains(ArtifactFlags::EXECUTABLE) {
        v.push(Violation::MissingFlag("executable"));
    }
    if h.time_window == 0 {
        v.push(Violation::ZeroTimeWindow);
    }
    if h.clock_hz == 0 {
        v.push(Violation::ZeroClock);
    }
    if h.input_count.checked_add(h.output_count) != Some(h.total_neurons) {
        v.push(Violation::NeuronCountMismatch {
            declared: h.total_neurons,
            inputs: h.input_count,
            outputs: h.output_count,
        });
    }

    // Capacity gates. The executable flag is a claim about the fabric, so it is
    // checked against the fabric limits at either level.
    if h.total_neurons > ENCODABLE_NEURONS {
        v.push(Violation::TooManyNeurons { declared: h.total_neurons, limit: ENCODABLE_NEURONS });
    }
    let claims_fabric = executable || h.flags.contains(ArtifactFlags::EXECUTABLE);
    if claims_fabric && h.total_neurons > EXECUTABLE_NEURONS {
        v.push(Violation::TooManyNeurons { declared: h.total_neurons, limit: EXECUTABLE_NEURONS });
    }
    if claims_fabric && h.time_window > MAX_EXECUTABLE_TIME_WINDOW {
        v.push(Violation::TimeWindowTooLong { window: h.time_window, limit: MAX_EXECUTABLE_TIME_WINDOW });
    }
    let n_syn = artifact.connectivity.synapses.len();
    if n_syn > ENCODABLE_SYNAPSES {
        v.push(Violation::TooManySynapses { count: n_syn, limit: ENCODABLE_SYNAPSES });
    }

    check_layers(artifact, &mut v);
    check_weights(artifact, &mut v);
    check_thresholds(artifact, &mut v);
    check_connectivity(artifact, claims_fabric, &mut v);
    check_decode(artifact, &mut v);

    if artifact.computed_digest() != artifact.digest {
        v.push(Violation::StaleDigest);
    }

    ValidationReport { level, violations: v }
}

fn check_layers(a: &DeploymentArtifact, v: &mut Vec<Violation>) {
    let h = &a.header;
    match a.layers.as_slice() {
        [linear, lif] if linear.kind == LayerKind::Linear && lif.kind == LayerKind::Lif => {
            if linear.in_dim != h.input_count || linear.out_dim != h.output_count {
                v.push(Violation::LayerChain(format!(
                    "linear {}->{} does not match header {}->{}",
                    linear.in_dim, linear.out_dim, h.input_count, h.output_count
                )));
            }
            if lif.in_dim != linear.out_dim || lif.out_dim != lif.in_dim {
                v.push(Violation::LayerChain(format!(
                    "LIF {}->{} does not follow linear output {}",
                    lif.in_dim, lif.out_dim, linear.out_dim
                )));
            }
            if lif.leak_den == 0 || lif.leak_num > lif.leak_den {
                v.push(Violation::BadLeak { num: lif.leak_num, den: lif.leak_den });
            }
            if !lif.fire_once {
                v.push(Violation::FireOnceRequired);
            }
        }
        other => v.push(Violation::LayerChain(format!(
            "expected [linear, lif], found {:?}",
            other.iter().map(|l| l.kind).collect::<Vec<_>>()
        ))),
    }
}

fn check_weights(a: &DeploymentArtifact, v: &mut Vec<Violation>) {
    let w = &a.weights;
    let h = &a.header;
    if w.rows != h.input_count
        || w.cols != h.output_count
        || (w.rows as usize).checked_mul(w.cols as usize) != Some(w.values.len())
    {
        v.push(Violation::WeightShape {
            rows: w.rows,
            cols: w.cols,
            len: w.values.len(),
            expected_rows: h.input_count,
            expected_cols: h.output_count,
        });
    }
    if let Some(index) = w.values.iter().position(|&x| x == i8::MIN) {
        v.push(Violation::WeightOutOfRange { index, value: i8::MIN });
    }
    let all_zero = w.values.iter().all(|&x| x == 0);
    if !w.scale.is_finite() || w.scale < 0.0 || (w.scale == 0.0 && !all_zero) {
        v.push(Violation::BadScale(w.scale));
    }
}

fn check_thresholds(a: &DeploymentArtifact, v: &mut Vec<Violation>) {
    let h = &a.header;
    let expected = h.total_neurons.saturating_sub(h.input_count);
    if a.thresholds.values.len() != expected as usize {
        v.push(Violation::ThresholdCount { found: a.thresholds.values.len(), expected });
    }
    if let Some((i, &value)) = a.thresholds.values.iter().enumerate().find(|(_, &t)| t <= 0) {
        v.push(Violation::NonPositiveThreshold { neuron: h.input_count + i as u32, value });
    }
}

fn check_connectivity(a: &DeploymentArtifact, claims_fabric: bool, v: &mut Vec<Violation>) {
    let h = &a.header;
    let c = &a.connectivity;
    if c.descriptors.len() != h.input_count as usize {
        v.push(Violation::DescriptorCount { found: c.descriptors.len(), expected: h.input_count });
    }

    let mut ranges: Vec<(usize, usize, usize)> = Vec::with_capacity(c.descriptors.len());
    for (source, d) in c.descriptors.iter().enumerate() {
        let r = d.range();
        if r.end > c.synapses.len() {
            v.push(Violation::DescriptorOutOfBounds { source, end: r.end, synapses: c.synapses.len() });
        } else if !r.is_empty() {
            ranges.push((r.start, r.end, source));
        }
    }
    ranges.sort_unstable();
    if let Some(w) = ranges.windows(2).find(|w| w[1].0 < w[0].1) {
        v.push(Violation::DescriptorOverlap { source: w[1].2 });
    }

    // Report the first offender of each kind; the full list can be millions long.
    if let Some((synapse, s)) = c
        .synapses
        .iter()
        .enumerate()
        .find(|(_, s)| (s.target as u32) < h.input_count || s.target as u32 >= h.total_neurons)
    {
        v.push(Violation::TargetOutOfRange { synapse, target: s.target });
    }
    if claims_fabric {
        if let Some((synapse, s)) = c.synapses.iter().enumerate().find(|(_, s)| s.target as u32 >= EXECUTABLE_NEURONS) {
            v.push(Violation::TargetNotMapped { synapse, target: s.target, limit: EXECUTABLE_NEURONS });
        }
    }
    if let Some((synapse, s)) = c.synapses.iter().enumerate().find(|(_, s)| s.weight == i8::MIN) {
        v.push(Violation::SynapseWeightOutOfRange { synapse, value: s.weight });
    }
}

fn check_decode(a: &DeploymentArtifact, v: &mut Vec<Violation>) {
    let d = &a.decode;
    let h = &a.header;
    if d.num_classes == 0 || d.group_size == 0 {
        v.push(Violation::DecodePartition(format!("{} classes of {} neurons", d.num_classes, d.group_size)));
        return;
    }
    if d.num_classes.checked_mul(d.group_size) != Some(h.output_count) {
        v.push(Violation::DecodePartition(format!(
            "{} classes x {} neurons != {} outputs",
            d.num_classes, d.group_size, h.output_count
        )));
    }
    if d.output_base != h.input_count {
        v.push(Violation::DecodePartition(format!(
            "output_base {} is not the first output neuron {}",
            d.output_base, h.input_count
        )));
    }
}
