//! Software reference paths: the dense discrete-time TTFS simulation every
//! other runtime must reproduce, and dense grouped-neuron baselines.

mod dense;
mod ttfs;

pub use dense::{run_dense_baseline, DenseBaseline, DenseMode};
pub use ttfs::{run_ttfs_reference, NeuronState, TtfsReference};
pub(crate) use ttfs::apply_leak;

use crate::accel::CycleCounters;
use crate::artifact::DecodeMetadata;
use crate::model::SpikeEvent;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceResult {
    pub label: u32,
    /// Earliest first-spike time over each class group, `None` if silent.
    pub class_first_spikes: Vec<Option<u32>>,
    pub no_spike: bool,
    /// Every output spike, ordered by `(time, neuron)`. Empty for dense
    /// baselines.
    pub output_spikes: Vec<SpikeEvent>,
    pub counters: Option<CycleCounters>,
}

impl InferenceResult {
    /// The fields two runtimes must agree on.
    pub fn prediction(&self) -> (u32, bool, &[Option<u32>]) {
        (self.label, self.no_spike, &self.class_first_spikes)
    }

    pub(crate) fn from_output_spikes(output_spikes: Vec<SpikeEvent>, decode: &DecodeMetadata) -> Self {
        let (class_first_spikes, counts) = class_summary(&output_spikes, decode);
        let (label, no_spike) = decode_grouped_ttfs(&class_first_spikes, &counts);
        InferenceResult { label, class_first_spikes, no_spike, output_spikes, counters: None }
    }
}

/// Per-class earliest spike time and how many of the class's neurons fired at
/// that time. `spikes` may be in any order.
pub fn class_summary(spikes: &[SpikeEvent], decode: &DecodeMetadata) -> (Vec<Option<u32>>, Vec<u32>) {
    let n = decode.num_classes as usize;
    let mut first: Vec<Option<u32>> = vec![None; n];
    let mut counts = vec![0u32; n];
    for s in spikes {
        let Some(c) = decode.class_of(s.neuron) else { continue };
        let c = c as usize;
        match first[c] {
            Some(t) if t < s.time => {}
            Some(t) if t == s.time => counts[c] += 1,
            _ => {
                first[c] = Some(s.time);
                counts[c] = 1;
            }
        }
    }
    (first, counts)
}

/// Grouped TTFS readout. Earliest class wins; equal times go to the class
/// with more neurons firing at that time, then to the lowest index. No spikes
/// at all gives `(0, true)`.
pub fn decode_grouped_ttfs(class_first_spikes: &[Option<u32>], spike_counts_at_min: &[u32]) -> (u32, bool) {
    let mut best: Option<(u32, u32, usize)> = None;
    for (c, t) in class_first_spikes.iter().enumerate() {
        let Some(t) = *t else { continue };
        let count = spike_counts_at_min.get(c).copied().unwrap_or(0);
        let better = match best {
            None => true,
            Some((bt, bc, _)) => t < bt || (t == bt && count > bc),
        };
        if better {
            best = Some((t, count, c));
        }
    }
    match best {
        Some((_, _, c)) => (c as u32, false),
        None => (0, true),
    }
}
