use super::InferenceResult;
use crate::artifact::{validate_artifact, DeploymentArtifact, ValidationLevel};
use crate::error::{Error, Result};
use crate::model::SpikeEvent;

/// Membrane state of one non-input neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NeuronState {
    pub potential: i64,
    pub first_spike: Option<u32>,
}

impl NeuronState {
    pub fn fired(&self) -> bool {
        self.first_spike.is_some()
    }
}

/// Checked `floor(p * num / den)`.
pub(crate) fn apply_leak(p: i64, num: u32, den: u32) -> Result<i64> {
    if num == den {
        return Ok(p);
    }
    p.checked_mul(num as i64)
        .map(|v| v.div_euclid(den as i64))
        .ok_or_else(|| Error::Arithmetic(format!("leak of potential {p} by {num}/{den} overflows")))
}

pub(crate) fn check_events(events: &[SpikeEvent], inputs: usize, window: u32) -> Result<()> {
    for (i, e) in events.iter().enumerate() {
        if e.neuron as usize >= inputs {
            return Err(Error::contract(format!("event {i}: neuron {} is not an input (< {inputs})", e.neuron)));
        }
        if e.time >= window {
            return Err(Error::contract(format!("event {i}: time {} outside window of {window} steps", e.time)));
        }
        if i > 0 && events[i - 1] >= *e {
            return Err(Error::contract(format!(
                "events not strictly sorted by (time, neuron) at index {i}: {:?} then {:?}",
                events[i - 1],
                e
            )));
        }
    }
    Ok(())
}

/// Dense time-stepped simulation over the artifact's `WGHT` block.
///
/// Each step, in order: every unfired neuron adds the weights of all inputs
/// spiking at that step; neurons with `potential >= threshold` fire and freeze;
/// the rest leak by `floor(p * num / den)`.
#[derive(Debug, Clone, Copy)]
pub struct TtfsReference<'a> {
    artifact: &'a DeploymentArtifact,
}

impl<'a> TtfsReference<'a> {
    pub fn new(artifact: &'a DeploymentArtifact) -> Result<Self> {
        let report = validate_artifact(artifact, ValidationLevel::Executable);
        if !report.is_valid() {
            return Err(Error::Validation(report));
        }
        Ok(TtfsReference { artifact })
    }

    pub fn artifact(&self) -> &'a DeploymentArtifact {
        self.artifact
    }

    /// Final state of every output neuron, indexed from the first output.
    pub fn simulate(&self, events: &[SpikeEvent]) -> Result<Vec<NeuronState>> {
        let a = self.artifact;
        check_events(events, a.input_count(), a.time_window())?;
        let (num, den) = a.leak();
        let thresholds = &a.thresholds.values;
        let mut state = vec![NeuronState::default(); a.output_count()];
        let mut next = 0;

        for t in 0..a.time_window() {
            while next < events.len() && events[next].time == t {
                let row = a.weights.row(events[next].neuron as usize);
                for (n, &w) in state.iter_mut().zip(row) {
                    if n.fired() {
                        continue;
                    }
                    n.potential = n.potential.checked_add(w as i64).ok_or_else(|| {
                        Error::Arithmetic(format!("accumulator overflow at step {t}"))
                    })?;
                }
                next += 1;
            }
            for (n, &theta) in state.iter_mut().zip(thresholds) {
                if n.fired() {
                    continue;
                }
                if n.potential >= theta as i64 {
                    n.first_spike = Some(t);
                } else {
                    n.potential = apply_leak(n.potential, num, den)?;
                }
            }
        }
        Ok(state)
    }

    pub fn run(&self, events: &[SpikeEvent]) -> Result<InferenceResult> {
        let a = self.artifact;
        let base = a.header.input_count;
        let mut spikes: Vec<SpikeEvent> = self
            .simulate(events)?
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.first_spike.map(|t| SpikeEvent::new(base + i as u32, t)))
            .collect();
        spikes.sort_unstable();
        Ok(InferenceResult::from_output_spikes(spikes, &a.decode))
    }
}

/// One-shot convenience around [`TtfsReference`].
pub fn run_ttfs_reference(artifact: &DeploymentArtifact, events: &[SpikeEvent]) -> Result<InferenceResult> {
    TtfsReference::new(artifact)?.run(events)
}
