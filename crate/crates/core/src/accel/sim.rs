use super::{AccelConfig, CycleCounters, CycleMode, Direction, EventPacket, GroupedTtfsDecoder, NUM_GROUPS};
use crate::artifact::{validate_artifact, DeploymentArtifact, ValidationLevel};
use crate::error::{Error, Result};
use crate::reference::InferenceResult;

const LANE_MASK: u32 = 0x7F;

/// Per-image fabric state. Lanes are addressed by global neuron id.
struct Fabric {
    potential: Vec<i64>,
    /// Step at whose start `potential` is current (leak applied up to here).
    synced: Vec<u32>,
    fired: [u128; NUM_GROUPS as usize],
    touched: [u128; NUM_GROUPS as usize],
}

impl Fabric {
    fn new(neurons: usize) -> Self {
        Fabric {
            potential: vec![0; neurons],
            synced: vec![0; neurons],
            fired: [0; NUM_GROUPS as usize],
            touched: [0; NUM_GROUPS as usize],
        }
    }
}

/// Event-driven execution of an executable artifact.
///
/// Input packets are processed time step by time step. For every packet the
/// router walks the source's `CONN` descriptor and delivers weights to target
/// lanes, bringing each lane's deferred leak up to date on first touch. Only
/// touched lanes are threshold-checked: an untouched lane's potential can only
/// have decayed toward zero since its last check, so it cannot cross a
/// positive threshold.
#[derive(Debug, Clone)]
pub struct Accelerator<'a> {
    artifact: &'a DeploymentArtifact,
    cfg: AccelConfig,
}

impl<'a> Accelerator<'a> {
    pub fn new(artifact: &'a DeploymentArtifact, cfg: AccelConfig) -> Result<Self> {
        cfg.check()?;
        let report = validate_artifact(artifact, ValidationLevel::Executable);
        if !report.is_valid() {
            return Err(Error::Validation(report));
        }
        Ok(Accelerator { artifact, cfg })
    }

    pub fn config(&self) -> &AccelConfig {
        &self.cfg
    }

    fn check_packets(&self, packets: &[EventPacket]) -> Result<()> {
        let a = self.artifact;
        for (i, p) in packets.iter().enumerate() {
            if p.direction() != Direction::Input {
                return Err(Error::Routing(format!("packet {i} ({:#010x}) is not an input packet", p.word())));
            }
            if p.neuron() >= a.header.input_count {
                return Err(Error::Routing(format!("packet {i}: neuron {} is not an input", p.neuron())));
            }
            if p.time() >= a.time_window() {
                return Err(Error::Routing(format!("packet {i}: step {} beyond window {}", p.time(), a.time_window())));
            }
            if i > 0 {
                let prev = packets[i - 1];
                if (prev.time(), prev.neuron()) >= (p.time(), p.neuron()) {
                    return Err(Error::Routing(format!("packet {i} out of (time, neuron) order")));
                }
            }
        }
        Ok(())
    }

    fn catch_up(&self, p: i64, steps: u32) -> Result<i64> {
        let (num, den) = self.artifact.leak();
        let mut p = p;
        for _ in 0..steps {
            let next = crate::reference::apply_leak(p, num, den)?;
            if next == p {
                break;
            }
            p = next;
        }
        Ok(p)
    }

    pub fn run(&self, packets: &[EventPacket]) -> Result<InferenceResult> {
        self.check_packets(packets)?;
        let a = self.artifact;
        let (num, den) = a.leak();
        let inputs = a.header.input_count;
        let mut fab = Fabric::new(a.header.total_neurons as usize);
        let mut decoder = GroupedTtfsDecoder::new(a.decode);

        let mut step_cycles = 0u64;
        let mut first_spike_step_cycles = None;
        let mut routed = 0u64;

        let mut i = 0;
        while i < packets.len() {
            let t = packets[i].time();
            fab.touched = [0; NUM_GROUPS as usize];
            while i < packets.len() && packets[i].time() == t {
                let synapses = a.connectivity.outgoing(packets[i].neuron() as usize);
                if !synapses.is_empty() {
                    routed += 1;
                }
                for s in synapses {
                    let n = s.target as usize;
                    let (g, bit) = ((s.target >> 7) as usize, 1u128 << (s.target as u32 & LANE_MASK));
                    if fab.fired[g] & bit != 0 {
                        continue;
                    }
                    if fab.touched[g] & bit == 0 {
                        fab.potential[n] = self.catch_up(fab.potential[n], t - fab.synced[n])?;
                        fab.synced[n] = t;
                        fab.touched[g] |= bit;
                    }
                    fab.potential[n] = fab.potential[n]
                        .checked_add(s.weight as i64)
                        .ok_or_else(|| Error::Arithmetic(format!("accumulator overflow at step {t}")))?;
                }
                i += 1;
            }

            let cycles_before = step_cycles;
            for g in 0..NUM_GROUPS as usize {
                let mut mask = fab.touched[g];
                if mask == 0 {
                    continue;
                }
                step_cycles += 1;
                while mask != 0 {
                    let lane = mask.trailing_zeros();
                    mask &= mask - 1;
                    let id = (g as u32) << 7 | lane;
                    let n = id as usize;
                    let theta = a.thresholds.values[(id - inputs) as usize] as i64;
                    if fab.potential[n] >= theta {
                        fab.fired[g] |= 1u128 << lane;
                        first_spike_step_cycles.get_or_insert(cycles_before);
                        decoder.push(EventPacket::new(g as u32, lane, t, Direction::Output)?)?;
                    } else {
                        fab.potential[n] = crate::reference::apply_leak(fab.potential[n], num, den)?;
                        fab.synced[n] = t + 1;
                    }
                }
            }
        }

        let fill = self.cfg.pipeline_fill_cycles;
        let counters = match self.cfg.cycle_mode {
            CycleMode::Deployed => CycleCounters {
                first_spike_cycles: first_spike_step_cycles.map(|_| fill),
                service_cycles: self.cfg.service_interval_cycles,
                total_cycles: fill + self.cfg.service_interval_cycles,
                events_routed: routed,
            },
            CycleMode::Measured => CycleCounters {
                first_spike_cycles: first_spike_step_cycles.map(|c| fill + c),
                service_cycles: step_cycles,
                total_cycles: fill + step_cycles,
                events_routed: routed,
            },
        };
        let mut result = decoder.finish();
        result.counters = Some(counters);
        Ok(result)
    }
}

/// One-shot convenience around [`Accelerator`].
pub fn run_accelerator(
    artifact: &DeploymentArtifact,
    packets: &[EventPacket],
    cfg: &AccelConfig,
) -> Result<InferenceResult> {
    Accelerator::new(artifact, *cfg)?.run(packets)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchResult {
    pub results: Vec<InferenceResult>,
    /// `total_cycles = fill + Σ service`; `service_cycles` is that sum.
    pub counters: CycleCounters,
}

/// Streams images back to back through one pipeline: fill is paid once, then
/// each image costs its service interval.
pub fn stream_batch(
    artifact: &DeploymentArtifact,
    images: &[Vec<EventPacket>],
    cfg: &AccelConfig,
) -> Result<BatchResult> {
    if images.is_empty() {
        return Err(Error::contract("stream needs at least one image"));
    }
    let acc = Accelerator::new(artifact, *cfg)?;
    let fill = cfg.pipeline_fill_cycles;
    let mut agg = CycleCounters::default();
    let mut results = Vec::with_capacity(images.len());
    for packets in images {
        let r = acc.run(packets)?;
        let c = r.counters.expect("accelerator always fills counters");
        if agg.first_spike_cycles.is_none() {
            agg.first_spike_cycles = c.first_spike_cycles.map(|f| agg.service_cycles + f);
        }
        agg.service_cycles += c.service_cycles;
        agg.events_routed += c.events_routed;
        results.push(r);
    }
    agg.total_cycles = fill + agg.service_cycles;
    Ok(BatchResult { results, counters: agg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accel::pack_events;
    use crate::artifact::testing::artifact_from_parts;
    use crate::model::SpikeEvent;
    use crate::reference::run_ttfs_reference;

    fn packets(ev: &[SpikeEvent]) -> Vec<EventPacket> {
        pack_events(ev).unwrap()
    }

    #[test]
    fn single_synapse_toy_trace() {
        let a = artifact_from_parts(1, 1, 1, vec![127], vec![100], 64);
        for mode in [CycleMode::Deployed, CycleMode::Measured] {
            let r = run_accelerator(&a, &packets(&[SpikeEvent::new(0, 0)]), &AccelConfig::with_mode(mode)).unwrap();
            assert_eq!(r.class_first_spikes, vec![Some(0)]);
            let c = r.counters.unwrap();
            assert_eq!(c.first_spike_cycles, Some(12));
            assert_eq!(c.events_routed, 1);
        }
    }

    #[test]
    fn empty_stream() {
        let a = artifact_from_parts(2, 2, 1, vec![1, 2, 3, 4], vec![1, 1], 8);
        let r = run_accelerator(&a, &[], &AccelConfig::default()).unwrap();
        assert!(r.no_spike);
        assert_eq!(r.label, 0);
        let c = r.counters.unwrap();
        assert_eq!((c.events_routed, c.first_spike_cycles), (0, None));
    }

    #[test]
    fn measured_cycles_count_touched_groups() {
        // 200 inputs, 2 outputs at ids 200 and 201 (group 1). Inputs 0 and 1
        // spike at t=0 and t=5; neuron 201 needs both.
        let mut w = vec![0i8; 400];
        w[0] = 50; // 0 -> 200
        w[1] = 30; // 0 -> 201
        w[3] = 30; // 1 -> 201
        let a = artifact_from_parts(200, 2, 1, w, vec![40, 60], 16);
        let r = run_accelerator(
            &a,
            &packets(&[SpikeEvent::new(0, 0), SpikeEvent::new(1, 5), SpikeEvent::new(7, 5)]),
            &AccelConfig::with_mode(CycleMode::Measured),
        )
        .unwrap();
        let c = r.counters.unwrap();
        assert_eq!(r.class_first_spikes, vec![Some(0), Some(5)]);
        assert_eq!(c.service_cycles, 2);
        assert_eq!(c.total_cycles, 14);
        assert_eq!(c.first_spike_cycles, Some(12));
        assert_eq!(c.events_routed, 2);
    }

    #[test]
    fn lazy_leak_matches_reference() {
        let mut a = artifact_from_parts(3, 1, 2, vec![90, -40, 50, 70, 30, 30], vec![100, 120], 32);
        a.layers[1].leak_num = 3;
        a.layers[1].leak_den = 4;
        let a = a.seal();
        let ev = [SpikeEvent::new(0, 0), SpikeEvent::new(1, 3), SpikeEvent::new(2, 9)];
        let r = run_accelerator(&a, &packets(&ev), &AccelConfig::default()).unwrap();
        let reference = run_ttfs_reference(&a, &ev).unwrap();
        assert_eq!(r.prediction(), reference.prediction());
        assert_eq!(r.output_spikes, reference.output_spikes);
    }

    #[test]
    fn second_image_adds_one_service_interval() {
        let a = artifact_from_parts(2, 1, 1, vec![5, 5], vec![5], 8);
        let img = packets(&[SpikeEvent::new(0, 1)]);
        let one = stream_batch(&a, std::slice::from_ref(&img), &AccelConfig::default()).unwrap();
        let two = stream_batch(&a, &[img.clone(), img], &AccelConfig::default()).unwrap();
        assert_eq!(one.counters.total_cycles, 23);
        assert_eq!(two.counters.total_cycles - one.counters.total_cycles, 11);
        assert_eq!(two.results[0], two.results[1]);
    }

    #[test]
    fn routing_errors() {
        let a = artifact_from_parts(2, 1, 1, vec![5, 5], vec![5], 8);
        let acc = Accelerator::new(&a, AccelConfig::default()).unwrap();
        let out = EventPacket::new(0, 0, 0, Direction::Output).unwrap();
        assert!(matches!(acc.run(&[out]), Err(Error::Routing(_))));
        assert!(matches!(acc.run(&packets(&[SpikeEvent::new(2, 0)])), Err(Error::Routing(_))));
        assert!(matches!(acc.run(&packets(&[SpikeEvent::new(0, 8)])), Err(Error::Routing(_))));
        assert!(matches!(
            acc.run(&packets(&[SpikeEvent::new(0, 3), SpikeEvent::new(1, 2)])),
            Err(Error::Routing(_))
        ));
    }

    #[test]
    fn non_executable_artifact_is_rejected() {
        let a = artifact_from_parts(1, 1, 1, vec![1], vec![1], 9000);
        assert!(matches!(Accelerator::new(&a, AccelConfig::default()), Err(Error::Validation(_))));
    }
}
