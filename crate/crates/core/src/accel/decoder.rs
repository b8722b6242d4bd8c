use super::{Direction, EventPacket};
use crate::artifact::DecodeMetadata;
use crate::error::{Error, Result};
use crate::model::SpikeEvent;
use crate::reference::{decode_grouped_ttfs, InferenceResult};

/// Streaming grouped readout fed with output packets in `(time, group, lane)`
/// order. Keeps per-class earliest time and the number of neurons firing at it.
#[derive(Debug, Clone)]
pub struct GroupedTtfsDecoder {
    decode: DecodeMetadata,
    first: Vec<Option<u32>>,
    counts: Vec<u32>,
    spikes: Vec<SpikeEvent>,
    last: Option<EventPacket>,
}

impl GroupedTtfsDecoder {
    pub fn new(decode: DecodeMetadata) -> Self {
        let n = decode.num_classes as usize;
        GroupedTtfsDecoder { decode, first: vec![None; n], counts: vec![0; n], spikes: Vec::new(), last: None }
    }

    pub fn push(&mut self, p: EventPacket) -> Result<()> {
        if p.direction() != Direction::Output {
            return Err(Error::Routing(format!("decoder received input packet {:#010x}", p.word())));
        }
        let key = |q: EventPacket| (q.time(), q.neuron());
        if let Some(prev) = self.last {
            if key(prev) >= key(p) {
                return Err(Error::Routing(format!(
                    "output packet {:#010x} out of (time, group, lane) order",
                    p.word()
                )));
            }
        }
        self.last = Some(p);
        let e = p.to_event();
        self.spikes.push(e);
        if let Some(c) = self.decode.class_of(e.neuron) {
            let c = c as usize;
            match self.first[c] {
                None => {
                    self.first[c] = Some(e.time);
                    self.counts[c] = 1;
                }
                Some(t) if t == e.time => self.counts[c] += 1,
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn finish(self) -> InferenceResult {
        let (label, no_spike) = decode_grouped_ttfs(&self.first, &self.counts);
        InferenceResult { label, class_first_spikes: self.first, no_spike, output_spikes: self.spikes, counters: None }
    }
}
